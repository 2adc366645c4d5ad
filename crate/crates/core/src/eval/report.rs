use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use super::metrics::{Measure, Measures, MetricsReport};

fn cell(measure: Measure, value: f64) -> String {
    if measure.is_count() {
        format!("{value:.1}")
    } else {
        format!("{value:.4}")
    }
}

fn delta_cell(delta: Option<f64>) -> String {
    delta.map_or_else(|| "n/a".to_string(), |d| format!("{d:.1}%"))
}

/// Aligned table: header, the two scenario rows, then the delta row.
pub fn render_text(report: &MetricsReport) -> String {
    let mut rows: Vec<Vec<String>> = Vec::new();
    rows.push(std::iter::once("Scenario".to_string()).chain(Measure::ALL.map(|m| m.name().to_string())).collect());
    for (scenario, avg) in [&report.baseline, &report.treatment] {
        rows.push(
            std::iter::once(scenario.label().to_string())
                .chain(avg.values.iter().map(|(m, v)| cell(m, v)))
                .collect(),
        );
    }
    rows.push(
        std::iter::once("Delta".to_string())
            .chain(report.delta.iter().map(|(_, d)| delta_cell(d)))
            .collect(),
    );

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (text, &w))| if i == 0 { format!("{text:<w$}") } else { format!("{text:>w$}") })
            .collect();
        out.push_str(&line.join("  "));
        out.push('\n');
    }
    out
}

struct MeasureMap<'a, T>(&'a Measures<T>);

impl<T: Copy + Serialize> Serialize for MeasureMap<'_, T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(7))?;
        for (m, v) in self.0.iter() {
            map.serialize_entry(m.name(), &v)?;
        }
        map.end()
    }
}

struct ReportJson<'a>(&'a MetricsReport);

impl Serialize for ReportJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let r = self.0;
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry(r.baseline.0.name(), &MeasureMap(&r.baseline.1.values))?;
        map.serialize_entry(r.treatment.0.name(), &MeasureMap(&r.treatment.1.values))?;
        map.serialize_entry("delta", &MeasureMap(&r.delta))?;
        map.end()
    }
}

/// `{scenario: {measure: value}, "delta": {measure: value|null}}` with
/// full-precision values, measures in report order.
pub fn render_json(report: &MetricsReport) -> String {
    let mut out = serde_json::to_string_pretty(&ReportJson(report)).expect("report serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{Averages, Scenario};

    fn averages(values: [f64; 7]) -> Averages {
        Averages {
            topics: 13,
            values: Measures(values),
            recall_excluded: Vec::new(),
        }
    }

    fn sample_report() -> MetricsReport {
        MetricsReport::from_averages(
            (Scenario::CT, averages([156.5, 144.8, 42.0, 0.3152, 0.2214, 0.1987, 0.1748])),
            (Scenario::TT, averages([325.4, 144.8, 88.2, 0.6047, 0.3391, 0.3052, 0.2848])),
        )
    }

    #[test]
    fn text_table_has_three_body_lines() {
        let text = render_text(&sample_report());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("Scenario"));
        assert!(lines[1].starts_with("CT "));
        assert!(lines[2].starts_with("TT "));
        assert!(lines[3].starts_with("Delta"));
        for d in ["91.8%", "53.2%", "53.6%", "62.9%", "0.0%"] {
            assert!(lines[3].contains(d), "{d} missing from {}", lines[3]);
        }
    }

    #[test]
    fn zero_baseline_prints_na() {
        let r = MetricsReport::from_averages(
            (Scenario::FT, averages([0.0; 7])),
            (Scenario::FT_TT, averages([1.0; 7])),
        );
        assert!(render_text(&r).lines().nth(3).unwrap().contains("n/a"));
        assert!(render_text(&r).lines().nth(2).unwrap().starts_with("FT+TT"));
        let json: serde_json::Value = serde_json::from_str(&render_json(&r)).unwrap();
        assert!(json["delta"]["Recall"].is_null());
        assert_eq!(json["FT_TT"]["P10"], 1.0);
    }

    #[test]
    fn json_keeps_measure_order() {
        let json = render_json(&sample_report());
        let positions: Vec<usize> = Measure::ALL.iter().map(|m| json.find(&format!("\"{}\"", m.name())).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["delta"]["Recall"], 91.8);
        assert_eq!(v["CT"]["Recall"], 0.3152);
    }
}
