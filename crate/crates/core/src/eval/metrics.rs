use std::collections::BTreeSet;
use std::ops::Index;

use super::{EvalError, Qrels, Scenario};
use crate::search::RankedList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Measure {
    Retrieved,
    Relevant,
    RelRet,
    Recall,
    Precision,
    P10,
    P20,
}

impl Measure {
    /// Report order.
    pub const ALL: [Measure; 7] = [
        Measure::Retrieved,
        Measure::Relevant,
        Measure::RelRet,
        Measure::Recall,
        Measure::Precision,
        Measure::P10,
        Measure::P20,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Retrieved => "Retrieved",
            Measure::Relevant => "Relevant",
            Measure::RelRet => "Rel_ret",
            Measure::Recall => "Recall",
            Measure::Precision => "Precision",
            Measure::P10 => "P10",
            Measure::P20 => "P20",
        }
    }

    /// Count averages rather than ratios.
    pub fn is_count(self) -> bool {
        matches!(self, Measure::Retrieved | Measure::Relevant | Measure::RelRet)
    }
}

/// One value per measure, in report order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measures<T>(pub [T; 7]);

impl<T> Index<Measure> for Measures<T> {
    type Output = T;

    fn index(&self, m: Measure) -> &T {
        &self.0[m as usize]
    }
}

impl<T: Copy> Measures<T> {
    pub fn iter(&self) -> impl Iterator<Item = (Measure, T)> + '_ {
        Measure::ALL.into_iter().map(|m| (m, self[m]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicMetrics {
    pub topic_id: String,
    pub retrieved: usize,
    pub relevant: usize,
    pub rel_ret: usize,
    /// Undefined when the topic has no relevant documents.
    pub recall: Option<f64>,
    pub precision: f64,
    pub p10: f64,
    pub p20: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_metrics(run: &RankedList, qrels: &Qrels, topic: &str) -> TopicMetrics {
    let relevant: BTreeSet<&str> = qrels.relevant(topic);
    let flags: Vec<bool> = run.doc_ids().map(|d| relevant.contains(d)).collect();
    let rel_in = |k: usize| flags.iter().take(k).filter(|&&r| r).count();
    let rel_ret = rel_in(flags.len());
    TopicMetrics {
        topic_id: topic.to_string(),
        retrieved: flags.len(),
        relevant: relevant.len(),
        rel_ret,
        recall: (!relevant.is_empty()).then(|| ratio(rel_ret, relevant.len())),
        precision: ratio(rel_ret, flags.len()),
        p10: ratio(rel_in(10), 10),
        p20: ratio(rel_in(20), 20),
    }
}

/// Macro-averages for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Averages {
    pub topics: usize,
    pub values: Measures<f64>,
    /// Topics left out of the recall average.
    pub recall_excluded: Vec<String>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn average(per_topic: &[TopicMetrics]) -> Averages {
    let m = |f: fn(&TopicMetrics) -> f64| mean(per_topic.iter().map(f));
    Averages {
        topics: per_topic.len(),
        values: Measures([
            m(|t| t.retrieved as f64),
            m(|t| t.relevant as f64),
            m(|t| t.rel_ret as f64),
            mean(per_topic.iter().filter_map(|t| t.recall)),
            m(|t| t.precision),
            m(|t| t.p10),
            m(|t| t.p20),
        ]),
        recall_excluded: per_topic
            .iter()
            .filter(|t| t.recall.is_none())
            .map(|t| t.topic_id.clone())
            .collect(),
    }
}

/// `(after - before) / before * 100` rounded to one decimal; `None` when the
/// baseline is zero.
pub fn percent_change(before: f64, after: f64) -> Option<f64> {
    if before == 0.0 {
        return None;
    }
    let rounded = ((after - before) / before * 1000.0).round() / 10.0;
    // avoid "-0.0"
    Some(if rounded == 0.0 { 0.0 } else { rounded })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub baseline: (Scenario, Averages),
    pub treatment: (Scenario, Averages),
    pub delta: Measures<Option<f64>>,
}

impl MetricsReport {
    pub fn from_averages(baseline: (Scenario, Averages), treatment: (Scenario, Averages)) -> Self {
        let a = &baseline.1.values;
        let b = &treatment.1.values;
        let delta = Measures(Measure::ALL.map(|m| percent_change(a[m], b[m])));
        MetricsReport {
            baseline,
            treatment,
            delta,
        }
    }

    /// One line per topic excluded from a recall average.
    pub fn warnings(&self) -> Vec<String> {
        [&self.baseline, &self.treatment]
            .into_iter()
            .flat_map(|(s, avg)| {
                avg.recall_excluded
                    .iter()
                    .map(move |t| format!("{s}: topic {t} has no relevant documents; excluded from recall"))
            })
            .collect()
    }
}

pub fn average_and_delta(
    baseline: (Scenario, &[TopicMetrics]),
    treatment: (Scenario, &[TopicMetrics]),
) -> Result<MetricsReport, EvalError> {
    let ids = |ms: &[TopicMetrics]| ms.iter().map(|m| m.topic_id.clone()).collect::<BTreeSet<_>>();
    if ids(baseline.1) != ids(treatment.1) || baseline.1.len() != treatment.1.len() {
        return Err(EvalError::TopicSetMismatch);
    }
    Ok(MetricsReport::from_averages(
        (baseline.0, average(baseline.1)),
        (treatment.0, average(treatment.1)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::Hit;

    fn list(ids: &[&str]) -> RankedList {
        RankedList {
            query_id: "t".into(),
            hits: ids
                .iter()
                .enumerate()
                .map(|(i, d)| Hit {
                    doc_id: d.to_string(),
                    score: (100 - i) as f64,
                })
                .collect(),
        }
    }

    #[test]
    fn ten_retrieved_four_relevant() {
        let docs: Vec<String> = (0..10).map(|i| format!("d{i}")).collect();
        let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
        let mut q = Qrels::new();
        for d in ["d0", "d3", "d5", "d9", "x1", "x2", "x3", "x4"] {
            q.insert("t", d, true);
        }
        let m = compute_metrics(&list(&refs), &q, "t");
        assert_eq!((m.retrieved, m.relevant, m.rel_ret), (10, 8, 4));
        assert_eq!(m.precision, 0.4);
        assert_eq!(m.recall, Some(0.5));
        assert_eq!(m.p10, 0.4);
        assert_eq!(m.p20, 0.2);
    }

    #[test]
    fn nothing_retrieved() {
        let mut q = Qrels::new();
        q.insert("t", "d1", true);
        let m = compute_metrics(&list(&[]), &q, "t");
        assert_eq!((m.precision, m.recall, m.p10, m.p20), (0.0, Some(0.0), 0.0, 0.0));
        let m = compute_metrics(&list(&["d1"]), &Qrels::new(), "t");
        assert_eq!(m.recall, None);
    }

    #[test]
    fn published_deltas() {
        assert_eq!(percent_change(0.3152, 0.6047), Some(91.8));
        assert_eq!(percent_change(0.2214, 0.3391), Some(53.2));
        assert_eq!(percent_change(0.1987, 0.3052), Some(53.6));
        assert_eq!(percent_change(0.1748, 0.2848), Some(62.9));
        assert_eq!(percent_change(0.0, 0.2), None);
        assert_eq!(percent_change(0.3, 0.3), Some(0.0));
        assert_eq!(percent_change(1.0, 0.9999), Some(0.0));
    }

    #[test]
    fn recall_average_skips_undefined_topics() {
        let mut q = Qrels::new();
        q.insert("a", "d1", true);
        let ms = vec![compute_metrics(&list(&["d1"]), &q, "a"), compute_metrics(&list(&["d1"]), &q, "b")];
        let avg = average(&ms);
        assert_eq!(avg.values[Measure::Recall], 1.0);
        assert_eq!(avg.values[Measure::Precision], 0.5);
        assert_eq!(avg.recall_excluded, ["b"]);
    }

    #[test]
    fn topic_sets_must_match() {
        let q = Qrels::new();
        let a = vec![compute_metrics(&list(&[]), &q, "a")];
        let b = vec![compute_metrics(&list(&[]), &q, "b")];
        assert!(matches!(
            average_and_delta((Scenario::CT, &a), (Scenario::TT, &b)),
            Err(EvalError::TopicSetMismatch)
        ));
        let r = average_and_delta((Scenario::CT, &a), (Scenario::TT, &a)).unwrap();
        assert!(r.delta.iter().all(|(_, d)| d.is_none()));
    }
}
