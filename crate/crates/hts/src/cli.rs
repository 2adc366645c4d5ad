//! Command-line interface. Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use crosswalk_core::concordance::{
    export_graph, export_skos, import_skos, write_tsv, RelationType, Store, StoreBuilder,
};
use crosswalk_core::eval::{evaluate, read_topics, render_json, render_text, Qrels, TestDesign};
use crosswalk_core::kos::VocabId;
use crosswalk_core::query::parse_query;
use crosswalk_core::search::{read_corpus, FieldScope, Index, DEFAULT_CUTOFF};

use crate::config::{load_store, Config, DataError};
use crate::service::{self, ExpandMode, ExpandRequest, ExpandResponse};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Parser)]
#[command(name = "crosswalk", version, about = "Cross-concordance lookup, query expansion and retrieval evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate mapping files (TSV or SKOS Turtle) and optionally rewrite them as TSV
    Import(ImportArgs),
    /// Relation distribution of the loaded concordances
    Stats(StatsArgs),
    /// Expand or translate a Boolean query
    Expand(ExpandArgs),
    /// Derive A->C mappings through a pivot vocabulary B
    Compose(ComposeArgs),
    /// Write one concordance as SKOS Turtle
    ExportSkos(ExportSkosArgs),
    /// Write the concordance network as Graphviz DOT
    ExportGraph(OutArgs),
    /// Index a corpus and report its size
    Index(IndexArgs),
    /// Search a corpus and print a TREC run
    Search(SearchArgs),
    /// Run a test design and write the metrics report
    Eval(EvalArgs),
    /// Start the HTTP service
    Serve(ServeArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Mapping TSV files
    #[arg(long, required = true, num_args = 1..)]
    mappings: Vec<PathBuf>,
    /// Vocabulary registry TSV; every mapped vocabulary must be listed
    #[arg(long)]
    vocabularies: Option<PathBuf>,
}

#[derive(Args)]
struct OutArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ImportArgs {
    /// Mapping TSV files
    #[arg(long, num_args = 1..)]
    mappings: Vec<PathBuf>,
    /// SKOS Turtle files
    #[arg(long, num_args = 1..)]
    skos: Vec<PathBuf>,
    #[arg(long)]
    vocabularies: Option<PathBuf>,
    /// Write the merged mappings as TSV
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Restrict to one concordance (`A->B` or `A-B`)
    #[arg(long)]
    concordance: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Append,
    Replace,
}

#[derive(Args)]
struct ExpandArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long)]
    query: String,
    /// Vocabulary of the query terms
    #[arg(long)]
    source: Option<String>,
    /// Only add concepts from these vocabularies (append mode)
    #[arg(long = "target", num_args = 1..)]
    targets: Vec<String>,
    /// Concordance for replace mode
    #[arg(long)]
    concordance: Option<String>,
    /// Print the full response as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ComposeArgs {
    #[command(flatten)]
    out: OutArgs,
    #[arg(long)]
    source: String,
    #[arg(long)]
    pivot: String,
    #[arg(long)]
    target: String,
}

#[derive(Args)]
struct ExportSkosArgs {
    #[command(flatten)]
    out: OutArgs,
    /// Required when more than one concordance is loaded
    #[arg(long)]
    concordance: Option<String>,
}

#[derive(Args)]
struct IndexArgs {
    /// Corpus in JSON Lines
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Controlled,
    FreeText,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    query: String,
    #[arg(long, value_enum, default_value = "free-text")]
    scope: ScopeArg,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: usize,
    #[arg(long, default_value = "q")]
    query_id: String,
    #[arg(long, default_value = "crosswalk")]
    run_name: String,
}

#[derive(Args)]
struct EvalArgs {
    /// 1: CT vs TT, 2: FT vs FT+TT
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    tests: u8,
    #[arg(long)]
    topics: PathBuf,
    #[arg(long)]
    qrels: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Concordance from the query vocabulary to the corpus vocabulary
    #[arg(long)]
    concordance: String,
    /// Write the JSON report here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    /// TOML configuration (default: $HTS_CONFIG)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    host: Option<String>,
    #[arg(long)]
    port: Option<u16>,
    #[arg(long, num_args = 1..)]
    mappings: Vec<PathBuf>,
    #[arg(long)]
    vocabularies: Option<PathBuf>,
}

/// A failure after argument parsing.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        Failure::Data(e.to_string())
    }
}

fn data<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Data(format!("{context}: {e}"))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(data(&path.display().to_string()))
}

fn store(args: &DataArgs) -> Result<Store, Failure> {
    Ok(load_store(&args.mappings, args.vocabularies.as_deref())?.0)
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(data(&p.display().to_string())),
        None => out.write_all(text.as_bytes()).map_err(data("stdout")),
    }
}

fn vocab(store: &Store, id: &str) -> Result<VocabId, Failure> {
    store.vocabulary(id).cloned().map_err(|e| Failure::Data(e.to_string()))
}

/// Runs the CLI with the given arguments (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_DATA
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Import(a) => import(a, out, err),
        Command::Stats(a) => stats(a, out),
        Command::Expand(a) => expand(a, out),
        Command::Compose(a) => {
            let s = store(&a.out.data)?;
            let derived = s
                .compose_pivot(&vocab(&s, &a.source)?, &vocab(&s, &a.pivot)?, &vocab(&s, &a.target)?)
                .map_err(|e| Failure::Data(e.to_string()))?;
            emit(out, a.out.out.as_deref(), &write_tsv([&derived]))
        }
        Command::ExportSkos(a) => {
            let s = store(&a.out.data)?;
            let c = match (&a.concordance, s.concordances()) {
                (Some(name), _) => {
                    let key = s.resolve_concordance(name).map_err(|e| Failure::Data(e.to_string()))?;
                    s.concordance(&key).expect("resolved")
                }
                (None, [only]) => only,
                (None, _) => return Err(Failure::Usage("--concordance is required when several are loaded".into())),
            };
            emit(out, a.out.out.as_deref(), &export_skos(c))
        }
        Command::ExportGraph(a) => emit(out, a.out.as_deref(), &export_graph(&store(&a.data)?)),
        Command::Index(a) => {
            let docs = read_corpus(open(&a.corpus)?).map_err(data(&a.corpus.display().to_string()))?;
            let index = Index::build(&docs).map_err(data(&a.corpus.display().to_string()))?;
            writeln!(out, "documents: {}\ndistinct tokens: {}", index.len(), index.distinct_tokens())
                .map_err(data("stdout"))
        }
        Command::Search(a) => {
            let docs = read_corpus(open(&a.corpus)?).map_err(data(&a.corpus.display().to_string()))?;
            let index = Index::build(&docs).map_err(data(&a.corpus.display().to_string()))?;
            let q = parse_query(&a.query).map_err(data("query"))?;
            let scope = match a.scope {
                ScopeArg::Controlled => FieldScope::ControlledOnly,
                ScopeArg::FreeText => FieldScope::FreeText,
            };
            let list = index.search(&a.query_id, &q.root, scope, a.cutoff);
            emit(out, None, &list.to_trec(&a.run_name))
        }
        Command::Eval(a) => eval(a, out, err),
        Command::Serve(a) => serve(a, err),
    }
}

fn import(a: ImportArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    if a.mappings.is_empty() && a.skos.is_empty() {
        return Err(Failure::Usage("give --mappings and/or --skos".into()));
    }
    let (tsv_store, report) = load_store(&a.mappings, a.vocabularies.as_deref())?;
    let mut builder = StoreBuilder::new();
    for c in tsv_store.concordances() {
        builder.add_concordance(c.clone());
    }
    for path in &a.skos {
        let text = std::fs::read_to_string(path).map_err(data(&path.display().to_string()))?;
        let c = import_skos(&text).map_err(data(&path.display().to_string()))?;
        builder.add_concordance(c);
    }
    let merged = builder.freeze();
    for c in &report.relevance_conflicts {
        let _ = writeln!(
            err,
            "warning: line {}: {} {} {} {} has relevances {:?}",
            c.line.map_or("-".to_string(), |l| l.to_string()),
            c.concordance,
            c.start,
            c.relation,
            c.end,
            c.relevances
        );
    }
    let summary = format!(
        "rows read: {}\nmappings: {}\nduplicates collapsed: {}\nconcordances: {}\n",
        report.rows_read,
        merged.mapping_count(),
        report.duplicates_collapsed,
        merged.concordances().len()
    );
    match &a.out {
        Some(path) => {
            emit(out, Some(path), &write_tsv(merged.concordances()))?;
            emit(out, None, &summary)
        }
        None => emit(out, None, &summary),
    }
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let s = store(&a.data)?;
    let key = a
        .concordance
        .as_deref()
        .map(|n| s.resolve_concordance(n))
        .transpose()
        .map_err(|e| Failure::Data(e.to_string()))?;
    let st = s.stats(key.as_ref()).map_err(|e| Failure::Data(e.to_string()))?;
    if a.json {
        let text = serde_json::to_string_pretty(&st).expect("stats serialize") + "\n";
        return emit(out, None, &text);
    }
    let mut text = format!(
        "mappings: {}\nstart concepts: {}\nend concepts: {}\nrelations per start concept: {:.2}\nrelation  count  fraction\n",
        st.total, st.n_start_concepts, st.n_end_concepts, st.relations_per_start
    );
    for r in RelationType::ALL {
        text.push_str(&format!("{:<8}  {:>5}  {:>8.4}\n", r.symbol(), st.relation_counts[r], st.relation_fractions[r]));
    }
    emit(out, None, &text)
}

fn expand(a: ExpandArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let s = store(&a.data)?;
    let req = ExpandRequest {
        query: a.query,
        mode: match a.mode {
            ModeArg::Append => ExpandMode::Append,
            ModeArg::Replace => ExpandMode::Replace,
        },
        source_vocab: a.source,
        target_vocabs: (!a.targets.is_empty()).then_some(a.targets),
        concordance: a.concordance,
    };
    let result = service::expand_request(&s, &req).map_err(|e| Failure::Data(e.message))?;
    let response = ExpandResponse::from(&result);
    let text = if a.json {
        serde_json::to_string_pretty(&response).expect("response serializes") + "\n"
    } else {
        response.expanded_query + "\n"
    };
    emit(out, None, &text)
}

fn eval(a: EvalArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let design: TestDesign = a.tests.to_string().parse().map_err(|e| Failure::Usage(format!("{e}")))?;
    let s = store(&a.data)?;
    let key = s.resolve_concordance(&a.concordance).map_err(|e| Failure::Data(e.to_string()))?;
    let topics = read_topics(open(&a.topics)?).map_err(data(&a.topics.display().to_string()))?;
    let qrels = Qrels::read(open(&a.qrels)?).map_err(data(&a.qrels.display().to_string()))?;
    let docs = read_corpus(open(&a.corpus)?).map_err(data(&a.corpus.display().to_string()))?;
    let index = Index::build(&docs).map_err(data(&a.corpus.display().to_string()))?;
    let report = evaluate(design, &topics, &qrels, &index, &s, Some(&key)).map_err(data("eval"))?;
    for w in report.warnings() {
        let _ = writeln!(err, "warning: {w}");
    }
    if let Some(path) = &a.out {
        emit(out, Some(path), &render_json(&report))?;
    }
    emit(out, None, &render_text(&report))
}

fn serve(a: ServeArgs, err: &mut dyn Write) -> Result<(), Failure> {
    let mut config = match &a.config {
        Some(path) => Config::load(path)?,
        None => Config::from_env()?.unwrap_or_default(),
    };
    if let Some(h) = a.host {
        config.host = h;
    }
    if let Some(p) = a.port {
        config.port = p;
    }
    if !a.mappings.is_empty() {
        config.mappings = a.mappings;
    }
    if a.vocabularies.is_some() {
        config.vocabularies = a.vocabularies;
    }
    if config.mappings.is_empty() {
        return Err(Failure::Usage("no mapping files configured".into()));
    }
    let (store, report) = config.load_store()?;
    let addr: SocketAddr = format!("{}:{}", config.host, config.port)
        .parse()
        .map_err(|e| Failure::Usage(format!("bad address: {e}")))?;
    let runtime = tokio::runtime::Runtime::new().map_err(data("runtime"))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(data(&addr.to_string()))?;
        let _ = writeln!(
            err,
            "listening on http://{} ({} mappings)",
            listener.local_addr().map_err(data("listener"))?,
            report.mappings
        );
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        service::serve(listener, Arc::new(store), shutdown)
            .await
            .map_err(data("server"))
    })
}
