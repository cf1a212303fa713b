use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hybridsearch::core::metrics::{evaluate_run, EvalOptions, Gain};
use hybridsearch::core::pipeline::{Method, PipelineConfig};
use hybridsearch::core::{DenseVec, DENSE_DIM, VOCAB_DIM};
use hybridsearch::formats::jsonl::{read_queries, QueryRecord};
use hybridsearch::formats::report::{bench_text, metrics_json, metrics_text, sweep_text};
use hybridsearch::formats::snapshot::{EncoderMode, IndexMeta};
use hybridsearch::formats::trec;
use hybridsearch::ingest::{self, IngestOptions};
use hybridsearch::runner::{self, BenchOptions};
use hybridsearch::service::{self, Overrides, ServeConfig};
use hybridsearch::store::Store;
use hybridsearch::synth::{self, SynthConfig};
use hybridsearch_core::projection::AlphaMix;
use hybridsearch_core::toy::DEFAULT_TOY_SEED;

/// Hybrid sparse/dense retrieval: ingest, search, evaluate, benchmark, serve.
#[derive(Parser)]
#[command(name = "hybridsearch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build both indices from a JSONL corpus, with checkpointing.
    Ingest(IngestArgs),
    /// Run one query and print the response.
    Search(SearchArgs),
    /// Run and score a query set, or score an existing run file.
    Eval(EvalArgs),
    /// Compare per-query latency of methods.
    Bench(BenchArgs),
    /// Evaluate b5 or b5_mmr over several alpha_query values.
    Sweep(SweepArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Write a clustered synthetic corpus, queries and qrels.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoder {
    Precomputed,
    Toy,
}

#[derive(Args)]
struct IngestArgs {
    /// JSONL corpus: {"id", "title", "abstract", "dense", "sparse"} per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Index directory (checkpoint, segment log, snapshots).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = ingest::DEFAULT_BATCH_SIZE)]
    batch_size: usize,
    #[arg(long, default_value_t = hybridsearch_core::projection::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = AlphaMix::DEFAULT_DOC)]
    alpha_doc: f64,
    #[arg(long, default_value_t = DENSE_DIM)]
    dense_dim: usize,
    #[arg(long, default_value_t = VOCAB_DIM)]
    vocab_dim: u32,
    #[arg(long, value_enum, default_value_t = Encoder::Precomputed)]
    encoder: Encoder,
    #[arg(long, default_value_t = DEFAULT_TOY_SEED)]
    toy_seed: u64,
    /// Stop after this batch number, leaving a resumable checkpoint.
    #[arg(long)]
    stop_after_batch: Option<usize>,
    /// Discard any existing checkpoint and start over.
    #[arg(long)]
    fresh: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone)]
struct Params {
    #[arg(long, default_value = "b5")]
    method: String,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    candidates_k: Option<usize>,
    #[arg(long)]
    alpha_query: Option<f64>,
    /// Dense weight for the sparse/dense methods (0 = sparse, 1 = dense).
    #[arg(long)]
    alpha_hyb: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mmr_pool: Option<usize>,
    #[arg(long)]
    rrf_k: Option<f64>,
    /// Comma-separated [dense, sparse] RRF weights.
    #[arg(long, value_delimiter = ',')]
    rrf_weights: Option<Vec<f64>>,
}

impl Params {
    fn config(&self) -> anyhow::Result<PipelineConfig> {
        let mut base = PipelineConfig::new(Method::B5);
        if let Some(k) = self.rrf_k {
            base.rrf.k = k;
        }
        if let Some(w) = &self.rrf_weights {
            base.rrf.weights = w.clone();
        }
        let overrides = Overrides {
            method: Some(self.method.clone()),
            top_k: self.top_k,
            candidates_k: self.candidates_k,
            alpha_query: self.alpha_query,
            alpha_hyb: self.alpha_hyb,
            lambda: self.lambda,
            mmr_pool: self.mmr_pool,
        };
        Ok(overrides.resolve(&base)?)
    }
}

#[derive(Args)]
struct IndexArg {
    #[arg(long, env = "HYBRIDSEARCH_INDEX")]
    index: PathBuf,
    /// Expected projection seed; refused when the index disagrees.
    #[arg(long)]
    seed: Option<u64>,
}

impl IndexArg {
    fn open(&self) -> anyhow::Result<Store> {
        Store::open(&self.index, self.seed).with_context(|| format!("opening index {}", self.index.display()))
    }
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    index: IndexArg,
    /// Query text (toy-encoder indices).
    #[arg(long, conflicts_with = "queries")]
    text: Option<String>,
    /// Query JSONL file; pick the query with --query-id.
    #[arg(long, requires = "query_id")]
    queries: Option<PathBuf>,
    #[arg(long)]
    query_id: Option<String>,
    #[command(flatten)]
    params: Params,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Score this TREC run file instead of running queries.
    #[arg(long, conflicts_with = "queries")]
    run: Option<PathBuf>,
    #[arg(long)]
    qrels: PathBuf,
    /// Index to run queries against; with --run it only supplies ILD vectors.
    #[arg(long, env = "HYBRIDSEARCH_INDEX")]
    index: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Output directory for run.txt, metrics.json and metrics.txt.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    cutoff: usize,
    /// Use 2^grade - 1 gains instead of the grade.
    #[arg(long)]
    exponential_gain: bool,
    #[command(flatten)]
    params: Params,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, env = "HYBRIDSEARCH_INDEX", required_unless_present = "synthetic_docs")]
    index: Option<PathBuf>,
    #[arg(long, requires = "index")]
    queries: Option<PathBuf>,
    /// Benchmark an in-memory synthetic corpus of this many documents.
    #[arg(long, conflicts_with = "index")]
    synthetic_docs: Option<usize>,
    #[arg(long, default_value_t = 50)]
    synthetic_queries: usize,
    #[arg(long, value_delimiter = ',', default_value = "rrf,b5")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 5)]
    warmup: usize,
    #[arg(long, default_value_t = 1)]
    rounds: usize,
    /// Also time in-process toy encoding of each query's text.
    #[arg(long)]
    with_encoding: bool,
    #[command(flatten)]
    params: Params,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    index: IndexArg,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    qrels: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.8,0.95,1.0")]
    alphas: Vec<f64>,
    #[command(flatten)]
    params: Params,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    index: IndexArg,
    #[arg(long, env = "HYBRIDSEARCH_LISTEN", default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Default search parameters; requests override them individually.
    #[command(flatten)]
    params: Params,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    docs: usize,
    #[arg(long, default_value_t = 50)]
    queries: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = DENSE_DIM)]
    dense_dim: usize,
    #[arg(long, default_value_t = VOCAB_DIM)]
    vocab_dim: u32,
}

fn print_json(v: &impl serde::Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn load_queries(path: &Path, store: &Store) -> anyhow::Result<Vec<QueryRecord>> {
    Ok(read_queries(path, store.meta.dense_dim, store.meta.vocab_dim)?)
}

fn cmd_ingest(a: IngestArgs) -> anyhow::Result<()> {
    let opts = IngestOptions {
        batch_size: a.batch_size,
        meta: IndexMeta {
            dense_dim: a.dense_dim,
            vocab_dim: a.vocab_dim,
            seed: a.seed,
            alpha_doc: a.alpha_doc,
            encoder: match a.encoder {
                Encoder::Precomputed => EncoderMode::Precomputed,
                Encoder::Toy => EncoderMode::Toy,
            },
            toy_seed: a.toy_seed,
        },
        stop_after_batch: a.stop_after_batch,
        fresh: a.fresh,
    };
    let summary = ingest::ingest(&a.corpus, &a.out, &opts)?;
    if a.json {
        return print_json(&summary);
    }
    if let Some(b) = summary.resumed_from {
        println!("resumed from batch {b}");
    }
    println!(
        "batches {}/{}  stored {}  skipped {}",
        summary.last_completed_batch,
        summary.total_batches,
        summary.stored,
        summary.skipped.len()
    );
    for s in &summary.skipped {
        println!("  skipped line {} ({}): {}", s.line, s.doc_id.as_deref().unwrap_or("?"), s.reason);
    }
    if summary.finished {
        println!("hybrid.snap sha256 {}", summary.hybrid_digest.as_deref().unwrap_or("-"));
        println!("fused.snap  sha256 {}", summary.fused_digest.as_deref().unwrap_or("-"));
    } else {
        println!("stopped early; rerun the same command to resume");
    }
    Ok(())
}

fn cmd_search(a: SearchArgs) -> anyhow::Result<()> {
    let store = a.index.open()?;
    let cfg = a.params.config()?;
    let record = match (&a.text, &a.queries) {
        (Some(text), _) => QueryRecord {
            query_id: "query".into(),
            text: text.clone(),
            dense: None,
            sparse: None,
        },
        (None, Some(path)) => {
            let id = a.query_id.as_deref().unwrap_or_default();
            load_queries(path, &store)?
                .into_iter()
                .find(|q| q.query_id == id)
                .with_context(|| format!("no query {id:?} in {}", path.display()))?
        }
        (None, None) => bail!("give --text or --queries with --query-id"),
    };
    if record.dense.is_none() && store.encoder.is_none() {
        bail!("this index was built from precomputed vectors; search with --queries/--query-id instead of --text");
    }
    let state = service::AppState::new(store, cfg.clone())?;
    let (list, timing) = state.store.searcher().run_query(&cfg, &record)?;
    let resp = service::respond(&state, &cfg, list, timing)?;
    if a.json {
        return print_json(&resp);
    }
    println!("{} ({})  total {:.3} ms  ild@10 {:.4}", cfg.method.name(), cfg.method.label(), timing.total_ms, resp.ild_at_10);
    for r in &resp.results {
        println!("{:>3}  {:.6}  {}  {}", r.rank, r.score, r.doc_id, r.title);
    }
    Ok(())
}

fn write_outputs(out: &Path, run: Option<&hybridsearch::core::metrics::RunFile>, report: &hybridsearch::core::metrics::MetricReport) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    if let Some(run) = run {
        trec::write_run(out.join("run.txt"), run)?;
    }
    std::fs::write(out.join("metrics.json"), serde_json::to_string_pretty(&metrics_json(report))? + "\n")?;
    std::fs::write(out.join("metrics.txt"), metrics_text(report))?;
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> anyhow::Result<()> {
    let qrels = trec::read_qrels(&a.qrels)?;
    let options = EvalOptions {
        cutoff: a.cutoff,
        gain: if a.exponential_gain { Gain::Exponential } else { Gain::Linear },
    };
    let (run, report, failures) = if let Some(run_path) = &a.run {
        let run = trec::read_run(run_path)?;
        let report = match &a.index {
            Some(dir) => evaluate_run(&run, &qrels, &Store::open(dir, a.seed)?.hybrid, options)?,
            None => evaluate_run(&run, &qrels, &BTreeMap::<String, DenseVec>::new(), options)?,
        };
        (None, report, Vec::new())
    } else {
        let (Some(dir), Some(qpath)) = (&a.index, &a.queries) else {
            bail!("give --run, or --index with --queries");
        };
        let store = Store::open(dir, a.seed)?;
        let queries = load_queries(qpath, &store)?;
        let cfg = a.params.config()?;
        let (batch, report) = store.searcher().evaluate(&cfg, &queries, &qrels, options)?;
        (Some(batch.run), report, batch.failures)
    };
    if let Some(out) = &a.out {
        write_outputs(out, run.as_ref(), &report)?;
    }
    for f in &failures {
        eprintln!("query {} failed: {}", f.query_id, f.error);
    }
    if a.json {
        print_json(&metrics_json(&report))
    } else {
        print!("{}", metrics_text(&report));
        Ok(())
    }
}

fn bench_opts(a: &BenchArgs) -> anyhow::Result<BenchOptions> {
    Ok(BenchOptions {
        methods: a.methods.iter().map(|m| m.parse()).collect::<Result<_, _>>()?,
        warmup: a.warmup,
        rounds: a.rounds,
        with_encoding: a.with_encoding,
    })
}

fn cmd_bench(a: BenchArgs) -> anyhow::Result<()> {
    let cfg = a.params.config()?;
    let opts = bench_opts(&a)?;
    let bench = if let Some(n) = a.synthetic_docs {
        let corpus = synth::generate(&SynthConfig {
            docs: n,
            queries: a.synthetic_queries,
            ..SynthConfig::default()
        })?;
        let meta = IngestOptions::default().meta;
        let projection = hybridsearch_core::projection::ProjectionMatrix::build(meta.seed, meta.dense_dim, meta.vocab_dim)?;
        let (built, skipped) = ingest::build_in_memory(corpus.docs, &meta, &projection)?;
        if !skipped.is_empty() {
            bail!("{} synthetic documents were skipped", skipped.len());
        }
        let store = Store::from_parts(meta, built)?;
        runner::bench(&store.searcher(), &cfg, &corpus.queries, &opts)?
    } else {
        let dir = a.index.as_ref().context("--index is required")?;
        let store = Store::open(dir, None)?;
        let qpath = a.queries.as_ref().context("--queries is required with --index")?;
        let queries = load_queries(qpath, &store)?;
        runner::bench(&store.searcher(), &cfg, &queries, &opts)?
    };
    if a.json {
        print_json(&bench)
    } else {
        print!("{}", bench_text(&bench));
        Ok(())
    }
}

fn cmd_sweep(a: SweepArgs) -> anyhow::Result<()> {
    let store = a.index.open()?;
    let queries = load_queries(&a.queries, &store)?;
    let qrels = trec::read_qrels(&a.qrels)?;
    let cfg = a.params.config()?;
    let sweep = runner::alpha_sweep(&store.searcher(), &cfg, &a.alphas, &queries, &qrels, EvalOptions::default())?;
    if a.json {
        print_json(&sweep)
    } else {
        print!("{}", sweep_text(&sweep));
        Ok(())
    }
}

fn cmd_serve(a: ServeArgs) -> anyhow::Result<()> {
    let config = ServeConfig {
        listen: a.listen,
        index_dir: a.index.index.clone(),
        seed: a.index.seed,
        defaults: a.params.config()?,
    };
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(service::serve(config))
}

fn cmd_synth(a: SynthArgs) -> anyhow::Result<()> {
    let corpus = synth::generate(&SynthConfig {
        docs: a.docs,
        queries: a.queries,
        seed: a.seed,
        dense_dim: a.dense_dim,
        vocab_dim: a.vocab_dim,
        ..SynthConfig::default()
    })?;
    corpus.write(&a.out)?;
    println!(
        "wrote {} documents, {} queries, {} judgments to {}",
        corpus.docs.len(),
        corpus.queries.len(),
        corpus.qrels.len(),
        a.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let result = match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Search(a) => cmd_search(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Serve(a) => cmd_serve(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
