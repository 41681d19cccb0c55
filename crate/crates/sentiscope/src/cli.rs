//! Operator commands: `index`, `query`, `serve`, `report`.
//!
//! Exit status is 0 on success, 1 for usage errors and 2 for data errors.
//! Diagnostics go to stderr, data to stdout.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use sentiscope_core::facets::{AttributeSummary, SentimentRect};
use sentiscope_core::index::Bm25Params;
use serde::Deserialize;

use crate::corpus_io::load_corpus;
use crate::engine::{Engine, DEFAULT_BINS};
use crate::event_log::{read_log, EventLogFile};
use crate::index_cache;
use crate::report::{render_report, ReportError, ReportKind};
use crate::service::{handle_search, serve, AppState, SearchParams};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "sentiscope", version, about = "Sentiment-faceted exploratory search")]
pub struct Cli {
    #[command(flatten)]
    pub options: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Optional TOML file providing defaults for the flags below.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Line-delimited corpus file.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Tab-separated raw_label -> display_label map.
    #[arg(long, global = true)]
    pub category_map: Option<PathBuf>,
    /// Session event log.
    #[arg(long, global = true)]
    pub log: Option<PathBuf>,
    /// Index cache file (defaults to `<corpus>.idx`).
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true)]
    pub k1: Option<f64>,
    #[arg(long, global = true)]
    pub b: Option<f64>,
    /// Histogram bins for distribution summaries.
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    /// Address for `serve`.
    #[arg(long, global = true)]
    pub listen: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the index cache and print corpus statistics.
    Index,
    /// Run a ranked query, optionally under a sentiment rectangle.
    Query(QueryArgs),
    /// Serve the HTTP API.
    Serve,
    /// Print the treatment or taxonomy report for an event log.
    Report {
        /// `treatment` or `taxonomy`.
        kind: ReportKind,
    },
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Query text.
    #[arg(required = true)]
    pub query: Vec<String>,
    #[arg(long)]
    pub pos_min: Option<f64>,
    #[arg(long)]
    pub pos_max: Option<f64>,
    #[arg(long)]
    pub neg_min: Option<f64>,
    #[arg(long)]
    pub neg_max: Option<f64>,
    #[arg(long)]
    pub limit: Option<usize>,
    /// Print the response document instead of a table.
    #[arg(long)]
    pub json: bool,
}

/// Options after merging the config file under the command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub corpus_path: Option<PathBuf>,
    pub category_map_path: Option<PathBuf>,
    pub log_path: Option<PathBuf>,
    pub cache_path: Option<PathBuf>,
    pub params: Bm25Params,
    pub listen_address: String,
    pub bin_count: usize,
}

impl CliConfig {
    pub fn resolve(flags: &Options) -> anyhow::Result<Self> {
        let file = match &flags.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
                toml::from_str::<Options>(&text).with_context(|| format!("invalid config {}", path.display()))?
            }
            None => Options::default(),
        };
        let defaults = Bm25Params::default();
        let params = Bm25Params::new(
            flags.k1.or(file.k1).unwrap_or(defaults.k1),
            flags.b.or(file.b).unwrap_or(defaults.b),
        )
        .map_err(|e| anyhow!("{e}"))?;
        let bin_count = flags.bins.or(file.bins).unwrap_or(DEFAULT_BINS);
        if bin_count == 0 {
            bail!("--bins must be at least 1");
        }
        Ok(CliConfig {
            corpus_path: flags.corpus.clone().or(file.corpus),
            category_map_path: flags.category_map.clone().or(file.category_map),
            log_path: flags.log.clone().or(file.log),
            cache_path: flags.cache.clone().or(file.cache),
            params,
            listen_address: flags
                .listen
                .clone()
                .or(file.listen)
                .unwrap_or_else(|| "127.0.0.1:8080".into()),
            bin_count,
        })
    }

    fn corpus(&self) -> anyhow::Result<&Path> {
        self.corpus_path
            .as_deref()
            .ok_or_else(|| anyhow!("--corpus is required"))
    }

    fn log(&self) -> anyhow::Result<&Path> {
        self.log_path.as_deref().ok_or_else(|| anyhow!("--log is required"))
    }

    fn cache(&self) -> anyhow::Result<PathBuf> {
        Ok(match &self.cache_path {
            Some(p) => p.clone(),
            None => index_cache::default_cache_path(self.corpus()?),
        })
    }
}

/// Failure split by exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
        }
    }
}

fn data(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Data(e.into())
}

fn load_engine(config: &CliConfig, write_cache: bool) -> Result<Engine, Failure> {
    let corpus_path = config.corpus().map_err(Failure::Usage)?;
    let loaded = load_corpus(corpus_path, config.category_map_path.as_deref()).map_err(data)?;
    for rejection in &loaded.report.rejected {
        eprintln!("warning: {}: {rejection}", corpus_path.display());
    }
    let cache = config.cache().map_err(Failure::Usage)?;
    let (index, hit) =
        index_cache::load_or_build(&cache, corpus_path, &loaded.corpus).map_err(|e| data(anyhow!("{e}")))?;
    if write_cache && !hit {
        index_cache::store(&cache, corpus_path, &index)
            .with_context(|| format!("cannot write index cache {}", cache.display()))
            .map_err(Failure::Data)?;
    }
    Ok(Engine::new(loaded.corpus, index, config.params, config.bin_count))
}

fn write_summary(out: &mut impl Write, name: &str, s: &AttributeSummary) -> std::io::Result<()> {
    writeln!(out, "{name}: {:.2} ± {:.2}", s.mean, s.stddev)?;
    let last = s.counts.len() - 1;
    for (i, count) in s.counts.iter().enumerate() {
        let close = if i == last { ']' } else { ')' };
        writeln!(
            out,
            "  [{:.2}, {:.2}{close} {count}",
            s.bin_edges[i],
            s.bin_edges[i + 1]
        )?;
    }
    Ok(())
}

pub fn cmd_index(config: &CliConfig, out: &mut impl Write) -> Result<(), Failure> {
    let engine = load_engine(config, true)?;
    let stats = engine.corpus_stats();
    let io = |e: std::io::Error| data(e);
    writeln!(out, "{} documents", engine.corpus().len()).map_err(io)?;
    write_summary(out, "positivity", &stats.positivity).map_err(io)?;
    write_summary(out, "negativity", &stats.negativity).map_err(io)?;
    writeln!(
        out,
        "index: {} terms, average length {:.2} tokens",
        engine.index().terms().count(),
        engine.index().avg_doc_length()
    )
    .map_err(io)?;
    Ok(())
}

pub fn cmd_query(config: &CliConfig, args: &QueryArgs, out: &mut impl Write) -> Result<(), Failure> {
    let engine = load_engine(config, false)?;
    let params = SearchParams {
        q: args.query.join(" "),
        pos_min: args.pos_min,
        pos_max: args.pos_max,
        neg_min: args.neg_min,
        neg_max: args.neg_max,
        limit: args.limit,
    };
    let response = handle_search(&engine, &params).map_err(|e| data(anyhow!("{}", e.message)))?;
    let io = |e: std::io::Error| data(e);
    if args.json {
        let text = serde_json::to_string_pretty(&response).map_err(data)?;
        writeln!(out, "{text}").map_err(io)?;
        return Ok(());
    }
    let focused = response.hits.iter().filter(|h| h.in_focus).count();
    let SentimentRect {
        pos_min,
        pos_max,
        neg_min,
        neg_max,
    } = response.active_rect;
    writeln!(
        out,
        "{} results ({} matching, {focused} in focus; positivity [{pos_min:.2}, {pos_max:.2}], negativity [{neg_min:.2}, {neg_max:.2}])",
        response.hits.len(),
        response.total_matches,
    )
    .map_err(io)?;
    if response.hits.is_empty() {
        return Ok(());
    }
    writeln!(
        out,
        "{:>4}  {:<24} {:>8}  {:>5}  {:>5}  {:<16} focus",
        "rank", "doc_id", "score", "pos", "neg", "category"
    )
    .map_err(io)?;
    for (i, hit) in response.hits.iter().enumerate() {
        writeln!(
            out,
            "{:>4}  {:<24} {:>8.4}  {:>5.2}  {:>5.2}  {:<16} {}",
            i + 1,
            hit.doc_id,
            hit.bm25_score,
            hit.positivity,
            hit.negativity,
            hit.display_category,
            if hit.in_focus { "in" } else { "out" }
        )
        .map_err(io)?;
    }
    Ok(())
}

pub fn cmd_report(config: &CliConfig, kind: ReportKind, out: &mut impl Write) -> Result<(), Failure> {
    let log_path = config.log().map_err(Failure::Usage)?;
    let read = read_log(log_path).map_err(data)?;
    if read.torn_tail {
        eprintln!("warning: {}: ignoring torn final line", log_path.display());
    }
    let set = read.log.all_metrics();
    for key in &set.incomplete {
        eprintln!("warning: incomplete stream {key} ignored");
    }
    let text = render_report(kind, &set.metrics).map_err(|e| match e {
        ReportError::NoData => data(anyhow!("no complete streams in {}", log_path.display())),
        other => data(other),
    })?;
    out.write_all(text.as_bytes()).map_err(data)?;
    Ok(())
}

pub fn cmd_serve(config: &CliConfig) -> Result<(), Failure> {
    let engine = load_engine(config, false)?;
    let log_path = config.log().map_err(Failure::Usage)?;
    let log = EventLogFile::open(log_path).map_err(data)?;
    let state = Arc::new(AppState {
        engine,
        log: Mutex::new(log),
    });
    let runtime = tokio::runtime::Runtime::new().map_err(data)?;
    runtime
        .block_on(serve(state, &config.listen_address))
        .with_context(|| format!("cannot serve on {}", config.listen_address))
        .map_err(Failure::Data)
}

pub fn execute(cli: &Cli, out: &mut impl Write) -> Result<(), Failure> {
    let config = CliConfig::resolve(&cli.options).map_err(Failure::Usage)?;
    match &cli.command {
        Command::Index => cmd_index(&config, out),
        Command::Query(args) => cmd_query(&config, args, out),
        Command::Serve => cmd_serve(&config),
        Command::Report { kind } => cmd_report(&config, *kind, out),
    }
}

pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let code = failure.exit_code();
            let (Failure::Usage(e) | Failure::Data(e)) = failure;
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
