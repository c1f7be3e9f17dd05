//! The `zebra-arena` command line: generate, run, score, serve.

mod options;
mod run;
mod serve;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use options::{
    parse_agent, parse_budget, parse_env, parse_pricing, read_config_file, AgentSource,
};
pub use run::{
    run_external, run_manifest, run_scripted, write_records, RunManifest, RunSummary, RECORDS_FILE,
    RUN_FILE,
};
pub use serve::{serve_listener, serve_stdio, RecordSink};

use crate::generator::{emit_dataset, DatasetConfig, GeneratorError, Manifest, DATASET_FILE};
use crate::metrics::{
    aggregate, load_records, score_episode_with, GroupKey, LogBase, MetricsError, Report,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FAULTS: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_FAULTS,
        }
    }
}

impl From<GeneratorError> for CliError {
    fn from(e: GeneratorError) -> Self {
        if e.is_config_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::IncompleteRecord(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "zebra-arena",
    version,
    about = "Partially observed Zebra puzzles with an exact query oracle"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset and its manifest from a TOML config.
    Generate(GenerateArgs),
    /// Run an agent over every puzzle of a dataset.
    Run(RunArgs),
    /// Aggregate episode records into a report.
    Score(ScoreArgs),
    /// Host episodes for external agents.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for dataset.jsonl and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnvArgs {
    /// Env type name or an EnvConfig file (TOML or JSON).
    #[arg(long)]
    pub env: Option<String>,
    /// tight | normal | relaxed [@model], or a query count.
    #[arg(long)]
    pub budget: Option<String>,
    /// Pricing condition [@scale], or FACT/RELATION prices.
    #[arg(long)]
    pub pricing: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run manifest (TOML or JSON); flags below override its fields.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Dataset file, or a directory holding dataset.jsonl.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[command(flatten)]
    pub env: EnvArgs,
    /// Agent name, agent spec file, or `external`.
    #[arg(long)]
    pub agent: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Output directory for records.jsonl and run.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Listen address in external mode.
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub listen: String,
    /// Seconds to wait for a client per episode in external mode.
    #[arg(long, default_value_t = 30)]
    pub accept_timeout: u64,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub records: PathBuf,
    /// Comma-separated keys: model, size, n_missing, env_type, condition.
    #[arg(long, default_value = "size,n_missing,env_type", value_delimiter = ',')]
    pub group_by: Vec<String>,
    /// e or 2.
    #[arg(long, default_value = "e")]
    pub log_base: String,
    /// Directory for report.csv and report.json; defaults to the records' directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// stdio or socket:PORT.
    #[arg(long, default_value = "stdio")]
    pub transport: String,
    #[command(flatten)]
    pub env: EnvArgs,
    /// Append finished episode records to this file.
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Exit after this many connections (socket transport).
    #[arg(long)]
    pub max_connections: Option<usize>,
}

/// Resolves a dataset argument that may name the file or its directory.
pub fn dataset_path(raw: &Path) -> PathBuf {
    if raw.is_dir() {
        raw.join(DATASET_FILE)
    } else {
        raw.to_path_buf()
    }
}

fn env_config(
    args: &EnvArgs,
    base: crate::environment::EnvConfig,
) -> Result<crate::environment::EnvConfig, CliError> {
    let mut cfg = match &args.env {
        Some(raw) => parse_env(raw)?,
        None => base,
    };
    if let Some(b) = &args.budget {
        cfg.budget = Some(parse_budget(b)?);
    }
    if let Some(p) = &args.pricing {
        cfg.pricing = Some(parse_pricing(p)?);
    }
    Ok(cfg)
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let config = DatasetConfig::from_toml(&text)?;
    let puzzles = config.generate()?;
    Ok(emit_dataset(&puzzles, &args.out, Some(config.seed))?)
}

pub fn cmd_run(args: &RunArgs) -> Result<RunSummary, CliError> {
    let mut manifest = match &args.manifest {
        Some(path) => read_config_file::<RunManifest>(path)?,
        None => RunManifest::default(),
    };
    if let Some(d) = &args.dataset {
        manifest.dataset = d.clone();
    }
    if let Some(o) = &args.out {
        manifest.out = o.clone();
    }
    manifest.env = env_config(&args.env, manifest.env.clone())?;
    match (&args.agent, &mut manifest.agent) {
        (Some(raw), _) if raw.eq_ignore_ascii_case("external") => {
            manifest.agent = AgentSource::External {
                listen: args.listen.clone(),
                accept_timeout_secs: args.accept_timeout,
            };
        }
        (Some(raw), _) => manifest.agent = AgentSource::Scripted(parse_agent(raw, args.seed)?),
        (None, AgentSource::Scripted(spec)) => {
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
        }
        (None, AgentSource::External { .. }) => {}
    }
    if manifest.dataset.as_os_str().is_empty() {
        return Err(CliError::Config(
            "run needs --dataset or a manifest naming one".into(),
        ));
    }
    if manifest.out.as_os_str().is_empty() {
        return Err(CliError::Config(
            "run needs --out or a manifest naming one".into(),
        ));
    }
    run_manifest(&manifest, args.jobs)
}

pub fn parse_log_base(raw: &str) -> Result<LogBase, CliError> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "e" | "ln" | "nat" => Ok(LogBase::E),
        "2" | "bits" => Ok(LogBase::Two),
        other => Err(CliError::Config(format!(
            "--log-base {other:?} (expected e or 2)"
        ))),
    }
}

/// Scores, aggregates and writes `report.csv` and `report.json`.
pub fn cmd_score(args: &ScoreArgs) -> Result<Report, CliError> {
    let keys = args
        .group_by
        .iter()
        .map(|k| k.parse::<GroupKey>())
        .collect::<Result<Vec<_>, _>>()?;
    let base = parse_log_base(&args.log_base)?;
    let path = if args.records.is_dir() {
        args.records.join(RECORDS_FILE)
    } else {
        args.records.clone()
    };
    let records = load_records(&path)?;
    let metrics = records
        .iter()
        .map(|r| score_episode_with(r, base))
        .collect::<Result<Vec<_>, _>>()?;
    let report = aggregate(&metrics, &keys, base)?;

    let out = match &args.out {
        Some(o) => o.clone(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let io = |e: std::io::Error| CliError::Runtime(format!("{}: {e}", out.display()));
    fs::create_dir_all(&out).map_err(io)?;
    let csv_file = fs::File::create(out.join("report.csv")).map_err(io)?;
    report
        .write_delimited(csv_file, b',')
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    json.push('\n');
    fs::write(out.join("report.json"), json).map_err(io)?;
    Ok(report)
}

pub fn cmd_serve(args: &ServeArgs) -> Result<(), CliError> {
    let puzzles = run::load_puzzle_map(&dataset_path(&args.dataset))?;
    let env = env_config(&args.env, Default::default())?;
    let sink = match &args.records {
        Some(p) => Some(
            RecordSink::append(p)
                .map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    match args.transport.trim() {
        "stdio" => {
            let stdin = std::io::stdin();
            let stdout = std::io::stdout();
            serve_stdio(
                &mut stdin.lock(),
                &mut stdout.lock(),
                &puzzles,
                &env,
                sink.as_ref(),
            )
            .map_err(|e| CliError::Runtime(e.to_string()))?;
            Ok(())
        }
        t => {
            let port: u16 = t
                .strip_prefix("socket:")
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| {
                    CliError::Config(format!("--transport {t:?} (expected stdio or socket:PORT)"))
                })?;
            let listener = std::net::TcpListener::bind(("127.0.0.1", port))
                .map_err(|e| CliError::Runtime(format!("bind 127.0.0.1:{port}: {e}")))?;
            if let Ok(addr) = listener.local_addr() {
                eprintln!("listening on {addr}");
            }
            serve_listener(listener, puzzles, env, args.max_connections, sink)
                .map_err(|e| CliError::Runtime(e.to_string()))
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a).map(|manifest| {
            println!("wrote {} puzzles to {}", manifest.total, a.out.display());
            for cell in &manifest.cells {
                println!("  {} M{}: {}", cell.size, cell.n_missing, cell.count);
            }
        }),
        Command::Run(a) => cmd_run(a).and_then(|s| {
            println!(
                "{} episodes, {} solved, {} faults; records in {}",
                s.episodes,
                s.solved,
                s.faults.len(),
                s.records.display()
            );
            for (id, fault) in &s.faults {
                eprintln!("fault {id}: {fault}");
            }
            if s.faults.is_empty() {
                Ok(())
            } else {
                Err(CliError::Runtime(format!(
                    "{} episodes faulted",
                    s.faults.len()
                )))
            }
        }),
        Command::Score(a) => cmd_score(a).map(|report| print!("{}", report.to_text())),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
