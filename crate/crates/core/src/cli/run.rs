use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dataset_path, AgentSource, CliError};
use crate::agents::{AgentKind, AgentSpec};
use crate::environment::{EnvConfig, Session};
use crate::generator::load_dataset;
use crate::protocol::{run_episode, serve_connection, Episode, EpisodeRecord};
use crate::puzzle::Puzzle;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const RUN_FILE: &str = "run.json";

/// Everything a run depends on; written next to its records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    #[serde(default)]
    pub dataset: PathBuf,
    #[serde(default)]
    pub env: EnvConfig,
    #[serde(default = "default_agent")]
    pub agent: AgentSource,
    #[serde(default)]
    pub out: PathBuf,
}

fn default_agent() -> AgentSource {
    AgentSource::Scripted(AgentSpec::new(AgentKind::GreedyIg))
}

impl Default for RunManifest {
    fn default() -> Self {
        RunManifest {
            dataset: PathBuf::new(),
            env: EnvConfig::default(),
            agent: default_agent(),
            out: PathBuf::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub episodes: usize,
    pub solved: usize,
    /// `(puzzle id, fault)` per faulted episode.
    pub faults: Vec<(String, String)>,
    pub records: PathBuf,
}

pub(crate) fn load_puzzle_map(path: &Path) -> Result<BTreeMap<String, Arc<Puzzle>>, CliError> {
    if !path.is_file() {
        return Err(CliError::Config(format!(
            "dataset {} does not exist",
            path.display()
        )));
    }
    let puzzles = load_dataset(path).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(puzzles
        .into_iter()
        .map(|p| (p.id.clone(), Arc::new(p)))
        .collect())
}

/// Checks that every puzzle accepts the env config (budget levels and
/// pricing conditions resolve) before any episode starts.
fn check_env(puzzles: &BTreeMap<String, Arc<Puzzle>>, env: &EnvConfig) -> Result<(), CliError> {
    for p in puzzles.values() {
        Session::new(Arc::clone(p), env.clone())
            .map_err(|e| CliError::Config(format!("{}: {e}", p.id)))?;
    }
    Ok(())
}

fn faulted(
    puzzle: &Arc<Puzzle>,
    env: &EnvConfig,
    agent: &str,
    detail: String,
) -> Result<EpisodeRecord, CliError> {
    let mut episode = Episode::start(Arc::clone(puzzle), env, agent)
        .map_err(|e| CliError::Config(format!("{}: {e}", puzzle.id)))?;
    episode.fault(detail);
    Ok(episode.into_record())
}

/// Runs a scripted agent over every puzzle, in puzzle-id order.
pub fn run_scripted(
    puzzles: &BTreeMap<String, Arc<Puzzle>>,
    env: &EnvConfig,
    spec: &AgentSpec,
    jobs: usize,
) -> Result<Vec<EpisodeRecord>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let list: Vec<&Arc<Puzzle>> = puzzles.values().collect();
    pool.install(|| {
        list.par_iter()
            .map(|p| match spec.build(p) {
                Ok(mut agent) => run_episode(agent.as_mut(), Arc::clone(p), env)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.id))),
                Err(fault) => faulted(p, env, spec.kind.as_str(), fault.0),
            })
            .collect()
    })
}

/// Serves each puzzle in turn to one client connection on `listener`; an
/// episode with no client within `timeout` is recorded as a fault.
pub fn run_external(
    puzzles: &BTreeMap<String, Arc<Puzzle>>,
    env: &EnvConfig,
    listener: &TcpListener,
    timeout: Duration,
) -> Result<Vec<EpisodeRecord>, CliError> {
    let rt = |e: io::Error| CliError::Runtime(e.to_string());
    listener.set_nonblocking(true).map_err(rt)?;
    let mut records = Vec::with_capacity(puzzles.len());
    for (id, puzzle) in puzzles {
        let deadline = Instant::now() + timeout;
        let stream = loop {
            match listener.accept() {
                Ok((s, _)) => break Some(s),
                Err(e) if e.kind() == io::ErrorKind::WouldBlock => {
                    if Instant::now() >= deadline {
                        break None;
                    }
                    thread::sleep(Duration::from_millis(10));
                }
                Err(e) => return Err(rt(e)),
            }
        };
        let Some(stream) = stream else {
            records.push(faulted(
                puzzle,
                env,
                "external",
                format!("no client connected within {}s", timeout.as_secs_f64()),
            )?);
            continue;
        };
        stream.set_nonblocking(false).map_err(rt)?;
        let mut reader = BufReader::new(stream.try_clone().map_err(rt)?);
        let mut writer = BufWriter::new(stream);
        let single = BTreeMap::from([(id.clone(), Arc::clone(puzzle))]);
        let record = match serve_connection(&mut reader, &mut writer, &single, env) {
            Ok(Some(r)) => r,
            Ok(None) => faulted(puzzle, env, "external", "client init rejected".into())?,
            Err(e) => faulted(puzzle, env, "external", format!("transport error: {e}"))?,
        };
        let _ = writer.flush();
        records.push(record);
    }
    Ok(records)
}

/// One record per line, compact JSON.
pub fn write_records(path: &Path, records: &[EpisodeRecord]) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Executes a manifest and writes `records.jsonl` and `run.json` into its output dir.
pub fn run_manifest(manifest: &RunManifest, jobs: usize) -> Result<RunSummary, CliError> {
    let puzzles = load_puzzle_map(&dataset_path(&manifest.dataset))?;
    check_env(&puzzles, &manifest.env)?;
    let records = match &manifest.agent {
        AgentSource::Scripted(spec) => {
            spec.validate().map_err(CliError::Config)?;
            run_scripted(&puzzles, &manifest.env, spec, jobs)?
        }
        AgentSource::External {
            listen,
            accept_timeout_secs,
        } => {
            let addr: SocketAddr = listen
                .parse()
                .map_err(|e| CliError::Config(format!("listen address {listen:?}: {e}")))?;
            let listener = TcpListener::bind(addr)
                .map_err(|e| CliError::Runtime(format!("bind {addr}: {e}")))?;
            if let Ok(local) = listener.local_addr() {
                eprintln!("listening on {local}");
            }
            run_external(
                &puzzles,
                &manifest.env,
                &listener,
                Duration::from_secs(*accept_timeout_secs),
            )?
        }
    };
    let io = |e: io::Error| CliError::Runtime(format!("{}: {e}", manifest.out.display()));
    fs::create_dir_all(&manifest.out).map_err(io)?;
    let path = manifest.out.join(RECORDS_FILE);
    write_records(&path, &records).map_err(io)?;
    let mut json =
        serde_json::to_string_pretty(manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    json.push('\n');
    fs::write(manifest.out.join(RUN_FILE), json).map_err(io)?;
    Ok(RunSummary {
        episodes: records.len(),
        solved: records.iter().filter(|r| r.accuracy == 1).count(),
        faults: records
            .iter()
            .filter_map(|r| r.fault.clone().map(|f| (r.puzzle_id.clone(), f)))
            .collect(),
        records: path,
    })
}
