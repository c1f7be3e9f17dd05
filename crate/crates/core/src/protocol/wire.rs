//! Newline-delimited records exchanged with external agents.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::episode::{Episode, EpisodeRecord};
use crate::environment::{
    EnvConfig, EnvResponse, EnvType, Pricing, SessionStatus, PROTOCOL_VERSION,
};
use crate::puzzle::Puzzle;

/// Records sent by the agent side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientRecord {
    Init {
        puzzle_id: String,
        /// Replaces the server's default environment config for this episode.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        env: Option<EnvConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        agent: Option<String>,
    },
    AgentMsg {
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reasoning_tokens: Option<u64>,
    },
}

/// Records sent by the environment side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerRecord {
    Init {
        protocol_version: u32,
        puzzle_id: String,
        system_prompt: String,
        puzzle_text: String,
        visible_clues: Vec<String>,
        env_type: EnvType,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pricing: Option<Pricing>,
        max_turns: usize,
    },
    EnvMsg {
        response: EnvResponse,
        text: String,
    },
    Final {
        status: SessionStatus,
        accuracy: u8,
        record: Box<EpisodeRecord>,
    },
    Error {
        protocol_version: u32,
        error_code: String,
        detail: String,
    },
}

impl ServerRecord {
    fn error(code: &str, detail: impl Into<String>) -> Self {
        ServerRecord::Error {
            protocol_version: PROTOCOL_VERSION,
            error_code: code.to_string(),
            detail: detail.into(),
        }
    }
}

pub fn write_record<W: Write, T: Serialize>(w: &mut W, record: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *w, record)?;
    w.write_all(b"\n")?;
    w.flush()
}

/// Reads one non-empty line; `None` on end of stream.
pub fn read_line<R: BufRead>(r: &mut R) -> io::Result<Option<String>> {
    let mut line = String::new();
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if !trimmed.trim().is_empty() {
            return Ok(Some(trimmed.to_string()));
        }
    }
}

/// Serves one episode over a connection.
///
/// Returns the finished record, or `None` when the init record was rejected
/// and no session was opened.
pub fn serve_connection<R: BufRead, W: Write>(
    reader: &mut R,
    writer: &mut W,
    puzzles: &BTreeMap<String, Arc<Puzzle>>,
    defaults: &EnvConfig,
) -> io::Result<Option<EpisodeRecord>> {
    let Some(first) = read_line(reader)? else {
        return Ok(None);
    };
    let (puzzle_id, env, agent) = match serde_json::from_str::<ClientRecord>(&first) {
        Ok(ClientRecord::Init {
            puzzle_id,
            env,
            agent,
        }) => (puzzle_id, env, agent),
        Ok(ClientRecord::AgentMsg { .. }) => {
            write_record(
                writer,
                &ServerRecord::error("MalformedInit", "first record must be init"),
            )?;
            return Ok(None);
        }
        Err(e) => {
            write_record(writer, &ServerRecord::error("MalformedInit", e.to_string()))?;
            return Ok(None);
        }
    };
    // An empty id picks the puzzle when exactly one is offered.
    let offered = match (puzzle_id.is_empty(), puzzles.len()) {
        (true, 1) => puzzles.values().next(),
        _ => puzzles.get(&puzzle_id),
    };
    let Some(puzzle) = offered else {
        write_record(
            writer,
            &ServerRecord::error("UnknownPuzzle", format!("no puzzle {puzzle_id:?}")),
        )?;
        return Ok(None);
    };
    let config = env.unwrap_or_else(|| defaults.clone());
    let mut episode = match Episode::start(
        Arc::clone(puzzle),
        &config,
        agent.unwrap_or_else(|| "external".into()),
    ) {
        Ok(e) => e,
        Err(e) => {
            write_record(
                writer,
                &ServerRecord::error("ConfigMismatch", e.to_string()),
            )?;
            return Ok(None);
        }
    };
    write_record(
        writer,
        &ServerRecord::Init {
            protocol_version: PROTOCOL_VERSION,
            puzzle_id: puzzle.id.clone(),
            system_prompt: episode.system_prompt().to_string(),
            puzzle_text: episode.puzzle_text().to_string(),
            visible_clues: puzzle
                .visible_clues()
                .iter()
                .map(|c| c.text.clone())
                .collect(),
            env_type: config.env_type,
            budget: episode.session().budget_limit(),
            pricing: config.pricing.clone(),
            max_turns: config.max_turns,
        },
    )?;

    while episode.is_running() {
        let line = match read_line(reader) {
            Ok(Some(line)) => line,
            Ok(None) => {
                episode.fault("client disconnected");
                break;
            }
            Err(e) => {
                episode.fault(format!("transport error: {e}"));
                break;
            }
        };
        match serde_json::from_str::<ClientRecord>(&line) {
            Ok(ClientRecord::AgentMsg {
                text,
                reasoning_tokens,
            }) => {
                let turn = episode
                    .submit(&text, reasoning_tokens)
                    .map_err(|e| io::Error::other(e.to_string()))?;
                let msg = ServerRecord::EnvMsg {
                    text: turn.response.render_text(),
                    response: turn.response.clone(),
                };
                write_record(writer, &msg)?;
            }
            Ok(ClientRecord::Init { .. }) => {
                episode.fault("unexpected init record mid-episode");
            }
            Err(e) => {
                episode.fault(format!("malformed client record: {e}"));
            }
        }
    }

    let record = episode.into_record();
    // The peer may already be gone; the record is still returned.
    let _ = write_record(
        writer,
        &ServerRecord::Final {
            status: record.status,
            accuracy: record.accuracy,
            record: Box::new(record.clone()),
        },
    );
    Ok(Some(record))
}
