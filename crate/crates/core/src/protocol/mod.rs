//! Agent message contract, episode loop and wire framing.

mod episode;
mod message;
mod prompt;
mod wire;

pub use episode::{
    run_episode, Agent, AgentFault, AgentReply, AgentView, Episode, EpisodeRecord, TurnRecord,
};
pub use message::{parse_agent_message, AgentMessage, ProtocolViolation};
pub use prompt::{base_template, render_puzzle_text, render_system_prompt};
pub use wire::{read_line, serve_connection, write_record, ClientRecord, ServerRecord};
