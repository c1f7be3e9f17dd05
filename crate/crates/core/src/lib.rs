//! Partially observed Zebra puzzles: generation, an exact query oracle,
//! scripted reference agents and tool-use metrics.

pub mod agents;
pub mod cli;
pub mod environment;
pub mod fixtures;
pub mod generator;
pub mod metrics;
pub mod protocol;
pub mod puzzle;
pub mod solver;
pub mod token;
