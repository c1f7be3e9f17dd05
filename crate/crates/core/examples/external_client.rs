//! Hosts a socket server and drives one episode from a client thread using the
//! newline-delimited JSON records an external agent would send.
//!
//! The client plays the oracle's moves, standing in for a model.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use zebra_arena::agents::{AgentKind, AgentSpec};
use zebra_arena::cli::serve_listener;
use zebra_arena::environment::EnvConfig;
use zebra_arena::generator::{generate_puzzle, GeneratorConfig, SizePreset};
use zebra_arena::protocol::{run_episode, ClientRecord, ServerRecord};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let puzzle = Arc::new(generate_puzzle(
        &GeneratorConfig::preset(SizePreset::Small, 2, 42),
        "small-42",
    )?);
    let env = EnvConfig::default();

    // The moves the client will send.
    let mut oracle = AgentSpec::new(AgentKind::CheatingOracle).build(&puzzle)?;
    let script: Vec<String> = run_episode(oracle.as_mut(), Arc::clone(&puzzle), &env)?
        .turns
        .into_iter()
        .map(|t| t.message)
        .collect();

    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    let puzzles = BTreeMap::from([(puzzle.id.clone(), Arc::clone(&puzzle))]);
    let server = thread::spawn(move || serve_listener(listener, puzzles, env, Some(1), None));

    let stream = TcpStream::connect(addr)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = stream;
    let mut send = |record: &ClientRecord| -> std::io::Result<()> {
        let line = serde_json::to_string(record)?;
        println!(">> {line}");
        writeln!(writer, "{line}")
    };
    let mut recv = || -> Result<ServerRecord, Box<dyn std::error::Error>> {
        let mut line = String::new();
        reader.read_line(&mut line)?;
        Ok(serde_json::from_str(&line)?)
    };

    send(&ClientRecord::Init {
        puzzle_id: puzzle.id.clone(),
        env: None,
        agent: Some("example-client".into()),
    })?;
    if let ServerRecord::Init {
        visible_clues,
        budget,
        ..
    } = recv()?
    {
        println!(
            "<< init: {} visible clues, budget {budget:?}",
            visible_clues.len()
        );
    }
    for text in script {
        send(&ClientRecord::AgentMsg {
            text,
            reasoning_tokens: None,
        })?;
        if let ServerRecord::EnvMsg { text, .. } = recv()? {
            println!("<< {}", text.replace('\n', " "));
        }
    }
    if let ServerRecord::Final {
        status,
        accuracy,
        record,
    } = recv()?
    {
        println!(
            "<< final: {status:?}, accuracy {accuracy}, {} turns",
            record.turns.len()
        );
    }
    server.join().expect("server thread")?;
    Ok(())
}
