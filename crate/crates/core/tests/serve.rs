use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Cursor, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use zebra_arena::agents::{AgentKind, AgentSpec};
use zebra_arena::cli::{serve_listener, serve_stdio, RecordSink};
use zebra_arena::environment::{EnvConfig, SessionStatus};
use zebra_arena::generator::{generate_puzzle, GeneratorConfig, SizePreset};
use zebra_arena::metrics::load_records;
use zebra_arena::protocol::{run_episode, ClientRecord, EpisodeRecord, ServerRecord};
use zebra_arena::puzzle::Puzzle;

fn puzzle(seed: u64) -> Arc<Puzzle> {
    let cfg = GeneratorConfig::preset(SizePreset::Small, 2, seed);
    Arc::new(generate_puzzle(&cfg, format!("small-{seed}")).unwrap())
}

fn stored(p: &Arc<Puzzle>, kind: AgentKind, env: &EnvConfig) -> EpisodeRecord {
    let mut agent = AgentSpec::new(kind).build(p).unwrap();
    run_episode(agent.as_mut(), Arc::clone(p), env).unwrap()
}

/// Client lines that replay a stored transcript.
fn replay_lines(r: &EpisodeRecord) -> Vec<String> {
    let mut lines = vec![serde_json::to_string(&ClientRecord::Init {
        puzzle_id: r.puzzle_id.clone(),
        env: None,
        agent: Some(r.agent.clone()),
    })
    .unwrap()];
    for t in &r.turns {
        lines.push(
            serde_json::to_string(&ClientRecord::AgentMsg {
                text: t.message.clone(),
                reasoning_tokens: t.reasoning_tokens,
            })
            .unwrap(),
        );
    }
    lines
}

fn server_records(out: &[u8]) -> Vec<ServerRecord> {
    out.split(|&b| b == b'\n')
        .filter(|l| !l.is_empty())
        .map(|l| serde_json::from_slice(l).unwrap())
        .collect()
}

fn map(ps: &[Arc<Puzzle>]) -> BTreeMap<String, Arc<Puzzle>> {
    ps.iter().map(|p| (p.id.clone(), Arc::clone(p))).collect()
}

#[test]
fn stdio_replay_reproduces_stored_record() {
    let p = puzzle(21);
    let env = EnvConfig::default();
    for kind in [
        AgentKind::GreedyIg,
        AgentKind::Random,
        AgentKind::CheatingOracle,
    ] {
        let original = stored(&p, kind, &env);
        assert_eq!(original.status, SessionStatus::Solved);
        let input = replay_lines(&original).join("\n") + "\n";
        let mut out = Vec::new();
        let served = serve_stdio(
            &mut Cursor::new(input),
            &mut out,
            &map(&[Arc::clone(&p)]),
            &env,
            None,
        )
        .unwrap()
        .unwrap();
        assert_eq!(served, original, "{kind:?}");

        let records = server_records(&out);
        assert!(matches!(records.first(), Some(ServerRecord::Init { .. })));
        assert_eq!(records.len(), original.turns.len() + 2);
        match records.last() {
            Some(ServerRecord::Final {
                accuracy, record, ..
            }) => {
                assert_eq!(*accuracy, 1);
                assert_eq!(**record, original);
            }
            other => panic!("expected final record, got {other:?}"),
        }
    }
}

#[test]
fn malformed_or_unknown_init_gets_an_error_record() {
    let p = puzzle(22);
    let env = EnvConfig::default();
    for (line, code) in [
        ("{\"type\":\"hello\"}", "MalformedInit"),
        ("{\"type\":\"agent_msg\",\"text\":\"hi\"}", "MalformedInit"),
        (
            "{\"type\":\"init\",\"puzzle_id\":\"nope\"}",
            "UnknownPuzzle",
        ),
    ] {
        let mut out = Vec::new();
        let served = serve_stdio(
            &mut Cursor::new(format!("{line}\n")),
            &mut out,
            &map(&[Arc::clone(&p)]),
            &env,
            None,
        )
        .unwrap();
        assert!(served.is_none());
        match server_records(&out).as_slice() {
            [ServerRecord::Error { error_code, .. }] => assert_eq!(error_code, code),
            other => panic!("{line}: {other:?}"),
        }
    }
}

#[test]
fn disconnect_mid_episode_is_a_fault() {
    let p = puzzle(23);
    let env = EnvConfig::default();
    let original = stored(&p, AgentKind::GreedyIg, &env);
    let mut lines = replay_lines(&original);
    lines.truncate(2);
    let mut out = Vec::new();
    let served = serve_stdio(
        &mut Cursor::new(lines.join("\n")),
        &mut out,
        &map(&[p]),
        &env,
        None,
    )
    .unwrap()
    .unwrap();
    assert_eq!(served.fault.as_deref(), Some("client disconnected"));
    assert_eq!(served.accuracy, 0);
}

#[test]
fn concurrent_connections_keep_separate_sessions() {
    let (a, b) = (puzzle(31), puzzle(32));
    let env = EnvConfig::default();
    let originals = [
        stored(&a, AgentKind::GreedyIg, &env),
        stored(&b, AgentKind::Random, &env),
    ];

    let tmp = tempfile::tempdir().unwrap();
    let sink_path = tmp.path().join("served.jsonl");
    let sink = RecordSink::append(&sink_path).unwrap();
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = thread::spawn({
        let puzzles = map(&[a, b]);
        let env = env.clone();
        move || serve_listener(listener, puzzles, env, Some(2), Some(sink))
    });

    // Open both connections before either sends its turns, then interleave.
    let mut conns: Vec<(TcpStream, BufReader<TcpStream>, Vec<String>)> = originals
        .iter()
        .map(|r| {
            let s = TcpStream::connect(addr).unwrap();
            let reader = BufReader::new(s.try_clone().unwrap());
            (s, reader, replay_lines(r))
        })
        .collect();
    let longest = conns.iter().map(|c| c.2.len()).max().unwrap();
    let mut finals = vec![None, None];
    for i in 0..longest {
        for (k, (stream, reader, lines)) in conns.iter_mut().enumerate() {
            let Some(line) = lines.get(i) else { continue };
            writeln!(stream, "{line}").unwrap();
            let mut reply = String::new();
            reader.read_line(&mut reply).unwrap();
            let rec: ServerRecord = serde_json::from_str(&reply).unwrap();
            assert!(!matches!(rec, ServerRecord::Error { .. }), "{reply}");
            if i + 1 == lines.len() {
                let mut last = String::new();
                reader.read_line(&mut last).unwrap();
                finals[k] = Some(serde_json::from_str::<ServerRecord>(&last).unwrap());
            }
        }
    }
    drop(conns);
    server.join().unwrap().unwrap();

    for (k, f) in finals.into_iter().enumerate() {
        match f {
            Some(ServerRecord::Final { record, .. }) => assert_eq!(*record, originals[k]),
            other => panic!("connection {k}: {other:?}"),
        }
    }
    let mut sunk = load_records(&sink_path).unwrap();
    sunk.sort_by(|x, y| x.puzzle_id.cmp(&y.puzzle_id));
    assert_eq!(sunk, originals.to_vec());
}
