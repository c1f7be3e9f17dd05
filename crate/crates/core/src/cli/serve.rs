use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::thread;

use crate::environment::EnvConfig;
use crate::protocol::{serve_connection, EpisodeRecord};
use crate::puzzle::Puzzle;

/// Shared append-only JSONL file for records finished by concurrent connections.
#[derive(Debug, Clone)]
pub struct RecordSink(Arc<Mutex<File>>);

impl RecordSink {
    pub fn append(path: &Path) -> io::Result<Self> {
        let f = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(RecordSink(Arc::new(Mutex::new(f))))
    }

    pub fn push(&self, record: &EpisodeRecord) -> io::Result<()> {
        let mut line = serde_json::to_vec(record)?;
        line.push(b'\n');
        let mut f = self.0.lock().unwrap_or_else(|e| e.into_inner());
        f.write_all(&line)
    }
}

/// One episode over a pair of byte streams.
pub fn serve_stdio<R: BufRead, W: Write>(
    reader: &mut R,
    writer: &mut W,
    puzzles: &BTreeMap<String, Arc<Puzzle>>,
    env: &EnvConfig,
    sink: Option<&RecordSink>,
) -> io::Result<Option<EpisodeRecord>> {
    let record = serve_connection(reader, writer, puzzles, env)?;
    writer.flush()?;
    if let (Some(sink), Some(r)) = (sink, &record) {
        sink.push(r)?;
    }
    Ok(record)
}

/// Accepts connections and serves each on its own thread with its own session.
///
/// Returns after `max_connections` connections have finished, or never when
/// unbounded.
pub fn serve_listener(
    listener: TcpListener,
    puzzles: BTreeMap<String, Arc<Puzzle>>,
    env: EnvConfig,
    max_connections: Option<usize>,
    sink: Option<RecordSink>,
) -> io::Result<()> {
    let puzzles = Arc::new(puzzles);
    let env = Arc::new(env);
    let mut handles = Vec::new();
    for (n, stream) in listener.incoming().enumerate() {
        let stream = stream?;
        let (puzzles, env, sink) = (Arc::clone(&puzzles), Arc::clone(&env), sink.clone());
        handles.push(thread::spawn(move || -> io::Result<()> {
            let mut reader = BufReader::new(stream.try_clone()?);
            let mut writer = BufWriter::new(stream);
            serve_stdio(&mut reader, &mut writer, &puzzles, &env, sink.as_ref()).map(|_| ())
        }));
        if max_connections.is_some_and(|m| n + 1 >= m) {
            break;
        }
    }
    for h in handles {
        if let Err(e) = h
            .join()
            .unwrap_or_else(|_| Err(io::Error::other("connection thread panicked")))
        {
            eprintln!("connection error: {e}");
        }
    }
    Ok(())
}
