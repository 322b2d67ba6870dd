use std::io::{self, BufRead, BufReader, Write};
use std::net::{Shutdown, TcpStream};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use log::{debug, warn};

use super::protocol::{parse_response, WireRequest};
use super::{EvaluationJob, EvaluationResult, Evaluator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transport {
    /// Spawn this program (with arguments) and speak over its stdin/stdout.
    Command(Vec<String>),
    /// Connect to `host:port`.
    Tcp(String),
}

/// Client for trainer processes speaking the line protocol.
///
/// Connections are pooled: each `evaluate` call checks one out (opening a
/// new one if none is idle), sends exactly one request, reads exactly one
/// response and returns the connection. Concurrent calls therefore open as
/// many connections, and for [`Transport::Command`] as many worker
/// processes, as there are jobs in flight.
///
/// A connection that breaks mid-job is dropped and the job is retried once
/// on a fresh connection; a second break yields an error-marked result.
/// Failing to open a connection at all is returned as
/// [`Error::Transport`].
pub struct ExternalEvaluator {
    transport: Transport,
    dataset: String,
    timeout: Option<Duration>,
    idle: Mutex<Vec<Connection>>,
}

impl ExternalEvaluator {
    pub fn new(transport: Transport, dataset: impl Into<String>) -> Self {
        ExternalEvaluator { transport, dataset: dataset.into(), timeout: None, idle: Mutex::new(Vec::new()) }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = Some(timeout);
        self
    }

    fn checkout(&self) -> Result<Connection> {
        if let Some(conn) = self.idle.lock().expect("pool lock").pop() {
            return Ok(conn);
        }
        Connection::open(&self.transport)
    }

    fn checkin(&self, conn: Connection) {
        self.idle.lock().expect("pool lock").push(conn);
    }
}

impl Evaluator for ExternalEvaluator {
    fn evaluate(&self, job: &EvaluationJob) -> Result<EvaluationResult> {
        let line = WireRequest::from_job(job, &self.dataset).to_line();
        let mut last_failure = String::new();
        for attempt in 0..2 {
            let mut conn = self.checkout()?;
            match conn.exchange(&line, self.timeout) {
                Exchange::Reply(reply) => {
                    self.checkin(conn);
                    return Ok(parse_response(&reply, &job.job_id));
                }
                Exchange::TimedOut => {
                    warn!("job {} timed out", job.job_id);
                    return Ok(EvaluationResult::error(&job.job_id, "timed out waiting for the worker"));
                }
                Exchange::Lost(reason) => {
                    debug!("job {} attempt {attempt}: transport lost: {reason}", job.job_id);
                    last_failure = reason;
                }
            }
        }
        Ok(EvaluationResult::error(&job.job_id, format!("transport lost twice: {last_failure}")))
    }
}

enum Exchange {
    Reply(String),
    TimedOut,
    Lost(String),
}

struct Connection {
    writer: Box<dyn Write + Send>,
    lines: Receiver<io::Result<String>>,
    child: Option<Child>,
    socket: Option<TcpStream>,
}

impl Connection {
    fn open(transport: &Transport) -> Result<Self> {
        match transport {
            Transport::Command(argv) => {
                let mut child = Command::new(&argv[0])
                    .args(&argv[1..])
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(|e| Error::Transport(format!("cannot start `{}`: {e}", argv[0])))?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                Ok(Connection {
                    writer: Box::new(stdin),
                    lines: spawn_reader(stdout),
                    child: Some(child),
                    socket: None,
                })
            }
            Transport::Tcp(addr) => {
                let stream =
                    TcpStream::connect(addr).map_err(|e| Error::Transport(format!("cannot connect to {addr}: {e}")))?;
                let reader =
                    stream.try_clone().map_err(|e| Error::Transport(format!("cannot clone socket for {addr}: {e}")))?;
                let control =
                    stream.try_clone().map_err(|e| Error::Transport(format!("cannot clone socket for {addr}: {e}")))?;
                Ok(Connection {
                    writer: Box::new(stream),
                    lines: spawn_reader(reader),
                    child: None,
                    socket: Some(control),
                })
            }
        }
    }

    fn exchange(&mut self, line: &str, timeout: Option<Duration>) -> Exchange {
        if let Err(e) = self.writer.write_all(line.as_bytes()).and_then(|_| self.writer.flush()) {
            return Exchange::Lost(format!("write failed: {e}"));
        }
        let received = match timeout {
            Some(t) => self.lines.recv_timeout(t),
            None => self.lines.recv().map_err(|_| RecvTimeoutError::Disconnected),
        };
        match received {
            Ok(Ok(reply)) => Exchange::Reply(reply),
            Ok(Err(e)) => Exchange::Lost(format!("read failed: {e}")),
            Err(RecvTimeoutError::Timeout) => Exchange::TimedOut,
            Err(RecvTimeoutError::Disconnected) => Exchange::Lost("worker closed the stream".to_string()),
        }
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        if let Some(child) = self.child.as_mut() {
            let _ = child.kill();
            let _ = child.wait();
        }
        if let Some(socket) = self.socket.as_ref() {
            let _ = socket.shutdown(Shutdown::Both);
        }
    }
}

fn spawn_reader<R: io::Read + Send + 'static>(source: R) -> Receiver<io::Result<String>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(source).lines() {
            let failed = line.is_err();
            if tx.send(line).is_err() || failed {
                break;
            }
        }
    });
    rx
}
