use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use super::protocol::{Request, Response};
use super::{validate_candidates, CandidatePatch, GeneratorError, PatchGenerator};
use crate::encoder::ModelInput;

fn into_patches(label: &str, id: &str, k: usize, resp: Response) -> Result<Vec<CandidatePatch>, GeneratorError> {
    if resp.id != id {
        return Err(GeneratorError::protocol(id, format!("response for `{}`", resp.id)));
    }
    if let Some(message) = resp.error {
        return Err(GeneratorError::Backend { id: id.into(), message });
    }
    validate_candidates(id, k, &resp.candidates)?;
    Ok(resp
        .candidates
        .into_iter()
        .map(|c| CandidatePatch { rank: c.rank, text: c.text, score: c.score, generator: label.into() })
        .collect())
}

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Session {
    fn spawn(command: &str) -> std::io::Result<Session> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Session { child, stdin, lines: rx })
    }

    fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// One long-lived child process per generator, spoken to over its standard
/// streams. Requests are serialized; a timeout or protocol error kills the
/// child and the next request starts a fresh one.
pub struct CommandGenerator {
    label: String,
    command: String,
    seed: Option<u64>,
    timeout: Duration,
    session: Mutex<Option<Session>>,
}

impl CommandGenerator {
    pub fn new(label: impl Into<String>, command: impl Into<String>, seed: Option<u64>, timeout: Duration) -> Self {
        CommandGenerator { label: label.into(), command: command.into(), seed, timeout, session: Mutex::new(None) }
    }

    fn exchange(&self, session: &mut Session, id: &str, line: &str) -> Result<Response, GeneratorError> {
        let io = |message: String| GeneratorError::Io { id: id.into(), message };
        writeln!(session.stdin, "{line}").and_then(|_| session.stdin.flush()).map_err(|e| io(format!("write: {e}")))?;
        loop {
            let raw = match session.lines.recv_timeout(self.timeout) {
                Ok(Ok(raw)) => raw,
                Ok(Err(e)) => return Err(io(format!("read: {e}"))),
                Err(RecvTimeoutError::Timeout) => {
                    return Err(GeneratorError::Timeout { id: id.into(), millis: self.timeout.as_millis() as u64 })
                }
                Err(RecvTimeoutError::Disconnected) => return Err(io("backend exited".into())),
            };
            if raw.trim().is_empty() {
                continue;
            }
            return serde_json::from_str(&raw).map_err(|e| GeneratorError::protocol(id, format!("bad response: {e}")));
        }
    }
}

impl PatchGenerator for CommandGenerator {
    fn id(&self) -> &str {
        &self.label
    }

    fn deterministic(&self) -> bool {
        self.seed.is_some()
    }

    fn generate(&self, id: &str, input: &ModelInput, k: usize) -> Result<Vec<CandidatePatch>, GeneratorError> {
        let req = Request { id: id.into(), input_tokens: input.tokens.clone(), k, seed: self.seed };
        let line = serde_json::to_string(&req).expect("request serializes");
        let mut guard = self.session.lock().unwrap_or_else(|p| p.into_inner());
        if guard.is_none() {
            let s = Session::spawn(&self.command)
                .map_err(|e| GeneratorError::Io { id: id.into(), message: format!("spawn `{}`: {e}", self.command) })?;
            *guard = Some(s);
        }
        let result = self.exchange(guard.as_mut().expect("session"), id, &line);
        let result = result.and_then(|resp| into_patches(&self.label, id, k, resp));
        if matches!(
            result,
            Err(GeneratorError::Timeout { .. } | GeneratorError::Io { .. } | GeneratorError::Protocol { .. })
        ) {
            if let Some(s) = guard.take() {
                s.kill();
            }
        }
        result
    }
}

impl Drop for CommandGenerator {
    fn drop(&mut self) {
        if let Some(s) = self.session.get_mut().ok().and_then(Option::take) {
            drop(s.stdin);
            let mut child = s.child;
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// POSTs each request as JSON to a fixed URL.
pub struct HttpGenerator {
    label: String,
    url: String,
    seed: Option<u64>,
    timeout: Duration,
    agent: ureq::Agent,
}

impl HttpGenerator {
    pub fn new(label: impl Into<String>, url: impl Into<String>, seed: Option<u64>, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder().timeout_global(Some(timeout)).http_status_as_error(false).build();
        HttpGenerator {
            label: label.into(),
            url: url.into(),
            seed,
            timeout,
            agent: ureq::Agent::new_with_config(config),
        }
    }
}

impl PatchGenerator for HttpGenerator {
    fn id(&self) -> &str {
        &self.label
    }

    fn deterministic(&self) -> bool {
        self.seed.is_some()
    }

    fn generate(&self, id: &str, input: &ModelInput, k: usize) -> Result<Vec<CandidatePatch>, GeneratorError> {
        let req = Request { id: id.into(), input_tokens: input.tokens.clone(), k, seed: self.seed };
        let io = |message: String| GeneratorError::Io { id: id.into(), message };
        let mut resp = self.agent.post(&self.url).send_json(&req).map_err(|e| match e {
            ureq::Error::Timeout(_) => {
                GeneratorError::Timeout { id: id.into(), millis: self.timeout.as_millis() as u64 }
            }
            other => io(format!("POST {}: {other}", self.url)),
        })?;
        let status = resp.status();
        let body: Response = resp
            .body_mut()
            .read_json()
            .map_err(|e| GeneratorError::protocol(id, format!("HTTP {status}: bad response: {e}")))?;
        into_patches(&self.label, id, k, body)
    }
}
