use std::io::{self, BufRead, BufReader, Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use super::{parse_info_score, EngineError, EngineLimits, Evaluation, UciScore};
use crate::board::Position;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SessionConfig {
    pub handshake_timeout: Duration,
    /// Upper bound for a fixed-depth search.
    pub depth_timeout: Duration,
    /// Added to `movetime` before a timed search is declared hung.
    pub grace: Duration,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            handshake_timeout: Duration::from_secs(10),
            depth_timeout: Duration::from_secs(300),
            grace: Duration::from_secs(5),
        }
    }
}

/// One engine process, used strictly request/response.
pub struct EngineSession {
    child: Option<Child>,
    input: Box<dyn Write + Send>,
    lines: Receiver<io::Result<String>>,
    config: SessionConfig,
    transcript: Vec<String>,
    engine_name: Option<String>,
    dead: bool,
}

impl std::fmt::Debug for EngineSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EngineSession")
            .field("engine_name", &self.engine_name)
            .field("dead", &self.dead)
            .finish_non_exhaustive()
    }
}

impl EngineSession {
    /// Launches `command` (program followed by whitespace-separated arguments)
    /// and performs the UCI handshake.
    pub fn start(command: &str, options: &[(String, String)], config: SessionConfig) -> Result<Self, EngineError> {
        let mut parts = command.split_whitespace();
        let program = parts.next().ok_or_else(|| EngineError::Launch {
            command: command.to_string(),
            source: io::Error::new(io::ErrorKind::InvalidInput, "empty engine command"),
        })?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| EngineError::Launch { command: command.to_string(), source })?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let mut session = Self::new(Box::new(stdin), Box::new(stdout), config);
        session.child = Some(child);
        session.handshake(options)?;
        Ok(session)
    }

    /// Handshake over arbitrary streams (e.g. an in-process mock engine).
    pub fn from_streams(
        input: Box<dyn Write + Send>,
        output: Box<dyn Read + Send>,
        options: &[(String, String)],
        config: SessionConfig,
    ) -> Result<Self, EngineError> {
        let mut session = Self::new(input, output, config);
        session.handshake(options)?;
        Ok(session)
    }

    fn new(input: Box<dyn Write + Send>, output: Box<dyn Read + Send>, config: SessionConfig) -> Self {
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(output);
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) => break,
                    Ok(_) => {
                        let line = line.trim_end().to_string();
                        if tx.send(Ok(line)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });
        EngineSession { child: None, input, lines: rx, config, transcript: Vec::new(), engine_name: None, dead: false }
    }

    /// Every command sent to the engine so far, in order.
    pub fn transcript(&self) -> &[String] {
        &self.transcript
    }

    /// The engine's `id name`, if it sent one.
    pub fn engine_name(&self) -> Option<&str> {
        self.engine_name.as_deref()
    }

    pub fn is_dead(&self) -> bool {
        self.dead
    }

    fn send(&mut self, command: &str) -> Result<(), EngineError> {
        self.transcript.push(command.to_string());
        let sent = writeln!(self.input, "{command}").and_then(|_| self.input.flush());
        if let Err(e) = sent {
            self.dead = true;
            // A closed pipe means the engine is gone; report it like EOF.
            if e.kind() == io::ErrorKind::BrokenPipe {
                return Err(EngineError::Eof { waiting_for: format!("'{command}' to be accepted") });
            }
            return Err(e.into());
        }
        Ok(())
    }

    fn recv(&mut self, deadline: Instant, budget: Duration, waiting_for: &str) -> Result<String, EngineError> {
        let timeout = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => {
                self.dead = true;
                Err(e.into())
            }
            Err(RecvTimeoutError::Timeout) => {
                self.dead = true;
                Err(EngineError::Timeout { waiting_for: waiting_for.to_string(), after: budget })
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.dead = true;
                Err(EngineError::Eof { waiting_for: waiting_for.to_string() })
            }
        }
    }

    fn handshake(&mut self, options: &[(String, String)]) -> Result<(), EngineError> {
        let budget = self.config.handshake_timeout;
        let deadline = Instant::now() + budget;
        self.send("uci")?;
        loop {
            let line = self.recv(deadline, budget, "uciok")?;
            let keyword = line.split_whitespace().next().unwrap_or("");
            match keyword {
                "uciok" => break,
                "id" => {
                    if let Some(name) = line.strip_prefix("id name ") {
                        self.engine_name = Some(name.trim().to_string());
                    }
                }
                "readyok" | "bestmove" => {
                    self.dead = true;
                    return Err(EngineError::Protocol(format!("unexpected '{line}' before uciok")));
                }
                // Options, info strings and start-up banners are allowed before uciok.
                _ => {}
            }
        }
        for (name, value) in options {
            self.send(&format!("setoption name {name} value {value}"))?;
        }
        self.send("isready")?;
        loop {
            let line = self.recv(deadline, budget, "readyok")?;
            match line.split_whitespace().next() {
                Some("readyok") => return Ok(()),
                Some("bestmove") => {
                    self.dead = true;
                    return Err(EngineError::Protocol(format!("unexpected '{line}' before readyok")));
                }
                _ => {}
            }
        }
    }

    /// Searches `position` and returns the white-relative evaluation of the
    /// deepest score the engine reported before `bestmove`.
    pub fn evaluate(&mut self, position: &Position, limits: EngineLimits) -> Result<Evaluation, EngineError> {
        if self.dead {
            return Err(EngineError::SessionDead);
        }
        let budget = match limits {
            EngineLimits::Depth(_) => self.config.depth_timeout,
            EngineLimits::MoveTime { millis } => Duration::from_millis(millis) + self.config.grace,
        };
        self.send(&format!("position fen {}", position.to_fen()))?;
        self.send(&limits.go_command())?;
        let deadline = Instant::now() + budget;
        let mut best: Option<(u32, UciScore)> = None;
        loop {
            let line = match self.recv(deadline, budget, "bestmove") {
                Ok(line) => line,
                Err(e @ EngineError::Timeout { .. }) => {
                    let _ = self.send("stop");
                    return Err(e);
                }
                Err(e) => return Err(e),
            };
            if line.starts_with("bestmove") {
                break;
            }
            if let Some((depth, score)) = parse_info_score(&line) {
                if best.is_none_or(|(d, _)| depth >= d) {
                    best = Some((depth, score));
                }
            }
        }
        let Some((depth, score)) = best else {
            self.dead = true;
            return Err(EngineError::Protocol("no score reported before bestmove".into()));
        };
        Ok(Evaluation::from_uci(score, position.side_to_move(), depth))
    }
}

impl Drop for EngineSession {
    fn drop(&mut self) {
        if !self.dead {
            let _ = writeln!(self.input, "quit").and_then(|_| self.input.flush());
        }
        if let Some(mut child) = self.child.take() {
            let deadline = Instant::now() + Duration::from_millis(500);
            while Instant::now() < deadline {
                if let Ok(Some(_)) = child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(10));
            }
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}
