//! A deterministic UCI engine driven by a script file, for tests and dry runs.
//!
//! Script lines (`#` starts a comment):
//!
//! ```text
//! id <name>                       name reported in "id name"
//! handshake ok|silent|exit        silent: never send uciok; exit: quit on start
//! score cp <n> | score mate <n>   default score for every search
//! fen <placement> <side> score cp <n>
//!                                 override for one placement + side to move
//! info <text>                     extra raw "info <text>" line before the score
//! no-score                        answer "go" with bestmove only
//! hang                            never answer "go" until "stop"
//! die-after <n>                   exit when the (n+1)-th "go" arrives
//! log <path>                      append every received command to <path>
//! ```
//!
//! The score line is sent as `info depth <d> score ...` where `d` is the
//! requested depth (1 for movetime searches), then `bestmove <first legal move>`.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::PathBuf;
use std::thread::{self, JoinHandle};

use super::UciScore;
use crate::board::Position;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Handshake {
    #[default]
    Ok,
    Silent,
    Exit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MockScript {
    pub name: String,
    pub handshake: Handshake,
    pub score: UciScore,
    /// Keyed by "<placement> <side>".
    pub overrides: HashMap<String, UciScore>,
    pub extra_info: Vec<String>,
    pub no_score: bool,
    pub hang: bool,
    pub die_after: Option<usize>,
    pub log: Option<PathBuf>,
}

impl Default for MockScript {
    fn default() -> Self {
        MockScript {
            name: "squareval-mock".into(),
            handshake: Handshake::Ok,
            score: UciScore::Cp(0),
            overrides: HashMap::new(),
            extra_info: Vec::new(),
            no_score: false,
            hang: false,
            die_after: None,
            log: None,
        }
    }
}

fn parse_score(kind: &str, value: &str) -> Result<UciScore, String> {
    let n: i32 = value.parse().map_err(|_| format!("invalid score value '{value}'"))?;
    match kind {
        "cp" => Ok(UciScore::Cp(n)),
        "mate" => Ok(UciScore::Mate(n)),
        _ => Err(format!("unknown score kind '{kind}'")),
    }
}

fn position_key(fen: &str) -> String {
    fen.split_whitespace().take(2).collect::<Vec<_>>().join(" ")
}

impl MockScript {
    pub fn with_score(score: UciScore) -> Self {
        MockScript { score, ..Default::default() }
    }

    pub fn parse(text: &str) -> Result<MockScript, String> {
        let mut script = MockScript::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| format!("mock script line {}: {msg}", i + 1);
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens.as_slice() {
                ["id", name @ ..] if !name.is_empty() => script.name = name.join(" "),
                ["handshake", "ok"] => script.handshake = Handshake::Ok,
                ["handshake", "silent"] => script.handshake = Handshake::Silent,
                ["handshake", "exit"] => script.handshake = Handshake::Exit,
                ["score", kind, value] => script.score = parse_score(kind, value).map_err(err)?,
                ["fen", placement, side, "score", kind, value] => {
                    let score = parse_score(kind, value).map_err(err)?;
                    script.overrides.insert(format!("{placement} {side}"), score);
                }
                ["info", ..] => script.extra_info.push(line.to_string()),
                ["no-score"] => script.no_score = true,
                ["hang"] => script.hang = true,
                ["die-after", n] => {
                    script.die_after = Some(n.parse().map_err(|_| err(format!("invalid count '{n}'")))?)
                }
                ["log", path] => script.log = Some(PathBuf::from(path)),
                _ => return Err(err(format!("unrecognised directive '{line}'"))),
            }
        }
        Ok(script)
    }

    fn score_for(&self, fen: &str) -> UciScore {
        self.overrides.get(&position_key(fen)).copied().unwrap_or(self.score)
    }
}

/// Speaks UCI on `input`/`output` until `quit`, end of input, or a scripted exit.
pub fn serve(script: &MockScript, input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    let mut log = match &script.log {
        Some(path) => Some(OpenOptions::new().create(true).append(true).open(path)?),
        None => None,
    };
    if script.handshake == Handshake::Exit {
        return Ok(());
    }
    let mut position = Position::startpos();
    let mut searches = 0usize;
    let mut hanging = false;
    for line in input.lines() {
        let line = line?;
        let command = line.trim();
        if let Some(log) = log.as_mut() {
            writeln!(log, "{command}")?;
        }
        let mut words = command.split_whitespace();
        match words.next() {
            Some("uci") => {
                if script.handshake == Handshake::Silent {
                    continue;
                }
                writeln!(output, "id name {}", script.name)?;
                writeln!(output, "id author squareval")?;
                writeln!(output, "option name Hash type spin default 16 min 1 max 1024")?;
                writeln!(output, "uciok")?;
            }
            Some("isready") => writeln!(output, "readyok")?,
            Some("position") => {
                let rest: Vec<&str> = words.collect();
                position = match rest.as_slice() {
                    ["fen", fen @ ..] => {
                        Position::from_fen(&fen.join(" ")).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?
                    }
                    ["startpos", ..] => Position::startpos(),
                    _ => return Err(io::Error::new(io::ErrorKind::InvalidData, format!("bad command '{command}'"))),
                };
            }
            Some("go") => {
                if script.die_after.is_some_and(|n| searches >= n) {
                    return Ok(());
                }
                searches += 1;
                if script.hang {
                    hanging = true;
                    continue;
                }
                let args: Vec<&str> = words.collect();
                let depth = match args.as_slice() {
                    ["depth", d, ..] => d.parse().unwrap_or(1),
                    _ => 1,
                };
                answer_search(script, &position, depth, &mut output)?;
            }
            Some("stop") if hanging => {
                hanging = false;
                writeln!(output, "bestmove {}", best_move(&position))?;
            }
            Some("quit") => return Ok(()),
            _ => {}
        }
        output.flush()?;
    }
    Ok(())
}

fn best_move(position: &Position) -> String {
    position.legal_moves().first().map_or_else(|| "(none)".to_string(), |m| m.uci())
}

fn answer_search(script: &MockScript, position: &Position, depth: u32, output: &mut impl Write) -> io::Result<()> {
    for info in &script.extra_info {
        writeln!(output, "{info}")?;
    }
    if !script.no_score {
        let score = match script.score_for(&position.to_fen()) {
            UciScore::Cp(n) => format!("cp {n}"),
            UciScore::Mate(n) => format!("mate {n}"),
        };
        writeln!(output, "info depth {depth} seldepth {depth} score {score} nodes 1 pv {}", best_move(position))?;
    }
    writeln!(output, "bestmove {}", best_move(position))
}

/// Engine stdin, engine stdout, and the thread serving them.
pub type InProcessEngine = (Box<dyn Write + Send>, Box<dyn Read + Send>, JoinHandle<io::Result<()>>);

/// Runs the mock on a background thread, returning the streams a session needs.
pub fn spawn_in_process(script: MockScript) -> io::Result<InProcessEngine> {
    let (to_engine_read, to_engine_write) = io::pipe()?;
    let (from_engine_read, from_engine_write) = io::pipe()?;
    let handle = thread::spawn(move || serve(&script, BufReader::new(to_engine_read), from_engine_write));
    Ok((Box::new(to_engine_write), Box::new(from_engine_read), handle))
}
