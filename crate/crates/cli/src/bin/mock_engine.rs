//! Scripted UCI engine for tests and dry runs.
//!
//! Usage: squareval-mock-engine [SCRIPT]
//!
//! Without a script it answers every search with `score cp 0`.

use std::io::{self, BufReader};
use std::process::ExitCode;

use squareval::engine::mock::{serve, MockScript};

fn main() -> ExitCode {
    let script = match std::env::args().nth(1) {
        None => MockScript::default(),
        Some(path) => {
            match std::fs::read_to_string(&path).map_err(|e| e.to_string()).and_then(|t| MockScript::parse(&t)) {
                Ok(script) => script,
                Err(e) => {
                    eprintln!("squareval-mock-engine: {path}: {e}");
                    return ExitCode::from(2);
                }
            }
        }
    };
    match serve(&script, BufReader::new(io::stdin()), io::stdout()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("squareval-mock-engine: {e}");
            ExitCode::FAILURE
        }
    }
}
