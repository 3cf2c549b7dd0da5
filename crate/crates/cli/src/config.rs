//! Run configuration: built-in defaults, then a `key=value` config file, then
//! command-line flags. The engine command falls back to `SQUAREVAL_ENGINE`.
//!
//! Config keys: `engine`, `depth`, `movetime`, `sessions`, `filter`, `seed`,
//! `split`, `epochs`, `lr`, `batch`, `format`, and `option.<Name>` for UCI
//! options passed to the engine with `setoption`.

use std::path::Path;
use std::str::FromStr;

use squareval::dataset::StateFilter;
use squareval::engine::{EngineLimits, DEFAULT_DEPTH};
use squareval::model::TrainConfig;
use squareval::valuation::RenderFormat;

use crate::Failure;

pub const ENGINE_ENV: &str = "SQUAREVAL_ENGINE";

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub engine_command: Option<String>,
    pub engine_options: Vec<(String, String)>,
    pub limits: EngineLimits,
    pub sessions: usize,
    pub filter: StateFilter,
    pub split_fraction: f64,
    pub train: TrainConfig,
    pub format: RenderFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            engine_command: None,
            engine_options: Vec::new(),
            limits: EngineLimits::Depth(DEFAULT_DEPTH),
            sessions: 1,
            filter: StateFilter::all(),
            split_fraction: 0.8,
            train: TrainConfig::default(),
            format: RenderFormat::Text,
        }
    }
}

/// Values given on the command line; `None` leaves the lower layer in place.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub engine: Option<String>,
    pub depth: Option<u32>,
    pub movetime: Option<u64>,
    pub sessions: Option<usize>,
    pub filter: Option<StateFilter>,
    pub seed: Option<u64>,
    pub split: Option<f64>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub batch: Option<usize>,
    pub format: Option<RenderFormat>,
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, Failure> {
    value.parse().map_err(|_| Failure::Usage(format!("config line {line}: invalid value '{value}' for '{key}'")))
}

impl RunConfig {
    /// Applies `key=value` lines. Blank lines and `#` comments are ignored.
    pub fn apply_file_text(&mut self, text: &str) -> Result<(), Failure> {
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Failure::Usage(format!("config line {line_no}: expected key=value, found '{line}'")))?;
            match key {
                "engine" => self.engine_command = Some(value.to_string()),
                "depth" => self.limits = limits_depth(parse_value(key, value, line_no)?)?,
                "movetime" => self.limits = limits_movetime(parse_value(key, value, line_no)?)?,
                "sessions" => self.sessions = parse_value(key, value, line_no)?,
                "filter" => {
                    self.filter = value.parse().map_err(|e| Failure::Usage(format!("config line {line_no}: {e}")))?
                }
                "seed" => self.train.seed = parse_value(key, value, line_no)?,
                "split" => self.split_fraction = parse_value(key, value, line_no)?,
                "epochs" => self.train.epochs = parse_value(key, value, line_no)?,
                "lr" => self.train.learning_rate = parse_value(key, value, line_no)?,
                "batch" => self.train.batch_size = parse_value(key, value, line_no)?,
                "format" => {
                    self.format = value.parse().map_err(|e| Failure::Usage(format!("config line {line_no}: {e}")))?
                }
                _ => match key.strip_prefix("option.") {
                    Some(name) if !name.is_empty() => {
                        self.engine_options.retain(|(n, _)| n != name);
                        self.engine_options.push((name.to_string(), value.to_string()));
                    }
                    _ => return Err(Failure::Usage(format!("config line {line_no}: unknown key '{key}'"))),
                },
            }
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<(), Failure> {
        if let Some(engine) = &o.engine {
            self.engine_command = Some(engine.clone());
        }
        if let Some(depth) = o.depth {
            self.limits = limits_depth(depth)?;
        }
        if let Some(millis) = o.movetime {
            self.limits = limits_movetime(millis)?;
        }
        if let Some(sessions) = o.sessions {
            self.sessions = sessions;
        }
        if let Some(filter) = &o.filter {
            self.filter = *filter;
        }
        if let Some(seed) = o.seed {
            self.train.seed = seed;
        }
        if let Some(split) = o.split {
            self.split_fraction = split;
        }
        if let Some(epochs) = o.epochs {
            self.train.epochs = epochs;
        }
        if let Some(lr) = o.lr {
            self.train.learning_rate = lr;
        }
        if let Some(batch) = o.batch {
            self.train.batch_size = batch;
        }
        if let Some(format) = o.format {
            self.format = format;
        }
        Ok(())
    }

    /// Defaults, then `file` (if any), then `overrides`, then the environment
    /// fallback for the engine command.
    pub fn resolve(file: Option<&Path>, overrides: &Overrides, env_engine: Option<String>) -> Result<Self, Failure> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("config file {}: {e}", path.display())))?;
            cfg.apply_file_text(&text)?;
        }
        cfg.apply_overrides(overrides)?;
        if cfg.engine_command.is_none() {
            cfg.engine_command = env_engine.filter(|e| !e.trim().is_empty());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.sessions == 0 {
            return Err(Failure::Usage("sessions must be at least 1".into()));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Failure::Usage(format!("split must be in (0, 1), got {}", self.split_fraction)));
        }
        self.train.validate().map_err(|e| Failure::Usage(e.to_string()))
    }
}

fn limits_depth(depth: u32) -> Result<EngineLimits, Failure> {
    EngineLimits::depth(depth).map_err(|e| Failure::Usage(e.to_string()))
}

fn limits_movetime(millis: u64) -> Result<EngineLimits, Failure> {
    EngineLimits::movetime(millis).map_err(|e| Failure::Usage(e.to_string()))
}
