//! Run configuration: the merged, serializable description of one invocation.
//!
//! A configuration is built from an optional JSON file (either a bare
//! `RunConfig` or a `.meta.json` written by a previous run) with command-line
//! flags layered on top. The merged value is what `meta.json` records, so a
//! meta file passed back through `--config` reproduces the run.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use donation_ca_core::engine::Strategy;
use donation_ca_core::imagescore::Pairing;
use donation_ca_core::{InitPattern, Reputation, StrategyDescriptor, CURATED};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    #[default]
    Run,
    Sweep,
    Evolve,
    Imagescore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    #[default]
    Random,
    Single,
    Checker,
    File,
}

impl FromStr for InitKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(InitKind::Random),
            "single" => Ok(InitKind::Single),
            "checker" | "checkerboard" => Ok(InitKind::Checker),
            "file" => Ok(InitKind::File),
            other => Err(CliError::config(format!("unknown init pattern `{other}`"))),
        }
    }
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    #[default]
    Swap,
    Er,
    Ea,
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "swap" => Ok(Axis::Swap),
            "er" | "e_R" | "e_r" => Ok(Axis::Er),
            "ea" | "e_A" | "e_a" => Ok(Axis::Ea),
            other => Err(CliError::config(format!("unknown sweep axis `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingKind {
    Local,
    Random,
}

impl PairingKind {
    pub fn pairing(self) -> Pairing {
        match self {
            PairingKind::Local => Pairing::AdjacentNeighbor,
            PairingKind::Random => Pairing::RandomPair,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PairingKind::Local => "local",
            PairingKind::Random => "random",
        }
    }
}

impl FromStr for PairingKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" | "adjacent" => Ok(PairingKind::Local),
            "random" => Ok(PairingKind::Random),
            other => Err(CliError::config(format!("unknown pairing `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Rule specs (`FAMILY:DIRECTION[:h]`) or `all` for the twelve curated rules.
    pub rules: Vec<String>,
    /// Raw Wolfram numbers, used instead of `rules` when non-empty.
    pub raw_rules: Vec<u32>,
    pub n: usize,
    pub steps: usize,
    pub swap: usize,
    pub directed: bool,
    pub er: f64,
    pub ea: f64,
    pub fatigue: u32,
    pub pm: f64,
    pub generations: usize,
    pub gen_iters: usize,
    pub replicates: usize,
    pub seed: u64,
    pub init: InitKind,
    pub init_file: Option<PathBuf>,
    /// Contents of `init_file` as a 0/1 string, captured when the run starts.
    pub init_states: Option<String>,
    pub out: String,
    pub axis: Axis,
    pub values: Vec<f64>,
    /// Keep every generation's site rows and write them as a bitmap.
    pub sites: bool,
    pub rounds: usize,
    pub benefit: f64,
    pub cost: f64,
    pub pairings: Vec<PairingKind>,
    /// `(a_p, a_e)` levels for the image-score game.
    pub noise_levels: Vec<(f64, f64)>,
    pub swap_levels: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Run,
            rules: Vec::new(),
            raw_rules: Vec::new(),
            n: 100,
            steps: 300,
            swap: 0,
            directed: false,
            er: 0.0,
            ea: 0.0,
            fatigue: 0,
            pm: 0.001,
            generations: 5000,
            gen_iters: 300,
            replicates: 30,
            seed: 0,
            init: InitKind::Random,
            init_file: None,
            init_states: None,
            out: "donation".to_string(),
            axis: Axis::Swap,
            values: Vec::new(),
            sites: false,
            rounds: 10_000,
            benefit: 1.0,
            cost: 0.1,
            pairings: vec![PairingKind::Local, PairingKind::Random],
            noise_levels: vec![(0.0, 0.0), (0.2, 0.2)],
            swap_levels: vec![0, 10],
        }
    }
}

/// What `<prefix>.meta.json` holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub config: RunConfig,
    pub code_version: String,
    /// Wolfram numbers of the strategies that were run.
    pub rule_numbers: Vec<u8>,
}

impl RunConfig {
    /// Reads a bare config or the `config` member of a meta file.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let inner = match value {
            serde_json::Value::Object(mut map) if map.contains_key("code_version") => {
                map.remove("config").unwrap_or_default()
            }
            other => other,
        };
        serde_json::from_value(inner)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn path_with(&self, suffix: &str) -> PathBuf {
        PathBuf::from(format!("{}{suffix}", self.out))
    }

    /// Strategies selected by `rules`/`raw_rules`. An empty selection means
    /// the twelve curated rules.
    pub fn strategies(&self) -> Result<Vec<Strategy>, CliError> {
        if !self.raw_rules.is_empty() {
            if !self.rules.is_empty() {
                return Err(CliError::config(
                    "give either --rule or --raw-rule, not both",
                ));
            }
            return self
                .raw_rules
                .iter()
                .map(|&n| {
                    donation_ca_core::rule_table_from_number(n)
                        .map(Strategy::Raw)
                        .map_err(CliError::from)
                })
                .collect();
        }
        if self.rules.is_empty() {
            return Ok(CURATED.iter().map(|&d| Strategy::Descriptor(d)).collect());
        }
        let mut out = Vec::new();
        for spec in &self.rules {
            if spec.eq_ignore_ascii_case("all") {
                out.extend(CURATED.iter().map(|&d| Strategy::Descriptor(d)));
            } else {
                let desc: StrategyDescriptor = spec
                    .parse()
                    .map_err(|_| CliError::config(format!("invalid rule spec `{spec}`")))?;
                out.push(Strategy::Descriptor(desc));
            }
        }
        Ok(out)
    }

    /// Exactly one strategy, for `run`.
    pub fn single_strategy(&self) -> Result<Strategy, CliError> {
        if self.rules.is_empty() && self.raw_rules.is_empty() {
            return Err(CliError::config("run needs --rule or --raw-rule"));
        }
        let mut all = self.strategies()?;
        if all.len() != 1 {
            return Err(CliError::config("run takes exactly one rule"));
        }
        Ok(all.remove(0))
    }

    /// Resolves the initial pattern, reading `init_file` once and caching
    /// its contents in `init_states`.
    pub fn init_pattern(&mut self) -> Result<InitPattern, CliError> {
        Ok(match self.init {
            InitKind::Random => InitPattern::Random,
            InitKind::Single => InitPattern::SingleHighCenter,
            InitKind::Checker => InitPattern::Checkerboard,
            InitKind::File => {
                if self.init_states.is_none() {
                    let path = self
                        .init_file
                        .as_ref()
                        .ok_or_else(|| CliError::config("--init file needs --init-file PATH"))?;
                    let text = fs::read_to_string(path).map_err(|e| {
                        CliError::config(format!("cannot read {}: {e}", path.display()))
                    })?;
                    self.init_states = Some(text.chars().filter(|c| !c.is_whitespace()).collect());
                }
                let states = parse_states(self.init_states.as_deref().unwrap_or_default())?;
                self.n = states.len();
                InitPattern::Explicit(states)
            }
        })
    }
}

/// `0`/`1` characters, whitespace ignored.
pub fn parse_states(text: &str) -> Result<Vec<Reputation>, CliError> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(Reputation::Low),
            '1' => Ok(Reputation::High),
            other => Err(CliError::config(format!(
                "unexpected `{other}` in initial states"
            ))),
        })
        .collect()
}

/// Comma-separated values; an item `start:stop:step` expands to an inclusive range.
pub fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("bad number `{s}`")))
        };
        match parts.as_slice() {
            [single] => out.push(num(single)?),
            [start, stop, step] => {
                let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
                if step <= 0.0 {
                    return Err(CliError::config("range step must be positive"));
                }
                // Integer index avoids accumulating rounding error.
                let count = ((stop - start) / step + 1e-9).floor();
                if count < 0.0 {
                    return Err(CliError::config(format!("empty range `{item}`")));
                }
                for i in 0..=(count as usize) {
                    out.push(start + i as f64 * step);
                }
            }
            _ => return Err(CliError::config(format!("bad value list item `{item}`"))),
        }
    }
    Ok(out)
}

/// Noise levels: `x` means `a_p = a_e = x`, `p/e` sets them separately.
pub fn parse_noise_levels(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::config(format!("bad noise level `{item}`")))
            };
            match item.split_once('/') {
                Some((p, e)) => Ok((num(p)?, num(e)?)),
                None => {
                    let x = num(item)?;
                    Ok((x, x))
                }
            }
        })
        .collect()
}

/// Human-readable label of a strategy for CSV output.
pub fn strategy_label(strategy: &Strategy) -> String {
    match strategy {
        Strategy::Descriptor(d) => d.to_string(),
        Strategy::Raw(t) => format!("raw:{}", t.number()),
    }
}
