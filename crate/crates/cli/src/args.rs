//! Command-line flags and their merge onto a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{
    parse_noise_levels, parse_values, Axis, Command, InitKind, PairingKind, RunConfig,
};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "donation-ca",
    version,
    about = "Donation-game cellular automaton simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: SubCommand,
}

#[derive(Debug, Subcommand)]
pub enum SubCommand {
    /// One run of one rule: bitmap, per-agent metrics, meta.json.
    Run(Flags),
    /// Replicated parameter sweep over swap, e_R or e_A.
    Sweep(Flags),
    /// Generational evolution of the twelve curated rules.
    Evolve(Flags),
    /// Image-score game across pairings, noise levels and swap levels.
    Imagescore(Flags),
}

impl SubCommand {
    fn split(self) -> (Command, Flags) {
        match self {
            SubCommand::Run(f) => (Command::Run, f),
            SubCommand::Sweep(f) => (Command::Sweep, f),
            SubCommand::Evolve(f) => (Command::Evolve, f),
            SubCommand::Imagescore(f) => (Command::Imagescore, f),
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct Flags {
    /// JSON config or a previous meta.json; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// FAMILY:DIRECTION[:h], comma-separated, or `all`.
    #[arg(long = "rule", value_delimiter = ',')]
    pub rules: Vec<String>,
    /// Wolfram rule number 0..=255, comma-separated.
    #[arg(long = "raw-rule", value_delimiter = ',')]
    pub raw_rules: Vec<u32>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Random position swaps per step.
    #[arg(long)]
    pub swap: Option<usize>,
    /// Rotate the even sublattice every step.
    #[arg(long)]
    pub directed: bool,
    /// Perception noise e_R.
    #[arg(long)]
    pub er: Option<f64>,
    /// Action noise e_A.
    #[arg(long)]
    pub ea: Option<f64>,
    /// Maximum consecutive donations; 0 disables fatigue.
    #[arg(long)]
    pub fatigue: Option<u32>,
    /// Mutation probability.
    #[arg(long)]
    pub pm: Option<f64>,
    #[arg(long)]
    pub generations: Option<usize>,
    /// Iterations per generation.
    #[arg(long = "gen-iters")]
    pub gen_iters: Option<usize>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_init)]
    pub init: Option<InitKind>,
    /// 0/1 text file for `--init file`.
    #[arg(long = "init-file")]
    pub init_file: Option<PathBuf>,
    /// Output prefix.
    #[arg(long)]
    pub out: Option<String>,
    /// Sweep axis: swap, er or ea.
    #[arg(long, value_parser = parse_axis)]
    pub axis: Option<Axis>,
    /// Comma list; `start:stop:step` items expand inclusively.
    #[arg(long)]
    pub values: Option<String>,
    /// Also write the concatenated site bitmap of every generation.
    #[arg(long)]
    pub sites: bool,
    /// Image-score rounds per run.
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_pairing)]
    pub pairing: Vec<PairingKind>,
    /// Image-score noise levels: `x` or `a_p/a_e`, comma-separated.
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long = "swap-levels", value_delimiter = ',')]
    pub swap_levels: Vec<usize>,
    #[arg(long)]
    pub benefit: Option<f64>,
    #[arg(long)]
    pub cost: Option<f64>,
}

fn parse_init(s: &str) -> Result<InitKind, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_pairing(s: &str) -> Result<PairingKind, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

impl Cli {
    /// Loads `--config` (if any) and layers the flags on top.
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let (command, flags) = self.command.split();
        let mut cfg = match &flags.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.command = command;
        flags.apply(&mut cfg)?;
        Ok(cfg)
    }
}

impl Flags {
    pub fn apply(self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if !self.rules.is_empty() || !self.raw_rules.is_empty() {
            cfg.rules = self.rules;
            cfg.raw_rules = self.raw_rules;
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            )*};
        }
        set!(
            n,
            steps,
            swap,
            er,
            ea,
            fatigue,
            pm,
            generations,
            gen_iters,
            replicates,
            seed,
            init,
            axis,
            out,
            rounds,
            benefit,
            cost
        );
        if self.directed {
            cfg.directed = true;
        }
        if self.sites {
            cfg.sites = true;
        }
        if let Some(path) = self.init_file {
            cfg.init_file = Some(path);
            cfg.init_states = None;
            if cfg.init != InitKind::File {
                cfg.init = InitKind::File;
            }
        }
        if let Some(values) = self.values {
            cfg.values = parse_values(&values)?;
        }
        if !self.pairing.is_empty() {
            cfg.pairings = self.pairing;
        }
        if let Some(noise) = self.noise {
            cfg.noise_levels = parse_noise_levels(&noise)?;
        }
        if !self.swap_levels.is_empty() {
            cfg.swap_levels = self.swap_levels;
        }
        if cfg.init != InitKind::File {
            cfg.init_states = None;
        }
        Ok(())
    }
}
