//! The four subcommands. Each one has a pure part that computes rows and a
//! thin part that writes them next to a `meta.json`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use donation_ca_core::engine::Strategy;
use donation_ca_core::evolution::{
    run_generations, EvolutionOutcome, EvolutionParams, InitialStrategies,
};
use donation_ca_core::imagescore::{run_image_game, ImageGameParams};
use donation_ca_core::metrics::{agent_reputation_counts, outcome_of, ReplicateOutcome};
use donation_ca_core::{
    mix64, run, Experiment, History, MobilityParams, NoiseParams, Params, StrategyAssignment,
    World, CURATED,
};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::{strategy_label, Axis, Command, Meta, PairingKind, RunConfig};
use crate::error::CliError;
use crate::pbm::write_pbm;

pub const METRICS_HEADER: [&str; 5] = [
    "agent_id",
    "rule",
    "high_count",
    "donations_received",
    "donations_made",
];
pub const SWEEP_HEADER: [&str; 6] = [
    "rule",
    "axis_value",
    "mean_median_reputation",
    "mean_median_donations",
    "replicates",
    "stddev",
];
pub const IMAGESCORE_HEADER: [&str; 6] =
    ["pairing", "a_p", "a_e", "swap", "mean_payoff", "replicates"];

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(path)?))
}

fn write_meta(cfg: &RunConfig, strategies: &[Strategy]) -> Result<PathBuf, CliError> {
    let path = cfg.path_with(".meta.json");
    let meta = Meta {
        config: cfg.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        rule_numbers: strategies.iter().map(Strategy::rule_number).collect(),
    };
    let mut out = create(&path)?;
    serde_json::to_writer_pretty(&mut out, &meta)?;
    writeln!(out).map_err(|e| CliError::io(&path, e))?;
    out.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn announce(strategies: &[Strategy]) {
    for s in strategies {
        eprintln!("rule {} = Wolfram {}", strategy_label(s), s.rule_number());
    }
}

fn engine_params(cfg: &RunConfig) -> Params {
    Params {
        noise: NoiseParams {
            perception: cfg.er,
            action: cfg.ea,
        },
        mobility: MobilityParams {
            swap_pairs: cfg.swap,
            directed: cfg.directed,
            swap_cap: None,
        },
        fatigue_limit: cfg.fatigue,
    }
}

/// Single run of one rule from `cfg.seed`.
pub fn run_history(cfg: &mut RunConfig) -> Result<(Strategy, History), CliError> {
    let strategy = cfg.single_strategy()?;
    let init = cfg.init_pattern()?;
    let mut world = World::new(
        cfg.n,
        &init,
        &StrategyAssignment::Uniform(strategy),
        engine_params(cfg),
        cfg.seed,
    )?;
    let history = run(&mut world, cfg.steps)?;
    Ok((strategy, history))
}

/// Writes `<out>.pbm`, `<out>.metrics.csv` and `<out>.meta.json`.
pub fn cmd_run(mut cfg: RunConfig) -> Result<Vec<PathBuf>, CliError> {
    cfg.command = Command::Run;
    let (strategy, history) = run_history(&mut cfg)?;
    announce(&[strategy]);

    let pbm_path = cfg.path_with(".pbm");
    let mut out = create(&pbm_path)?;
    write_pbm(&mut out, history.site_matrix())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(&pbm_path, e))?;

    let metrics_path = cfg.path_with(".metrics.csv");
    let mut w = csv_writer(&metrics_path)?;
    w.write_record(METRICS_HEADER)?;
    let label = strategy_label(&strategy);
    let high = agent_reputation_counts(&history);
    let received = history.total_received();
    let made = history.donation_counts();
    for id in 0..history.population() {
        w.write_record([
            id.to_string(),
            label.clone(),
            high[id].to_string(),
            fmt(received[id]),
            made[id].to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(&metrics_path, e))?;

    let meta_path = write_meta(&cfg, &[strategy])?;
    Ok(vec![pbm_path, metrics_path, meta_path])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rule: String,
    pub rule_number: u8,
    pub axis_value: f64,
    pub mean_median_reputation: f64,
    pub mean_median_donations: f64,
    pub replicates: usize,
    /// Sample standard deviation of the per-replicate median reputation.
    pub stddev: f64,
}

fn sample_stddev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn axis_params(cfg: &RunConfig, value: f64) -> Result<Params, CliError> {
    let mut params = engine_params(cfg);
    match cfg.axis {
        Axis::Swap => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(CliError::config(format!(
                    "swap values must be non-negative integers, got {value}"
                )));
            }
            params.mobility.swap_pairs = value as usize;
        }
        Axis::Er => params.noise.perception = value,
        Axis::Ea => params.noise.action = value,
    }
    params.validate(cfg.n)?;
    Ok(params)
}

/// One row per (rule, axis value), in rule-then-value order. Replicate `r` of
/// value index `i` is seeded `mix64(seed, i, r)` for every rule.
pub fn sweep_rows(cfg: &mut RunConfig, pool: &ThreadPool) -> Result<Vec<SweepRow>, CliError> {
    if cfg.values.is_empty() {
        return Err(CliError::config("sweep needs a non-empty --values list"));
    }
    if cfg.replicates == 0 {
        return Err(CliError::config("--replicates must be at least 1"));
    }
    let strategies = cfg.strategies()?;
    let init = cfg.init_pattern()?;
    let params: Vec<Params> = cfg
        .values
        .iter()
        .map(|&v| axis_params(cfg, v))
        .collect::<Result<_, _>>()?;

    let reps = cfg.replicates;
    let per_rule = cfg.values.len() * reps;
    let jobs = strategies.len() * per_rule;
    let cfg_ref = &*cfg;
    let outcomes: Vec<ReplicateOutcome> = pool.install(|| {
        (0..jobs)
            .into_par_iter()
            .map(|job| {
                let (s, rest) = (job / per_rule, job % per_rule);
                let (i, r) = (rest / reps, rest % reps);
                let experiment = Experiment {
                    population: cfg_ref.n,
                    steps: cfg_ref.steps,
                    init: init.clone(),
                    strategies: StrategyAssignment::Uniform(strategies[s]),
                    params: params[i],
                };
                let history = experiment.history(mix64(cfg_ref.seed, i as u64, r as u64))?;
                Ok(outcome_of(&history)?)
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let mut rows = Vec::with_capacity(strategies.len() * cfg.values.len());
    for (chunk_index, chunk) in outcomes.chunks(reps).enumerate() {
        let strategy = strategies[chunk_index / cfg.values.len()];
        let value = cfg.values[chunk_index % cfg.values.len()];
        let reputations: Vec<f64> = chunk.iter().map(|o| o.median_reputation).collect();
        let r = reps as f64;
        rows.push(SweepRow {
            rule: strategy_label(&strategy),
            rule_number: strategy.rule_number(),
            axis_value: value,
            mean_median_reputation: reputations.iter().sum::<f64>() / r,
            mean_median_donations: chunk.iter().map(|o| o.median_donations).sum::<f64>() / r,
            replicates: reps,
            stddev: sample_stddev(&reputations),
        });
    }
    Ok(rows)
}

/// Writes `<out>.sweep.csv` and `<out>.meta.json`.
pub fn cmd_sweep(mut cfg: RunConfig, pool: &ThreadPool) -> Result<Vec<PathBuf>, CliError> {
    cfg.command = Command::Sweep;
    let strategies = cfg.strategies()?;
    announce(&strategies);
    let rows = sweep_rows(&mut cfg, pool)?;
    let path = cfg.path_with(".sweep.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(SWEEP_HEADER)?;
    for row in &rows {
        w.write_record([
            row.rule.clone(),
            fmt(row.axis_value),
            fmt(row.mean_median_reputation),
            fmt(row.mean_median_donations),
            row.replicates.to_string(),
            fmt(row.stddev),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    let meta = write_meta(&cfg, &strategies)?;
    Ok(vec![path, meta])
}

/// No rule selection starts from a random mix; a single curated rule starts
/// homogeneous.
fn initial_strategies(cfg: &RunConfig) -> Result<InitialStrategies, CliError> {
    if cfg.rules.is_empty() && cfg.raw_rules.is_empty() {
        return Ok(InitialStrategies::Random);
    }
    let rule = cfg.single_strategy()?.rule_number();
    CURATED
        .iter()
        .position(|d| d.rule_number() == rule)
        .map(InitialStrategies::Homogeneous)
        .ok_or_else(|| {
            CliError::config(format!(
                "rule {rule} is not one of the twelve evolvable rules"
            ))
        })
}

pub fn evolution_params(cfg: &RunConfig) -> Result<EvolutionParams, CliError> {
    let engine = engine_params(cfg);
    Ok(EvolutionParams {
        population: cfg.n,
        generations: cfg.generations,
        iterations_per_generation: cfg.gen_iters,
        mutation_probability: cfg.pm,
        fatigue_limit: cfg.fatigue,
        noise: engine.noise,
        mobility: engine.mobility,
        initial: initial_strategies(cfg)?,
        record_sites: cfg.sites,
    })
}

pub fn evolve_outcome(cfg: &RunConfig) -> Result<EvolutionOutcome, CliError> {
    Ok(run_generations(&evolution_params(cfg)?, cfg.seed)?)
}

pub fn evolve_header() -> Vec<String> {
    let mut header = vec!["generation".to_string()];
    header.extend(CURATED.iter().map(|d| format!("r{}", d.rule_number())));
    header.push("mean_fitness".to_string());
    header
}

/// Writes `<out>.evolve.csv`, optionally `<out>.evolve.pbm`, and `<out>.meta.json`.
pub fn cmd_evolve(mut cfg: RunConfig) -> Result<Vec<PathBuf>, CliError> {
    cfg.command = Command::Evolve;
    let outcome = evolve_outcome(&cfg)?;
    let mut paths = Vec::new();

    let path = cfg.path_with(".evolve.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(evolve_header())?;
    let series = &outcome.abundance;
    for (g, counts) in series.counts.iter().enumerate() {
        let mut record = vec![g.to_string()];
        record.extend(counts.iter().map(u32::to_string));
        record.push(
            series
                .mean_fitness
                .get(g)
                .map(|&f| fmt(f))
                .unwrap_or_default(),
        );
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    paths.push(path);

    if let Some(sites) = &outcome.sites {
        let pbm_path = cfg.path_with(".evolve.pbm");
        let mut out = create(&pbm_path)?;
        write_pbm(&mut out, sites)
            .and_then(|_| out.flush())
            .map_err(|e| CliError::io(&pbm_path, e))?;
        paths.push(pbm_path);
    }
    let strategies: Vec<Strategy> = CURATED.iter().map(|&d| Strategy::Descriptor(d)).collect();
    paths.push(write_meta(&cfg, &strategies)?);
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageScoreRow {
    pub pairing: PairingKind,
    pub a_p: f64,
    pub a_e: f64,
    pub swap: usize,
    pub mean_payoff: f64,
    pub replicates: usize,
}

/// Rows ordered pairing, noise level, swap level. Both pairings share the
/// seeds `mix64(seed, level, r)`, where `level` enumerates (noise, swap).
pub fn imagescore_rows(cfg: &RunConfig, pool: &ThreadPool) -> Result<Vec<ImageScoreRow>, CliError> {
    if cfg.replicates == 0 {
        return Err(CliError::config("--replicates must be at least 1"));
    }
    if cfg.pairings.is_empty() || cfg.noise_levels.is_empty() || cfg.swap_levels.is_empty() {
        return Err(CliError::config(
            "imagescore needs pairings, noise levels and swap levels",
        ));
    }
    let mut points = Vec::new();
    for &pairing in &cfg.pairings {
        for (ni, &(a_p, a_e)) in cfg.noise_levels.iter().enumerate() {
            for (si, &swap) in cfg.swap_levels.iter().enumerate() {
                let params = ImageGameParams {
                    population: cfg.n,
                    rounds: cfg.rounds,
                    benefit: cfg.benefit,
                    cost: cfg.cost,
                    pairing: pairing.pairing(),
                    swap_pairs: swap,
                    perception_noise: a_p,
                    action_noise: a_e,
                    ..ImageGameParams::default()
                };
                params.validate()?;
                let level = (ni * cfg.swap_levels.len() + si) as u64;
                points.push((pairing, a_p, a_e, swap, params, level));
            }
        }
    }
    let reps = cfg.replicates;
    let payoffs: Vec<f64> = pool.install(|| {
        (0..points.len() * reps)
            .into_par_iter()
            .map(|job| {
                let (p, r) = (job / reps, job % reps);
                let (_, _, _, _, params, level) = &points[p];
                Ok(run_image_game(params, mix64(cfg.seed, *level, r as u64))?)
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    Ok(points
        .iter()
        .zip(payoffs.chunks(reps))
        .map(|(&(pairing, a_p, a_e, swap, _, _), chunk)| ImageScoreRow {
            pairing,
            a_p,
            a_e,
            swap,
            mean_payoff: chunk.iter().sum::<f64>() / reps as f64,
            replicates: reps,
        })
        .collect())
}

/// Writes `<out>.imagescore.csv` and `<out>.meta.json`.
pub fn cmd_imagescore(mut cfg: RunConfig, pool: &ThreadPool) -> Result<Vec<PathBuf>, CliError> {
    cfg.command = Command::Imagescore;
    let rows = imagescore_rows(&cfg, pool)?;
    let path = cfg.path_with(".imagescore.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(IMAGESCORE_HEADER)?;
    for row in &rows {
        w.write_record([
            row.pairing.label().to_string(),
            fmt(row.a_p),
            fmt(row.a_e),
            row.swap.to_string(),
            fmt(row.mean_payoff),
            row.replicates.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    let meta = write_meta(&cfg, &[])?;
    Ok(vec![path, meta])
}

/// Dispatches on `cfg.command`.
pub fn execute(cfg: RunConfig, pool: &ThreadPool) -> Result<Vec<PathBuf>, CliError> {
    match cfg.command {
        Command::Run => cmd_run(cfg),
        Command::Sweep => cmd_sweep(cfg, pool),
        Command::Evolve => cmd_evolve(cfg),
        Command::Imagescore => cmd_imagescore(cfg, pool),
    }
}
