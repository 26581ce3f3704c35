//! Generational strategy dynamics over the twelve curated rules.
//!
//! Each generation plays the lattice game for a fixed number of iterations
//! with every agent following its own rule. Fitness is the donation value an
//! agent received. Offspring are drawn fitness-proportionally, mutate with a
//! small probability towards rules whose Wolfram codes differ in few bits,
//! and are scattered over the ring in a fresh random order.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use crate::engine::{
    check_probability, InitPattern, MobilityParams, NoiseParams, Params, Strategy,
    StrategyAssignment, World,
};
use crate::error::{Error, Result};
use crate::metrics::SpaceTime;
use crate::rules::{StrategyDescriptor, CURATED};
use crate::seed::{rng_from_seed, SimRng};

/// Fatigue window used when fatigue is switched on without an explicit length.
pub const DEFAULT_FATIGUE_LIMIT: u32 = 3;

/// Number of differing bits between two rule numbers.
pub fn hamming(rule_a: u8, rule_b: u8) -> u32 {
    (rule_a ^ rule_b).count_ones()
}

/// Row-stochastic strategy transition matrix: off-diagonal weights
/// `1 - d/8` for Hamming distance `d`, normalized per row; zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct MutationMatrix {
    rules: Vec<u8>,
    probs: Vec<f64>,
}

impl MutationMatrix {
    pub fn new(rules: &[u8]) -> Result<Self> {
        for (i, &r) in rules.iter().enumerate() {
            if rules[..i].contains(&r) {
                return Err(Error::DuplicateRule(r));
            }
        }
        let k = rules.len();
        let mut probs = vec![0.0; k * k];
        for (i, &from) in rules.iter().enumerate() {
            let row = &mut probs[i * k..(i + 1) * k];
            for (j, &to) in rules.iter().enumerate() {
                if i != j {
                    row[j] = 1.0 - hamming(from, to) as f64 / 8.0;
                }
            }
            let total: f64 = row.iter().sum();
            if total <= 0.0 {
                return Err(Error::UnreachableRow(from));
            }
            row.iter_mut().for_each(|p| *p /= total);
        }
        Ok(MutationMatrix {
            rules: rules.to_vec(),
            probs,
        })
    }

    /// Matrix over [`CURATED`] in canonical order.
    pub fn curated() -> Self {
        Self::new(&crate::rules::curated_rule_numbers()).expect("curated rules are distinct")
    }

    pub fn rules(&self) -> &[u8] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn index_of(&self, rule: u8) -> Option<usize> {
        self.rules.iter().position(|&r| r == rule)
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.probs[from * self.len() + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        let k = self.len();
        &self.probs[from * k..(from + 1) * k]
    }

    /// Samples a successor index of `from`.
    pub fn sample<R: Rng + ?Sized>(&self, from: usize, rng: &mut R) -> usize {
        let row = self.row(from);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last_reachable = from;
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last_reachable = j;
                if u < acc {
                    return j;
                }
            }
        }
        // Rounding left `acc` a hair under 1.
        last_reachable
    }
}

/// Fitness-proportional (roulette wheel) choice of `fitness.len()` parents.
/// Falls back to uniform draws when every fitness is zero.
pub fn select_parents<R: Rng + ?Sized>(fitness: &[f64], rng: &mut R) -> Vec<usize> {
    let n = fitness.len();
    let mut cumulative = Vec::with_capacity(n);
    let mut total = 0.0;
    for &f in fitness {
        total += f.max(0.0);
        cumulative.push(total);
    }
    if total <= 0.0 {
        return (0..n).map(|_| rng.random_range(0..n)).collect();
    }
    (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            cumulative.partition_point(|&c| c <= u).min(n - 1)
        })
        .collect()
}

/// Keeps `parent` with probability `1 - p_m`, otherwise samples its matrix row.
pub fn mutate<R: Rng + ?Sized>(
    parent: usize,
    mutation_probability: f64,
    matrix: &MutationMatrix,
    rng: &mut R,
) -> usize {
    if mutation_probability > 0.0 && rng.random_bool(mutation_probability) {
        matrix.sample(parent, rng)
    } else {
        parent
    }
}

/// Total donation value an agent id received over a run.
pub fn fitness(history: &crate::metrics::History, agent_id: usize) -> f64 {
    (0..history.steps())
        .map(|t| history.received_row(t)[agent_id])
        .sum()
}

/// Initial strategy layout of generation 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialStrategies {
    /// Each agent draws one of the twelve rules uniformly.
    Random,
    /// Every agent starts with the curated rule at this index.
    Homogeneous(usize),
    /// Explicit curated-rule indices in position order.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionParams {
    pub population: usize,
    pub generations: usize,
    pub iterations_per_generation: usize,
    pub mutation_probability: f64,
    /// 0 disables fatigue.
    pub fatigue_limit: u32,
    pub noise: NoiseParams,
    pub mobility: MobilityParams,
    pub initial: InitialStrategies,
    /// Keep every generation's site space-time rows.
    pub record_sites: bool,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        EvolutionParams {
            population: 100,
            generations: 5000,
            iterations_per_generation: 300,
            mutation_probability: 0.001,
            fatigue_limit: 0,
            noise: NoiseParams::default(),
            mobility: MobilityParams::default(),
            initial: InitialStrategies::Random,
            record_sites: false,
        }
    }
}

impl EvolutionParams {
    pub fn validate(&self) -> Result<()> {
        if self.population < 3 {
            return Err(Error::PopulationTooSmall(self.population));
        }
        if self.generations == 0 {
            return Err(Error::InvalidParameter("generations must be at least 1"));
        }
        if self.iterations_per_generation == 0 {
            return Err(Error::NoSteps);
        }
        check_probability("p_m", self.mutation_probability)?;
        self.noise.validate()?;
        self.mobility.validate(self.population)?;
        match &self.initial {
            InitialStrategies::Random => {}
            InitialStrategies::Homogeneous(i) if *i < CURATED.len() => {}
            InitialStrategies::Homogeneous(_) => {
                return Err(Error::InvalidParameter("initial rule index out of range"))
            }
            InitialStrategies::Explicit(list) => {
                if list.len() != self.population {
                    return Err(Error::LengthMismatch {
                        expected: self.population,
                        got: list.len(),
                    });
                }
                if list.iter().any(|&i| i >= CURATED.len()) {
                    return Err(Error::InvalidParameter("initial rule index out of range"));
                }
            }
        }
        Ok(())
    }

    fn engine_params(&self) -> Params {
        Params {
            noise: self.noise,
            mobility: self.mobility,
            fatigue_limit: self.fatigue_limit,
        }
    }
}

/// Per-generation rule abundances, indexed like [`CURATED`].
///
/// Row `g` counts the population that plays generation `g`; the final row
/// (index `generations`) is the population produced by the last generation
/// and has no fitness entries.
#[derive(Debug, Clone, PartialEq)]
pub struct AbundanceSeries {
    pub rules: [u8; 12],
    pub counts: Vec<[u32; 12]>,
    /// Mean fitness over the whole population, per played generation.
    pub mean_fitness: Vec<f64>,
    /// Mean fitness of each rule's agents, `None` where the rule was absent.
    pub mean_fitness_by_rule: Vec<[Option<f64>; 12]>,
}

impl AbundanceSeries {
    /// Index into [`CURATED`] of the most abundant rule in row `g`;
    /// ties go to the lower index.
    pub fn modal_rule(&self, g: usize) -> usize {
        let row = &self.counts[g];
        (0..12).fold(0, |best, i| if row[i] > row[best] { i } else { best })
    }

    pub fn final_counts(&self) -> &[u32; 12] {
        self.counts.last().expect("series holds generation 0")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionOutcome {
    pub abundance: AbundanceSeries,
    /// Longest donation streak any agent reached in any generation.
    pub longest_donation_streak: u32,
    /// Concatenated site rows of every generation (`T + 1` rows each).
    pub sites: Option<SpaceTime>,
}

fn count_rules(strategies: &[usize]) -> [u32; 12] {
    let mut counts = [0u32; 12];
    for &s in strategies {
        counts[s] += 1;
    }
    counts
}

fn strategy_of(index: usize) -> Strategy {
    Strategy::Descriptor(CURATED[index])
}

/// Runs `params.generations` generations from `seed`.
pub fn run_generations(params: &EvolutionParams, seed: u64) -> Result<EvolutionOutcome> {
    params.validate()?;
    let n = params.population;
    let matrix = MutationMatrix::curated();
    let engine_params = params.engine_params();
    let mut rng: SimRng = rng_from_seed(seed);

    let mut strategies: Vec<usize> = match &params.initial {
        InitialStrategies::Random => (0..n).map(|_| rng.random_range(0..CURATED.len())).collect(),
        InitialStrategies::Homogeneous(i) => vec![*i; n],
        InitialStrategies::Explicit(list) => list.clone(),
    };

    let mut series = AbundanceSeries {
        rules: crate::rules::curated_rule_numbers(),
        counts: Vec::with_capacity(params.generations + 1),
        mean_fitness: Vec::with_capacity(params.generations),
        mean_fitness_by_rule: Vec::with_capacity(params.generations),
    };
    series.counts.push(count_rules(&strategies));
    let mut sites = params.record_sites.then(|| SpaceTime::new(n));
    let mut longest_streak = 0;
    let mut fitness_by_id = vec![0.0; n];

    for _ in 0..params.generations {
        let assignment =
            StrategyAssignment::PerAgent(strategies.iter().map(|&s| strategy_of(s)).collect());
        let mut world = World::new(
            n,
            &InitPattern::Random,
            &assignment,
            engine_params,
            rng.next_u64(),
        )?;
        if let Some(sites) = sites.as_mut() {
            sites.push_row(&world.site_states())?;
            for _ in 0..params.iterations_per_generation {
                let record = world.step();
                sites.push_row(&record.site_states)?;
            }
        } else {
            for _ in 0..params.iterations_per_generation {
                world.advance();
            }
        }
        longest_streak = longest_streak.max(world.max_fatigue_streak());

        for agent in world.cells() {
            fitness_by_id[agent.id()] = agent.donations_received();
        }
        let mut sum = [0.0; 12];
        let mut count = [0u32; 12];
        for (&s, &f) in strategies.iter().zip(&fitness_by_id) {
            sum[s] += f;
            count[s] += 1;
        }
        series
            .mean_fitness
            .push(fitness_by_id.iter().sum::<f64>() / n as f64);
        series.mean_fitness_by_rule.push(core::array::from_fn(|i| {
            (count[i] > 0).then(|| sum[i] / count[i] as f64)
        }));

        let parents = select_parents(&fitness_by_id, &mut rng);
        let mut offspring: Vec<usize> = parents
            .iter()
            .map(|&p| {
                mutate(
                    strategies[p],
                    params.mutation_probability,
                    &matrix,
                    &mut rng,
                )
            })
            .collect();
        offspring.shuffle(&mut rng);
        strategies = offspring;
        series.counts.push(count_rules(&strategies));
    }

    Ok(EvolutionOutcome {
        abundance: series,
        longest_donation_streak: longest_streak,
        sites,
    })
}

/// Descriptor for a curated index, for callers that label output columns.
pub fn curated_descriptor(index: usize) -> Option<StrategyDescriptor> {
    CURATED.get(index).copied()
}
