//! Synchronous lattice simulation under periodic boundaries.
//!
//! One [`World::step`] runs these phases, every decision reading the
//! pre-step snapshot of states:
//!
//! 1. perception (each donor may misread either neighbor with probability `e_R`),
//!    fatigue check and donation decision;
//! 2. delivery of donation shares to the actual neighbors;
//! 3. state update (donors turn high unless action noise records them low);
//! 4. fatigue bookkeeping;
//! 5. directed shift of the even sublattice, if enabled;
//! 6. `k` random pair swaps.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::metrics::History;
use crate::rules::{DonationDecision, Neighborhood, Reputation, RuleTable, StrategyDescriptor};
use crate::seed::{rng_from_seed, SimRng};

/// What drives an agent's behavior.
///
/// `Raw` tables only decide the next state; they deliver no donations and so
/// never show up in the tallies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Descriptor(StrategyDescriptor),
    Raw(RuleTable),
}

impl Strategy {
    pub fn rule_table(&self) -> RuleTable {
        match self {
            Strategy::Descriptor(desc) => desc.rule_table(),
            Strategy::Raw(table) => *table,
        }
    }

    pub fn rule_number(&self) -> u8 {
        self.rule_table().number()
    }

    fn compile(&self) -> Compiled {
        let mut compiled = Compiled {
            acts: [false; 8],
            decisions: [DonationDecision::NONE; 8],
        };
        for k in 0..8 {
            match self {
                Strategy::Descriptor(desc) => {
                    let nb = Neighborhood::from_index(k);
                    let decision =
                        crate::rules::decide_donation(*desc, nb.left, nb.center, nb.right);
                    compiled.acts[k] = decision.donates();
                    compiled.decisions[k] = decision;
                }
                Strategy::Raw(table) => compiled.acts[k] = table.output_at(k),
            }
        }
        compiled
    }
}

impl From<StrategyDescriptor> for Strategy {
    fn from(desc: StrategyDescriptor) -> Self {
        Strategy::Descriptor(desc)
    }
}

impl From<RuleTable> for Strategy {
    fn from(table: RuleTable) -> Self {
        Strategy::Raw(table)
    }
}

/// Per-neighborhood lookup, evaluated once per agent instead of per step.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Compiled {
    acts: [bool; 8],
    decisions: [DonationDecision; 8],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    id: usize,
    strategy: Strategy,
    compiled: Compiled,
    state: Reputation,
    fatigue_streak: u32,
    donations_received: f64,
    donations_made: f64,
}

impl Agent {
    pub fn new(id: usize, strategy: Strategy, state: Reputation) -> Self {
        Agent {
            id,
            strategy,
            compiled: strategy.compile(),
            state,
            fatigue_streak: 0,
            donations_received: 0.0,
            donations_made: 0.0,
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn state(&self) -> Reputation {
        self.state
    }

    /// Consecutive iterations ending now in which the agent donated.
    pub fn fatigue_streak(&self) -> u32 {
        self.fatigue_streak
    }

    pub fn donations_received(&self) -> f64 {
        self.donations_received
    }

    pub fn donations_made(&self) -> f64 {
        self.donations_made
    }
}

/// Perception and action noise probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseParams {
    /// Probability that a donor misreads a neighbor's reputation.
    pub perception: f64,
    /// Probability that a donation is recorded as a defection.
    pub action: f64,
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        check_probability("e_R", self.perception)?;
        check_probability("e_A", self.action)
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MobilityParams {
    /// Random transpositions applied after every step.
    pub swap_pairs: usize,
    /// Rotate the even sublattice two cells to the right after every step.
    pub directed: bool,
    /// Upper bound on `swap_pairs`; the population size when `None`.
    pub swap_cap: Option<usize>,
}

impl MobilityParams {
    pub fn validate(&self, population: usize) -> Result<()> {
        let cap = self.swap_cap.unwrap_or(population);
        if self.swap_pairs > cap {
            return Err(Error::TooManySwaps {
                requested: self.swap_pairs,
                cap,
            });
        }
        if self.directed && population % 2 != 0 {
            return Err(Error::OddDirectedShift(population));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Params {
    pub noise: NoiseParams,
    pub mobility: MobilityParams,
    /// Consecutive donations after which an agent must abstain; 0 disables.
    pub fatigue_limit: u32,
}

impl Params {
    pub fn validate(&self, population: usize) -> Result<()> {
        self.noise.validate()?;
        self.mobility.validate(population)
    }
}

/// Initial reputation layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitPattern {
    /// Each cell high with probability 1/2, drawn from the world generator.
    Random,
    /// One high cell at index `N / 2`.
    SingleHighCenter,
    /// High on even indices.
    Checkerboard,
    Explicit(Vec<Reputation>),
}

impl InitPattern {
    pub fn states(&self, population: usize, rng: &mut SimRng) -> Result<Vec<Reputation>> {
        Ok(match self {
            InitPattern::Random => (0..population)
                .map(|_| Reputation::from_bit(rng.random_bool(0.5)))
                .collect(),
            InitPattern::SingleHighCenter => {
                let mut states = vec![Reputation::Low; population];
                states[population / 2] = Reputation::High;
                states
            }
            InitPattern::Checkerboard => (0..population)
                .map(|i| Reputation::from_bit(i % 2 == 0))
                .collect(),
            InitPattern::Explicit(states) => {
                if states.len() != population {
                    return Err(Error::LengthMismatch {
                        expected: population,
                        got: states.len(),
                    });
                }
                states.clone()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StrategyAssignment {
    Uniform(Strategy),
    PerAgent(Vec<Strategy>),
}

impl StrategyAssignment {
    fn get(&self, index: usize) -> Strategy {
        match self {
            StrategyAssignment::Uniform(s) => *s,
            StrategyAssignment::PerAgent(list) => list[index],
        }
    }
}

impl<T: Into<Strategy>> From<T> for StrategyAssignment {
    fn from(strategy: T) -> Self {
        StrategyAssignment::Uniform(strategy.into())
    }
}

/// Which neighbor reads a donor got wrong in one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PerceptionDraw {
    pub flip_left: bool,
    pub flip_right: bool,
}

impl PerceptionDraw {
    /// Draws nothing when `probability` is zero so the noise-free path never
    /// touches the generator.
    pub fn sample(probability: f64, rng: &mut SimRng) -> Self {
        if probability <= 0.0 {
            return PerceptionDraw::default();
        }
        PerceptionDraw {
            flip_left: rng.random_bool(probability),
            flip_right: rng.random_bool(probability),
        }
    }
}

/// Outcome of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// States by grid position after mobility.
    pub site_states: Vec<Reputation>,
    /// States by agent id.
    pub agent_states: Vec<Reputation>,
    /// Whether the agent delivered a donation this step, by agent id.
    pub per_agent_donated: Vec<bool>,
    /// Donation value received this step, by agent id.
    pub per_agent_received: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct World {
    cells: Vec<Agent>,
    params: Params,
    iteration: u64,
    rng: SimRng,
    max_streak: u32,
    snapshot: Vec<Reputation>,
    acted: Vec<bool>,
    delivered: Vec<bool>,
    received: Vec<f64>,
}

impl World {
    /// Builds a world of `population` agents with ids `0..N` in position order.
    ///
    /// The generator is seeded from `seed`; a random initial pattern is the
    /// first thing drawn from it.
    pub fn new(
        population: usize,
        init: &InitPattern,
        strategies: &StrategyAssignment,
        params: Params,
        seed: u64,
    ) -> Result<World> {
        if population < 3 {
            return Err(Error::PopulationTooSmall(population));
        }
        if let StrategyAssignment::PerAgent(list) = strategies {
            if list.len() != population {
                return Err(Error::LengthMismatch {
                    expected: population,
                    got: list.len(),
                });
            }
        }
        params.validate(population)?;
        let mut rng = rng_from_seed(seed);
        let states = init.states(population, &mut rng)?;
        let cells = states
            .into_iter()
            .enumerate()
            .map(|(i, state)| Agent::new(i, strategies.get(i), state))
            .collect();
        Ok(World {
            cells,
            params,
            iteration: 0,
            rng,
            max_streak: 0,
            snapshot: vec![Reputation::Low; population],
            acted: vec![false; population],
            delivered: vec![false; population],
            received: vec![0.0; population],
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Agent] {
        &self.cells
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Longest donation streak any agent has reached so far.
    pub fn max_fatigue_streak(&self) -> u32 {
        self.max_streak
    }

    pub fn site_states(&self) -> Vec<Reputation> {
        self.cells.iter().map(|a| a.state).collect()
    }

    /// States keyed by agent id.
    pub fn agent_states(&self) -> Vec<Reputation> {
        let mut out = vec![Reputation::Low; self.cells.len()];
        for agent in &self.cells {
            out[agent.id] = agent.state;
        }
        out
    }

    /// Agents keyed by id.
    pub fn agents_by_id(&self) -> Vec<&Agent> {
        let mut out: Vec<&Agent> = self.cells.iter().collect();
        out.sort_unstable_by_key(|a| a.id);
        out
    }

    pub fn step(&mut self) -> StepRecord {
        self.interact();
        let n = self.cells.len();
        let mut per_agent_donated = vec![false; n];
        let mut per_agent_received = vec![0.0; n];
        for (pos, agent) in self.cells.iter().enumerate() {
            per_agent_donated[agent.id] = self.delivered[pos];
            per_agent_received[agent.id] = self.received[pos];
        }
        self.move_agents();
        StepRecord {
            site_states: self.site_states(),
            agent_states: self.agent_states(),
            per_agent_donated,
            per_agent_received,
        }
    }

    /// Same as [`World::step`] without building a record.
    pub fn advance(&mut self) {
        self.interact();
        self.move_agents();
    }

    /// Phases 1 to 4.
    fn interact(&mut self) {
        let n = self.cells.len();
        let NoiseParams { perception, action } = self.params.noise;
        let limit = self.params.fatigue_limit;

        for (slot, agent) in self.snapshot.iter_mut().zip(&self.cells) {
            *slot = agent.state;
        }
        self.received.iter_mut().for_each(|r| *r = 0.0);

        for i in 0..n {
            let left = if i == 0 { n - 1 } else { i - 1 };
            let right = if i + 1 == n { 0 } else { i + 1 };
            let draw = PerceptionDraw::sample(perception, &mut self.rng);
            let perceived = Neighborhood::new(
                flip_if(self.snapshot[left], draw.flip_left),
                self.snapshot[i],
                flip_if(self.snapshot[right], draw.flip_right),
            );
            let agent = &self.cells[i];
            let (act, decision) = if limit > 0 && agent.fatigue_streak >= limit {
                (false, DonationDecision::NONE)
            } else {
                let k = perceived.index();
                (agent.compiled.acts[k], agent.compiled.decisions[k])
            };
            self.acted[i] = act;
            self.delivered[i] = decision.donates();
            self.received[left] += decision.share_left;
            self.received[right] += decision.share_right;
            self.cells[i].donations_made += decision.total();
        }

        for i in 0..n {
            let act = self.acted[i];
            let recorded_high = act && !(action > 0.0 && self.rng.random_bool(action));
            let agent = &mut self.cells[i];
            agent.donations_received += self.received[i];
            agent.state = Reputation::from_bit(recorded_high);
            if act {
                agent.fatigue_streak += 1;
                self.max_streak = self.max_streak.max(agent.fatigue_streak);
            } else {
                agent.fatigue_streak = 0;
            }
        }
        self.iteration += 1;
    }

    /// Phases 5 and 6.
    fn move_agents(&mut self) {
        let n = self.cells.len();
        if self.params.mobility.directed {
            // Even population is checked at construction.
            let _ = directed_shift(&mut self.cells);
        }
        for _ in 0..self.params.mobility.swap_pairs {
            let i = self.rng.random_range(0..n);
            let mut j = self.rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            self.cells.swap(i, j);
        }
    }
}

#[inline]
fn flip_if(state: Reputation, flip: bool) -> Reputation {
    if flip {
        state.flipped()
    } else {
        state
    }
}

/// Moves the occupant of every even position two cells to the right,
/// wrapping around; odd positions stay put.
pub fn directed_shift<T>(cells: &mut [T]) -> Result<()> {
    let n = cells.len();
    if n % 2 != 0 {
        return Err(Error::OddDirectedShift(n));
    }
    for m in (1..n / 2).rev() {
        cells.swap(2 * m, 2 * (m - 1));
    }
    Ok(())
}

/// Steps `world` `steps` times, recording the initial row and every step.
pub fn run(world: &mut World, steps: usize) -> Result<History> {
    if steps == 0 {
        return Err(Error::NoSteps);
    }
    let mut history = History::with_initial(world.site_states(), world.agent_states(), steps);
    for _ in 0..steps {
        let record = world.step();
        history.push(&record);
    }
    Ok(history)
}
