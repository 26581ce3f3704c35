//! Image-score donation game with nearest-neighbor pairing.
//!
//! Agents carry a bounded integer image and a threshold strategy `k`. In
//! every round a random donor meets one recipient and donates when it judges
//! the recipient's image to be at least `k`. Donating raises the donor's
//! image, refusing lowers it. Recipients are either one of the donor's two
//! lattice neighbors or any other agent; random pair swaps mix the lattice
//! between rounds.

use alloc::vec::Vec;

use rand::Rng;

use crate::engine::check_probability;
use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pairing {
    /// Recipient is the donor's left or right lattice neighbor.
    AdjacentNeighbor,
    /// Recipient is any other agent.
    RandomPair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageGameParams {
    pub population: usize,
    /// Donor-recipient interactions per run.
    pub rounds: usize,
    pub benefit: f64,
    pub cost: f64,
    pub pairing: Pairing,
    /// Random position swaps after each round.
    pub swap_pairs: usize,
    /// Probability that the donor's judgment of the recipient is inverted.
    pub perception_noise: f64,
    /// Probability that a donation is recorded as a refusal.
    pub action_noise: f64,
    pub image_min: i32,
    pub image_max: i32,
    pub strategy_min: i32,
    pub strategy_max: i32,
}

impl Default for ImageGameParams {
    fn default() -> Self {
        ImageGameParams {
            population: 100,
            rounds: 10_000,
            benefit: 1.0,
            cost: 0.1,
            pairing: Pairing::AdjacentNeighbor,
            swap_pairs: 0,
            perception_noise: 0.0,
            action_noise: 0.0,
            image_min: -5,
            image_max: 5,
            strategy_min: -5,
            strategy_max: 6,
        }
    }
}

impl ImageGameParams {
    pub fn validate(&self) -> Result<()> {
        if self.population < 3 {
            return Err(Error::PopulationTooSmall(self.population));
        }
        // Written negated so that NaN is rejected too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.cost < self.benefit) {
            return Err(Error::InvalidParameter("cost must be below benefit"));
        }
        if self.image_min > self.image_max {
            return Err(Error::InvalidParameter("empty image range"));
        }
        if self.strategy_min > self.strategy_max {
            return Err(Error::InvalidParameter("empty strategy range"));
        }
        if !(self.image_min..=self.image_max).contains(&0) {
            return Err(Error::InvalidParameter("image range must contain 0"));
        }
        check_probability("a_p", self.perception_noise)?;
        check_probability("a_e", self.action_noise)?;
        if self.swap_pairs > self.population {
            return Err(Error::TooManySwaps {
                requested: self.swap_pairs,
                cap: self.population,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredAgent {
    pub id: usize,
    pub strategy_k: i32,
    pub image: i32,
    pub position: usize,
    received: u64,
    given: u64,
    benefit: f64,
    cost: f64,
}

impl ScoredAgent {
    pub fn payoff(&self) -> f64 {
        self.received as f64 * self.benefit - self.given as f64 * self.cost
    }

    pub fn donations_received(&self) -> u64 {
        self.received
    }

    pub fn donations_given(&self) -> u64 {
        self.given
    }
}

/// Result of one round, by agent id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundOutcome {
    pub donor: usize,
    pub recipient: usize,
    pub donated: bool,
}

#[derive(Debug, Clone)]
pub struct ImageGame {
    /// Indexed by position.
    agents: Vec<ScoredAgent>,
    params: ImageGameParams,
    rng: SimRng,
    donations: u64,
    rounds: u64,
}

impl ImageGame {
    /// Images start at 0; thresholds are drawn uniformly from the strategy range.
    pub fn new(params: ImageGameParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut rng = rng_from_seed(seed);
        let agents = (0..params.population)
            .map(|i| ScoredAgent {
                id: i,
                strategy_k: rng.random_range(params.strategy_min..=params.strategy_max),
                image: 0,
                position: i,
                received: 0,
                given: 0,
                benefit: params.benefit,
                cost: params.cost,
            })
            .collect();
        Ok(ImageGame {
            agents,
            params,
            rng,
            donations: 0,
            rounds: 0,
        })
    }

    /// Replaces the thresholds, in position order.
    pub fn with_strategies(mut self, strategies: &[i32]) -> Result<Self> {
        if strategies.len() != self.agents.len() {
            return Err(Error::LengthMismatch {
                expected: self.agents.len(),
                got: strategies.len(),
            });
        }
        for (agent, &k) in self.agents.iter_mut().zip(strategies) {
            agent.strategy_k = k;
        }
        Ok(self)
    }

    pub fn agents(&self) -> &[ScoredAgent] {
        &self.agents
    }

    pub fn params(&self) -> &ImageGameParams {
        &self.params
    }

    pub fn donations(&self) -> u64 {
        self.donations
    }

    pub fn rounds_played(&self) -> u64 {
        self.rounds
    }

    pub fn play_round(&mut self) -> RoundOutcome {
        let m = self.agents.len();
        let p = self.params;
        let donor = self.rng.random_range(0..m);
        let recipient = match p.pairing {
            Pairing::AdjacentNeighbor => {
                if self.rng.random_bool(0.5) {
                    (donor + m - 1) % m
                } else {
                    (donor + 1) % m
                }
            }
            Pairing::RandomPair => {
                let r = self.rng.random_range(0..m - 1);
                if r >= donor {
                    r + 1
                } else {
                    r
                }
            }
        };

        let mut judged_worthy = self.agents[recipient].image >= self.agents[donor].strategy_k;
        if p.perception_noise > 0.0 && self.rng.random_bool(p.perception_noise) {
            judged_worthy = !judged_worthy;
        }
        let delta = if judged_worthy {
            self.agents[donor].given += 1;
            self.agents[recipient].received += 1;
            self.donations += 1;
            let misrecorded = p.action_noise > 0.0 && self.rng.random_bool(p.action_noise);
            if misrecorded {
                -1
            } else {
                1
            }
        } else {
            -1
        };
        let d = &mut self.agents[donor];
        d.image = (d.image + delta).clamp(p.image_min, p.image_max);
        let outcome = RoundOutcome {
            donor: self.agents[donor].id,
            recipient: self.agents[recipient].id,
            donated: judged_worthy,
        };

        for _ in 0..p.swap_pairs {
            let i = self.rng.random_range(0..m);
            let mut j = self.rng.random_range(0..m - 1);
            if j >= i {
                j += 1;
            }
            self.agents.swap(i, j);
            self.agents[i].position = i;
            self.agents[j].position = j;
        }
        self.rounds += 1;
        outcome
    }

    pub fn play(&mut self, rounds: usize) {
        for _ in 0..rounds {
            self.play_round();
        }
    }

    pub fn average_payoff(&self) -> f64 {
        average_payoff(&self.agents)
    }
}

pub fn average_payoff(agents: &[ScoredAgent]) -> f64 {
    if agents.is_empty() {
        return 0.0;
    }
    agents.iter().map(ScoredAgent::payoff).sum::<f64>() / agents.len() as f64
}

/// Plays `params.rounds` rounds from `seed` and reports the mean payoff.
pub fn run_image_game(params: &ImageGameParams, seed: u64) -> Result<f64> {
    let mut game = ImageGame::new(*params, seed)?;
    game.play(params.rounds);
    Ok(game.average_payoff())
}
