//! Space-time records and the reputation/donation statistics built on them.

use alloc::vec::Vec;

use crate::engine::{run, InitPattern, Params, StepRecord, StrategyAssignment, World};
use crate::error::{Error, Result};
use crate::rules::Reputation;
use crate::seed::mix64;

/// Row-major binary matrix, one row per recorded iteration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpaceTime {
    width: usize,
    cells: Vec<Reputation>,
}

impl SpaceTime {
    pub fn new(width: usize) -> Self {
        SpaceTime {
            width,
            cells: Vec::new(),
        }
    }

    pub fn from_rows<I, R>(width: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[Reputation]>,
    {
        let mut out = SpaceTime::new(width);
        for row in rows {
            out.push_row(row.as_ref())?;
        }
        Ok(out)
    }

    pub fn push_row(&mut self, row: &[Reputation]) -> Result<()> {
        if row.len() != self.width {
            return Err(Error::LengthMismatch {
                expected: self.width,
                got: row.len(),
            });
        }
        self.cells.extend_from_slice(row);
        Ok(())
    }

    /// Appends all rows of `other`; widths must agree.
    pub fn append(&mut self, other: &SpaceTime) -> Result<()> {
        if other.width != self.width {
            return Err(Error::LengthMismatch {
                expected: self.width,
                got: other.width,
            });
        }
        self.cells.extend_from_slice(&other.cells);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.cells.len().checked_div(self.width).unwrap_or(0)
    }

    pub fn row(&self, t: usize) -> &[Reputation] {
        &self.cells[t * self.width..(t + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Reputation]> {
        self.cells.chunks_exact(self.width.max(1))
    }
}

/// Everything recorded during one run: `T + 1` state rows (row 0 is the
/// initial configuration) and `T` rows of per-agent ledgers.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    site_matrix: SpaceTime,
    agent_matrix: SpaceTime,
    received: Vec<f64>,
    donated: Vec<bool>,
}

impl History {
    pub fn with_initial(sites: Vec<Reputation>, agents: Vec<Reputation>, steps: usize) -> Self {
        let width = sites.len();
        let mut site_matrix = SpaceTime::new(width);
        let mut agent_matrix = SpaceTime::new(width);
        site_matrix.cells.reserve(width * (steps + 1));
        agent_matrix.cells.reserve(width * (steps + 1));
        site_matrix.cells.extend(sites);
        agent_matrix.cells.extend(agents);
        History {
            site_matrix,
            agent_matrix,
            received: Vec::with_capacity(width * steps),
            donated: Vec::with_capacity(width * steps),
        }
    }

    pub fn push(&mut self, record: &StepRecord) {
        self.site_matrix
            .cells
            .extend_from_slice(&record.site_states);
        self.agent_matrix
            .cells
            .extend_from_slice(&record.agent_states);
        self.received.extend_from_slice(&record.per_agent_received);
        self.donated.extend_from_slice(&record.per_agent_donated);
    }

    pub fn population(&self) -> usize {
        self.site_matrix.width
    }

    /// Number of recorded steps `T`.
    pub fn steps(&self) -> usize {
        self.site_matrix.height().saturating_sub(1)
    }

    pub fn site_matrix(&self) -> &SpaceTime {
        &self.site_matrix
    }

    /// States keyed by agent id rather than grid position.
    pub fn agent_matrix(&self) -> &SpaceTime {
        &self.agent_matrix
    }

    /// Donation value received by each agent id during step `t` (0-based).
    pub fn received_row(&self, t: usize) -> &[f64] {
        let n = self.population();
        &self.received[t * n..(t + 1) * n]
    }

    pub fn donated_row(&self, t: usize) -> &[bool] {
        let n = self.population();
        &self.donated[t * n..(t + 1) * n]
    }

    /// Total donation value received by each agent id.
    pub fn total_received(&self) -> Vec<f64> {
        let n = self.population();
        let mut totals = alloc::vec![0.0; n];
        for row in self.received.chunks_exact(n.max(1)) {
            for (total, r) in totals.iter_mut().zip(row) {
                *total += r;
            }
        }
        totals
    }

    /// Number of steps in which each agent id delivered a donation.
    pub fn donation_counts(&self) -> Vec<u32> {
        let n = self.population();
        let mut counts = alloc::vec![0; n];
        for row in self.donated.chunks_exact(n.max(1)) {
            for (c, &d) in counts.iter_mut().zip(row) {
                *c += d as u32;
            }
        }
        counts
    }

    /// Longest run of consecutive donating steps of any agent.
    pub fn longest_donation_streak(&self) -> u32 {
        let n = self.population();
        let mut current = alloc::vec![0u32; n];
        let mut longest = 0;
        for row in self.donated.chunks_exact(n.max(1)) {
            for (c, &d) in current.iter_mut().zip(row) {
                *c = if d { *c + 1 } else { 0 };
                longest = longest.max(*c);
            }
        }
        longest
    }
}

/// Per agent id, the number of rows `1..=T` in which it was high.
pub fn agent_reputation_counts(history: &History) -> Vec<u32> {
    let mut counts = alloc::vec![0u32; history.population()];
    for row in history.agent_matrix.rows().skip(1) {
        for (c, s) in counts.iter_mut().zip(row) {
            *c += s.is_high() as u32;
        }
    }
    counts
}

/// Sorted midpoint; the mean of the two central values for even lengths.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Ok(if sorted.len() % 2 == 0 {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

/// Copy of the grid-site view of a run.
pub fn site_spacetime(history: &History) -> SpaceTime {
    history.site_matrix.clone()
}

/// A fully specified single-population run.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub population: usize,
    pub steps: usize,
    pub init: InitPattern,
    pub strategies: StrategyAssignment,
    pub params: Params,
}

/// Medians of one seeded run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateOutcome {
    pub median_reputation: f64,
    pub median_donations: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSummary {
    pub rule: u8,
    pub agents: usize,
    pub median_reputation: f64,
    pub median_donations: f64,
}

/// Replicate-averaged medians.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub median_reputation: f64,
    pub median_donations: f64,
    pub replicates: usize,
    /// Replicate-averaged medians per rule, for mixed populations.
    pub per_rule: Vec<RuleSummary>,
}

impl Experiment {
    pub fn world(&self, seed: u64) -> Result<World> {
        World::new(
            self.population,
            &self.init,
            &self.strategies,
            self.params,
            seed,
        )
    }

    pub fn history(&self, seed: u64) -> Result<History> {
        let mut world = self.world(seed)?;
        run(&mut world, self.steps)
    }

    pub fn replicate(&self, seed: u64) -> Result<ReplicateOutcome> {
        let history = self.history(seed)?;
        outcome_of(&history)
    }

    /// Medians averaged over `replicates` runs seeded `mix64(base_seed, axis_index, r)`.
    pub fn summarize(
        &self,
        replicates: usize,
        base_seed: u64,
        axis_index: u64,
    ) -> Result<SummaryStats> {
        if replicates == 0 {
            return Err(Error::NoReplicates);
        }
        let rules = self.rule_of_agent();
        let mut distinct: Vec<u8> = rules.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let mut per_rule: Vec<RuleSummary> = distinct
            .iter()
            .map(|&rule| RuleSummary {
                rule,
                agents: rules.iter().filter(|&&r| r == rule).count(),
                median_reputation: 0.0,
                median_donations: 0.0,
            })
            .collect();

        let mut rep_sum = 0.0;
        let mut don_sum = 0.0;
        for r in 0..replicates {
            let history = self.history(mix64(base_seed, axis_index, r as u64))?;
            let counts = as_f64(&agent_reputation_counts(&history));
            let received = history.total_received();
            rep_sum += median(&counts)?;
            don_sum += median(&received)?;
            if per_rule.len() > 1 {
                for summary in &mut per_rule {
                    let pick = |values: &[f64]| -> Vec<f64> {
                        values
                            .iter()
                            .zip(&rules)
                            .filter(|(_, &rule)| rule == summary.rule)
                            .map(|(v, _)| *v)
                            .collect()
                    };
                    summary.median_reputation += median(&pick(&counts))?;
                    summary.median_donations += median(&pick(&received))?;
                }
            }
        }
        let r = replicates as f64;
        if per_rule.len() > 1 {
            for summary in &mut per_rule {
                summary.median_reputation /= r;
                summary.median_donations /= r;
            }
        } else {
            for summary in &mut per_rule {
                summary.median_reputation = rep_sum / r;
                summary.median_donations = don_sum / r;
            }
        }
        Ok(SummaryStats {
            median_reputation: rep_sum / r,
            median_donations: don_sum / r,
            replicates,
            per_rule,
        })
    }

    fn rule_of_agent(&self) -> Vec<u8> {
        match &self.strategies {
            StrategyAssignment::Uniform(s) => alloc::vec![s.rule_number(); self.population],
            StrategyAssignment::PerAgent(list) => list.iter().map(|s| s.rule_number()).collect(),
        }
    }
}

fn as_f64(counts: &[u32]) -> Vec<f64> {
    counts.iter().map(|&c| c as f64).collect()
}

pub fn outcome_of(history: &History) -> Result<ReplicateOutcome> {
    Ok(ReplicateOutcome {
        median_reputation: median(&as_f64(&agent_reputation_counts(history)))?,
        median_donations: median(&history.total_received())?,
    })
}

/// Mean over replicates of the median per-agent high count.
pub fn averaged_median_reputation(
    experiment: &Experiment,
    replicates: usize,
    base_seed: u64,
) -> Result<f64> {
    Ok(experiment
        .summarize(replicates, base_seed, 0)?
        .median_reputation)
}

/// Mean over replicates of the median per-agent donations received.
pub fn averaged_median_donations(
    experiment: &Experiment,
    replicates: usize,
    base_seed: u64,
) -> Result<f64> {
    Ok(experiment
        .summarize(replicates, base_seed, 0)?
        .median_donations)
}
