//! Donation-game dynamics on a one-dimensional binary cellular automaton.
//!
//! Agents sit on a ring. Each iteration every agent acts as a donor towards
//! its two nearest neighbors according to its strategy; donating turns the
//! donor's reputation high, abstaining turns it low. The crate covers the
//! twelve socially interpretable rules and their Wolfram encodings
//! ([`rules`]), the lattice engine with mobility, noise and fatigue
//! ([`engine`]), run statistics ([`metrics`]), generational strategy
//! evolution ([`evolution`]) and an adjacent-pairing image-score game
//! ([`imagescore`]).
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod engine;
pub mod error;
pub mod evolution;
pub mod imagescore;
pub mod metrics;
pub mod rules;
pub mod seed;

pub use engine::{
    directed_shift, run, Agent, InitPattern, MobilityParams, NoiseParams, Params, StepRecord,
    Strategy, StrategyAssignment, World,
};
pub use error::{Error, Result};
pub use metrics::{Experiment, History, SpaceTime, SummaryStats};
pub use rules::{
    curated_strategies, decide_donation, derive_rule_table, eligibility, rule_table_from_number,
    Directionality, DonationDecision, Family, Neighborhood, Reputation, RuleTable,
    StrategyDescriptor, CURATED,
};
pub use seed::{mix64, SimRng};
