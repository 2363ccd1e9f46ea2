//! Nash incentive-compatible online mechanism learning.
//!
//! An online mechanism picks one single-round mechanism per round from a
//! finite class using Hedge (exponential weights over reported-type
//! objectives) and mixes it with a strictly truthful commitment mechanism.
//! This crate carries the algorithmic core: exact rational outcome
//! distributions, the Hedge learner with a weak-DP verifier, commitment
//! parameters and penalty gaps, three application domains, an exact
//! game-tree auditor for best responses, and the round-by-round protocol.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, replication
//! management and the command-line front end live in `nicom-lab`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod domains;
pub mod error;
pub mod learning;
pub mod mechanism;
pub mod nicom;
pub mod objective;
pub mod outcome;
pub mod population;
pub mod protocol;
pub mod rational;
pub mod rng;
pub mod strategic;
pub mod types;

pub use error::{Error, Result};
pub use mechanism::{
    expected_objective, expected_utility_single, Domain, MechanismClass, SingleRoundMechanism,
};
pub use objective::Objective;
pub use outcome::{Outcome, OutcomeDistribution};
pub use population::{long_sightedness, AgentPopulation};
pub use rational::Rational;
pub use types::{Level, Profile, Report, TypeGrid};
