//! Application domains: facility location, VCG with bidder-specific
//! reserves, and CPU allocation.
//!
//! Every objective is divided by the number of agents so that it lands in
//! `[-1, 1]`.

pub mod facility;
pub mod resource;
pub mod vcg;

use crate::error::{Error, Result};
use crate::outcome::Outcome;

pub(crate) fn mismatch<T>(expected: &'static str, found: &Outcome) -> Result<T> {
    Err(Error::DomainMismatch {
        expected,
        found: found.kind(),
    })
}

/// Upper bound on the number of members a class builder may create.
pub const DEFAULT_CLASS_BUDGET: u128 = 1_000_000;
