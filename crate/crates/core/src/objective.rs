use crate::error::Result;
use crate::outcome::Outcome;
use crate::rational::Rational;
use crate::types::Report;

/// A round's social objective `G_t(theta, s)`, valued in `[-1, 1]`.
///
/// Agents at ⊥ contribute nothing; with every agent at ⊥ the value is 0.
pub trait Objective: Send + Sync {
    fn value(&self, truth: &[Report], outcome: &Outcome) -> Result<Rational>;
}
