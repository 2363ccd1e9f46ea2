//! Single-round mechanisms, mechanism classes and expectations over them.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::outcome::{Outcome, OutcomeDistribution};
use crate::rational::Rational;
use crate::types::{Level, Profile, Report};

/// A map from a full report profile (⊥ allowed) to a distribution over
/// outcomes. Implementations must be total and deterministic.
pub trait SingleRoundMechanism: Send + Sync {
    fn evaluate(&self, reports: &[Report]) -> OutcomeDistribution;

    /// Parameter descriptor, e.g. the reserve vector.
    fn describe(&self) -> String;
}

impl fmt::Debug for dyn SingleRoundMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Agents, their type spaces and their utilities for one application.
pub trait Domain: Send + Sync {
    fn agents(&self) -> usize;

    /// The finite type space of `agent`, without ⊥.
    fn type_space(&self, agent: usize) -> Vec<Level>;

    fn utility(&self, agent: usize, theta: Level, outcome: &Outcome) -> Result<Rational>;

    /// The type value a level stands for.
    fn type_value(&self, level: Level) -> Rational;
}

/// An ordered, non-empty list of mechanisms. A member is identified by its
/// index in this list.
#[derive(Clone)]
pub struct MechanismClass {
    name: String,
    members: Vec<Arc<dyn SingleRoundMechanism>>,
}

impl fmt::Debug for MechanismClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MechanismClass")
            .field("name", &self.name)
            .field("len", &self.members.len())
            .finish()
    }
}

impl MechanismClass {
    pub fn new(
        name: impl Into<String>,
        members: Vec<Arc<dyn SingleRoundMechanism>>,
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("a mechanism class needs at least one member"));
        }
        Ok(Self {
            name: name.into(),
            members,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Arc<dyn SingleRoundMechanism>> {
        self.members.get(index)
    }

    pub fn members(&self) -> &[Arc<dyn SingleRoundMechanism>] {
        &self.members
    }

    /// Keeps the listed members, in the listed order, re-indexed from 0.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let members = indices
            .iter()
            .map(|&i| {
                self.members
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid(alloc::format!("no class member {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.name.clone(), members)
    }
}

/// `E_{s ~ mech(reports)} u_agent(theta, s)`, exactly.
pub fn expected_utility_single(
    mech: &dyn SingleRoundMechanism,
    reports: &[Report],
    agent: usize,
    theta: Level,
    domain: &dyn Domain,
) -> Result<Rational> {
    mech.evaluate(reports)
        .expect(|s| domain.utility(agent, theta, s))
}

/// `F(theta, mech) = E_{s ~ mech(theta)} G(theta, s)`, exactly.
pub fn expected_objective(
    mech: &dyn SingleRoundMechanism,
    truth: &[Report],
    objective: &dyn Objective,
) -> Result<Rational> {
    mech.evaluate(truth).expect(|s| objective.value(truth, s))
}

/// Utility of every agent under `outcome`; agents at ⊥ get zero.
pub fn utilities(domain: &dyn Domain, truth: &[Report], outcome: &Outcome) -> Result<Vec<Rational>> {
    truth
        .iter()
        .enumerate()
        .map(|(i, t)| match t {
            Some(theta) => domain.utility(i, *theta, outcome),
            None => Ok(Rational::zero()),
        })
        .collect()
}

/// Number of profiles in `prod_j spaces[j]`, saturating.
pub fn profile_count(spaces: &[Vec<Report>]) -> u128 {
    spaces
        .iter()
        .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128))
}

/// Every profile of the Cartesian product, first agent slowest.
pub fn enumerate_profiles(spaces: &[Vec<Report>]) -> Vec<Profile> {
    let mut out: Vec<Profile> = alloc::vec![Vec::new()];
    for space in spaces {
        let mut next = Vec::with_capacity(out.len() * space.len());
        for prefix in &out {
            for r in space {
                let mut p = prefix.clone();
                p.push(*r);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// `Θ_j ∪ {⊥}` for every agent.
pub fn spaces_with_absence(domain: &dyn Domain) -> Vec<Vec<Report>> {
    (0..domain.agents())
        .map(|j| {
            let mut s: Vec<Report> = domain.type_space(j).into_iter().map(Some).collect();
            s.push(None);
            s
        })
        .collect()
}
