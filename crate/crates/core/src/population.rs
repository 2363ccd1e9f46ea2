//! Agent populations and long-sightedness.

use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::types::{Profile, Report};

/// The agents of one run: true types per round (⊥ outside the agent's
/// participation set) and a non-increasing discount per agent.
///
/// Rounds are 0-based here; participation sets are derived from the types,
/// so `theta[i][t] == None` exactly when `t` is not in `T_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentPopulation {
    horizon: usize,
    types: Vec<Vec<Report>>,
    discount: Vec<Vec<Rational>>,
}

impl AgentPopulation {
    pub fn new(types: Vec<Vec<Report>>, discount: Vec<Vec<Rational>>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::invalid("population needs at least one agent"));
        }
        if discount.len() != types.len() {
            return Err(Error::invalid("one discount sequence per agent is required"));
        }
        let horizon = types[0].len();
        for (i, (ty, g)) in types.iter().zip(&discount).enumerate() {
            if ty.len() != horizon || g.len() != horizon {
                return Err(Error::invalid(alloc::format!(
                    "agent {} has a sequence whose length differs from the horizon {horizon}",
                    i + 1
                )));
            }
            for (t, w) in g.iter().enumerate() {
                if *w < Rational::zero() || *w > Rational::one() {
                    return Err(Error::invalid(alloc::format!(
                        "discount of agent {} at round {} is outside [0, 1]",
                        i + 1,
                        t + 1
                    )));
                }
                if t > 0 && *w > g[t - 1] {
                    return Err(Error::invalid(alloc::format!(
                        "discount of agent {} increases at round {}",
                        i + 1,
                        t + 1
                    )));
                }
            }
        }
        Ok(Self {
            horizon,
            types,
            discount,
        })
    }

    /// Every agent participates in every round with `gamma == 1`.
    pub fn always_present(types: Vec<Vec<Report>>) -> Result<Self> {
        let discount = types
            .iter()
            .map(|ty| alloc::vec![Rational::one(); ty.len()])
            .collect();
        Self::new(types, discount)
    }

    pub fn agents(&self) -> usize {
        self.types.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn theta(&self, agent: usize, round: usize) -> Report {
        self.types[agent][round]
    }

    /// True type profile of a round.
    pub fn profile(&self, round: usize) -> Profile {
        self.types.iter().map(|ty| ty[round]).collect()
    }

    pub fn discount(&self, agent: usize, round: usize) -> &Rational {
        &self.discount[agent][round]
    }

    pub fn discounts(&self, agent: usize) -> &[Rational] {
        &self.discount[agent]
    }

    pub fn participates(&self, agent: usize, round: usize) -> bool {
        self.types[agent][round].is_some()
    }

    pub fn participation(&self, agent: usize) -> Vec<usize> {
        (0..self.horizon)
            .filter(|&t| self.participates(agent, t))
            .collect()
    }

    /// `sum_{t in T_i} gamma_i(t)`.
    pub fn participating_discount_mass(&self, agent: usize) -> Rational {
        (0..self.horizon)
            .filter(|&t| self.participates(agent, t))
            .map(|t| self.discount[agent][t].clone())
            .sum()
    }

    /// A population permuted so that new agent `j` is old agent `order[j]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        Self::new(
            order.iter().map(|&i| self.types[i].clone()).collect(),
            order.iter().map(|&i| self.discount[i].clone()).collect(),
        )
    }
}

/// `max_{i,t} min( (1/gamma_i(t)) sum_{tau >= t} gamma_i(tau), |T_i| )`.
///
/// Rounds where `gamma_i(t) = 0` are left out of the maximum.
pub fn long_sightedness(population: &AgentPopulation) -> Result<Rational> {
    let mut best: Option<Rational> = None;
    for i in 0..population.agents() {
        let g = population.discounts(i);
        let presence = Rational::from_integer(population.participation(i).len().into());
        let mut tail = Rational::zero();
        for t in (0..population.horizon()).rev() {
            tail += &g[t];
            if g[t].is_zero() {
                continue;
            }
            let ratio = &tail / &g[t];
            let v = if ratio < presence { ratio } else { presence.clone() };
            if best.as_ref().is_none_or(|b| v > *b) {
                best = Some(v);
            }
        }
    }
    best.ok_or(Error::DegenerateDiscount)
}

/// `gamma(t) = nu^t` for rounds `t = 1..=horizon`.
pub fn geometric_discount(nu: &Rational, horizon: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(horizon);
    let mut g = nu.clone();
    for _ in 0..horizon {
        out.push(g.clone());
        g *= nu;
    }
    out
}
