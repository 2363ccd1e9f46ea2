//! CPU allocation among users with integer demands.
//!
//! Types are demands in `{1..k}`; a user is satisfied when allocated at
//! least their demand.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::mismatch;
use crate::error::{Error, Result};
use crate::mechanism::{Domain, MechanismClass, SingleRoundMechanism};
use crate::objective::Objective;
use crate::outcome::{AllocationOutcome, Outcome, OutcomeDistribution};
use crate::rational::{self, Rational};
use crate::types::{Level, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceClassKind {
    PostedAllocation,
    MaxMinFair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceConfig {
    pub n: usize,
    pub k: u32,
    pub class: ResourceClassKind,
}

impl ResourceConfig {
    fn validate(&self) -> Result<()> {
        if self.n < 2 || self.k < 1 {
            return Err(Error::invalid("resource domain needs n >= 2 users and k >= 1 CPUs"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ResourceDomain {
    cfg: ResourceConfig,
}

impl ResourceDomain {
    pub fn new(cfg: ResourceConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }
}

/// `1[s_i >= theta]`.
pub fn satisfied(theta: Level, outcome: &AllocationOutcome, agent: usize) -> bool {
    outcome.cpus[agent] >= theta
}

impl Domain for ResourceDomain {
    fn agents(&self) -> usize {
        self.cfg.n
    }

    fn type_space(&self, _agent: usize) -> Vec<Level> {
        (1..=self.cfg.k).collect()
    }

    fn utility(&self, agent: usize, theta: Level, outcome: &Outcome) -> Result<Rational> {
        match outcome {
            Outcome::Allocation(a) => Ok(if satisfied(theta, a, agent) {
                Rational::one()
            } else {
                Rational::zero()
            }),
            other => mismatch("allocation", other),
        }
    }

    fn type_value(&self, level: Level) -> Rational {
        Rational::from_integer(level.into())
    }
}

/// Report-independent: always allocates `w`.
#[derive(Debug, Clone)]
pub struct PostedAllocation {
    w: Vec<u32>,
}

impl PostedAllocation {
    pub fn new(w: Vec<u32>) -> Self {
        Self { w }
    }
}

impl SingleRoundMechanism for PostedAllocation {
    fn evaluate(&self, _reports: &[Report]) -> OutcomeDistribution {
        OutcomeDistribution::point(Outcome::Allocation(AllocationOutcome {
            cpus: self.w.clone(),
        }))
    }

    fn describe(&self) -> String {
        format!("posted-allocation w={:?}", self.w)
    }
}

/// Max-min fair allocation from endowment `w`.
///
/// Each user first keeps `min(b_i, w_i)`. The remaining CPUs go out one at
/// a time to the unsatisfied user with the smallest allocation (lowest
/// index on ties). Anything left once every demand is met goes to user 1.
/// A user at ⊥ demands nothing.
#[derive(Debug, Clone)]
pub struct MaxMinFair {
    k: u32,
    w: Vec<u32>,
}

impl MaxMinFair {
    pub fn new(k: u32, w: Vec<u32>) -> Self {
        Self { k, w }
    }

    pub fn allocate(&self, reports: &[Report]) -> Vec<u32> {
        let demand: Vec<u32> = reports.iter().map(|r| r.unwrap_or(0)).collect();
        let mut s: Vec<u32> = demand
            .iter()
            .zip(&self.w)
            .map(|(b, w)| *b.min(w))
            .collect();
        let mut surplus = self.k - s.iter().sum::<u32>();
        while surplus > 0 {
            let next = (0..s.len())
                .filter(|&i| s[i] < demand[i])
                .min_by_key(|&i| (s[i], i));
            match next {
                Some(i) => s[i] += 1,
                None => {
                    s[0] += surplus;
                    break;
                }
            }
            surplus -= 1;
        }
        s
    }
}

impl SingleRoundMechanism for MaxMinFair {
    fn evaluate(&self, reports: &[Report]) -> OutcomeDistribution {
        OutcomeDistribution::point(Outcome::Allocation(AllocationOutcome {
            cpus: self.allocate(reports),
        }))
    }

    fn describe(&self) -> String {
        format!("max-min-fair w={:?}", self.w)
    }
}

/// Compositions of `k` into `n` non-negative parts, lexicographic.
pub fn compositions(n: usize, k: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=k {
            prefix.push(first);
            rec(n - 1, k - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: u128, r: u128) -> u128 {
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// One mechanism per endowment in `S_{n,k}`; the selector picks posted
/// allocation or max-min fair.
pub fn build_resource_class(cfg: &ResourceConfig, budget: u128) -> Result<MechanismClass> {
    cfg.validate()?;
    let required = binomial(cfg.k as u128 + cfg.n as u128 - 1, cfg.n as u128 - 1);
    if required > budget {
        return Err(Error::InstanceTooLarge { budget, required });
    }
    let members: Vec<Arc<dyn SingleRoundMechanism>> = compositions(cfg.n, cfg.k)
        .into_iter()
        .map(|w| -> Arc<dyn SingleRoundMechanism> {
            match cfg.class {
                ResourceClassKind::PostedAllocation => Arc::new(PostedAllocation::new(w)),
                ResourceClassKind::MaxMinFair => Arc::new(MaxMinFair::new(cfg.k, w)),
            }
        })
        .collect();
    let name = match cfg.class {
        ResourceClassKind::PostedAllocation => "posted-allocation",
        ResourceClassKind::MaxMinFair => "max-min-fair",
    };
    MechanismClass::new(name, members)
}

/// Uniform `(i, j) in [n] x [2k]`. When `j > b_i` user `i` gets `b_i`,
/// otherwise 0; every other participating user gets an equal floor share
/// of what is left. A scrutinized user at ⊥ gets nothing.
#[derive(Debug, Clone)]
pub struct ResourceCommitment {
    n: usize,
    k: u32,
}

pub fn resource_commitment(cfg: &ResourceConfig) -> Result<ResourceCommitment> {
    cfg.validate()?;
    Ok(ResourceCommitment { n: cfg.n, k: cfg.k })
}

impl ResourceCommitment {
    /// Allocation for one `(i, j)` draw, `i` 0-based, `j in 1..=2k`.
    pub fn allocation(&self, reports: &[Report], i: usize, j: u32) -> Vec<u32> {
        let others = (self.n - 1) as u32;
        let (own, rest) = match reports[i] {
            Some(b) if j > b => (b, self.k.saturating_sub(b) / others),
            _ => (0, self.k / others),
        };
        (0..self.n)
            .map(|a| {
                if a == i {
                    own
                } else if reports[a].is_some() {
                    rest
                } else {
                    0
                }
            })
            .collect()
    }
}

impl SingleRoundMechanism for ResourceCommitment {
    fn evaluate(&self, reports: &[Report]) -> OutcomeDistribution {
        let draws = (0..self.n).flat_map(|i| {
            (1..=2 * self.k).map(move |j| {
                Outcome::Allocation(AllocationOutcome {
                    cpus: self.allocation(reports, i, j),
                })
            })
        });
        OutcomeDistribution::uniform(draws).expect("2nk draws")
    }

    fn describe(&self) -> String {
        format!("resource-commitment n={} k={}", self.n, self.k)
    }
}

/// `(1/n) sum_i r_i 1[s_i >= theta_i]` over participating users.
#[derive(Debug, Clone)]
pub struct ResourceObjective {
    n: usize,
    weights: Vec<Rational>,
}

pub fn resource_objective(cfg: &ResourceConfig, weights: Vec<Rational>) -> Result<ResourceObjective> {
    cfg.validate()?;
    if weights.len() != cfg.n {
        return Err(Error::invalid("one importance weight per user is required"));
    }
    if weights.iter().any(|r| *r < Rational::zero() || *r > Rational::one()) {
        return Err(Error::invalid("importance weights must lie in [0, 1]"));
    }
    Ok(ResourceObjective { n: cfg.n, weights })
}

impl Objective for ResourceObjective {
    fn value(&self, truth: &[Report], outcome: &Outcome) -> Result<Rational> {
        let Outcome::Allocation(a) = outcome else {
            return mismatch("allocation", outcome);
        };
        let total: Rational = truth
            .iter()
            .enumerate()
            .filter(|(i, t)| matches!(t, Some(theta) if satisfied(*theta, a, *i)))
            .map(|(i, _)| self.weights[i].clone())
            .sum();
        Ok(total / rational::int(self.n as i64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::expected_utility_single;
    use crate::rational::{int, ratio};
    use alloc::vec;

    fn cfg(n: usize, k: u32, class: ResourceClassKind) -> ResourceConfig {
        ResourceConfig { n, k, class }
    }

    #[test]
    fn posted_allocation_class() {
        let c = build_resource_class(&cfg(2, 2, ResourceClassKind::PostedAllocation), 100).unwrap();
        let described: Vec<String> = c.members().iter().map(|m| m.describe()).collect();
        assert_eq!(
            described,
            vec![
                "posted-allocation w=[0, 2]",
                "posted-allocation w=[1, 1]",
                "posted-allocation w=[2, 0]"
            ]
        );
        assert_eq!(compositions(3, 3).len(), 10);
    }

    #[test]
    fn max_min_fair_surplus_goes_to_unsatisfied() {
        let mmf = MaxMinFair::new(2, vec![1, 1]);
        assert_eq!(mmf.allocate(&[Some(2), Some(0)]), vec![2, 0]);
        assert_eq!(mmf.allocate(&[Some(2), Some(0)]), mmf.allocate(&[Some(2), Some(0)]));
        // everyone satisfied: leftover to the first user
        let mmf = MaxMinFair::new(3, vec![1, 2]);
        assert_eq!(mmf.allocate(&[Some(1), None]), vec![3, 0]);
        // progressive filling, lowest index on ties
        let mmf = MaxMinFair::new(4, vec![0, 0, 4]);
        assert_eq!(mmf.allocate(&[Some(3), Some(3), Some(0)]), vec![2, 2, 0]);
    }

    /// Independent enumeration of the commitment rule for `n = 2, k = 2`.
    fn brute_commitment_utility(b: [u32; 2], agent: usize, theta: u32) -> Rational {
        let k = 2u32;
        let mut total = Rational::zero();
        for i in 0..2usize {
            for j in 1..=2 * k {
                let s_agent = if i == agent {
                    if j > b[i] { b[i] } else { 0 }
                } else if j > b[i] {
                    k - b[i]
                } else {
                    k
                };
                if s_agent >= theta {
                    total += ratio(1, 8);
                }
            }
        }
        total
    }

    #[test]
    fn commitment_matches_enumeration() {
        let c = cfg(2, 2, ResourceClassKind::PostedAllocation);
        let com = resource_commitment(&c).unwrap();
        let dom = ResourceDomain::new(c).unwrap();
        let u = expected_utility_single(&com, &[Some(1), Some(1)], 0, 1, &dom).unwrap();
        assert_eq!(u, ratio(7, 8));
        for b0 in 1..=2 {
            for b1 in 1..=2 {
                for theta in 1..=2 {
                    let u = expected_utility_single(&com, &[Some(b0), Some(b1)], 0, theta, &dom)
                        .unwrap();
                    assert_eq!(u, brute_commitment_utility([b0, b1], 0, theta));
                }
            }
        }
    }

    #[test]
    fn zero_demand_scrutinized_gets_its_demand() {
        let com = resource_commitment(&cfg(2, 2, ResourceClassKind::PostedAllocation)).unwrap();
        for j in 1..=4 {
            assert_eq!(com.allocation(&[Some(0), Some(1)], 0, j)[0], 0);
        }
    }

    #[test]
    fn absent_users_receive_nothing() {
        let com = resource_commitment(&cfg(3, 3, ResourceClassKind::PostedAllocation)).unwrap();
        for i in 0..3 {
            for j in 1..=6 {
                let s = com.allocation(&[None, Some(2), None], i, j);
                assert_eq!(s[0], 0);
                assert_eq!(s[2], 0);
                assert!(s.iter().sum::<u32>() <= 3);
            }
        }
    }

    #[test]
    fn objective_examples() {
        let c = cfg(2, 2, ResourceClassKind::PostedAllocation);
        let g = resource_objective(&c, vec![int(1), int(1)]).unwrap();
        let s = Outcome::Allocation(AllocationOutcome { cpus: vec![2, 0] });
        assert_eq!(g.value(&[Some(1), Some(1)], &s).unwrap(), ratio(1, 2));
        let full = Outcome::Allocation(AllocationOutcome { cpus: vec![1, 1] });
        assert_eq!(g.value(&[Some(1), Some(1)], &full).unwrap(), int(1));
        let none = Outcome::Allocation(AllocationOutcome { cpus: vec![0, 0] });
        assert_eq!(g.value(&[Some(1), Some(2)], &none).unwrap(), int(0));
    }
}
