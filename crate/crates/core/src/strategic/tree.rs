//! Exact traversal of the protocol's trajectory tree.
//!
//! A round branches on the sampled Hedge index; reports follow from the
//! strategies, and the outcome lottery is folded into the round's exact
//! expected utility. Folding is exact because nothing downstream depends
//! on realized outcomes: Hedge scores use reports only, and strategies see
//! reports and sampled indices only.
//!
//! Hedge weights enter as the exact rational images of their `f64`
//! values, so all remaining arithmetic is exact and the float error is
//! confined to the weights themselves.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::learning::{hedge_update, hedge_weights, HedgeState, WeightVector};
use crate::mechanism::expected_utility_single;
use crate::nicom::NicomMechanism;
use crate::protocol::{check_strategies, collect_reports, Instance};
use crate::rational::{self, Rational};
use crate::strategic::strategy::{Decision, DeviationPolicy, Strategy};
use crate::types::{Profile, Report};

pub const DEFAULT_NODE_BUDGET: u128 = 10_000_000;

/// Worst-case node count `sum_{t=1}^T (branching)^t`.
fn tree_size(branching: u128, horizon: usize) -> u128 {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..horizon {
        level = level.saturating_mul(branching);
        total = total.saturating_add(level);
    }
    total
}

fn exact_weights(w: &WeightVector) -> Vec<Rational> {
    w.as_slice()
        .iter()
        .map(|&q| Rational::from_float(q).unwrap_or_else(Rational::zero))
        .collect()
}

struct Counter {
    nodes: u128,
    budget: u128,
    bound: u128,
}

impl Counter {
    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::InstanceTooLarge {
                budget: self.budget,
                required: self.bound,
            });
        }
        Ok(())
    }
}

/// `E sum_{t in T_i} gamma_i(t) u_i(theta_{i,t}, s_t)` for every agent under
/// the strategy profile.
///
/// Subtrees are shared between branches that produce the same report
/// history. The budget caps the number of visited nodes; on overflow the
/// error carries the worst-case tree size.
pub fn exact_expected_utilities(
    mechanism: &NicomMechanism,
    instance: &Instance,
    strategies: &[Strategy],
    budget: u128,
) -> Result<Vec<Rational>> {
    check_strategies(strategies, instance)?;
    let mut walker = Walker {
        mechanism,
        instance,
        strategies,
        memo: BTreeMap::new(),
        counter: Counter {
            nodes: 0,
            budget,
            bound: tree_size(mechanism.class.len() as u128, instance.horizon()),
        },
    };
    let state = HedgeState::new(mechanism.params.eta(), mechanism.class.len())?;
    let mut history = Vec::new();
    walker.value(&state, &mut history)
}

struct Walker<'a> {
    mechanism: &'a NicomMechanism,
    instance: &'a Instance,
    strategies: &'a [Strategy],
    memo: BTreeMap<Vec<Profile>, Vec<Rational>>,
    counter: Counter,
}

impl Walker<'_> {
    /// Continuation values from round `history.len()` on.
    fn value(&mut self, state: &HedgeState, history: &mut Vec<Profile>) -> Result<Vec<Rational>> {
        let t = history.len();
        let pop = &self.instance.population;
        let n = pop.agents();
        if t == pop.horizon() {
            return Ok(alloc::vec![Rational::zero(); n]);
        }
        if let Some(v) = self.memo.get(history.as_slice()) {
            return Ok(v.clone());
        }
        let truth = pop.profile(t);
        let weights = exact_weights(&hedge_weights(state));
        let mut total = alloc::vec![Rational::zero(); n];
        for (idx, q) in weights.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            self.counter.tick()?;
            let reports = collect_reports(self.strategies, pop, t, history, idx);
            let mix = self.mechanism.mixture(idx);
            let next = hedge_update(state, &reports, self.instance.objective(t), &self.mechanism.class)?;
            history.push(reports.clone());
            let cont = self.value(&next, history)?;
            history.pop();
            for i in 0..n {
                let mut v = cont[i].clone();
                if let Some(theta) = truth[i] {
                    let g = pop.discount(i, t);
                    if !g.is_zero() {
                        let u = expected_utility_single(
                            &mix,
                            &reports,
                            i,
                            theta,
                            self.instance.domain.as_ref(),
                        )?;
                        v += g * u;
                    }
                }
                total[i] += q * v;
            }
        }
        self.memo.insert(history.clone(), total.clone());
        Ok(total)
    }
}

/// Best response of one agent against truthful opponents.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub agent: usize,
    pub truthful: Rational,
    pub best: Rational,
    /// `best - truthful`.
    pub gap: Rational,
    pub tolerance: f64,
    pub certified: bool,
    pub nodes: u128,
    /// Decision points where the best response lies.
    pub deviations: Vec<Decision>,
}

impl AuditReport {
    pub fn policy(&self) -> DeviationPolicy {
        let mut p = DeviationPolicy::new();
        for d in &self.deviations {
            p.insert(d.own_history.clone(), d.hedge_index, d.report);
        }
        p
    }
}

/// Backward induction over every history-dependent report policy of
/// `agent`, who observes the sampled Hedge index before reporting. Ties go
/// to the truthful report, so the gap is exactly zero when truth is optimal
/// at every decision point.
pub fn best_response_value(
    agent: usize,
    mechanism: &NicomMechanism,
    instance: &Instance,
    tolerance: f64,
    budget: u128,
) -> Result<AuditReport> {
    let pop = &instance.population;
    if agent >= pop.agents() {
        return Err(Error::invalid("agent index out of range"));
    }
    let types = instance.domain.type_space(agent).len() as u128;
    let bound = tree_size(
        (mechanism.class.len() as u128).saturating_mul(types),
        instance.horizon(),
    );
    let mut search = Search {
        agent,
        mechanism,
        instance,
        memo: BTreeMap::new(),
        policy: DeviationPolicy::new(),
        counter: Counter {
            nodes: 0,
            budget,
            bound,
        },
    };
    let state = HedgeState::new(mechanism.params.eta(), mechanism.class.len())?;
    let mut history = Vec::new();
    let best = search.value(&state, &mut history)?;

    let truthful_profile: Vec<Strategy> = alloc::vec![Strategy::Truthful; pop.agents()];
    let truthful =
        exact_expected_utilities(mechanism, instance, &truthful_profile, budget)?.swap_remove(agent);
    let gap = &best - &truthful;
    let certified = !gap.is_positive() || rational::to_f64(&gap) <= tolerance;
    Ok(AuditReport {
        agent,
        truthful,
        best,
        gap,
        tolerance,
        certified,
        nodes: search.counter.nodes,
        deviations: search.policy.decisions(),
    })
}

struct Search<'a> {
    agent: usize,
    mechanism: &'a NicomMechanism,
    instance: &'a Instance,
    memo: BTreeMap<Vec<Profile>, Rational>,
    policy: DeviationPolicy,
    counter: Counter,
}

impl Search<'_> {
    fn value(&mut self, state: &HedgeState, history: &mut Vec<Profile>) -> Result<Rational> {
        let t = history.len();
        let pop = &self.instance.population;
        if t == pop.horizon() {
            return Ok(Rational::zero());
        }
        if let Some(v) = self.memo.get(history.as_slice()) {
            return Ok(v.clone());
        }
        let i = self.agent;
        let truth = pop.profile(t);
        let gamma = pop.discount(i, t).clone();
        let candidates: Vec<Report> = match truth[i] {
            Some(theta) => core::iter::once(theta)
                .chain(self.instance.domain.type_space(i).into_iter().filter(|&b| b != theta))
                .map(Some)
                .collect(),
            None => alloc::vec![None],
        };
        let own_history: Vec<Report> = history.iter().map(|b| b[i]).collect();
        let weights = exact_weights(&hedge_weights(state));
        let mut total = Rational::zero();
        for (idx, q) in weights.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let mix = self.mechanism.mixture(idx);
            let mut best: Option<(Rational, Report)> = None;
            for &b in &candidates {
                self.counter.tick()?;
                let mut reports = truth.clone();
                reports[i] = b;
                let mut v = Rational::zero();
                if let Some(theta) = truth[i] {
                    if !gamma.is_zero() {
                        let u = expected_utility_single(
                            &mix,
                            &reports,
                            i,
                            theta,
                            self.instance.domain.as_ref(),
                        )?;
                        v += &gamma * u;
                    }
                }
                let next =
                    hedge_update(state, &reports, self.instance.objective(t), &self.mechanism.class)?;
                history.push(reports);
                v += self.value(&next, history)?;
                history.pop();
                if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                    best = Some((v, b));
                }
            }
            let (v, b) = best.expect("at least one candidate report");
            if b != truth[i] {
                if let Some(level) = b {
                    self.policy.insert(own_history.clone(), idx, level);
                }
            }
            total += q * v;
        }
        self.memo.insert(history.clone(), total.clone());
        Ok(total)
    }
}
