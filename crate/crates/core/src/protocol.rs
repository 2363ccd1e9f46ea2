//! The round-by-round protocol: sample the Hedge component, collect
//! reports, draw the outcome, record utilities and the objective, and feed
//! the reported profile back into Hedge.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::learning::{hedge_sample, hedge_update, hedge_weights, HedgeState};
use crate::mechanism::{utilities, Domain, SingleRoundMechanism};
use crate::nicom::NicomMechanism;
use crate::objective::Objective;
use crate::outcome::Outcome;
use crate::population::AgentPopulation;
use crate::rational::Rational;
use crate::strategic::strategy::Strategy;
use crate::types::{Level, Profile, Report};

/// Everything about a run that the mechanism does not control.
#[derive(Clone)]
pub struct Instance {
    pub domain: Arc<dyn Domain>,
    pub population: AgentPopulation,
    /// `G_t`, one per round.
    pub objectives: Vec<Arc<dyn Objective>>,
}

impl Instance {
    pub fn new(
        domain: Arc<dyn Domain>,
        population: AgentPopulation,
        objectives: Vec<Arc<dyn Objective>>,
    ) -> Result<Self> {
        if domain.agents() != population.agents() {
            return Err(Error::invalid("population size differs from the domain's agent count"));
        }
        if objectives.len() != population.horizon() {
            return Err(Error::invalid("one objective per round is required"));
        }
        for i in 0..population.agents() {
            let space = domain.type_space(i);
            for t in 0..population.horizon() {
                if let Some(theta) = population.theta(i, t) {
                    if !space.contains(&theta) {
                        return Err(Error::invalid(alloc::format!(
                            "type level {theta} of agent {} in round {} is outside its type space",
                            i + 1,
                            t + 1
                        )));
                    }
                }
            }
        }
        Ok(Self {
            domain,
            population,
            objectives,
        })
    }

    pub fn horizon(&self) -> usize {
        self.population.horizon()
    }

    pub fn objective(&self, round: usize) -> &dyn Objective {
        self.objectives[round].as_ref()
    }

    /// The first `len` objectives as trait objects.
    pub fn objective_refs(&self, len: usize) -> Vec<&dyn Objective> {
        self.objectives[..len].iter().map(|g| g.as_ref()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 0-based.
    pub round: usize,
    pub hedge_index: usize,
    pub lambda: Rational,
    /// Hedge distribution the index was drawn from.
    pub hedge_weights: Vec<f64>,
    pub reports: Profile,
    pub truth: Profile,
    pub outcome: Outcome,
    pub objective: Rational,
    pub utilities: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    records: Vec<RoundRecord>,
    discounted_utilities: Vec<Rational>,
}

impl Trace {
    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `sum_t G_t(theta_t, s_t)`.
    pub fn realized_objective(&self) -> Rational {
        self.records.iter().map(|r| &r.objective).sum()
    }

    /// `sum_{t in T_i} gamma_i(t) u_i(theta_{i,t}, s_t)` per agent.
    pub fn discounted_utilities(&self) -> &[Rational] {
        &self.discounted_utilities
    }

    /// Report profiles of all rounds.
    pub fn report_history(&self) -> Vec<Profile> {
        self.records.iter().map(|r| r.reports.clone()).collect()
    }
}

/// Reports of every agent for one round.
pub(crate) fn collect_reports(
    strategies: &[Strategy],
    population: &AgentPopulation,
    round: usize,
    history: &[Profile],
    hedge_index: usize,
) -> Profile {
    strategies
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let own: Vec<Report> = history.iter().map(|b| b[i]).collect();
            s.report(round, population.theta(i, round), &own, hedge_index)
        })
        .collect()
}

pub(crate) fn check_strategies(
    strategies: &[Strategy],
    instance: &Instance,
) -> Result<()> {
    if strategies.len() != instance.population.agents() {
        return Err(Error::invalid("one strategy per agent is required"));
    }
    for (i, s) in strategies.iter().enumerate() {
        if let Strategy::Scripted(script) = s {
            let space: Vec<Level> = instance.domain.type_space(i);
            if script.len() != instance.horizon() {
                return Err(Error::invalid(alloc::format!(
                    "scripted reports of agent {} must cover every round",
                    i + 1
                )));
            }
            if script.iter().any(|b| !space.contains(b)) {
                return Err(Error::invalid(alloc::format!(
                    "scripted report of agent {} is outside its type space",
                    i + 1
                )));
            }
        }
    }
    Ok(())
}

/// Runs the protocol for every round of `instance`. Per round the RNG is
/// drawn once for the Hedge component and once for the outcome.
pub fn run_protocol<R: Rng + ?Sized>(
    mechanism: &NicomMechanism,
    instance: &Instance,
    strategies: &[Strategy],
    rng: &mut R,
) -> Result<Trace> {
    check_strategies(strategies, instance)?;
    let population = &instance.population;
    let n = population.agents();
    let mut state = HedgeState::new(mechanism.params.eta(), mechanism.class.len())?;
    let mut history: Vec<Profile> = Vec::with_capacity(instance.horizon());
    let mut records = Vec::with_capacity(instance.horizon());
    let mut discounted = alloc::vec![Rational::zero(); n];

    for t in 0..instance.horizon() {
        let weights = hedge_weights(&state);
        let idx = hedge_sample(&weights, rng);
        let mix = mechanism.mixture(idx);
        let reports = collect_reports(strategies, population, t, &history, idx);
        let truth = population.profile(t);
        let dist = mix.evaluate(&reports);
        let outcome = dist.sample(rng).clone();
        let utils = utilities(instance.domain.as_ref(), &truth, &outcome)?;
        for (i, u) in utils.iter().enumerate() {
            if truth[i].is_some() {
                discounted[i] += population.discount(i, t) * u;
            }
        }
        let objective = instance.objective(t).value(&truth, &outcome)?;
        state = hedge_update(&state, &reports, instance.objective(t), &mechanism.class)?;
        history.push(reports.clone());
        records.push(RoundRecord {
            round: t,
            hedge_index: idx,
            lambda: mechanism.params.lambda().clone(),
            hedge_weights: weights.as_slice().to_vec(),
            reports,
            truth,
            outcome,
            objective,
            utilities: utils,
        });
    }
    Ok(Trace {
        records,
        discounted_utilities: discounted,
    })
}
