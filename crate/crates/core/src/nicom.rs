//! The commitment lottery: parameters, penalty gaps, the per-round mixture,
//! and regret accounting.
//!
//! Each round plays `(1 - lambda) * pi_sr + lambda * pi_com`, where `pi_sr`
//! is drawn from Hedge and `pi_com` penalizes every misreport by at least
//! its penalty gap `beta`. Truth-telling is a Nash equilibrium once
//! `lambda * beta >= 16 * eta * alpha`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::learning::{hedge_sample, hedge_state_from_history, hedge_weights};
use crate::mechanism::{
    expected_objective, expected_utility_single, profile_count, Domain, MechanismClass,
    SingleRoundMechanism,
};
use crate::objective::Objective;
use crate::outcome::OutcomeDistribution;
use crate::population::AgentPopulation;
use crate::protocol::Trace;
use crate::rational::{self, Rational};
use crate::types::{Level, Profile, Report};

/// Constant in the certification condition `lambda * beta >= 16 eta alpha`.
pub const CERTIFICATION_FACTOR: i64 = 16;

/// Denominator used when `lambda` has no exact rational form.
pub const LAMBDA_DENOMINATOR: u64 = 1_000_000_000_000;

const CERTIFICATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NicomParams {
    eta: f64,
    lambda: Rational,
    beta: Rational,
    alpha: Rational,
    certified: bool,
}

impl NicomParams {
    /// Caller-chosen `eta` and `lambda`; `certified` records whether the
    /// equilibrium condition holds for `beta` and `alpha`.
    pub fn explicit(eta: f64, lambda: Rational, beta: Rational, alpha: Rational) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::invalid("eta must lie in [0, 1]"));
        }
        if lambda.is_negative() || lambda > Rational::one() {
            return Err(Error::invalid("lambda must lie in [0, 1]"));
        }
        let lhs = rational::to_f64(&(&lambda * &beta));
        let rhs = CERTIFICATION_FACTOR as f64 * eta * rational::to_f64(&alpha);
        let certified = beta.is_positive() && lhs >= rhs - CERTIFICATION_SLACK;
        Ok(Self {
            eta,
            lambda,
            beta,
            alpha,
            certified,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn certified(&self) -> bool {
        self.certified
    }
}

/// `eta = 1/sqrt(alpha T)` and `lambda = 16 sqrt(alpha/T) / beta`, the
/// smallest commitment probability that certifies the equilibrium.
///
/// `lambda` is exact when `alpha/T` is a rational square; otherwise it is
/// rounded up to a multiple of `1/LAMBDA_DENOMINATOR`.
pub fn nicom_params(alpha: &Rational, horizon: u64, beta: &Rational) -> Result<NicomParams> {
    if *alpha < Rational::one() {
        return Err(Error::invalid("alpha must be at least 1"));
    }
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    if !beta.is_positive() {
        return Err(Error::invalid("penalty gap must be positive"));
    }
    let t = Rational::from_integer(horizon.into());
    let product = alpha * &t;
    let eta = match rational::exact_sqrt(&product) {
        Some(r) => 1.0 / rational::to_f64(&r),
        None => 1.0 / libm::sqrt(rational::to_f64(&product)),
    };
    let factor = rational::int(CERTIFICATION_FACTOR);
    let lambda = match rational::exact_sqrt(&(alpha / &t)) {
        Some(root) => factor * root / beta,
        None => {
            let approx = CERTIFICATION_FACTOR as f64 * libm::sqrt(rational::to_f64(&(alpha / &t)))
                / rational::to_f64(beta);
            rational::ceil_to_denominator(approx, LAMBDA_DENOMINATOR)
        }
    };
    if lambda > Rational::one() {
        let bound = rational::int(CERTIFICATION_FACTOR * CERTIFICATION_FACTOR) * alpha / (beta * beta);
        let min_horizon = bound.ceil().to_integer();
        return Err(Error::Infeasible {
            lambda: rational::to_f64(&lambda),
            min_horizon: u64::try_from(min_horizon).unwrap_or(u64::MAX),
        });
    }
    NicomParams::explicit(eta, lambda, beta.clone(), alpha.clone())
}

/// Smallest certifying horizon, `ceil(256 alpha / beta^2)`.
pub fn min_certified_horizon(alpha: &Rational, beta: &Rational) -> u64 {
    let bound = rational::int(CERTIFICATION_FACTOR * CERTIFICATION_FACTOR) * alpha / (beta * beta);
    let v: BigInt = bound.ceil().to_integer();
    u64::try_from(v).unwrap_or(u64::MAX)
}

/// The round mechanism `(1 - lambda) * hedge + lambda * commitment`.
#[derive(Clone)]
pub struct MixtureMechanism {
    lambda: Rational,
    hedge_index: usize,
    hedge: Arc<dyn SingleRoundMechanism>,
    commitment: Arc<dyn SingleRoundMechanism>,
}

impl core::fmt::Debug for MixtureMechanism {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.describe())
    }
}

impl MixtureMechanism {
    pub fn new(
        lambda: Rational,
        hedge_index: usize,
        hedge: Arc<dyn SingleRoundMechanism>,
        commitment: Arc<dyn SingleRoundMechanism>,
    ) -> Self {
        Self {
            lambda,
            hedge_index,
            hedge,
            commitment,
        }
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    /// Class index of the sampled Hedge component.
    pub fn hedge_index(&self) -> usize {
        self.hedge_index
    }
}

impl SingleRoundMechanism for MixtureMechanism {
    fn evaluate(&self, reports: &[Report]) -> OutcomeDistribution {
        let hedge = self.hedge.evaluate(reports);
        if self.lambda.is_zero() {
            return hedge;
        }
        hedge
            .mix(&self.lambda, &self.commitment.evaluate(reports))
            .expect("lambda in [0, 1]")
    }

    fn describe(&self) -> String {
        format!(
            "mixture lambda={} hedge=[{}] {} commitment=[{}]",
            rational::format(&self.lambda),
            self.hedge_index,
            self.hedge.describe(),
            self.commitment.describe()
        )
    }
}

/// A Hedge learner over `class` mixed with `commitment`.
#[derive(Clone, Debug)]
pub struct NicomMechanism {
    pub class: MechanismClass,
    pub commitment: Arc<dyn SingleRoundMechanism>,
    pub params: NicomParams,
}

impl NicomMechanism {
    pub fn mixture(&self, hedge_index: usize) -> MixtureMechanism {
        MixtureMechanism::new(
            self.params.lambda().clone(),
            hedge_index,
            self.class.get(hedge_index).expect("index in class").clone(),
            self.commitment.clone(),
        )
    }
}

/// Builds Hedge from the past reports and objectives, samples the Hedge
/// component and returns the round's mixture.
pub fn nicom_round<R: Rng + ?Sized>(
    history: &[Profile],
    objectives: &[&dyn Objective],
    params: &NicomParams,
    class: &MechanismClass,
    commitment: Arc<dyn SingleRoundMechanism>,
    rng: &mut R,
) -> Result<MixtureMechanism> {
    let state = hedge_state_from_history(params.eta(), history, objectives, class)?;
    let idx = hedge_sample(&hedge_weights(&state), rng);
    Ok(MixtureMechanism::new(
        params.lambda().clone(),
        idx,
        class.get(idx).expect("sampled index in class").clone(),
        commitment,
    ))
}

/// A minimizing deviation for the penalty gap.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyWitness {
    pub agent: usize,
    pub theta: Level,
    pub report: Level,
    pub others: Profile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyGap {
    pub value: Rational,
    pub witness: PenaltyWitness,
}

/// Which agents other than the deviator may be at ⊥.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticipationMask(pub Vec<bool>);

impl ParticipationMask {
    pub fn all_may_abstain(n: usize) -> Self {
        Self(alloc::vec![true; n])
    }
}

/// `min_{i, theta_i, b_i != theta_i, b_{-i}} E u_i(theta_i, pi(theta_i, b_{-i})) - E u_i(theta_i, pi(b_i, b_{-i}))`
/// by exhaustive enumeration.
pub fn penalty_gap(
    mech: &dyn SingleRoundMechanism,
    domain: &dyn Domain,
    mask: &ParticipationMask,
    budget: u128,
) -> Result<PenaltyGap> {
    let n = domain.agents();
    if mask.0.len() != n {
        return Err(Error::invalid("participation mask needs one entry per agent"));
    }
    let spaces: Vec<Vec<Report>> = (0..n)
        .map(|j| {
            let mut s: Vec<Report> = domain.type_space(j).into_iter().map(Some).collect();
            if mask.0[j] {
                s.push(None);
            }
            s
        })
        .collect();
    let mut required: u128 = 0;
    for i in 0..n {
        let own = domain.type_space(i).len() as u128;
        let others: Vec<Vec<Report>> = (0..n).filter(|&j| j != i).map(|j| spaces[j].clone()).collect();
        required = required.saturating_add(
            own.saturating_mul(own.saturating_sub(1))
                .saturating_mul(profile_count(&others)),
        );
    }
    if required > budget {
        return Err(Error::InstanceTooLarge { budget, required });
    }

    let mut best: Option<PenaltyGap> = None;
    for i in 0..n {
        let theta_space = domain.type_space(i);
        let mut other_spaces = spaces.clone();
        other_spaces[i] = alloc::vec![None];
        for base in crate::mechanism::enumerate_profiles(&other_spaces) {
            for &theta in &theta_space {
                let mut truthful = base.clone();
                truthful[i] = Some(theta);
                let honest = expected_utility_single(mech, &truthful, i, theta, domain)?;
                for &b in theta_space.iter().filter(|&&b| b != theta) {
                    let mut lying = base.clone();
                    lying[i] = Some(b);
                    let gap = &honest - expected_utility_single(mech, &lying, i, theta, domain)?;
                    if best.as_ref().is_none_or(|g| gap < g.value) {
                        best = Some(PenaltyGap {
                            value: gap,
                            witness: PenaltyWitness {
                                agent: i,
                                theta,
                                report: b,
                                others: base.clone(),
                            },
                        });
                    }
                }
            }
        }
    }
    best.ok_or(Error::NoDeviation)
}

/// `max_pi sum_t F_t(theta_t, pi)`, ties toward the lowest index.
pub fn opt_value(
    class: &MechanismClass,
    population: &AgentPopulation,
    objectives: &[Arc<dyn Objective>],
) -> Result<(Rational, usize)> {
    if objectives.len() < population.horizon() {
        return Err(Error::invalid("every round needs an objective"));
    }
    let mut totals = alloc::vec![Rational::zero(); class.len()];
    for t in 0..population.horizon() {
        let truth = population.profile(t);
        for (idx, mech) in class.members().iter().enumerate() {
            totals[idx] += expected_objective(mech.as_ref(), &truth, objectives[t].as_ref())?;
        }
    }
    let mut best = 0;
    for idx in 1..totals.len() {
        if totals[idx] > totals[best] {
            best = idx;
        }
    }
    Ok((totals.swap_remove(best), best))
}

/// `Opt - sum_t G_t(theta_t, s_t)` for one realized trace.
pub fn regret(
    trace: &Trace,
    class: &MechanismClass,
    population: &AgentPopulation,
    objectives: &[Arc<dyn Objective>],
) -> Result<Rational> {
    let (opt, _) = opt_value(class, population, objectives)?;
    Ok(opt - trace.realized_objective())
}

/// `4 eta T + ln|Pi| / eta + lambda T`, the learner's regret bound.
pub fn regret_bound(params: &NicomParams, horizon: u64, class_size: usize) -> f64 {
    let t = horizon as f64;
    let eta = params.eta();
    let explore = if eta > 0.0 {
        libm::log(class_size as f64) / eta
    } else if class_size > 1 {
        f64::INFINITY
    } else {
        0.0
    };
    4.0 * eta * t + explore + rational::to_f64(params.lambda()) * t
}
