//! Hedge over a finite mechanism class and a weak-DP verifier for it.
//!
//! Round-`t` weights are `q_t(pi) ∝ exp(eta * sum_{tau < t} F_tau(b_tau, pi))`,
//! where `F_tau` is the expected objective under the *reported* profile.
//! Weights are floats; everything feeding the scores is exact.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::mechanism::{expected_objective, MechanismClass};
use crate::objective::Objective;
use crate::rational;
use crate::types::Profile;

#[derive(Debug, Clone, PartialEq)]
pub struct HedgeState {
    eta: f64,
    scores: Vec<f64>,
    round: usize,
}

impl HedgeState {
    pub fn new(eta: f64, class_size: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::invalid("learning rate must lie in [0, 1]"));
        }
        Ok(Self {
            eta,
            scores: alloc::vec![0.0; class_size],
            round: 0,
        })
    }

    /// A state with given cumulative scores; `round` counts absorbed rounds.
    pub fn with_scores(eta: f64, scores: Vec<f64>, round: usize) -> Result<Self> {
        let mut s = Self::new(eta, scores.len())?;
        s.scores = scores;
        s.round = round;
        Ok(s)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Number of rounds absorbed so far.
    pub fn round(&self) -> usize {
        self.round
    }

    /// Adds one round of per-mechanism increments, each in `[-1, 1]`.
    pub fn absorb(&self, increments: &[f64]) -> Result<Self> {
        if increments.len() != self.scores.len() {
            return Err(Error::invalid("one increment per mechanism is required"));
        }
        if increments.iter().any(|f| !(-1.0..=1.0).contains(f)) {
            return Err(Error::invalid("score increments must lie in [-1, 1]"));
        }
        Ok(Self {
            eta: self.eta,
            scores: self
                .scores
                .iter()
                .zip(increments)
                .map(|(s, f)| s + f)
                .collect(),
            round: self.round + 1,
        })
    }
}

/// Normalized mechanism probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.0[index]
    }

    /// Normalizes non-negative masses.
    pub fn from_masses(masses: Vec<f64>) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if masses.is_empty() || masses.iter().any(|m| *m < 0.0 || !m.is_finite()) || total <= 0.0 {
            return Err(Error::invalid("weights must be finite, non-negative and not all zero"));
        }
        Ok(Self(masses.into_iter().map(|m| m / total).collect()))
    }
}

/// Max-shifted exponential weights.
pub fn hedge_weights(state: &HedgeState) -> WeightVector {
    let shift = state
        .scores
        .iter()
        .fold(f64::NEG_INFINITY, |acc, s| acc.max(state.eta * s));
    let masses: Vec<f64> = state
        .scores
        .iter()
        .map(|s| libm::exp(state.eta * s - shift))
        .collect();
    let total: f64 = masses.iter().sum();
    WeightVector(masses.into_iter().map(|m| m / total).collect())
}

/// `F_t(b_t, pi)` for every class member, as exact rationals.
pub fn round_increments(
    reports: &Profile,
    objective: &dyn Objective,
    class: &MechanismClass,
) -> Result<Vec<rational::Rational>> {
    class
        .members()
        .iter()
        .map(|m| expected_objective(m.as_ref(), reports, objective))
        .collect()
}

/// Absorbs one round of reports.
pub fn hedge_update(
    state: &HedgeState,
    reports: &Profile,
    objective: &dyn Objective,
    class: &MechanismClass,
) -> Result<HedgeState> {
    let inc: Vec<f64> = round_increments(reports, objective, class)?
        .iter()
        .map(rational::to_f64)
        .collect();
    state.absorb(&inc)
}

/// Builds the round-`t` state from the first `t - 1` report profiles.
pub fn hedge_state_from_history(
    eta: f64,
    history: &[Profile],
    objectives: &[&dyn Objective],
    class: &MechanismClass,
) -> Result<HedgeState> {
    if objectives.len() < history.len() {
        return Err(Error::invalid("every past round needs its objective"));
    }
    let mut state = HedgeState::new(eta, class.len())?;
    for (b, g) in history.iter().zip(objectives) {
        state = hedge_update(&state, b, *g, class)?;
    }
    Ok(state)
}

/// Inverse-CDF draw over the class order; one uniform draw per call.
pub fn hedge_sample<R: Rng + ?Sized>(weights: &WeightVector, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, w) in weights.0.iter().enumerate() {
        if *w > 0.0 {
            last_positive = i;
        }
        cum += w;
        if u < cum {
            return i;
        }
    }
    last_positive
}

/// Number of rounds whose entries differ.
pub fn history_distance(a: &[Profile], b: &[Profile]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::invalid("histories must have equal length"));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// `ln q(a)(index) - ln q(b)(index)` for neighbouring histories.
pub fn dp_ratio_check<F>(builder: &F, a: &[Profile], b: &[Profile], index: usize) -> Result<f64>
where
    F: Fn(&[Profile]) -> Result<WeightVector>,
{
    let differing = history_distance(a, b)?;
    if differing > 1 {
        return Err(Error::NotNeighbors { differing });
    }
    let qa = builder(a)?;
    let qb = builder(b)?;
    Ok(libm::log(qa.get(index)) - libm::log(qb.get(index)))
}

/// Outcome of the exhaustive weak-DP check.
#[derive(Debug, Clone, PartialEq)]
pub struct DpReport {
    pub max_abs_log_ratio: f64,
    pub pairs_checked: u64,
    /// History length (`t - 1`) where the maximum was attained.
    pub worst_history_len: usize,
}

/// Enumerates every history of length `0..=max_history_len` over
/// `profiles`, every neighbour differing in one round, and every class
/// index; reports the largest absolute log-ratio.
pub fn exhaustive_dp_check<F>(
    builder: &F,
    profiles: &[Profile],
    max_history_len: usize,
    class_size: usize,
    budget: u128,
) -> Result<DpReport>
where
    F: Fn(&[Profile]) -> Result<WeightVector>,
{
    let p = profiles.len() as u128;
    let mut required: u128 = 0;
    for len in 0..=max_history_len {
        let histories = p.saturating_pow(len as u32);
        required = required.saturating_add(histories.saturating_mul(1 + len as u128 * p));
    }
    if required > budget {
        return Err(Error::InstanceTooLarge { budget, required });
    }
    let mut report = DpReport {
        max_abs_log_ratio: 0.0,
        pairs_checked: 0,
        worst_history_len: 0,
    };
    for len in 0..=max_history_len {
        for history in all_histories(profiles, len) {
            let base = builder(&history)?;
            for pos in 0..len {
                for alt in profiles {
                    if *alt == history[pos] {
                        continue;
                    }
                    let mut neighbor = history.clone();
                    neighbor[pos] = alt.clone();
                    let other = builder(&neighbor)?;
                    report.pairs_checked += 1;
                    for idx in 0..class_size {
                        let r = (libm::log(base.get(idx)) - libm::log(other.get(idx))).abs();
                        if r > report.max_abs_log_ratio {
                            report.max_abs_log_ratio = r;
                            report.worst_history_len = len;
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

fn all_histories(profiles: &[Profile], len: usize) -> Vec<Vec<Profile>> {
    let mut out: Vec<Vec<Profile>> = alloc::vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * profiles.len());
        for h in &out {
            for p in profiles {
                let mut e = h.clone();
                e.push(p.clone());
                next.push(e);
            }
        }
        out = next;
    }
    out
}
