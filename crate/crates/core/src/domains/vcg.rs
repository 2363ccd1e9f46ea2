//! Permit sale by VCG with bidder-specific reserve prices.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::mismatch;
use crate::error::{Error, Result};
use crate::mechanism::{Domain, MechanismClass, SingleRoundMechanism};
use crate::objective::Objective;
use crate::outcome::{AuctionOutcome, Outcome, OutcomeDistribution};
use crate::rational::{self, Rational};
use crate::types::{Level, Report, TypeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VcgConfig {
    pub n: usize,
    pub m: u32,
}

impl VcgConfig {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::invalid("auction domain needs n, m >= 1"));
        }
        Ok(())
    }

    pub fn grid(&self) -> TypeGrid {
        TypeGrid::new(self.m).expect("m >= 1")
    }
}

/// Valuations on `I_m`, quasi-linear utility `(theta - p_i) 1[i in o]`.
#[derive(Debug, Clone)]
pub struct VcgDomain {
    cfg: VcgConfig,
}

impl VcgDomain {
    pub fn new(cfg: VcgConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }
}

pub fn auction_utility(theta: &Rational, outcome: &AuctionOutcome, agent: usize) -> Rational {
    if outcome.wins(agent) {
        theta - &outcome.prices[agent]
    } else {
        Rational::zero()
    }
}

impl Domain for VcgDomain {
    fn agents(&self) -> usize {
        self.cfg.n
    }

    fn type_space(&self, _agent: usize) -> Vec<Level> {
        self.cfg.grid().levels().collect()
    }

    fn utility(&self, agent: usize, theta: Level, outcome: &Outcome) -> Result<Rational> {
        match outcome {
            Outcome::Auction(a) => Ok(auction_utility(&self.type_value(theta), a, agent)),
            other => mismatch("auction", other),
        }
    }

    fn type_value(&self, level: Level) -> Rational {
        self.cfg.grid().value(level)
    }
}

/// Winners and prices of VCG with reserves `w` (levels on `I_m`).
///
/// The eligible set is `P = {i : b_i != ⊥, b_i >= w_i}`. Welfare is additive
/// and supply unlimited, so the argmax is all of `P` (zero bids included).
/// The pivot term for `i` compares the best welfare of `P \ {i}` with its
/// welfare at the chosen set; the charged price is `max(pivot, w_i)`.
pub fn vcg_outcome(m: u32, w: &[Level], reports: &[Report]) -> AuctionOutcome {
    let n = reports.len();
    let value = |l: Level| rational::ratio(l as i64, m as i64);
    let eligible: Vec<usize> = (0..n)
        .filter(|&i| matches!(reports[i], Some(b) if b >= w[i]))
        .collect();
    let winners = eligible.clone();
    let mut prices = alloc::vec![Rational::zero(); n];
    for &i in &winners {
        let others = eligible.iter().filter(|&&j| j != i);
        // max over o ⊆ P of the others' welfare: every non-negative bid joins.
        let best_without: Rational = others
            .clone()
            .map(|&j| value(reports[j].unwrap()))
            .filter(|v| *v > Rational::zero())
            .sum();
        let at_chosen: Rational = others
            .filter(|j| winners.contains(j))
            .map(|&j| value(reports[j].unwrap()))
            .sum();
        let pivot = best_without - at_chosen;
        let reserve = value(w[i]);
        prices[i] = if pivot > reserve { pivot } else { reserve };
    }
    AuctionOutcome { winners, prices }
}

#[derive(Debug, Clone)]
pub struct VcgReserve {
    m: u32,
    w: Vec<Level>,
}

impl VcgReserve {
    pub fn new(m: u32, w: Vec<Level>) -> Self {
        Self { m, w }
    }

    pub fn reserves(&self) -> &[Level] {
        &self.w
    }
}

impl SingleRoundMechanism for VcgReserve {
    fn evaluate(&self, reports: &[Report]) -> OutcomeDistribution {
        OutcomeDistribution::point(Outcome::Auction(vcg_outcome(self.m, &self.w, reports)))
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self
            .w
            .iter()
            .map(|&l| rational::format(&rational::ratio(l as i64, self.m as i64)))
            .collect();
        format!("vcg-reserve w=({})", parts.join(","))
    }
}

/// One VCG mechanism per reserve vector in `I_m^n`, last bidder fastest.
pub fn build_vcg_class(cfg: &VcgConfig, budget: u128) -> Result<MechanismClass> {
    cfg.validate()?;
    let required = (cfg.m as u128 + 1)
        .checked_pow(cfg.n as u32)
        .unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::InstanceTooLarge { budget, required });
    }
    let mut members: Vec<Arc<dyn SingleRoundMechanism>> = Vec::new();
    let mut w = alloc::vec![0u32; cfg.n];
    loop {
        members.push(Arc::new(VcgReserve::new(cfg.m, w.clone())));
        let mut pos = cfg.n;
        loop {
            if pos == 0 {
                return MechanismClass::new("vcg-reserve", members);
            }
            pos -= 1;
            if w[pos] < cfg.m {
                w[pos] += 1;
                break;
            }
            w[pos] = 0;
        }
    }
}

/// Uniform `z in I_{2m}`; bidders with `b_i >= z` win and pay `z`.
#[derive(Debug, Clone)]
pub struct VcgCommitment {
    cfg: VcgConfig,
}

pub fn vcg_commitment(cfg: &VcgConfig) -> Result<VcgCommitment> {
    cfg.validate()?;
    Ok(VcgCommitment { cfg: *cfg })
}

impl SingleRoundMechanism for VcgCommitment {
    fn evaluate(&self, reports: &[Report]) -> OutcomeDistribution {
        let VcgConfig { n, m } = self.cfg;
        let outcomes = (0..=2 * m).map(|z| {
            // b/m >= z/(2m)  <=>  2b >= z
            let winners: Vec<usize> = (0..n)
                .filter(|&i| matches!(reports[i], Some(b) if 2 * b >= z))
                .collect();
            let price = rational::ratio(z as i64, 2 * m as i64);
            let prices = (0..n)
                .map(|i| {
                    if winners.contains(&i) {
                        price.clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            Outcome::Auction(AuctionOutcome { winners, prices })
        });
        OutcomeDistribution::uniform(outcomes).expect("2m + 1 prices")
    }

    fn describe(&self) -> String {
        format!("vcg-commitment m={}", self.cfg.m)
    }
}

/// The round's ex-post externality `c_t(o)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Externality {
    /// `c_t(o) = kappa * |o|`, `kappa in [0, 1]`.
    PerUnit(Rational),
    /// `c_t(o)` looked up by the bitmask of `o` (bit `i` = agent `i`).
    Table(Vec<Rational>),
}

#[derive(Debug, Clone)]
pub struct WelfareObjective {
    cfg: VcgConfig,
    externality: Externality,
}

/// `(sum_{i in o} theta_i - c_t(o)) / n`.
pub fn welfare_objective(cfg: &VcgConfig, externality: Externality) -> Result<WelfareObjective> {
    cfg.validate()?;
    let n_q = Rational::from_integer(cfg.n.into());
    match &externality {
        Externality::PerUnit(k) => {
            if *k < Rational::zero() || *k > Rational::one() {
                return Err(Error::invalid("per-unit externality must lie in [0, 1]"));
            }
        }
        Externality::Table(t) => {
            if cfg.n > 4 || t.len() != 1 << cfg.n {
                return Err(Error::invalid(
                    "an externality table needs n <= 4 and one entry per subset",
                ));
            }
            if t.iter().any(|c| *c < Rational::zero() || *c > n_q) {
                return Err(Error::invalid("externality table values must lie in [0, n]"));
            }
        }
    }
    Ok(WelfareObjective {
        cfg: *cfg,
        externality,
    })
}

impl Objective for WelfareObjective {
    fn value(&self, truth: &[Report], outcome: &Outcome) -> Result<Rational> {
        let Outcome::Auction(a) = outcome else {
            return mismatch("auction", outcome);
        };
        let grid = self.cfg.grid();
        let value: Rational = a
            .winners
            .iter()
            .filter_map(|&i| truth[i].map(|t| grid.value(t)))
            .sum();
        let cost = match &self.externality {
            Externality::PerUnit(k) => k * Rational::from_integer(a.winners.len().into()),
            Externality::Table(t) => {
                let mask = a.winners.iter().fold(0usize, |acc, &i| acc | (1 << i));
                t[mask].clone()
            }
        };
        Ok((value - cost) / Rational::from_integer(self.cfg.n.into()))
    }
}

/// Test and audit helper: winners above reserve pay their own bid.
#[derive(Debug, Clone)]
pub struct FirstPriceReserve {
    m: u32,
    w: Vec<Level>,
}

impl FirstPriceReserve {
    pub fn new(m: u32, w: Vec<Level>) -> Self {
        Self { m, w }
    }
}

impl SingleRoundMechanism for FirstPriceReserve {
    fn evaluate(&self, reports: &[Report]) -> OutcomeDistribution {
        let n = reports.len();
        let winners: Vec<usize> = (0..n)
            .filter(|&i| matches!(reports[i], Some(b) if b >= self.w[i]))
            .collect();
        let prices = (0..n)
            .map(|i| match reports[i] {
                Some(b) if winners.contains(&i) => rational::ratio(b as i64, self.m as i64),
                _ => Rational::zero(),
            })
            .collect();
        OutcomeDistribution::point(Outcome::Auction(AuctionOutcome { winners, prices }))
    }

    fn describe(&self) -> String {
        format!("first-price-reserve m={}", self.m)
    }
}
