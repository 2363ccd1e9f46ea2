//! k-facility location on the grid `I_m`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::mismatch;
use crate::error::{Error, Result};
use crate::mechanism::{Domain, MechanismClass, SingleRoundMechanism};
use crate::objective::Objective;
use crate::outcome::{FacilityOutcome, Outcome, OutcomeDistribution, Site};
use crate::rational::{self, Rational};
use crate::types::{Level, Report, TypeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FacilityConfig {
    pub n: usize,
    pub m: u32,
    pub k: usize,
}

impl FacilityConfig {
    pub fn grid(&self) -> TypeGrid {
        TypeGrid::new(self.m).expect("m >= 1")
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.k == 0 {
            return Err(Error::invalid("facility domain needs n, m, k >= 1"));
        }
        Ok(())
    }
}

/// Residents on `I_m`; utility is one minus the distance to the nearest
/// accessible facility, or zero without access.
#[derive(Debug, Clone)]
pub struct FacilityDomain {
    cfg: FacilityConfig,
}

impl FacilityDomain {
    pub fn new(cfg: FacilityConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    pub fn config(&self) -> FacilityConfig {
        self.cfg
    }
}

/// `1 - min_{l : i in o_l} |x_l - theta|`, or 0 when `i` may use no facility.
pub fn facility_utility(theta: &Rational, outcome: &FacilityOutcome, agent: usize) -> Rational {
    outcome
        .sites
        .iter()
        .filter(|s| s.access.binary_search(&agent).is_ok())
        .map(|s| (&s.position - theta).abs())
        .min()
        .map(|d| Rational::one() - d)
        .unwrap_or_else(Rational::zero)
}

impl Domain for FacilityDomain {
    fn agents(&self) -> usize {
        self.cfg.n
    }

    fn type_space(&self, _agent: usize) -> Vec<Level> {
        self.cfg.grid().levels().collect()
    }

    fn utility(&self, agent: usize, theta: Level, outcome: &Outcome) -> Result<Rational> {
        match outcome {
            Outcome::Facility(f) => Ok(facility_utility(&self.type_value(theta), f, agent)),
            other => mismatch("facility", other),
        }
    }

    fn type_value(&self, level: Level) -> Rational {
        self.cfg.grid().value(level)
    }
}

/// Report-independent: facilities at `w`, each open to every resident.
#[derive(Debug, Clone)]
pub struct PostedLocation {
    n: usize,
    m: u32,
    w: Vec<Level>,
}

impl PostedLocation {
    pub fn new(n: usize, m: u32, w: Vec<Level>) -> Self {
        Self { n, m, w }
    }

    pub fn locations(&self) -> &[Level] {
        &self.w
    }
}

impl SingleRoundMechanism for PostedLocation {
    fn evaluate(&self, _reports: &[Report]) -> OutcomeDistribution {
        let everyone: Vec<usize> = (0..self.n).collect();
        OutcomeDistribution::point(Outcome::Facility(FacilityOutcome {
            sites: self
                .w
                .iter()
                .map(|&l| Site {
                    position: rational::ratio(l as i64, self.m as i64),
                    access: everyone.clone(),
                })
                .collect(),
        }))
    }

    fn describe(&self) -> String {
        format!("posted-location w={}", levels_string(&self.w, self.m))
    }
}

fn levels_string(w: &[Level], m: u32) -> String {
    let parts: Vec<String> = w
        .iter()
        .map(|&l| rational::format(&rational::ratio(l as i64, m as i64)))
        .collect();
    format!("({})", parts.join(","))
}

/// One posted-location mechanism per `w in I_m^k`, last coordinate fastest.
pub fn build_posted_location_class(cfg: &FacilityConfig, budget: u128) -> Result<MechanismClass> {
    cfg.validate()?;
    let base = cfg.m as u128 + 1;
    let required = base.checked_pow(cfg.k as u32).unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::InstanceTooLarge { budget, required });
    }
    let mut members: Vec<Arc<dyn SingleRoundMechanism>> = Vec::with_capacity(required as usize);
    let mut w = alloc::vec![0u32; cfg.k];
    loop {
        members.push(Arc::new(PostedLocation::new(cfg.n, cfg.m, w.clone())));
        let mut pos = cfg.k;
        loop {
            if pos == 0 {
                return MechanismClass::new("posted-location", members);
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

/// Uniform `l in {1..m}`: one facility at `(l-1)/m`, the other `k-1` at
/// `l/m`. A resident may use exactly the facilities at the position closer
/// to their report; residents at ⊥ may use none.
#[derive(Debug, Clone)]
pub struct FacilityCommitment {
    cfg: FacilityConfig,
}

pub fn facility_commitment(cfg: &FacilityConfig) -> Result<FacilityCommitment> {
    cfg.validate()?;
    if cfg.k < 2 {
        return Err(Error::CommitmentNeedsTwoFacilities { k: cfg.k });
    }
    Ok(FacilityCommitment { cfg: *cfg })
}

impl SingleRoundMechanism for FacilityCommitment {
    fn evaluate(&self, reports: &[Report]) -> OutcomeDistribution {
        let FacilityConfig { m, k, .. } = self.cfg;
        let outcomes = (1..=m).map(|l| {
            let (low, high) = (l - 1, l);
            let mut near_low = Vec::new();
            let mut near_high = Vec::new();
            for (i, r) in reports.iter().enumerate() {
                if let Some(b) = r {
                    // Positions differ by one grid step, so ties cannot occur.
                    if b.abs_diff(low) < b.abs_diff(high) {
                        near_low.push(i);
                    } else {
                        near_high.push(i);
                    }
                }
            }
            let mut sites = Vec::with_capacity(k);
            sites.push(Site {
                position: rational::ratio(low as i64, m as i64),
                access: near_low,
            });
            for _ in 1..k {
                sites.push(Site {
                    position: rational::ratio(high as i64, m as i64),
                    access: near_high.clone(),
                });
            }
            Outcome::Facility(FacilityOutcome { sites })
        });
        OutcomeDistribution::uniform(outcomes).expect("m >= 1 placements")
    }

    fn describe(&self) -> String {
        format!("facility-commitment m={} k={}", self.cfg.m, self.cfg.k)
    }
}

/// `(1/n) sum_i r_i u_i(theta_i, s)` over participating residents.
#[derive(Debug, Clone)]
pub struct FacilityObjective {
    cfg: FacilityConfig,
    weights: Vec<Rational>,
}

pub fn facility_objective(cfg: &FacilityConfig, weights: Vec<Rational>) -> Result<FacilityObjective> {
    cfg.validate()?;
    if weights.len() != cfg.n {
        return Err(Error::invalid("one utilization weight per resident is required"));
    }
    if weights.iter().any(|r| *r < Rational::zero() || *r > Rational::one()) {
        return Err(Error::invalid("utilization weights must lie in [0, 1]"));
    }
    Ok(FacilityObjective {
        cfg: *cfg,
        weights,
    })
}

impl Objective for FacilityObjective {
    fn value(&self, truth: &[Report], outcome: &Outcome) -> Result<Rational> {
        let Outcome::Facility(f) = outcome else {
            return mismatch("facility", outcome);
        };
        let grid = self.cfg.grid();
        let mut total = Rational::zero();
        for (i, t) in truth.iter().enumerate() {
            if let Some(theta) = t {
                total += &self.weights[i] * facility_utility(&grid.value(*theta), f, i);
            }
        }
        Ok(total / Rational::from_integer(self.cfg.n.into()))
    }
}
