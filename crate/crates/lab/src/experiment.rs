//! Turns a config into a mechanism, an instance and a strategy profile.

use std::sync::Arc;

use nicom_core::domains::facility::{
    build_posted_location_class, facility_commitment, facility_objective, FacilityConfig,
    FacilityDomain,
};
use nicom_core::domains::resource::{
    build_resource_class, resource_commitment, resource_objective, ResourceClassKind,
    ResourceConfig, ResourceDomain,
};
use nicom_core::domains::vcg::{
    build_vcg_class, vcg_commitment, welfare_objective, Externality, VcgConfig, VcgDomain,
};
use nicom_core::mechanism::MechanismClass;
use nicom_core::nicom::{nicom_params, penalty_gap, NicomMechanism, NicomParams, ParticipationMask, PenaltyGap};
use nicom_core::population::geometric_discount;
use nicom_core::protocol::Instance;
use nicom_core::rational::{self, Rational};
use nicom_core::rng::replication_rng;
use nicom_core::strategic::{audit_single_round, AuditKind, Strategy};
use nicom_core::{long_sightedness, AgentPopulation, Domain, Objective, Report, SingleRoundMechanism};
use rand::Rng;

use crate::config::{
    ClassKind, DiscountSpec, DomainKind, ExperimentConfig, ExternalitySpec, NicomSection,
    ParticipationSpec, StrategySpec, TypeSpec, WeightSpec,
};
use crate::error::{LabError, Result};

pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// A fully built experiment.
#[derive(Clone)]
pub struct Experiment {
    pub mechanism: NicomMechanism,
    pub instance: Instance,
    pub strategies: Vec<Strategy>,
    /// Brute-forced gap of the commitment, when it was computed.
    pub penalty: Option<PenaltyGap>,
}

/// Domain, class, commitment and a per-round objective factory.
pub struct DomainParts {
    pub domain: Arc<dyn Domain>,
    pub class: MechanismClass,
    pub commitment: Arc<dyn SingleRoundMechanism>,
    pub objective: Box<dyn Fn(Vec<Rational>) -> Result<Arc<dyn Objective>>>,
}

fn need<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| LabError::Config(format!("domain.{what} is required for this domain")))
}

pub fn domain_parts(cfg: &ExperimentConfig, budget: u128) -> Result<DomainParts> {
    let d = &cfg.domain;
    let parts = match d.kind {
        DomainKind::Facility => {
            if !matches!(d.class, None | Some(ClassKind::PostedLocation)) {
                return Err(LabError::Config("facility supports class = \"posted-location\"".into()));
            }
            let fc = FacilityConfig {
                n: d.n,
                m: need(d.m, "m")?,
                k: need(d.k, "k")? as usize,
            };
            DomainParts {
                domain: Arc::new(FacilityDomain::new(fc)?),
                class: build_posted_location_class(&fc, budget)?,
                commitment: Arc::new(facility_commitment(&fc)?),
                objective: Box::new(move |r| Ok(Arc::new(facility_objective(&fc, r)?))),
            }
        }
        DomainKind::Vcg => {
            if !matches!(d.class, None | Some(ClassKind::VcgReserve)) {
                return Err(LabError::Config("vcg supports class = \"vcg-reserve\"".into()));
            }
            let vc = VcgConfig {
                n: d.n,
                m: need(d.m, "m")?,
            };
            let externality = match &cfg.adversary.externality {
                None => Externality::PerUnit(rational::zero()),
                Some(ExternalitySpec::PerUnit { kappa }) => Externality::PerUnit(kappa.0.clone()),
                Some(ExternalitySpec::Table { values }) => {
                    Externality::Table(values.iter().map(|v| v.0.clone()).collect())
                }
            };
            // Validate once up front.
            welfare_objective(&vc, externality.clone())?;
            DomainParts {
                domain: Arc::new(VcgDomain::new(vc)?),
                class: build_vcg_class(&vc, budget)?,
                commitment: Arc::new(vcg_commitment(&vc)?),
                // Welfare has no per-agent weights.
                objective: Box::new(move |_| Ok(Arc::new(welfare_objective(&vc, externality.clone())?))),
            }
        }
        DomainKind::Resource => {
            let class = match d.class {
                None | Some(ClassKind::PostedAllocation) => ResourceClassKind::PostedAllocation,
                Some(ClassKind::MaxMinFair) => ResourceClassKind::MaxMinFair,
                Some(_) => {
                    return Err(LabError::Config(
                        "resource supports class = \"posted-allocation\" or \"max-min-fair\"".into(),
                    ))
                }
            };
            let rc = ResourceConfig {
                n: d.n,
                k: need(d.k, "k")?,
                class,
            };
            DomainParts {
                domain: Arc::new(ResourceDomain::new(rc)?),
                class: build_resource_class(&rc, budget)?,
                commitment: Arc::new(resource_commitment(&rc)?),
                objective: Box::new(move |r| Ok(Arc::new(resource_objective(&rc, r)?))),
            }
        }
    };
    let class = match &d.members {
        Some(m) => parts.class.select(m)?,
        None => parts.class,
    };
    if d.class == Some(ClassKind::MaxMinFair) {
        require_nic(&class, parts.domain.as_ref(), budget)?;
    }
    Ok(DomainParts { class, ..parts })
}

/// Rejects classes with a member that is not single-round NIC.
pub fn require_nic(class: &MechanismClass, domain: &dyn Domain, budget: u128) -> Result<()> {
    for (idx, mech) in class.members().iter().enumerate() {
        let v = audit_single_round(mech.as_ref(), AuditKind::Nic, domain, budget)?;
        if let Some(first) = v.first() {
            return Err(LabError::NotNic(format!(
                "member {idx} ({}) has {} violations, e.g. agent {} of type level {} gains {} by reporting {}",
                mech.describe(),
                v.len(),
                first.agent + 1,
                first.theta,
                rational::format(&first.deficit),
                first.report
            )));
        }
    }
    Ok(())
}

/// `ceil(T^h)`, at least 1 and at most `T`.
pub fn scheduled_rounds(horizon: usize, h: f64) -> usize {
    let x = (horizon as f64).powf(h);
    let mut c = x.ceil() as usize;
    // Guard against powf landing just above an integer.
    if c > 1 && ((c - 1) as f64) >= x - 1e-9 {
        c -= 1;
    }
    c.clamp(1, horizon)
}

fn type_levels(cfg: &ExperimentConfig, domain: &dyn Domain) -> Result<Vec<Vec<u32>>> {
    let (n, horizon) = (cfg.domain.n, cfg.horizon);
    match &cfg.agents.types {
        TypeSpec::Explicit { values } => {
            if values.len() != n || values.iter().any(|v| v.len() < horizon) {
                return Err(LabError::Config(format!(
                    "explicit types need {n} rows of at least {horizon} levels"
                )));
            }
            Ok(values.iter().map(|v| v[..horizon].to_vec()).collect())
        }
        TypeSpec::Uniform { seed } => {
            let mut rng = replication_rng(*seed, 0);
            let spaces: Vec<Vec<u32>> = (0..n).map(|i| domain.type_space(i)).collect();
            let mut out = vec![Vec::with_capacity(horizon); n];
            for _ in 0..horizon {
                for i in 0..n {
                    let s = &spaces[i];
                    out[i].push(s[rng.random_range(0..s.len())]);
                }
            }
            Ok(out)
        }
        TypeSpec::Cyclic {} => Ok((0..n)
            .map(|i| {
                let s = domain.type_space(i);
                (0..horizon).map(|t| s[(i + t) % s.len()]).collect()
            })
            .collect()),
    }
}

fn participation(cfg: &ExperimentConfig) -> Result<Vec<Vec<bool>>> {
    let (n, horizon) = (cfg.domain.n, cfg.horizon);
    let prefix = |len: usize| vec![(0..horizon).map(|t| t < len).collect::<Vec<_>>(); n];
    Ok(match &cfg.agents.participation {
        ParticipationSpec::All {} => prefix(horizon),
        ParticipationSpec::First { rounds } => prefix(*rounds),
        ParticipationSpec::Schedule { h } => prefix(scheduled_rounds(horizon, *h)),
        ParticipationSpec::Explicit { rounds } => {
            if rounds.len() != n {
                return Err(LabError::Config(format!("explicit participation needs {n} rows")));
            }
            let mut mask = vec![vec![false; horizon]; n];
            for (i, rs) in rounds.iter().enumerate() {
                for &r in rs {
                    if r == 0 || r > horizon {
                        return Err(LabError::Config(format!(
                            "participation round {r} of agent {} is outside 1..={horizon}",
                            i + 1
                        )));
                    }
                    mask[i][r - 1] = true;
                }
            }
            mask
        }
    })
}

fn discounts(cfg: &ExperimentConfig) -> Result<Vec<Vec<Rational>>> {
    let (n, horizon) = (cfg.domain.n, cfg.horizon);
    Ok(match &cfg.agents.discount {
        DiscountSpec::Constant { value } => vec![vec![value.0.clone(); horizon]; n],
        DiscountSpec::Geometric { nu } => vec![geometric_discount(&nu.0, horizon); n],
        DiscountSpec::Explicit { values } => {
            if values.len() != n || values.iter().any(|v| v.len() < horizon) {
                return Err(LabError::Config(format!(
                    "explicit discounts need {n} rows of at least {horizon} values"
                )));
            }
            values
                .iter()
                .map(|v| v[..horizon].iter().map(|x| x.0.clone()).collect())
                .collect()
        }
    })
}

/// `r_{i,t}` as rows per round.
fn weights(cfg: &ExperimentConfig) -> Result<Vec<Vec<Rational>>> {
    let (n, horizon) = (cfg.domain.n, cfg.horizon);
    match &cfg.adversary.weights {
        WeightSpec::Fixed { values } if values.is_empty() => Ok(vec![vec![rational::one(); n]; horizon]),
        WeightSpec::Fixed { values } => {
            if values.len() != n {
                return Err(LabError::Config(format!("fixed weights need {n} values")));
            }
            Ok(vec![values.iter().map(|v| v.0.clone()).collect(); horizon])
        }
        WeightSpec::Uniform { seed, denominator } => {
            if *denominator == 0 {
                return Err(LabError::Config("weight denominator must be positive".into()));
            }
            let mut rng = replication_rng(*seed, 0);
            Ok((0..horizon)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            let num = rng.random_range(0..=*denominator);
                            rational::ratio(num as i64, *denominator as i64)
                        })
                        .collect()
                })
                .collect())
        }
        WeightSpec::File { path } => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .trim(csv::Trim::All)
                .from_path(path)?;
            let mut rows = Vec::new();
            for rec in reader.records() {
                let rec = rec?;
                let row = rec
                    .iter()
                    .map(|s| {
                        rational::parse(s).ok_or_else(|| {
                            LabError::Config(format!("{}: cannot read weight {s:?}", path.display()))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                if row.len() != n {
                    return Err(LabError::Config(format!(
                        "{}: every row needs {n} weights",
                        path.display()
                    )));
                }
                rows.push(row);
            }
            if rows.len() < horizon {
                return Err(LabError::Config(format!(
                    "{}: {} rows for horizon {horizon}",
                    path.display(),
                    rows.len()
                )));
            }
            rows.truncate(horizon);
            Ok(rows)
        }
    }
}

pub fn population(cfg: &ExperimentConfig, domain: &dyn Domain) -> Result<AgentPopulation> {
    let levels = type_levels(cfg, domain)?;
    let mask = participation(cfg)?;
    let types: Vec<Vec<Report>> = levels
        .iter()
        .zip(&mask)
        .map(|(ls, ms)| ls.iter().zip(ms).map(|(l, &p)| p.then_some(*l)).collect())
        .collect();
    Ok(AgentPopulation::new(types, discounts(cfg)?)?)
}

fn strategies(cfg: &ExperimentConfig) -> Result<Vec<Strategy>> {
    let n = cfg.domain.n;
    match &cfg.agents.strategies {
        None => Ok(vec![Strategy::Truthful; n]),
        Some(list) if list.len() != n => Err(LabError::Config(format!("strategies need {n} entries"))),
        Some(list) => Ok(list
            .iter()
            .map(|s| match s {
                StrategySpec::Truthful {} => Strategy::Truthful,
                StrategySpec::Scripted { reports } => Strategy::Scripted(reports.clone()),
            })
            .collect()),
    }
}

/// Builds everything; `Auto` parameters may fail with the core
/// `Infeasible` error.
pub fn build(cfg: &ExperimentConfig, budget: u128) -> Result<Experiment> {
    let parts = domain_parts(cfg, budget)?;
    let population = population(cfg, parts.domain.as_ref())?;
    let objectives = weights(cfg)?
        .into_iter()
        .map(|r| (parts.objective)(r))
        .collect::<Result<Vec<_>>>()?;
    let instance = Instance::new(parts.domain.clone(), population, objectives)?;

    let (alpha, beta) = match &cfg.nicom {
        NicomSection::Auto { alpha, beta } | NicomSection::Explicit { alpha, beta, .. } => {
            (alpha.as_ref().map(|a| a.0.clone()), beta.as_ref().map(|b| b.0.clone()))
        }
    };
    let alpha = match alpha {
        Some(a) => a,
        None => long_sightedness(&instance.population)?,
    };
    let mut penalty = None;
    let beta = match beta {
        Some(b) => b,
        None => {
            let g = penalty_gap(
                parts.commitment.as_ref(),
                parts.domain.as_ref(),
                &ParticipationMask::all_may_abstain(cfg.domain.n),
                budget,
            )?;
            let v = g.value.clone();
            penalty = Some(g);
            v
        }
    };
    let params = match &cfg.nicom {
        NicomSection::Auto { .. } => nicom_params(&alpha, cfg.horizon as u64, &beta)?,
        NicomSection::Explicit { eta, lambda, .. } => {
            NicomParams::explicit(*eta, lambda.0.clone(), beta, alpha)?
        }
    };
    Ok(Experiment {
        mechanism: NicomMechanism {
            class: parts.class,
            commitment: parts.commitment,
            params,
        },
        instance,
        strategies: strategies(cfg)?,
        penalty,
    })
}
