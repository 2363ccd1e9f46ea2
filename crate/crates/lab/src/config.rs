//! Experiment configuration files (TOML).
//!
//! Unknown keys are rejected everywhere. Rationals may be written as
//! integers, decimals or `"num/den"` strings.

use std::fmt;
use std::path::{Path, PathBuf};

use nicom_core::rational::{self, Rational};
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

use crate::error::{LabError, Result};

/// An exact rational read from a number or a `"num/den"` string.
#[derive(Debug, Clone, PartialEq)]
pub struct Exact(pub Rational);

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Exact;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer, a decimal, or a \"num/den\" string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exact, E> {
                Ok(Exact(rational::int(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exact, E> {
                i64::try_from(v)
                    .map(|v| Exact(rational::int(v)))
                    .map_err(|_| E::custom("integer out of range"))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exact, E> {
                rational::parse(&v.to_string())
                    .map(Exact)
                    .ok_or_else(|| E::custom(format!("cannot read {v} as a rational")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exact, E> {
                rational::parse(v)
                    .map(Exact)
                    .ok_or_else(|| E::custom(format!("cannot read {v:?} as a rational")))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one_rep")]
    pub replications: usize,
    pub domain: DomainSection,
    pub agents: AgentsSection,
    #[serde(default)]
    pub adversary: AdversarySection,
    #[serde(default)]
    pub nicom: NicomSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn one_rep() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Facility,
    Vcg,
    Resource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassKind {
    PostedLocation,
    VcgReserve,
    PostedAllocation,
    MaxMinFair,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub kind: DomainKind,
    pub n: usize,
    /// Grid resolution (facility, vcg).
    pub m: Option<u32>,
    /// Facilities (facility) or CPUs (resource).
    pub k: Option<u32>,
    pub class: Option<ClassKind>,
    /// Keep only these class members, re-indexed in the listed order.
    pub members: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsSection {
    pub types: TypeSpec,
    #[serde(default)]
    pub participation: ParticipationSpec,
    #[serde(default)]
    pub discount: DiscountSpec,
    /// One per agent; all truthful when absent.
    pub strategies: Option<Vec<StrategySpec>>,
}

/// True type levels; level `l` stands for `l/m` on grids and for demand
/// `l` in the resource domain.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TypeSpec {
    /// `values[i][t]`, at least `horizon` entries per agent.
    Explicit { values: Vec<Vec<u32>> },
    /// Independent uniform levels from a dedicated seed.
    Uniform { seed: u64 },
    /// Agent `i` in round `t` takes the `(i + t)`-th level, cyclically.
    Cyclic {},
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ParticipationSpec {
    All {},
    /// Every agent is present in rounds `1..=rounds`.
    First { rounds: usize },
    /// Every agent is present in the first `ceil(T^h)` rounds.
    Schedule { h: f64 },
    /// 1-based rounds per agent.
    Explicit { rounds: Vec<Vec<usize>> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DiscountSpec {
    Constant { value: Exact },
    /// `gamma(t) = nu^t`.
    Geometric { nu: Exact },
    /// `values[i][t]`.
    Explicit { values: Vec<Vec<Exact>> },
}

impl Default for ParticipationSpec {
    fn default() -> Self {
        ParticipationSpec::All {}
    }
}

impl Default for DiscountSpec {
    fn default() -> Self {
        DiscountSpec::Constant {
            value: Exact(rational::one()),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StrategySpec {
    Truthful {},
    /// Report levels per round; ignored in absent rounds.
    Scripted { reports: Vec<u32> },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySection {
    #[serde(default)]
    pub weights: WeightSpec,
    /// VCG only; zero externality when absent.
    pub externality: Option<ExternalitySpec>,
}

/// Utilization / importance weights `r_{i,t}`, fixed before the run.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    /// The same per-agent weights every round.
    Fixed { values: Vec<Exact> },
    /// Independent draws from `{0, 1/d, ..., 1}`.
    Uniform { seed: u64, denominator: u32 },
    /// CSV, one row per round, one column per agent, no header.
    File { path: PathBuf },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Fixed { values: Vec::new() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExternalitySpec {
    PerUnit { kappa: Exact },
    /// `c(o)` indexed by the winner bitmask.
    Table { values: Vec<Exact> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NicomSection {
    /// `eta` and `lambda` from the certification formulas.
    Auto {
        /// Long-sightedness bound; computed from the population when absent.
        alpha: Option<Exact>,
        /// Penalty gap; brute-forced from the commitment when absent.
        beta: Option<Exact>,
    },
    Explicit {
        eta: f64,
        lambda: Exact,
        alpha: Option<Exact>,
        beta: Option<Exact>,
    },
}

impl Default for NicomSection {
    fn default() -> Self {
        NicomSection::Auto {
            alpha: None,
            beta: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Reads a config; relative paths inside resolve against its directory.
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| LabError::io(path, e))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| LabError::Config(format!("{} is not UTF-8", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let WeightSpec::File { path: p } = &mut cfg.adversary.weights {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
            if !p.exists() {
                return Err(LabError::Config(format!(
                    "adversary file {} does not exist",
                    p.display()
                )));
            }
        }
        Ok((cfg, bytes))
    }

    fn check(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(LabError::Config("horizon must be at least 1".into()));
        }
        if self.replications == 0 {
            return Err(LabError::Config("replications must be at least 1".into()));
        }
        if let ParticipationSpec::Schedule { h } = self.agents.participation {
            if !(0.0..=1.0).contains(&h) {
                return Err(LabError::Config("schedule exponent h must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }
}
