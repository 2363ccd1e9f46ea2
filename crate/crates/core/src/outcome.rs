//! Outcomes and finite outcome distributions with exact probabilities.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A facility at `position`, usable by the agents in `access` (sorted, 0-based).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    pub position: Rational,
    pub access: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FacilityOutcome {
    pub sites: Vec<Site>,
}

/// Winner set and one price per agent; non-winners pay zero.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AuctionOutcome {
    pub winners: Vec<usize>,
    pub prices: Vec<Rational>,
}

impl AuctionOutcome {
    pub fn wins(&self, agent: usize) -> bool {
        self.winners.binary_search(&agent).is_ok()
    }
}

/// CPUs per agent. The total may fall short of the cluster size.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AllocationOutcome {
    pub cpus: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Facility(FacilityOutcome),
    Auction(AuctionOutcome),
    Allocation(AllocationOutcome),
}

impl Outcome {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Facility(_) => "facility",
            Outcome::Auction(_) => "auction",
            Outcome::Allocation(_) => "allocation",
        }
    }

    /// Stable text form used in traces. Agents are numbered from 1.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        match self {
            Outcome::Facility(f) => {
                for (idx, site) in f.sites.iter().enumerate() {
                    if idx > 0 {
                        out.push(';');
                    }
                    let _ = write!(out, "{}@{{", rational::format(&site.position));
                    push_agents(&mut out, &site.access);
                    out.push('}');
                }
            }
            Outcome::Auction(a) => {
                out.push_str("o={");
                push_agents(&mut out, &a.winners);
                out.push_str("};p=(");
                for (idx, p) in a.prices.iter().enumerate() {
                    if idx > 0 {
                        out.push(',');
                    }
                    out.push_str(&rational::format(p));
                }
                out.push(')');
            }
            Outcome::Allocation(a) => {
                out.push_str("s=(");
                for (idx, c) in a.cpus.iter().enumerate() {
                    if idx > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "{c}");
                }
                out.push(')');
            }
        }
        out
    }
}

fn push_agents(out: &mut String, agents: &[usize]) {
    for (idx, a) in agents.iter().enumerate() {
        if idx > 0 {
            out.push(',');
        }
        let _ = write!(out, "{}", a + 1);
    }
}

/// A finite distribution over outcomes whose probabilities sum to exactly 1.
///
/// The support is kept sorted by outcome and free of duplicates, so two
/// distributions are equal iff they assign the same mass to every outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeDistribution {
    support: Vec<(Outcome, Rational)>,
}

impl OutcomeDistribution {
    pub fn point(outcome: Outcome) -> Self {
        Self {
            support: alloc::vec![(outcome, Rational::one())],
        }
    }

    /// Equal mass on every listed outcome; repeated outcomes accumulate mass.
    pub fn uniform(outcomes: impl IntoIterator<Item = Outcome>) -> Result<Self> {
        let outcomes: Vec<Outcome> = outcomes.into_iter().collect();
        if outcomes.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let p = rational::ratio(1, outcomes.len() as i64);
        Self::from_weighted(outcomes.into_iter().map(|o| (o, p.clone())))
    }

    /// Merges repeated outcomes and drops zero-mass entries. Fails unless
    /// every mass is non-negative and the total is exactly 1.
    pub fn from_weighted(entries: impl IntoIterator<Item = (Outcome, Rational)>) -> Result<Self> {
        let mut merged: BTreeMap<Outcome, Rational> = BTreeMap::new();
        for (o, p) in entries {
            if p < Rational::zero() {
                return Err(Error::InvalidDistribution(format!(
                    "negative probability {}",
                    rational::format(&p)
                )));
            }
            *merged.entry(o).or_insert_with(Rational::zero) += p;
        }
        let support: Vec<(Outcome, Rational)> =
            merged.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        let total: Rational = support.iter().map(|(_, p)| p).sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {}",
                rational::format(&total)
            )));
        }
        Ok(Self { support })
    }

    pub fn support(&self) -> &[(Outcome, Rational)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn probability_of(&self, outcome: &Outcome) -> Rational {
        self.support
            .binary_search_by(|(o, _)| o.cmp(outcome))
            .map(|i| self.support[i].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    /// `(1 - lambda) * self + lambda * other`, exactly.
    pub fn mix(&self, lambda: &Rational, other: &OutcomeDistribution) -> Result<Self> {
        if *lambda < Rational::zero() || *lambda > Rational::one() {
            return Err(Error::invalid("mixture weight outside [0, 1]"));
        }
        let keep = Rational::one() - lambda;
        let entries = self
            .support
            .iter()
            .map(|(o, p)| (o.clone(), p * &keep))
            .chain(other.support.iter().map(|(o, p)| (o.clone(), p * lambda)));
        Self::from_weighted(entries)
    }

    pub fn expect<F>(&self, mut f: F) -> Result<Rational>
    where
        F: FnMut(&Outcome) -> Result<Rational>,
    {
        let mut acc = Rational::zero();
        for (o, p) in &self.support {
            acc += p * f(o)?;
        }
        Ok(acc)
    }

    /// Inverse-CDF draw in support order. Exact when the common denominator
    /// fits in 128 bits, otherwise through `f64` masses.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Outcome {
        if self.support.len() == 1 {
            return &self.support[0].0;
        }
        let den = self
            .support
            .iter()
            .fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
        if let Some(d) = den.to_u128() {
            let u = rng.random_range(0..d);
            let mut cum: u128 = 0;
            for (o, p) in &self.support {
                let scaled = (p.numer() * (&den / p.denom())).to_u128().unwrap_or(0);
                cum += scaled;
                if u < cum {
                    return o;
                }
            }
        } else {
            let u: f64 = rng.random();
            let mut cum = 0.0;
            for (o, p) in &self.support {
                cum += rational::to_f64(p);
                if u < cum {
                    return o;
                }
            }
        }
        &self.support[self.support.len() - 1].0
    }
}
