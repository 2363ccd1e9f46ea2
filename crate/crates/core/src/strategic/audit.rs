//! Single-round truthfulness audits by enumeration.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::mechanism::{
    enumerate_profiles, expected_utility_single, profile_count, Domain, SingleRoundMechanism,
};
use crate::rational::Rational;
use crate::types::{Level, Profile, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditKind {
    /// Others report their true types.
    Nic,
    /// Others report anything, ⊥ included.
    Dsic,
}

/// A profitable misreport.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub agent: usize,
    pub theta: Level,
    pub report: Level,
    /// Reports of the others; the entry of `agent` is ⊥.
    pub others: Profile,
    /// Utility of lying minus utility of truth, positive.
    pub deficit: Rational,
}

/// Every tuple where misreporting strictly beats the truth. Empty iff the
/// mechanism has the audited property.
pub fn audit_single_round(
    mech: &dyn SingleRoundMechanism,
    kind: AuditKind,
    domain: &dyn Domain,
    budget: u128,
) -> Result<Vec<Violation>> {
    let n = domain.agents();
    let spaces: Vec<Vec<Report>> = (0..n)
        .map(|j| {
            let mut s: Vec<Report> = domain.type_space(j).into_iter().map(Some).collect();
            if kind == AuditKind::Dsic {
                s.push(None);
            }
            s
        })
        .collect();

    let mut required: u128 = 0;
    for i in 0..n {
        let own = domain.type_space(i).len() as u128;
        let mut others = spaces.clone();
        others[i] = alloc::vec![None];
        required = required.saturating_add(
            own.saturating_mul(own.saturating_sub(1))
                .saturating_mul(profile_count(&others)),
        );
    }
    if required > budget {
        return Err(Error::InstanceTooLarge { budget, required });
    }

    let mut violations = Vec::new();
    for i in 0..n {
        let own = domain.type_space(i);
        let mut other_spaces = spaces.clone();
        other_spaces[i] = alloc::vec![None];
        for others in enumerate_profiles(&other_spaces) {
            for &theta in &own {
                let mut truthful = others.clone();
                truthful[i] = Some(theta);
                let honest = expected_utility_single(mech, &truthful, i, theta, domain)?;
                for &b in own.iter().filter(|&&b| b != theta) {
                    let mut lying = others.clone();
                    lying[i] = Some(b);
                    let deficit = expected_utility_single(mech, &lying, i, theta, domain)? - &honest;
                    if deficit > Rational::zero() {
                        violations.push(Violation {
                            agent: i,
                            theta,
                            report: b,
                            others: others.clone(),
                            deficit,
                        });
                    }
                }
            }
        }
    }
    Ok(violations)
}
