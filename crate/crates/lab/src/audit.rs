//! Audits run against a built experiment.

use nicom_core::learning::{exhaustive_dp_check, hedge_state_from_history, hedge_weights, DpReport};
use nicom_core::mechanism::{enumerate_profiles, spaces_with_absence};
use nicom_core::strategic::{audit_single_round, best_response_value, AuditKind, AuditReport, Violation};
use nicom_core::Profile;

use crate::error::{LabError, Result};
use crate::experiment::Experiment;

/// Best response of every agent against truthful opponents.
pub fn nic_audit(exp: &Experiment, tolerance: f64, budget: u128) -> Result<Vec<AuditReport>> {
    (0..exp.instance.population.agents())
        .map(|i| Ok(best_response_value(i, &exp.mechanism, &exp.instance, tolerance, budget)?))
        .collect()
}

/// Single-round DSIC violations of every class member, with its descriptor.
pub fn dsic_audit(exp: &Experiment, budget: u128) -> Result<Vec<(String, Vec<Violation>)>> {
    let domain = exp.instance.domain.as_ref();
    exp.mechanism
        .class
        .members()
        .iter()
        .map(|m| Ok((m.describe(), audit_single_round(m.as_ref(), AuditKind::Dsic, domain, budget)?)))
        .collect()
}

/// Exhaustive weak-DP check of the Hedge distributions over every report
/// history of length at most `max_history`, ⊥ included.
pub fn dp_check(exp: &Experiment, eta: f64, max_history: usize, budget: u128) -> Result<DpReport> {
    let inst = &exp.instance;
    if max_history >= inst.horizon() {
        return Err(LabError::Config(format!(
            "max history {max_history} needs a horizon above it, have {}",
            inst.horizon()
        )));
    }
    let class = &exp.mechanism.class;
    let profiles = enumerate_profiles(&spaces_with_absence(inst.domain.as_ref()));
    let builder = |h: &[Profile]| {
        let state = hedge_state_from_history(eta, h, &inst.objective_refs(h.len()), class)?;
        Ok(hedge_weights(&state))
    };
    Ok(exhaustive_dp_check(&builder, &profiles, max_history, class.len(), budget)?)
}
