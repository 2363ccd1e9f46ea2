//! Agent strategies.
//!
//! A strategy sees the agent's own past reports and the sampled Hedge index
//! of the current round. With opponents fixed and deterministic, the own
//! report history determines the whole report history, and past outcomes
//! never influence future Hedge weights, so this information set loses
//! nothing against the full realized history.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::types::{Level, Report};

/// One non-truthful decision of a deviation policy.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Decision {
    /// 0-based round.
    pub round: usize,
    /// The agent's own reports in rounds `0..round`.
    pub own_history: Vec<Report>,
    pub hedge_index: usize,
    pub report: Level,
}

/// A history-dependent report policy; unlisted decision points are
/// truthful.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeviationPolicy {
    table: BTreeMap<(Vec<Report>, usize), Level>,
}

impl DeviationPolicy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, own_history: Vec<Report>, hedge_index: usize, report: Level) {
        self.table.insert((own_history, hedge_index), report);
    }

    pub fn lookup(&self, own_history: &[Report], hedge_index: usize) -> Option<Level> {
        self.table.get(&(own_history.to_vec(), hedge_index)).copied()
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Decisions ordered by round, then history, then index.
    pub fn decisions(&self) -> Vec<Decision> {
        let mut out: Vec<Decision> = self
            .table
            .iter()
            .map(|((h, idx), r)| Decision {
                round: h.len(),
                own_history: h.clone(),
                hedge_index: *idx,
                report: *r,
            })
            .collect();
        out.sort();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    Truthful,
    /// Fixed report per round, used only in rounds where the agent is present.
    Scripted(Vec<Level>),
    BestResponse(DeviationPolicy),
}

impl Strategy {
    /// The round's report; ⊥ exactly when the agent is absent.
    pub fn report(&self, round: usize, theta: Report, own_history: &[Report], hedge_index: usize) -> Report {
        let theta = theta?;
        Some(match self {
            Strategy::Truthful => theta,
            Strategy::Scripted(script) => script.get(round).copied().unwrap_or(theta),
            Strategy::BestResponse(policy) => policy.lookup(own_history, hedge_index).unwrap_or(theta),
        })
    }
}
