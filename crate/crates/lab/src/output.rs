//! Trace CSV and JSON result files.
//!
//! Rationals are written as `num/den` strings, floats in shortest
//! round-trip form.

use std::io::Write;
use std::path::Path;

use nicom_core::learning::DpReport;
use nicom_core::nicom::{NicomParams, PenaltyGap};
use nicom_core::protocol::Trace;
use nicom_core::rational::{self, Rational};
use nicom_core::strategic::{AuditReport, Violation};
use nicom_core::{Domain, Report};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::replicate::Summary;
use crate::sweep::{PointStatus, SweepResult};

pub const TRACE_HEADER: [&str; 8] = [
    "round",
    "sampled_hedge_index",
    "lambda",
    "reports",
    "true_types",
    "outcome",
    "objective_value",
    "utilities",
];

pub fn config_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn q(x: &Rational) -> String {
    rational::format(x)
}

fn qs(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(q).collect()
}

fn report(domain: &dyn Domain, r: Report) -> String {
    match r {
        None => "_".to_string(),
        Some(l) => q(&domain.type_value(l)),
    }
}

fn profile(domain: &dyn Domain, p: &[Report]) -> String {
    p.iter().map(|&r| report(domain, r)).collect::<Vec<_>>().join(";")
}

/// One row per round; rounds are 1-based.
pub fn write_trace<W: Write>(out: W, trace: &Trace, domain: &dyn Domain) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in trace.records() {
        w.write_record([
            (r.round + 1).to_string(),
            r.hedge_index.to_string(),
            q(&r.lambda),
            profile(domain, &r.reports),
            profile(domain, &r.truth),
            r.outcome.canonical(),
            q(&r.objective),
            qs(&r.utilities).join(";"),
        ])?;
    }
    w.flush().map_err(|e| LabError::io("trace", e))?;
    Ok(())
}

pub fn params_json(p: &NicomParams) -> Value {
    json!({
        "eta": p.eta(),
        "lambda": q(p.lambda()),
        "beta": q(p.beta()),
        "alpha": q(p.alpha()),
        "certified": p.certified(),
    })
}

pub fn summary_json(digest: &str, params: &NicomParams, s: &Summary) -> Value {
    json!({
        "config_sha256": digest,
        "master_seed": s.master_seed,
        "replications": s.replications,
        "replication_seeds": s.outcomes.iter().map(|o| o.replication).collect::<Vec<_>>(),
        "params": params_json(params),
        "opt": q(&s.opt),
        "opt_index": s.opt_index,
        "alg": q(&s.mean_alg),
        "regret": q(&s.mean_regret),
        "regret_f64": rational::to_f64(&s.mean_regret),
        "regret_se": s.regret_se,
        "utilities": qs(&s.mean_utilities),
        "utility_se": s.utility_se,
        "per_replication": s.outcomes.iter().map(|o| json!({
            "replication": o.replication,
            "alg": q(&o.alg),
            "regret": q(&o.regret),
            "utilities": qs(&o.utilities),
        })).collect::<Vec<_>>(),
    })
}

pub fn audit_json(digest: &str, params: &NicomParams, reports: &[AuditReport]) -> Value {
    json!({
        "config_sha256": digest,
        "params": params_json(params),
        "certified": reports.iter().all(|r| r.certified),
        "agents": reports.iter().map(|r| json!({
            "agent": r.agent + 1,
            "truthful": q(&r.truthful),
            "best": q(&r.best),
            "gap": q(&r.gap),
            "gap_f64": rational::to_f64(&r.gap),
            "tolerance": r.tolerance,
            "certified": r.certified,
            "nodes": r.nodes.to_string(),
            "deviations": r.deviations.iter().map(|d| json!({
                "round": d.round + 1,
                "own_history": d.own_history,
                "hedge_index": d.hedge_index,
                "report": d.report,
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn dsic_json(digest: &str, members: &[(String, Vec<Violation>)]) -> Value {
    json!({
        "config_sha256": digest,
        "dsic": members.iter().all(|m| m.1.is_empty()),
        "members": members.iter().enumerate().map(|(idx, (desc, vs))| json!({
            "index": idx,
            "mechanism": desc,
            "violations": vs.iter().map(|v| json!({
                "agent": v.agent + 1,
                "theta": v.theta,
                "report": v.report,
                "others": v.others,
                "gain": q(&v.deficit),
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn dp_json(digest: &str, eta: f64, max_history: usize, r: &DpReport) -> Value {
    json!({
        "config_sha256": digest,
        "eta": eta,
        "max_history": max_history,
        "bound": 4.0 * eta,
        "max_abs_log_ratio": r.max_abs_log_ratio,
        "pairs_checked": r.pairs_checked,
        "worst_history_len": r.worst_history_len,
        "within_bound": r.max_abs_log_ratio <= 4.0 * eta + 1e-9,
    })
}

pub fn penalty_json(digest: &str, g: &PenaltyGap) -> Value {
    json!({
        "config_sha256": digest,
        "beta": q(&g.value),
        "beta_f64": rational::to_f64(&g.value),
        "witness": {
            "agent": g.witness.agent + 1,
            "theta": g.witness.theta,
            "report": g.witness.report,
            "others": g.witness.others,
        },
    })
}

pub fn sweep_json(digest: &str, s: &SweepResult) -> Value {
    json!({
        "config_sha256": digest,
        "slope": s.slope,
        "intercept": s.intercept,
        "fitted_horizons": s.fitted,
        "flag": s.flag,
        "points": s.points.iter().map(|p| match &p.status {
            PointStatus::Measured { mean_regret, se, replications, eta, lambda, alpha, bound } => json!({
                "horizon": p.horizon,
                "status": "measured",
                "mean_regret": mean_regret,
                "se": se,
                "replications": replications,
                "eta": eta,
                "lambda": lambda,
                "alpha": alpha,
                "bound": bound,
            }),
            PointStatus::Infeasible { lambda, min_horizon } => json!({
                "horizon": p.horizon,
                "status": "infeasible",
                "lambda": lambda,
                "min_horizon": min_horizon,
            }),
        }).collect::<Vec<_>>(),
    })
}

/// Sweep points as CSV; empty cells where a value does not apply.
pub fn write_sweep_csv<W: Write>(out: W, s: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["horizon", "status", "mean_regret", "se", "eta", "lambda", "bound", "min_horizon"])?;
    for p in &s.points {
        let row = match &p.status {
            PointStatus::Measured { mean_regret, se, eta, lambda, bound, .. } => [
                p.horizon.to_string(),
                "measured".into(),
                mean_regret.to_string(),
                se.to_string(),
                eta.to_string(),
                lambda.to_string(),
                bound.to_string(),
                String::new(),
            ],
            PointStatus::Infeasible { lambda, min_horizon } => [
                p.horizon.to_string(),
                "infeasible".into(),
                String::new(),
                String::new(),
                String::new(),
                lambda.to_string(),
                String::new(),
                min_horizon.to_string(),
            ],
        };
        w.write_record(row)?;
    }
    w.flush().map_err(|e| LabError::io("sweep", e))?;
    Ok(())
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| LabError::io(path, e))
}
