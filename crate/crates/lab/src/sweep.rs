//! Regret across horizons and the fitted log-log slope.

use nicom_core::rational;
use nicom_core::Error as CoreError;

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::experiment::build;
use crate::replicate::run_replications;

#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Measured {
        mean_regret: f64,
        se: f64,
        replications: usize,
        eta: f64,
        lambda: f64,
        alpha: f64,
        bound: f64,
    },
    Infeasible {
        lambda: f64,
        min_horizon: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub horizon: usize,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Least-squares slope of `ln mean_regret` on `ln T`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Horizons that entered the fit.
    pub fitted: Vec<usize>,
    /// Why no slope was fitted, or which points were left out.
    pub flag: Option<String>,
}

/// Ordinary least squares `y = a + b x`; `None` below three points or
/// when every `x` coincides.
pub fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

/// The learner's regret bound `4 eta T + ln|Pi| / eta + lambda T`.
pub fn hedge_bound(eta: f64, lambda: f64, horizon: usize, class_size: usize) -> f64 {
    let t = horizon as f64;
    4.0 * eta * t + (class_size as f64).ln() / eta + lambda * t
}

/// Runs `cfg` at every horizon with its own parameters. Horizons whose
/// parameters cannot be certified are recorded and skipped.
pub fn regret_sweep(
    cfg: &ExperimentConfig,
    horizons: &[usize],
    reps: usize,
    master_seed: u64,
    budget: u128,
) -> Result<SweepResult> {
    if horizons.len() < 3 || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::Config(
            "a sweep needs at least three strictly increasing horizons".into(),
        ));
    }
    let mut points = Vec::with_capacity(horizons.len());
    for &horizon in horizons {
        let mut c = cfg.clone();
        c.horizon = horizon;
        let exp = match build(&c, budget) {
            Ok(e) => e,
            Err(LabError::Core(CoreError::Infeasible { lambda, min_horizon })) => {
                points.push(SweepPoint {
                    horizon,
                    status: PointStatus::Infeasible { lambda, min_horizon },
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let s = run_replications(&exp, master_seed, reps)?;
        let p = &exp.mechanism.params;
        let lambda = rational::to_f64(p.lambda());
        points.push(SweepPoint {
            horizon,
            status: PointStatus::Measured {
                mean_regret: rational::to_f64(&s.mean_regret),
                se: s.regret_se,
                replications: reps,
                eta: p.eta(),
                lambda,
                alpha: rational::to_f64(p.alpha()),
                bound: hedge_bound(p.eta(), lambda, horizon, exp.mechanism.class.len()),
            },
        });
    }
    Ok(fit(points))
}

fn fit(points: Vec<SweepPoint>) -> SweepResult {
    let measured: Vec<(usize, f64)> = points
        .iter()
        .filter_map(|p| match p.status {
            PointStatus::Measured { mean_regret, .. } => Some((p.horizon, mean_regret)),
            PointStatus::Infeasible { .. } => None,
        })
        .collect();
    let infeasible = points.len() - measured.len();
    let positive: Vec<(usize, f64)> = measured.iter().copied().filter(|&(_, r)| r > 0.0).collect();

    let mut notes = Vec::new();
    if infeasible > 0 {
        notes.push(format!("{infeasible} infeasible horizons excluded"));
    }
    if !measured.is_empty() && positive.is_empty() && measured.iter().all(|&(_, r)| r == 0.0) {
        notes.push("degenerate: zero regret".to_string());
    } else if positive.len() < measured.len() {
        notes.push(format!(
            "{} horizons with non-positive mean regret excluded",
            measured.len() - positive.len()
        ));
    }
    let line: Vec<(f64, f64)> = positive
        .iter()
        .map(|&(t, r)| ((t as f64).ln(), r.ln()))
        .collect();
    let fitted = fit_line(&line);
    if fitted.is_none() && !notes.iter().any(|n| n.starts_with("degenerate")) {
        notes.push(format!("slope needs at least 3 fitted points, have {}", positive.len()));
    }
    SweepResult {
        points,
        slope: fitted.map(|f| f.1),
        intercept: fitted.map(|f| f.0),
        fitted: if fitted.is_some() {
            positive.iter().map(|p| p.0).collect()
        } else {
            Vec::new()
        },
        flag: (!notes.is_empty()).then(|| notes.join("; ")),
    }
}
