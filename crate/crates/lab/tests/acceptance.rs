//! One line per acceptance criterion; exits non-zero if any fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nicom_core::domains::facility::{facility_commitment, FacilityConfig, FacilityDomain};
use nicom_core::domains::resource::{resource_commitment, ResourceClassKind, ResourceConfig, ResourceDomain};
use nicom_core::domains::vcg::{build_vcg_class, vcg_commitment, VcgConfig, VcgDomain};
use nicom_core::nicom::{nicom_params, penalty_gap, regret_bound, NicomParams, ParticipationMask};
use nicom_core::rational::{self, int, ratio, Rational};
use nicom_core::strategic::{audit_single_round, best_response_value, exact_expected_utilities, AuditKind};
use nicom_core::{Domain, Error, SingleRoundMechanism};
use nicom_lab::audit::dp_check;
use nicom_lab::config::StrategySpec;
use nicom_lab::replicate::{run_one, run_replications, standard_error};
use nicom_lab::sweep::{regret_sweep, PointStatus};
use nicom_lab::{build, ExperimentConfig, LabError, DEFAULT_BUDGET};
use rayon::prelude::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

type Check = fn() -> Result<Verdict, String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&configs().join(name)).expect("bundled config").0
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn q(x: &Rational) -> String {
    rational::format(x)
}

fn weak_dp() -> Result<Verdict, String> {
    let cfg = ExperimentConfig::from_toml(
        "horizon = 3\n[domain]\nkind = \"facility\"\nn = 1\nm = 1\nk = 2\nmembers = [0, 1]\n\
         [agents]\ntypes = { kind = \"cyclic\" }\n[nicom]\nmode = \"explicit\"\neta = 0.1\nlambda = 1\n",
    )
    .map_err(err)?;
    let exp = build(&cfg, DEFAULT_BUDGET).map_err(err)?;
    let mut pass = exp.mechanism.class.len() == 2;
    let mut parts = Vec::new();
    for eta in [0.05, 0.1, 0.5] {
        let r = dp_check(&exp, eta, 2, DEFAULT_BUDGET).map_err(err)?;
        let ok = r.max_abs_log_ratio <= 4.0 * eta + 1e-9;
        pass &= ok;
        parts.push(format!("eta {eta}: {:.6} <= {} ({} pairs)", r.max_abs_log_ratio, 4.0 * eta, r.pairs_checked));
    }
    Ok(verdict(pass, parts.join("; ")))
}

fn gap_of(mech: &dyn SingleRoundMechanism, domain: &dyn Domain, n: usize) -> Result<Option<Rational>, String> {
    match penalty_gap(mech, domain, &ParticipationMask::all_may_abstain(n), DEFAULT_BUDGET) {
        Ok(g) => Ok(Some(g.value)),
        Err(Error::NoDeviation) => Ok(None),
        Err(e) => Err(err(e)),
    }
}

fn penalty_floors() -> Result<Verdict, String> {
    let mut failures = Vec::new();
    let mut checked = 0;
    for m in 1..=4u32 {
        for k in [2usize, 3] {
            for n in 1..=2 {
                let cfg = FacilityConfig { n, m, k };
                let b = gap_of(&facility_commitment(&cfg).map_err(err)?, &FacilityDomain::new(cfg).map_err(err)?, n)?;
                let floor = ratio(1, (m * m) as i64);
                checked += 1;
                if let Some(b) = b.filter(|b| *b < floor) {
                    failures.push(format!("facility m={m} k={k} n={n}: {} < {}", q(&b), q(&floor)));
                }
            }
        }
    }
    for m in 1..=4u32 {
        for n in 1..=2 {
            let cfg = VcgConfig { n, m };
            let b = gap_of(&vcg_commitment(&cfg).map_err(err)?, &VcgDomain::new(cfg).map_err(err)?, n)?;
            let floor = ratio(1, (4 * m * m) as i64);
            checked += 1;
            if let Some(b) = b.filter(|b| *b < floor) {
                failures.push(format!("vcg m={m} n={n}: {} < {}", q(&b), q(&floor)));
            }
        }
    }
    let mut vacuous = 0;
    for n in 2..=3usize {
        for k in 1..=3u32 {
            let cfg = ResourceConfig { n, k, class: ResourceClassKind::MaxMinFair };
            let b = gap_of(&resource_commitment(&cfg).map_err(err)?, &ResourceDomain::new(cfg).map_err(err)?, n)?;
            let floor = ratio(1, 2 * n as i64 * k as i64);
            checked += 1;
            match b {
                None => vacuous += 1,
                Some(b) if b < floor => failures.push(format!("resource n={n} k={k}: {} < {}", q(&b), q(&floor))),
                Some(_) => {}
            }
        }
    }
    let head = format!("{checked} cases, {vacuous} without a possible misreport");
    if failures.is_empty() {
        Ok(verdict(true, head))
    } else {
        Ok(verdict(false, format!("{head}; below floor: {}", failures.join(", "))))
    }
}

fn vcg_dsic() -> Result<Verdict, String> {
    let mut members = 0;
    let mut violations = Vec::new();
    for n in 1..=3 {
        for m in 1..=3u32 {
            let cfg = VcgConfig { n, m };
            let domain = VcgDomain::new(cfg).map_err(err)?;
            for mech in build_vcg_class(&cfg, DEFAULT_BUDGET).map_err(err)?.members() {
                members += 1;
                let v = audit_single_round(mech.as_ref(), AuditKind::Dsic, &domain, DEFAULT_BUDGET).map_err(err)?;
                if !v.is_empty() {
                    violations.push(format!("n={n} m={m} {}: {}", mech.describe(), v.len()));
                }
            }
        }
    }
    Ok(verdict(
        violations.is_empty(),
        format!("{members} reserve vectors audited, violations: {}", if violations.is_empty() { "none".into() } else { violations.join(", ") }),
    ))
}

fn tiny_equilibrium() -> Result<Verdict, String> {
    let alpha = int(3);
    let beta = ratio(1, 4);
    let auto = match nicom_params(&alpha, 3, &beta) {
        Err(Error::Infeasible { lambda, min_horizon }) => {
            format!("nicom_params(3, 3, 1/4) is infeasible (lambda {lambda}, needs T >= {min_horizon})")
        }
        Ok(_) => return Err("expected the tiny instance to be infeasible under nicom_params".into()),
        Err(e) => return Err(err(e)),
    };
    let cfg = load("facility_tiny.toml");
    let exp = build(&cfg, DEFAULT_BUDGET).map_err(err)?;
    let p = &exp.mechanism.params;
    let measured_beta = exp.penalty.as_ref().map(|g| g.value.clone());
    if measured_beta.as_ref() != Some(&beta) || *p.alpha() != alpha || !p.certified() || exp.mechanism.class.len() > 4 {
        return Err(format!("unexpected tiny instance: beta {measured_beta:?}, alpha {}, certified {}", q(p.alpha()), p.certified()));
    }
    let mut pass = true;
    let mut parts = vec![format!("{auto}; ran at certified lambda {} eta {}", q(p.lambda()), p.eta())];
    for agent in 0..2 {
        let r = best_response_value(agent, &exp.mechanism, &exp.instance, 1e-7, DEFAULT_BUDGET).map_err(err)?;
        let gap = rational::to_f64(&r.gap);
        pass &= gap <= 1e-7;
        parts.push(format!("agent {} gap {gap:e} ({} nodes)", agent + 1, r.nodes));
    }
    Ok(verdict(pass, parts.join("; ")))
}

fn regret_vs_bound() -> Result<Verdict, String> {
    let cfg = ExperimentConfig::from_toml(
        "horizon = 512\nseed = 21\n[domain]\nkind = \"facility\"\nn = 2\nm = 2\nk = 2\n\
         [agents]\ntypes = { kind = \"uniform\", seed = 5 }\n\
         [adversary]\nweights = { kind = \"uniform\", seed = 6, denominator = 4 }\n",
    )
    .map_err(err)?;
    let exp = match build(&cfg, DEFAULT_BUDGET) {
        Ok(e) => e,
        Err(LabError::Core(Error::Infeasible { lambda, min_horizon })) => {
            return Ok(verdict(
                false,
                format!("auto params infeasible at T=512: lambda {lambda} > 1, certification needs T >= {min_horizon}"),
            ))
        }
        Err(e) => return Err(err(e)),
    };
    let s = run_replications(&exp, 21, 100).map_err(err)?;
    let bound = regret_bound(&exp.mechanism.params, 512, exp.mechanism.class.len());
    let mean = rational::to_f64(&s.mean_regret);
    Ok(verdict(
        mean <= bound + 4.0 * s.regret_se,
        format!("mean regret {mean} (se {}) vs bound {bound}", s.regret_se),
    ))
}

fn exponent() -> Result<Verdict, String> {
    let cfg = load("facility_sweep.toml");
    let horizons: Vec<usize> = (6..=12).map(|e| 1usize << e).collect();
    let s = regret_sweep(&cfg, &horizons, 50, cfg.seed, DEFAULT_BUDGET).map_err(err)?;
    let feasible: Vec<String> = s
        .points
        .iter()
        .filter_map(|p| match p.status {
            PointStatus::Measured { mean_regret, .. } => Some(format!("T={} regret {mean_regret}", p.horizon)),
            PointStatus::Infeasible { .. } => None,
        })
        .collect();
    let flag = s.flag.clone().unwrap_or_default();
    Ok(match s.slope {
        Some(b) => verdict(b <= 0.65, format!("slope {b} over {:?}; {flag}", s.fitted)),
        None => verdict(false, format!("no slope: {flag}; measured: {}", feasible.join(", "))),
    })
}

const MC_RUNS: u64 = 100_000;

fn mc_agrees(name: &str, mut cfg: ExperimentConfig, strategies: Option<Vec<StrategySpec>>) -> Result<(bool, String), String> {
    if strategies.is_some() {
        cfg.agents.strategies = strategies;
    }
    let exp = build(&cfg, DEFAULT_BUDGET).map_err(err)?;
    let exact = exact_expected_utilities(&exp.mechanism, &exp.instance, &exp.strategies, DEFAULT_BUDGET).map_err(err)?;
    let samples: Vec<Vec<f64>> = (0..MC_RUNS)
        .into_par_iter()
        .map(|r| {
            let t = run_one(&exp, 1234, r).expect("protocol run");
            t.discounted_utilities().iter().map(rational::to_f64).collect()
        })
        .collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, e) in exact.iter().enumerate() {
        let xs: Vec<f64> = samples.iter().map(|s| s[i]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let se = standard_error(&xs);
        let e = rational::to_f64(e);
        let z = if se > 0.0 { (mean - e).abs() / se } else if (mean - e).abs() < 1e-12 { 0.0 } else { f64::INFINITY };
        ok &= z <= 4.0;
        parts.push(format!("agent {} z={z:.2}", i + 1));
    }
    Ok((ok, format!("{name}: {}", parts.join(" "))))
}

fn oracle_equivalence() -> Result<Verdict, String> {
    let runs = [
        mc_agrees("facility", load("facility_tiny.toml"), None)?,
        mc_agrees(
            "vcg",
            load("vcg_small.toml"),
            Some(vec![StrategySpec::Truthful {}, StrategySpec::Scripted { reports: vec![2, 2, 2, 2] }]),
        )?,
        mc_agrees("resource", load("resource_mmf.toml"), None)?,
    ];
    Ok(verdict(
        runs.iter().all(|r| r.0),
        format!("{MC_RUNS} runs each; {}", runs.iter().map(|r| r.1.as_str()).collect::<Vec<_>>().join("; ")),
    ))
}

fn cli_trace(dir: &Path, seed: &str) -> Result<Vec<u8>, String> {
    let cfg = configs().join("facility_tiny.toml");
    let out = Command::new(env!("CARGO_BIN_EXE_nicom-lab"))
        .args(["run", "--config", cfg.to_str().unwrap(), "--reps", "1", "--seed", seed, "--out"])
        .arg(dir)
        .output()
        .map_err(err)?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    std::fs::read(dir.join("trace.csv")).map_err(err)
}

fn reproducibility() -> Result<Verdict, String> {
    let tmp = tempfile::tempdir().map_err(err)?;
    let a = cli_trace(&tmp.path().join("a"), "9")?;
    let b = cli_trace(&tmp.path().join("b"), "9")?;
    let c = cli_trace(&tmp.path().join("c"), "10")?;
    Ok(verdict(
        a == b && a != c,
        format!("same seed identical: {}; other seed differs: {}", a == b, a != c),
    ))
}

fn parameter_arithmetic() -> Result<Verdict, String> {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut exact = |alpha: Rational, t: u64, beta: Rational, eta: f64, lambda: Rational| -> Result<(), String> {
        let p: NicomParams = nicom_params(&alpha, t, &beta).map_err(err)?;
        let ok = p.eta() == eta && *p.lambda() == lambda && p.certified();
        pass &= ok;
        parts.push(format!("({}, {t}, {}) -> eta {}, lambda {}", q(&alpha), q(&beta), p.eta(), q(p.lambda())));
        Ok(())
    };
    exact(int(1), 10_000, ratio(1, 2), 0.01, ratio(8, 25))?;
    exact(int(1), 256, int(1), 1.0 / 16.0, int(1))?;
    match nicom_params(&int(4), 64, &ratio(1, 4)) {
        Err(Error::Infeasible { lambda, min_horizon }) => {
            pass &= lambda == 16.0;
            parts.push(format!("(4, 64, 1/4) infeasible, lambda {lambda}, needs T >= {min_horizon}"));
        }
        other => {
            pass = false;
            parts.push(format!("(4, 64, 1/4) returned {other:?}"));
        }
    }
    Ok(verdict(pass, parts.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check, u64); 9] = [
        ("weak-DP bound of the learner", weak_dp, 10),
        ("commitment penalty-gap floors", penalty_floors, 60),
        ("single-round DSIC of VCG with reserves", vcg_dsic, 60),
        ("truthful equilibrium on the tiny facility instance", tiny_equilibrium, 300),
        ("Hedge regret within its bound", regret_vs_bound, 120),
        ("regret exponent under h = 0", exponent, 900),
        ("exact utilities agree with Monte Carlo", oracle_equivalence, 300),
        ("reproducible traces", reproducibility, 10),
        ("parameter arithmetic", parameter_arithmetic, 60),
    ];
    let mut failed = 0;
    for (idx, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let (pass, detail) = match result {
            Ok(v) => (v.pass && in_time, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name} [{:.2}s, limit {limit}s{}] {detail}",
            idx + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over time" },
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
