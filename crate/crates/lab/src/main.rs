use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use nicom_core::nicom::{penalty_gap, ParticipationMask};
use nicom_core::rational;
use nicom_lab::audit::{dp_check, dsic_audit, nic_audit};
use nicom_lab::config::{Exact, NicomSection};
use nicom_lab::experiment::domain_parts;
use nicom_lab::output::{self, config_digest, write_json};
use nicom_lab::replicate::{run_one, run_replications};
use nicom_lab::sweep::regret_sweep;
use nicom_lab::{build, Experiment, ExperimentConfig, LabError, DEFAULT_BUDGET};

#[derive(Parser)]
#[command(name = "nicom-lab", version, about = "Run and audit NICOM experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Replications; overrides the config.
    #[arg(long)]
    reps: Option<usize>,
    /// Output directory; overrides the config, default `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Node budget for exhaustive enumerations.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the protocol; writes trace.csv (replication 0) and summary.json.
    Run(Common),
    /// Exact best response of every agent; writes audit_nic.json.
    AuditNic {
        #[command(flatten)]
        common: Common,
        /// Largest gap still reported as certified.
        #[arg(long, default_value_t = 1e-7)]
        tolerance: f64,
    },
    /// Single-round DSIC audit of every class member; writes audit_dsic.json.
    AuditDsic(Common),
    /// Exhaustive weak-DP check of the learner; writes dp_check.json.
    DpCheck {
        #[command(flatten)]
        common: Common,
        /// Learning rate; defaults to the experiment's.
        #[arg(long)]
        eta: Option<f64>,
        /// Longest report history enumerated.
        #[arg(long, default_value_t = 2)]
        max_history: usize,
    },
    /// Brute-force penalty gap of the commitment; writes penalty_gap.json.
    PenaltyGap(Common),
    /// Regret across horizons with a log-log fit; writes sweep.json and sweep.csv.
    RegretSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<usize>,
    },
}

struct Loaded {
    cfg: ExperimentConfig,
    digest: String,
    out: PathBuf,
    seed: u64,
    reps: usize,
    budget: u128,
}

fn load(c: &Common) -> anyhow::Result<Loaded> {
    let (cfg, bytes) = ExperimentConfig::load(&c.config)?;
    let out = c
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok(Loaded {
        seed: c.seed.unwrap_or(cfg.seed),
        reps: c.reps.unwrap_or(cfg.replications),
        digest: config_digest(&bytes),
        cfg,
        out,
        budget: c.budget,
    })
}

/// Builds with the configured parameters, or with a zero-rate placeholder
/// when they are infeasible and the command does not use them.
fn build_lenient(cfg: &ExperimentConfig, budget: u128) -> anyhow::Result<(Experiment, bool)> {
    match build(cfg, budget) {
        Ok(e) => Ok((e, true)),
        Err(LabError::Core(nicom_core::Error::Infeasible { .. })) => {
            let (alpha, beta) = match &cfg.nicom {
                NicomSection::Auto { alpha, beta } | NicomSection::Explicit { alpha, beta, .. } => {
                    (alpha.clone(), beta.clone())
                }
            };
            let mut c = cfg.clone();
            c.nicom = NicomSection::Explicit {
                eta: 0.0,
                lambda: Exact(rational::zero()),
                alpha,
                beta,
            };
            Ok((build(&c, budget)?, false))
        }
        Err(e) => Err(e.into()),
    }
}

fn written(path: &Path) {
    println!("wrote {}", path.display());
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` when an audit finds a violation.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run(c) => {
            let l = load(&c)?;
            let exp = build(&l.cfg, l.budget)?;
            let trace = run_one(&exp, l.seed, 0)?;
            let path = l.out.join("trace.csv");
            let file = fs::File::create(&path).map_err(|e| LabError::io(&path, e))?;
            output::write_trace(file, &trace, exp.instance.domain.as_ref())?;
            written(&path);
            let s = run_replications(&exp, l.seed, l.reps)?;
            let path = l.out.join("summary.json");
            write_json(&path, &output::summary_json(&l.digest, &exp.mechanism.params, &s))?;
            written(&path);
            println!(
                "opt {}  alg {}  regret {} (se {})",
                rational::format(&s.opt),
                rational::format(&s.mean_alg),
                rational::to_f64(&s.mean_regret),
                s.regret_se
            );
            Ok(true)
        }
        Command::AuditNic { common, tolerance } => {
            let l = load(&common)?;
            let exp = build(&l.cfg, l.budget)?;
            let reports = nic_audit(&exp, tolerance, l.budget)?;
            let path = l.out.join("audit_nic.json");
            write_json(&path, &output::audit_json(&l.digest, &exp.mechanism.params, &reports))?;
            written(&path);
            for r in &reports {
                println!(
                    "agent {}: truthful {}  best {}  gap {}  {}",
                    r.agent + 1,
                    rational::format(&r.truthful),
                    rational::format(&r.best),
                    rational::format(&r.gap),
                    if r.certified { "certified" } else { "NOT certified" }
                );
            }
            Ok(reports.iter().all(|r| r.certified))
        }
        Command::AuditDsic(c) => {
            let l = load(&c)?;
            let (exp, _) = build_lenient(&l.cfg, l.budget)?;
            let members = dsic_audit(&exp, l.budget)?;
            let path = l.out.join("audit_dsic.json");
            write_json(&path, &output::dsic_json(&l.digest, &members))?;
            written(&path);
            let bad = members.iter().filter(|m| !m.1.is_empty()).count();
            println!("{} of {} members violate DSIC", bad, members.len());
            Ok(bad == 0)
        }
        Command::DpCheck { common, eta, max_history } => {
            let l = load(&common)?;
            let (exp, feasible) = build_lenient(&l.cfg, l.budget)?;
            let eta = match (eta, feasible) {
                (Some(e), _) => e,
                (None, true) => exp.mechanism.params.eta(),
                (None, false) => bail!("parameters are infeasible for this horizon; pass --eta"),
            };
            let r = dp_check(&exp, eta, max_history, l.budget)?;
            let path = l.out.join("dp_check.json");
            write_json(&path, &output::dp_json(&l.digest, eta, max_history, &r))?;
            written(&path);
            let ok = r.max_abs_log_ratio <= 4.0 * eta + 1e-9;
            println!(
                "max |log ratio| {} vs 4 eta = {} over {} pairs",
                r.max_abs_log_ratio,
                4.0 * eta,
                r.pairs_checked
            );
            Ok(ok)
        }
        Command::PenaltyGap(c) => {
            let l = load(&c)?;
            let parts = domain_parts(&l.cfg, l.budget)?;
            let g = penalty_gap(
                parts.commitment.as_ref(),
                parts.domain.as_ref(),
                &ParticipationMask::all_may_abstain(l.cfg.domain.n),
                l.budget,
            )?;
            let path = l.out.join("penalty_gap.json");
            write_json(&path, &output::penalty_json(&l.digest, &g))?;
            written(&path);
            println!("beta = {}", rational::format(&g.value));
            Ok(true)
        }
        Command::RegretSweep { common, horizons } => {
            let l = load(&common)?;
            let s = regret_sweep(&l.cfg, &horizons, l.reps, l.seed, l.budget)?;
            let path = l.out.join("sweep.json");
            write_json(&path, &output::sweep_json(&l.digest, &s))?;
            written(&path);
            let path = l.out.join("sweep.csv");
            let file = fs::File::create(&path).map_err(|e| LabError::io(&path, e))?;
            output::write_sweep_csv(file, &s)?;
            written(&path);
            match s.slope {
                Some(b) => println!("slope {b}"),
                None => println!("no slope: {}", s.flag.as_deref().unwrap_or("")),
            }
            Ok(true)
        }
    }
}
