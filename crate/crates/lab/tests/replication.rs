use nicom_core::rational;
use nicom_lab::output::write_trace;
use nicom_lab::replicate::{run_one, run_replications, summarize, ReplicationOutcome};
use nicom_lab::sweep::regret_sweep;
use nicom_lab::{build, Experiment, ExperimentConfig, DEFAULT_BUDGET};

fn config(horizon: usize, extra_domain: &str, nicom: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        r#"
horizon = {horizon}
[domain]
kind = "facility"
n = 2
m = 2
k = 2
{extra_domain}
[agents]
types = {{ kind = "uniform", seed = 4 }}
[adversary]
weights = {{ kind = "uniform", seed = 9, denominator = 3 }}
[nicom]
{nicom}
"#
    ))
    .unwrap()
}

fn noisy(horizon: usize) -> Experiment {
    build(
        &config(horizon, "", "mode = \"explicit\"\neta = 0.2\nlambda = \"1/4\""),
        DEFAULT_BUDGET,
    )
    .unwrap()
}

fn trace_bytes(exp: &Experiment, seed: u64, rep: u64) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trace(&mut buf, &run_one(exp, seed, rep).unwrap(), exp.instance.domain.as_ref()).unwrap();
    buf
}

#[test]
fn traces_are_byte_identical_per_seed() {
    let exp = noisy(25);
    assert_eq!(trace_bytes(&exp, 42, 0), trace_bytes(&exp, 42, 0));
    assert_ne!(trace_bytes(&exp, 42, 0), trace_bytes(&exp, 43, 0));
    assert_ne!(trace_bytes(&exp, 42, 0), trace_bytes(&exp, 42, 1));
}

#[test]
fn single_replication_summary_matches_its_trace() {
    let exp = noisy(10);
    let s = run_replications(&exp, 5, 1).unwrap();
    let t = run_one(&exp, 5, 0).unwrap();
    assert_eq!(s.mean_alg, t.realized_objective());
    assert_eq!(s.mean_regret, &s.opt - t.realized_objective());
    assert_eq!(s.mean_utilities, t.discounted_utilities());
    assert_eq!(s.regret_se, 0.0);
}

#[test]
fn deterministic_protocol_has_zero_se() {
    let cfg = config(
        12,
        "members = [2]",
        "mode = \"explicit\"\neta = 0.2\nlambda = 0",
    );
    let s = run_replications(&build(&cfg, DEFAULT_BUDGET).unwrap(), 1, 30).unwrap();
    assert_eq!(s.regret_se, 0.0);
    assert!(s.utility_se.iter().all(|&x| x == 0.0));
}

fn block(exp: &Experiment, reps: std::ops::Range<u64>) -> (f64, f64) {
    let (opt, idx) = nicom_core::nicom::opt_value(
        &exp.mechanism.class,
        &exp.instance.population,
        &exp.instance.objectives,
    )
    .unwrap();
    let outcomes = reps
        .map(|r| {
            let t = run_one(exp, 77, r).unwrap();
            let alg = t.realized_objective();
            ReplicationOutcome {
                replication: r,
                regret: &opt - &alg,
                alg,
                utilities: t.discounted_utilities().to_vec(),
            }
        })
        .collect();
    let s = summarize(77, opt.clone(), idx, outcomes);
    (rational::to_f64(&s.mean_regret), s.regret_se)
}

#[test]
fn disjoint_blocks_agree() {
    let exp = noisy(20);
    let (a, sa) = block(&exp, 0..200);
    let (b, sb) = block(&exp, 200..400);
    assert!(sa > 0.0 && sb > 0.0);
    assert!((a - b).abs() <= 4.0 * (sa * sa + sb * sb).sqrt(), "{a} vs {b}");
}

#[test]
fn quadrupling_replications_halves_se() {
    let exp = noisy(20);
    let small = run_replications(&exp, 3, 100).unwrap().regret_se;
    let large = run_replications(&exp, 3, 400).unwrap().regret_se;
    let ratio = large / small;
    assert!((0.35..=0.65).contains(&ratio), "ratio {ratio}");
}

#[test]
fn zero_regret_sweep_is_flagged() {
    // A single-member class with no commitment always plays the optimum.
    let cfg = config(1, "members = [1]", "mode = \"explicit\"\neta = 0.1\nlambda = 0");
    let s = regret_sweep(&cfg, &[4, 8, 16], 3, 0, DEFAULT_BUDGET).unwrap();
    assert_eq!(s.slope, None);
    assert_eq!(s.flag.as_deref(), Some("degenerate: zero regret"));
}

#[test]
fn sweep_records_infeasible_horizons() {
    let cfg = config(1, "", "mode = \"auto\"");
    let s = regret_sweep(&cfg, &[4, 8, 16], 2, 0, DEFAULT_BUDGET).unwrap();
    assert!(s.points.iter().all(|p| matches!(
        p.status,
        nicom_lab::sweep::PointStatus::Infeasible { .. }
    )));
    assert!(s.flag.unwrap().contains("3 infeasible"));
}
