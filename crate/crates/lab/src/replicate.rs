//! Independent replications and their aggregate statistics.

use nicom_core::nicom::opt_value;
use nicom_core::protocol::{run_protocol, Trace};
use nicom_core::rational::{self, Rational};
use nicom_core::rng::replication_rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::experiment::Experiment;

/// Per-replication totals kept after the trace is dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub replication: u64,
    pub alg: Rational,
    pub regret: Rational,
    pub utilities: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub master_seed: u64,
    pub replications: usize,
    pub opt: Rational,
    pub opt_index: usize,
    /// Exact means over replications.
    pub mean_alg: Rational,
    pub mean_regret: Rational,
    pub regret_se: f64,
    pub mean_utilities: Vec<Rational>,
    pub utility_se: Vec<f64>,
    pub outcomes: Vec<ReplicationOutcome>,
}

/// Replication `r` uses stream `r` of the master seed.
pub fn run_one(exp: &Experiment, master_seed: u64, replication: u64) -> Result<Trace> {
    let mut rng = replication_rng(master_seed, replication);
    Ok(run_protocol(&exp.mechanism, &exp.instance, &exp.strategies, &mut rng)?)
}

/// Sample standard deviation over `sqrt(R)`; zero for one replication.
pub fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

fn mean(xs: &[Rational]) -> Rational {
    xs.iter().sum::<Rational>() / rational::int(xs.len() as i64)
}

/// Runs replications `0..reps` in parallel; results are ordered by
/// replication, so the summary does not depend on scheduling.
pub fn run_replications(exp: &Experiment, master_seed: u64, reps: usize) -> Result<Summary> {
    let (opt, opt_index) = opt_value(
        &exp.mechanism.class,
        &exp.instance.population,
        &exp.instance.objectives,
    )?;
    let outcomes = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let trace = run_one(exp, master_seed, r)?;
            let alg = trace.realized_objective();
            Ok(ReplicationOutcome {
                replication: r,
                regret: &opt - &alg,
                alg,
                utilities: trace.discounted_utilities().to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(master_seed, opt, opt_index, outcomes))
}

pub fn summarize(
    master_seed: u64,
    opt: Rational,
    opt_index: usize,
    outcomes: Vec<ReplicationOutcome>,
) -> Summary {
    let n = exp_agents(&outcomes);
    let regrets: Vec<Rational> = outcomes.iter().map(|o| o.regret.clone()).collect();
    let algs: Vec<Rational> = outcomes.iter().map(|o| o.alg.clone()).collect();
    let regret_f: Vec<f64> = regrets.iter().map(rational::to_f64).collect();
    let mut mean_utilities = Vec::with_capacity(n);
    let mut utility_se = Vec::with_capacity(n);
    for i in 0..n {
        let u: Vec<Rational> = outcomes.iter().map(|o| o.utilities[i].clone()).collect();
        let uf: Vec<f64> = u.iter().map(rational::to_f64).collect();
        mean_utilities.push(mean(&u));
        utility_se.push(standard_error(&uf));
    }
    Summary {
        master_seed,
        replications: outcomes.len(),
        opt,
        opt_index,
        mean_alg: mean(&algs),
        mean_regret: mean(&regrets),
        regret_se: standard_error(&regret_f),
        mean_utilities,
        utility_se,
        outcomes,
    }
}

fn exp_agents(outcomes: &[ReplicationOutcome]) -> usize {
    outcomes.first().map_or(0, |o| o.utilities.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_error_by_hand() {
        assert_eq!(standard_error(&[3.0]), 0.0);
        // squared deviations sum to 4, so the sample variance is 4/3
        let xs = [1.0, 1.0, 3.0, 3.0];
        assert!((standard_error(&xs) - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
