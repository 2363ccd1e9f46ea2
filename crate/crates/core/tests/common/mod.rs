#![allow(dead_code)]

use std::sync::Arc;

use nicom_core::domains::facility::{
    build_posted_location_class, facility_commitment, facility_objective, FacilityConfig,
    FacilityDomain,
};
use nicom_core::nicom::{NicomMechanism, NicomParams};
use nicom_core::protocol::Instance;
use nicom_core::rational::{int, Rational};
use nicom_core::{AgentPopulation, Objective, Report};

pub fn facility_run(
    cfg: FacilityConfig,
    members: Option<&[usize]>,
    params: NicomParams,
    population: AgentPopulation,
    weights: Vec<Rational>,
) -> (NicomMechanism, Instance) {
    let full = build_posted_location_class(&cfg, 1 << 20).unwrap();
    let class = match members {
        Some(m) => full.select(m).unwrap(),
        None => full,
    };
    let g: Arc<dyn Objective> = Arc::new(facility_objective(&cfg, weights).unwrap());
    let inst = Instance::new(
        Arc::new(FacilityDomain::new(cfg).unwrap()),
        population.clone(),
        vec![g; population.horizon()],
    )
    .unwrap();
    let mech = NicomMechanism {
        class,
        commitment: Arc::new(facility_commitment(&cfg).unwrap()),
        params,
    };
    (mech, inst)
}

pub fn present(types: Vec<Vec<Report>>) -> AgentPopulation {
    AgentPopulation::always_present(types).unwrap()
}

pub fn ones(n: usize) -> Vec<Rational> {
    vec![int(1); n]
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
