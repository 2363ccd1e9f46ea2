use std::sync::Arc;

use nicom_core::domains::facility::{
    build_posted_location_class, facility_commitment, facility_objective, FacilityConfig,
    FacilityDomain,
};
use nicom_core::domains::resource::{
    build_resource_class, resource_commitment, resource_objective, ResourceClassKind,
    ResourceConfig, ResourceDomain,
};
use nicom_core::domains::vcg::{
    build_vcg_class, vcg_commitment, welfare_objective, Externality, FirstPriceReserve, VcgConfig,
    VcgDomain,
};
use nicom_core::mechanism::{enumerate_profiles, spaces_with_absence, utilities};
use nicom_core::nicom::MixtureMechanism;
use nicom_core::population::geometric_discount;
use nicom_core::rational::{int, one, ratio, to_f64};
use nicom_core::strategic::{audit_single_round, AuditKind};
use nicom_core::{
    expected_objective, expected_utility_single, long_sightedness, AgentPopulation, Domain,
    Objective, Rational, SingleRoundMechanism,
};
use proptest::prelude::*;

fn in_unit_range(x: &Rational) -> bool {
    *x >= int(-1) && *x <= one()
}

/// Every mechanism, objective and utility of a domain over its full report space.
fn check_ranges(domain: &dyn Domain, mechs: &[Arc<dyn SingleRoundMechanism>], g: &dyn Objective) {
    for profile in enumerate_profiles(&spaces_with_absence(domain)) {
        for mech in mechs {
            let dist = mech.evaluate(&profile);
            let total: Rational = dist.support().iter().map(|(_, p)| p.clone()).sum();
            assert_eq!(total, one());
            for (s, _) in dist.support() {
                assert!(in_unit_range(&g.value(&profile, s).unwrap()));
                for u in utilities(domain, &profile, s).unwrap() {
                    assert!(in_unit_range(&u));
                }
            }
        }
    }
}

#[test]
fn utilities_and_objectives_stay_in_range() {
    let fc = FacilityConfig { n: 2, m: 3, k: 3 };
    let mut mechs = build_posted_location_class(&fc, 1 << 16).unwrap().members().to_vec();
    mechs.push(Arc::new(facility_commitment(&fc).unwrap()));
    check_ranges(
        &FacilityDomain::new(fc).unwrap(),
        &mechs,
        &facility_objective(&fc, vec![int(1), ratio(1, 2)]).unwrap(),
    );

    let vc = VcgConfig { n: 3, m: 2 };
    let mut mechs = build_vcg_class(&vc, 1 << 16).unwrap().members().to_vec();
    mechs.push(Arc::new(vcg_commitment(&vc).unwrap()));
    for ext in [Externality::PerUnit(int(1)), Externality::PerUnit(int(0))] {
        check_ranges(&VcgDomain::new(vc).unwrap(), &mechs, &welfare_objective(&vc, ext).unwrap());
    }

    for class in [ResourceClassKind::PostedAllocation, ResourceClassKind::MaxMinFair] {
        let rc = ResourceConfig { n: 3, k: 3, class };
        let mut mechs = build_resource_class(&rc, 1 << 16).unwrap().members().to_vec();
        mechs.push(Arc::new(resource_commitment(&rc).unwrap()));
        check_ranges(
            &ResourceDomain::new(rc).unwrap(),
            &mechs,
            &resource_objective(&rc, vec![int(1); 3]).unwrap(),
        );
    }
}

#[test]
fn dsic_clean_implies_nic_clean() {
    let vc = VcgConfig { n: 2, m: 3 };
    let dom = VcgDomain::new(vc).unwrap();
    let mut mechs = build_vcg_class(&vc, 1 << 16).unwrap().members().to_vec();
    mechs.push(Arc::new(vcg_commitment(&vc).unwrap()));
    mechs.push(Arc::new(FirstPriceReserve::new(3, vec![1, 0])));
    for mech in &mechs {
        let dsic = audit_single_round(mech.as_ref(), AuditKind::Dsic, &dom, 1 << 24).unwrap();
        let nic = audit_single_round(mech.as_ref(), AuditKind::Nic, &dom, 1 << 24).unwrap();
        if dsic.is_empty() {
            assert!(nic.is_empty());
        }
        // NIC tuples are the DSIC tuples without ⊥ opponents.
        assert!(nic.iter().all(|v| dsic.contains(v)));
    }
}

proptest! {
    #[test]
    fn mixture_is_exactly_linear(
        num in 0i64..=12, member in 0usize..9,
        b0 in proptest::option::of(0u32..=2), b1 in proptest::option::of(0u32..=2),
        theta in 0u32..=2,
    ) {
        let cfg = FacilityConfig { n: 2, m: 2, k: 2 };
        let dom = FacilityDomain::new(cfg).unwrap();
        let class = build_posted_location_class(&cfg, 100).unwrap();
        let com: Arc<dyn SingleRoundMechanism> = Arc::new(facility_commitment(&cfg).unwrap());
        let lambda = ratio(num, 12);
        let hedge = class.get(member).unwrap().clone();
        let mix = MixtureMechanism::new(lambda.clone(), member, hedge.clone(), com.clone());
        let reports = [b0, b1];

        let d = mix.evaluate(&reports);
        let (dh, dc) = (hedge.evaluate(&reports), com.evaluate(&reports));
        for (s, p) in d.support() {
            let expect = (one() - &lambda) * dh.probability_of(s) + &lambda * dc.probability_of(s);
            prop_assert_eq!(p, &expect);
        }

        let u = |m: &dyn SingleRoundMechanism| expected_utility_single(m, &reports, 0, theta, &dom).unwrap();
        prop_assert_eq!(u(&mix), (one() - &lambda) * u(hedge.as_ref()) + &lambda * u(com.as_ref()));

        let truth = [Some(theta), b1];
        let g = facility_objective(&cfg, vec![int(1), ratio(1, 3)]).unwrap();
        let f = |m: &dyn SingleRoundMechanism| expected_objective(m, &truth, &g).unwrap();
        prop_assert_eq!(f(&mix), (one() - &lambda) * f(hedge.as_ref()) + &lambda * f(com.as_ref()));
    }

    #[test]
    fn undiscounted_long_sightedness_is_largest_participation(
        masks in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 6), 1..4)
    ) {
        prop_assume!(masks.iter().any(|m| m.iter().any(|&x| x)));
        let types = masks
            .iter()
            .map(|m| m.iter().map(|&p| if p { Some(0) } else { None }).collect())
            .collect();
        let pop = AgentPopulation::always_present(types).unwrap();
        let largest = masks.iter().map(|m| m.iter().filter(|&&x| x).count()).max().unwrap();
        prop_assert_eq!(long_sightedness(&pop).unwrap(), int(largest as i64));
    }

    #[test]
    fn geometric_long_sightedness_is_bounded(num in 1i64..20, horizon in 1usize..12) {
        let nu = ratio(num, 20);
        let pop = AgentPopulation::new(
            vec![vec![Some(0); horizon]],
            vec![geometric_discount(&nu, horizon)],
        )
        .unwrap();
        let alpha = long_sightedness(&pop).unwrap();
        prop_assert!(alpha <= one() / (one() - nu));
    }

    #[test]
    fn mechanisms_are_deterministic_maps(
        b in proptest::collection::vec(proptest::option::of(1u32..=3), 3), w in 0usize..10
    ) {
        let rc = ResourceConfig { n: 3, k: 3, class: ResourceClassKind::MaxMinFair };
        let class = build_resource_class(&rc, 1 << 10).unwrap();
        let mech = class.get(w % class.len()).unwrap();
        prop_assert_eq!(mech.evaluate(&b), mech.evaluate(&b));
        let com = resource_commitment(&rc).unwrap();
        prop_assert_eq!(com.evaluate(&b), com.evaluate(&b));
    }
}

#[test]
fn long_sightedness_examples_in_floats() {
    let pop = AgentPopulation::new(vec![vec![Some(0); 3]], vec![geometric_discount(&ratio(1, 2), 3)]).unwrap();
    assert_eq!(to_f64(&long_sightedness(&pop).unwrap()), 1.75);
}
