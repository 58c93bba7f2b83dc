use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttl_core::algebra::{CubicAlgebra, Elem, SplittingType};
use ttl_core::arith::Ratio;
use ttl_core::branch::BranchContext;
use ttl_core::census::*;
use ttl_core::stats::*;

fn kind() -> impl Strategy<Value = SplittingType> {
    prop_oneof![Just(SplittingType::Split), Just(SplittingType::Mixed), Just(SplittingType::Inert)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn census_matches_brute_force(
        p in prop_oneof![Just(5u64), Just(7)],
        kind in kind(),
        g in [0u128..7, 0..7, 0..7],
        w in [0u128..7, 0..7, 0..7],
        s in 0u64..7,
        mask in 1u8..64,
    ) {
        let b = CubicAlgebra::standard(p, kind).unwrap();
        let pu = p as u128;
        let gamma = Elem(g.map(|c| c % pu));
        let omega = Elem(w.map(|c| c % pu));
        prop_assume!(b.is_unit(&gamma) && b.is_generator(&omega));
        let fibers: Vec<u64> = (1..p).filter(|d| mask >> (d % 6) & 1 == 1).collect();
        prop_assume!(!fibers.is_empty());
        let q = CensusQuery::new(&b, gamma, omega, s, fibers).unwrap();
        let rep = singular_census(&q).unwrap();
        prop_assert_eq!(brute_force_census(&q), (rep.total, rep.singular));
        if s == 0 {
            for f in &rep.fibers {
                // the u = 0 point never lies on a fiber with s = 0
                prop_assert_eq!(Some(f.singular), f.cube_equation);
            }
        }
    }

    #[test]
    fn singular_values_are_zero_one_three(p in prop_oneof![Just(5u64), Just(7), Just(13)], kind in kind(), delta in 1u64..13) {
        prop_assume!(delta % p != 0);
        let b = CubicAlgebra::standard(p, kind).unwrap();
        let avg = average_singular(&b, &b.one(), delta).unwrap();
        prop_assert!(avg.values_ok);
        prop_assert!(avg.within_bound);
        if p % 3 == 2 {
            prop_assert_eq!(avg.average, Ratio::int(1));
        }
    }
}

#[test]
fn line_points_are_singular() {
    let b = CubicAlgebra::standard(7, SplittingType::Mixed).unwrap();
    let w = b.t();
    let z = b.trace_dual_basis(&w).unwrap();
    for s in 0..7u64 {
        for u in 0..7u128 {
            let x = b.add(&b.scale(s as u128, &z[0]), &b.scale(u, &z[2]));
            let pt = singular_line_membership(&b, &w, s, &x).unwrap().unwrap();
            assert_eq!(pt.u as u128, u);
        }
    }
}

#[test]
fn full_fiber_orbits_reconcile() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for p in [5u64, 7, 11] {
        for (kind, shape) in [
            (SplittingType::Mixed, OrbitShape::NormOne),
            (SplittingType::Inert, OrbitShape::NormOne),
            (SplittingType::Inert, OrbitShape::AllUnits),
        ] {
            let alg = CubicAlgebra::standard_k(p, 2, kind).unwrap();
            let eta = full_orbit_eta(&alg, shape, &mut rng).unwrap();
            for c in 0..p as u128 {
                let ctx = BranchContext::new(alg.clone(), eta, alg.one(), c).unwrap();
                let oc = full_orbit_branch_census(&ctx).unwrap();
                assert!(oc.full_fiber && oc.reconciled && oc.delta_matches_u, "p={p} {kind} {shape:?} c={c}");
            }
        }
    }
    let split = CubicAlgebra::standard_k(5, 2, SplittingType::Split).unwrap();
    assert!(full_orbit_eta(&split, OrbitShape::NormOne, &mut rng).is_err());
}

#[test]
fn supersingular_census_at_eleven() {
    let alg = CubicAlgebra::standard_k(11, 2, SplittingType::Inert).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let eta = full_orbit_eta(&alg, OrbitShape::NormOne, &mut rng).unwrap();
    let ctx = BranchContext::new(alg.clone(), eta, alg.one(), 0).unwrap();
    let oc = full_orbit_branch_census(&ctx).unwrap();
    assert_eq!((oc.classes, oc.singular, oc.transverse), (12, 1, 11));
}

#[test]
fn generator_table() {
    for p in [5u64, 7, 11, 13] {
        for kind in SplittingType::ALL {
            let b = CubicAlgebra::standard(p, kind).unwrap();
            assert_eq!(generator_count_exhaustive(&b), generator_count(kind, p));
        }
    }
}

#[test]
fn cube_classes() {
    for q in [5u64, 11] {
        for kind in SplittingType::ALL {
            let b = CubicAlgebra::standard(q, kind).unwrap();
            for a in 1..q {
                let t = cube_class_tally(&b, a).unwrap();
                assert!(t.pass);
                assert_eq!(t.counts.iter().filter(|&&c| c > 0).count(), 1);
            }
        }
    }
    for q in [7u64, 13] {
        for kind in SplittingType::ALL {
            let b = CubicAlgebra::standard(q, kind).unwrap();
            let t = cube_class_tally(&b, 1).unwrap();
            assert!(t.pass, "{t:?}");
            assert!(t.character_sums.iter().all(|(_, ok)| *ok));
        }
    }
}

#[test]
fn jet_frequencies_at_seven() {
    for kind in SplittingType::ALL {
        let alg = CubicAlgebra::standard_k(7, 3, kind).unwrap();
        let omega = alg.t();
        let x = singular_point(&alg, &omega, 2).unwrap();
        let t = jet_family_statistics(&alg, &omega, &x, 2, &omega, 1 << 24).unwrap();
        assert!(t.frequencies_exact && t.uniform && t.jet_identity, "{kind}");
        assert_eq!(t.freq_zero, Ratio::new(1, 7));
        let v = alg.one();
        let lc = lift_change_check(&alg, &omega, &x, 2, &omega, &v, 1 << 24).unwrap();
        assert!(lc.translated && lc.frequencies_unchanged);
    }
}
