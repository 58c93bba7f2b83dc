use proptest::prelude::*;
use ttl_core::algebra::{CubicAlgebra, SplittingType};
use ttl_core::counts::*;
use ttl_core::torus::{exceptional_size, unit_sample, TorusGroup};

fn kind() -> impl Strategy<Value = SplittingType> {
    prop_oneof![Just(SplittingType::Split), Just(SplittingType::Mixed), Just(SplittingType::Inert)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn formula_matches_brute(p in prop_oneof![Just(5u64), Just(7), Just(11), Just(13), Just(17)], kind in kind(), s in 0u64..17, n in 1u64..17) {
        prop_assume!(n % p != 0);
        let alg = CubicAlgebra::standard(p, kind).unwrap();
        let brute = brute_force_count(&alg, s, n, DEFAULT_CAP).unwrap().value;
        prop_assert_eq!(formula_count(kind, p, s, n).unwrap().value, brute);
    }

    #[test]
    fn elliptic_count_two_ways(p in prop_oneof![Just(5u64), Just(7), Just(11), Just(13), Just(19)], s in 0u64..19, n in 1u64..19) {
        prop_assume!(n % p != 0 && is_smooth_fiber(p, s, n).unwrap());
        prop_assert_eq!(elliptic_count(p, s, n).unwrap(), elliptic_count_brute(p, s, n));
    }

    #[test]
    fn fibers_partition_units(p in prop_oneof![Just(5u64), Just(7)], kind in kind()) {
        let alg = CubicAlgebra::standard(p, kind).unwrap();
        let table = fiber_table(&alg, DEFAULT_CAP).unwrap();
        let units: u64 = (0..p).flat_map(|s| (1..p).map(move |n| (s, n))).map(|(s, n)| table[(s * p + n) as usize]).sum();
        prop_assert_eq!(units as u128, kind.unit_order(p));
    }
}

#[test]
fn census_identities_through_seventeen() {
    for p in [5u64, 7, 11, 13, 17] {
        for eps in 1..p {
            assert!(factorization_census(p, eps).unwrap().identities_hold(p), "p={p} eps={eps}");
        }
    }
}

#[test]
fn torus_orders_and_exceptional_kernels() {
    for p in [5u64, 7, 11, 13] {
        for kind in SplittingType::ALL {
            let t = TorusGroup::enumerate(&CubicAlgebra::standard(p, kind).unwrap(), DEFAULT_CAP).unwrap();
            assert_eq!(t.order() as u128, kind.torus_order(p));
            let exc = t.exceptional_group();
            assert_eq!(exc.size, exceptional_size(kind, p));
            assert_eq!((t.order() / exc.kernel.order()) as u64, exc.size);
        }
    }
}

#[test]
fn coset_bounds_at_eleven() {
    // cyclic subgroups only at p = 11; the full lattice runs in the acceptance target
    for kind in SplittingType::ALL {
        let t = TorusGroup::enumerate(&CubicAlgebra::standard(11, kind).unwrap(), DEFAULT_CAP).unwrap();
        let subs: Vec<_> = (0..t.order()).step_by(7).map(|x| t.subgroup_generated(&[x])).collect();
        for gamma in unit_sample(t.algebra(), 3, 0).into_iter().take(3) {
            for h in &subs {
                for (_, _, b) in t.coset_bounds_all(h, &gamma).unwrap() {
                    assert!(b.pass, "{b:?}");
                }
            }
        }
    }
}

#[test]
fn nonemptiness_certificate_is_one_sided() {
    let t = TorusGroup::enumerate(&CubicAlgebra::standard(13, SplittingType::Inert).unwrap(), DEFAULT_CAP).unwrap();
    let one = t.algebra().one();
    for h in t.enumerate_subgroups(None) {
        for s in 0..13 {
            if !is_smooth_fiber(13, s, 1).unwrap() {
                continue;
            }
            let c = t.nonemptiness_check(&h, &one, s).unwrap();
            if c.certified {
                assert!(c.all_cosets_meet);
            }
        }
    }
}
