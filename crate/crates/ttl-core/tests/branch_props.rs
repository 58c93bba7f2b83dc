use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttl_core::algebra::SplittingType;
use ttl_core::arith::vp_factorial;
use ttl_core::branch::*;

fn kind() -> impl Strategy<Value = SplittingType> {
    prop_oneof![Just(SplittingType::Split), Just(SplittingType::Mixed), Just(SplittingType::Inert)]
}

fn shape() -> impl Strategy<Value = ProblemShape> {
    proptest::sample::select(ProblemShape::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn term_bound_suffices(p in prop_oneof![Just(5u64), Just(7), Just(11), Just(13)], n in 1u32..30) {
        let m0 = term_bound(p, n);
        for m in m0..m0 + 3 * p {
            prop_assert!(m as i64 - vp_factorial(m, p) as i64 >= n as i64, "m={m}");
        }
    }

    #[test]
    fn lifting_preserves_zero_sets(p in prop_oneof![Just(5u128), Just(7)], classes in proptest::collection::btree_set(0u128..49, 0..10), e in 1u32..3) {
        let m = p * p;
        let set = ZeroSet { modulus: m, classes: classes.into_iter().map(|c| c % m).collect() };
        let up = set.lift_to(m * p.pow(e));
        prop_assert_eq!(up.classes.len(), set.classes.len() * p.pow(e) as usize);
        prop_assert!(up.same_as(&set) && set.same_as(&up));
        prop_assert!(up.classes.iter().all(|c| set.classes.contains(&(c % m))));
    }

    #[test]
    fn digit_recursion_matches_scan(p in prop_oneof![Just(3u64), Just(5)], level in 1u32..5, target in 0u128..625) {
        // t is kept when t = target mod p^(j-1)
        let holds = |t: u128, j: u32| {
            let m = (p as u128).pow(j - 1);
            t % m == target % m
        };
        let got = digit_recursion(p, level, holds);
        let m = (p as u128).pow(level - 1);
        let want: Vec<u128> = (0..m).filter(|t| t % m == target % m).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn certified_matches_oracle(seed in any::<u64>(), p in prop_oneof![Just(5u64), Just(7)], kind in kind(), shape in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prob = random_problem(&mut rng, kind, p, 4, shape, 5_000).unwrap();
        let cert = prob.certified().unwrap();
        let oracle = prob.oracle(DEFAULT_ORACLE_CAP).unwrap();
        prop_assert!(cert.zeros.same_as(&oracle));
    }
}

#[test]
fn singular_splits_across_precision() {
    for k in 2..6 {
        let ctx = singular_splits_example(k).unwrap();
        let cert = ctx.certified_zero_set().unwrap();
        assert!(cert.zeros.same_as(&ctx.oracle(DEFAULT_ORACLE_CAP).unwrap()), "k={k}");
    }
}

#[test]
fn versal_quadratics() {
    for (a0, b0, c0) in [(2, 1, 2), (0, 0, 2), (0, 1, 2), (1, 3, 1)] {
        for k in 2..6 {
            let ctx = versal_quadratic(5, k, a0, b0, c0).unwrap();
            let cert = ctx.certified_zero_set().unwrap();
            assert!(cert.zeros.same_as(&ctx.oracle(DEFAULT_ORACLE_CAP).unwrap()), "({a0},{b0},{c0}) k={k}");
        }
    }
}
