use proptest::prelude::*;
use ttl_core::algebra::{CubicAlgebra, Elem, SplittingType};
use ttl_core::arith::{checked_pow, vp, Modulus};

fn kind() -> impl Strategy<Value = SplittingType> {
    prop_oneof![Just(SplittingType::Split), Just(SplittingType::Mixed), Just(SplittingType::Inert)]
}

fn prime() -> impl Strategy<Value = u64> {
    prop_oneof![Just(5u64), Just(7), Just(11), Just(13)]
}

fn elem(m: u128) -> impl Strategy<Value = Elem> {
    [0..m, 0..m, 0..m].prop_map(Elem)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn norm_is_multiplicative(p in prime(), k in 1u32..4, kind in kind(), seed in any::<[u64; 6]>()) {
        let alg = CubicAlgebra::standard_k(p, k, kind).unwrap();
        let m = alg.modulus().m();
        let x = Elem([seed[0] as u128 % m, seed[1] as u128 % m, seed[2] as u128 % m]);
        let y = Elem([seed[3] as u128 % m, seed[4] as u128 % m, seed[5] as u128 % m]);
        let md = alg.modulus();
        prop_assert_eq!(alg.norm(&alg.mul(&x, &y)), md.mul(alg.norm(&x), alg.norm(&y)));
        prop_assert_eq!(alg.trace(&alg.add(&x, &y)), md.add(alg.trace(&x), alg.trace(&y)));
    }

    #[test]
    fn period_divides_unit_order(p in prime(), kind in kind(), x in elem(13)) {
        let alg = CubicAlgebra::standard_k(p, 3, kind).unwrap();
        let x = alg.lift_or_reduce(&Elem(x.0.map(|c| c % p as u128)));
        prop_assume!(alg.reduced().is_unit(&alg.reduced().lift_or_reduce(&x)));
        let period = alg.period(&x).unwrap();
        prop_assert_eq!(kind.unit_order(p) % period, 0);
        // eta^P = 1 + pU
        let lt = alg.log_tangent(&x, period).unwrap();
        let back = alg.add(&alg.one(), &alg.scale(p as u128, &alg.lift_or_reduce(&lt.u)));
        prop_assert_eq!(alg.pow(&x, period), back);
    }

    #[test]
    fn trace_dual_basis_pairs(p in prime(), kind in kind(), w in elem(13)) {
        let alg = CubicAlgebra::standard(p, kind).unwrap();
        let w = alg.lift_or_reduce(&Elem(w.0.map(|c| c % p as u128)));
        prop_assume!(alg.is_generator(&w));
        let z = alg.trace_dual_basis(&w).unwrap();
        let mut pw = alg.one();
        for m in 0..3 {
            for (j, zj) in z.iter().enumerate() {
                prop_assert_eq!(alg.trace(&alg.mul(zj, &pw)), u128::from(j == m));
            }
            pw = alg.mul(&pw, &w);
        }
    }

    #[test]
    fn spec_string_round_trip(p in prime(), k in 1u32..5, kind in kind()) {
        let alg = CubicAlgebra::standard_k(p, k, kind).unwrap();
        let back: CubicAlgebra = alg.spec_string().parse().unwrap();
        prop_assert_eq!(back.spec_string(), alg.spec_string());
        prop_assert_eq!(back.kind(), kind);
    }

    #[test]
    fn modular_inverse(p in prime(), k in 1u32..6, a in any::<u64>()) {
        let md = Modulus::new(p, k).unwrap();
        let a = md.reduce(a as u128);
        match md.inv(a) {
            Some(b) => prop_assert_eq!(md.mul(a, b), 1 % md.m()),
            None => prop_assert_eq!(a % p as u128, 0),
        }
    }

    #[test]
    fn valuation_of_powers(p in prime(), e in 0u32..10, unit in 1u64..1000) {
        prop_assume!(unit % p != 0);
        let x = checked_pow(p, e).unwrap() * unit as u128;
        prop_assert_eq!(vp(x, p), e);
    }
}

#[test]
fn splitting_types_from_roots() {
    for p in [5u64, 7, 11, 13] {
        for kind in SplittingType::ALL {
            let alg = CubicAlgebra::standard(p, kind).unwrap();
            assert_eq!(alg.kind(), kind);
            let units = alg.elements().iter().filter(|x| alg.is_unit(x)).count() as u128;
            assert_eq!(units, kind.unit_order(p));
        }
    }
}
