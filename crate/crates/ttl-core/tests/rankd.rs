use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttl_core::rankd::*;

#[test]
fn random_contexts_respect_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for i in 0..200 {
        let d = 2 + i % 3;
        let p = if i % 2 == 0 { 7 } else { 11 };
        let affine = i % 5 == 4;
        let ctx = random_rankd_context(&mut rng, p, d, 5, affine).unwrap();
        for a in 0..ctx.period.min(6) {
            match rankd_classify(&ctx, a) {
                Ok(rec) => {
                    assert!(rec.within_bound, "{rec:?}");
                    checked += 1;
                }
                Err(RankDError::Hypothesis(_)) | Err(RankDError::Precision { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
    assert!(checked > 300, "{checked}");
}

#[test]
fn sharpness_zero_sets() {
    for (p, d, k) in [(7u64, 2usize, 5u32), (7, 3, 5), (11, 3, 4), (11, 4, 6)] {
        let omega: Vec<i128> = (1..=d as i128).collect();
        let (ctx, s) = sharpness_construction(p, d, &omega, k).unwrap();
        assert!(s.pass);
        let rec = rankd_classify(&ctx, 0).unwrap();
        assert_eq!(rec.shift as usize, d - 1);
        assert_eq!(rec.degree, d - 1);
        let zeros: Vec<u128> = (0..d as u128 - 1).collect();
        let predicted = predicted_residues(p, k, d as u32 - 1, &zeros);
        assert_eq!(rec.residues, predicted.len());
        if d == 3 {
            let cert = as_cubic_context(&ctx).unwrap().certified_zero_set().unwrap();
            assert_eq!(cert.zeros.classes, predicted);
        }
    }
}

#[test]
fn affine_zero_sets() {
    for (p, d, k) in [(7u64, 3usize, 6u32), (11, 3, 5), (11, 2, 5)] {
        let omega: Vec<i128> = (1..=d as i128).collect();
        let (ctx, a) = affine_sharpness(p, d, &omega, k).unwrap();
        assert!(a.pass, "{a:?}");
        let rec = rankd_classify(&ctx, 0).unwrap();
        assert_eq!((rec.shift as usize, rec.degree), (d, d));
        let zeros: Vec<u128> = (0..d as u128).collect();
        let predicted = predicted_residues(p, k, d as u32, &zeros);
        if d == 3 {
            let cert = as_cubic_context(&ctx).unwrap().certified_zero_set().unwrap();
            assert_eq!(cert.zeros.classes, predicted);
        }
    }
}

#[test]
fn versal_jets_through_cubic_engine() {
    for jet in [vec![1u64], vec![2, 1], vec![0, 0, 1], vec![3, 5, 2]] {
        let (ctx, v) = jet_versality(7, 3, &[1, 2, 4], &jet, 5).unwrap();
        assert!(v.pass, "{v:?}");
        let rec = rankd_classify(&ctx, 0).unwrap();
        assert_eq!(rec.degree, v.jet.len() - 1);
        let cert = as_cubic_context(&ctx).unwrap();
        let oracle = cert.oracle(1 << 20).unwrap();
        assert!(cert.certified_zero_set().unwrap().zeros.same_as(&oracle));
    }
}

#[test]
fn degenerate_tangent_uses_subalgebra() {
    let alg = RankDSplitAlgebra::new(7, 5, 3).unwrap();
    let eta = alg.elem(&[8, 8, 15]).unwrap();
    let gamma = alg.elem(&[1, 0, 0]).unwrap();
    let ctx = RankDContext::new(alg, eta, gamma, 0).unwrap();
    assert_eq!(ctx.tangent_rank(), 2);
    let rec = rankd_classify(&ctx, 0).unwrap();
    assert_eq!(rec.kind, BoundKind::Subalgebra);
    assert!(rec.within_bound);
}

mod props {
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use ttl_core::rankd::*;

    fn distinct(p: u64, d: usize) -> impl Strategy<Value = Vec<i128>> {
        proptest::sample::subsequence((0..p as i128).collect::<Vec<_>>(), d).prop_shuffle()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn dual_basis_pairs(d in 2usize..5, w in distinct(11, 4), k in 1u32..4) {
            let alg = RankDSplitAlgebra::new(11, k, d).unwrap();
            let w = alg.elem(&w[..d]).unwrap();
            let z = alg.trace_dual_basis(&w).unwrap();
            let mut pw = alg.one();
            for m in 0..d {
                for (j, zj) in z.iter().enumerate() {
                    prop_assert_eq!(alg.trace(&alg.mul(zj, &pw)), u128::from(j == m));
                }
                pw = alg.mul(&pw, &w);
            }
        }

        #[test]
        fn sharpness_for_random_omega(d in 2usize..5, w in distinct(11, 4)) {
            let (_, s) = sharpness_construction(11, d, &w[..d], d as u32 + 1).unwrap();
            prop_assert!(s.pass, "{s:?}");
        }

        #[test]
        fn random_contexts_stay_within_bound(seed in any::<u64>(), d in 2usize..5, affine in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ctx = random_rankd_context(&mut rng, 7, d, 4, affine).unwrap();
            for a in 0..ctx.period.min(4) {
                if let Ok(rec) = rankd_classify(&ctx, a) {
                    prop_assert!(rec.within_bound, "{rec:?}");
                    prop_assert!(rec.clusters <= rec.bound);
                }
            }
        }
    }
}
