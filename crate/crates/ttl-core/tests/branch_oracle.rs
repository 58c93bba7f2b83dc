use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttl_core::algebra::SplittingType;
use ttl_core::branch::*;

fn run(p: u64, kind: SplittingType, shape: ProblemShape, n: usize, seed: u64, tags: &mut BTreeMap<&'static str, usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n {
        let prob = random_problem(&mut rng, kind, p, 5, shape, 20_000).unwrap();
        let cert = prob.certified().unwrap_or_else(|e| panic!("{i}: {prob:?}: {e}"));
        let oracle = prob.oracle(DEFAULT_ORACLE_CAP).unwrap();
        assert!(cert.zeros.same_as(&oracle), "mismatch at {i}: {prob:?}\n{:?}", cert.descriptors);
        for d in &cert.descriptors {
            *tags.entry(d.core().tag()).or_default() += 1;
        }
    }
}

#[test]
fn random_problems_match_oracle() {
    let mut tags = BTreeMap::new();
    for (i, p) in [5u64, 7, 11].into_iter().enumerate() {
        for (j, kind) in SplittingType::ALL.into_iter().enumerate() {
            for (l, shape) in ProblemShape::ALL.into_iter().enumerate() {
                run(p, kind, shape, 12, (i * 100 + j * 10 + l) as u64, &mut tags);
            }
        }
    }
    eprintln!("{tags:?}");
    assert!(tags.get("TransverseSimple").copied().unwrap_or(0) > 0);
    assert!(tags.get("SingularSurviving").copied().unwrap_or(0) > 0);
}

#[test]
fn cubic_instances_match_oracle() {
    let mut simple = 0;
    let mut disks = 0;
    for a1 in 0..5 {
        for b1 in 0..5 {
            for c1 in [0, 1, 3] {
                let ctx = cubic_degenerate_instance(5, 5, [1, -1, 0], 2, a1, b1, c1).unwrap();
                let cert = ctx.certified_zero_set().unwrap();
                assert_eq!(cert.zeros, ctx.oracle(DEFAULT_ORACLE_CAP).unwrap(), "({a1},{b1},{c1})");
                for d in &cert.descriptors {
                    if let BranchDescriptor::CubicSurviving { branches, .. } = d {
                        for b in branches {
                            match b {
                                Branch::SimpleRoot { .. } => simple += 1,
                                Branch::WeierstrassDisk { factor, .. } => {
                                    assert!(factor.degree() >= 2);
                                    disks += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(simple > 0 && disks > 0, "simple {simple}, disks {disks}");
}
