use ttl_core::wieferich::*;

fn plastic() -> CubicOrderSpec {
    CubicOrderSpec::new([-1, -1, 0], [0, 1, 0]).unwrap()
}

#[test]
fn thirteen_matches_direct_computation() {
    let r = wieferich_test(&plastic(), 13).unwrap();
    assert_eq!(r.period, 183);
    assert_eq!(r.omega_p, [10, 8, 11]);
    assert!(!r.wieferich && !r.omega_in_fp);
    assert_eq!(r.omega_r, Some([10, 8, 11]));
}

#[test]
fn scan_to_two_hundred() {
    let s = scan(&plastic(), 5, 200).unwrap();
    let inert: Vec<u64> = s
        .entries
        .iter()
        .filter_map(|e| match e {
            ScanEntry::Inert(r) => Some(r.p),
            _ => None,
        })
        .collect();
    assert_eq!(inert.len(), 15);
    assert_eq!(&inert[..5], &[13, 29, 31, 41, 47]);
    assert!(s.hits.is_empty());
    assert!(s.indeterminate.is_empty());
    assert!(s.all_checks);
    assert!(s
        .entries
        .iter()
        .any(|e| matches!(e, ScanEntry::Skipped { p: 23, reason } if reason == "ramified")));
}

#[test]
fn non_inert_rejected() {
    assert!(matches!(wieferich_test(&plastic(), 5), Err(WieferichError::NotInert { p: 5, .. })));
}

#[test]
fn other_orders() {
    // T^3 - 2: eta = t has norm 2
    assert!(CubicOrderSpec::new([-2, 0, 0], [0, 1, 0]).is_err());
    // T^3 - 3T - 1 (cyclic cubic), eta = t has norm 1
    let s = CubicOrderSpec::new([-1, -3, 0], [0, 1, 0]).unwrap();
    let rep = scan(&s, 5, 120).unwrap();
    assert!(rep.inert > 0);
    assert!(rep.all_checks);
}

#[test]
fn restart_at_a_hit() {
    // T^3 + T^2 - 4T - 1 with eta = t: eta^31 = 1 mod 25 at p = 5
    let s = CubicOrderSpec::new([-1, -4, 1], [0, 1, 0]).unwrap();
    let r = wieferich_test(&s, 5).unwrap();
    assert_eq!(r.period, 31);
    assert!(r.wieferich && r.omega_zero && r.omega_in_fp && r.three_way);
    assert_eq!(r.r, Some(2));
    assert_eq!(r.omega_r, Some([4, 3, 4]));
    assert!(r.nonscalar_check && r.norm_identity);
    assert_eq!(higher_tangent(&s, 5).unwrap(), Some((2, [4, 3, 4], true)));
    assert_eq!(scan(&s, 5, 60).unwrap().hits, vec![5]);
}
