//! Prescribed trace/norm counts N_B(s, n) over F_p.
//!
//! Three independent paths: a brute-force scan of B, the elliptic-curve
//! formula on smooth fibers, and the closed nodal formula.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, CubicAlgebra, SplittingType};
use crate::arith::{is_prime, legendre, ArithError, Modulus};
use crate::torus::exceptional_size;

pub const DEFAULT_CAP: u64 = 101;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("norm target must be nonzero")]
    ZeroNorm,
    #[error("fiber s={s}, n={n} is nodal (s^3 = 27n)")]
    NodalFiber { s: u64, n: u64 },
    #[error("nodal count needs s != 0")]
    ZeroTrace,
    #[error("p={p} exceeds the enumeration cap {cap}")]
    CapExceeded { p: u64, cap: u64 },
    #[error("parameter t={t} is a pole of the nodal parametrization")]
    Pole { t: u64 },
    #[error("scale a must be nonzero")]
    ZeroScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    BruteForce,
    SmoothFormula,
    NodalFormula,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Components {
    pub elliptic_count: Option<u64>,
    pub sign: i64,
    pub fixed_labels: u64,
    pub exceptional_size: Option<u64>,
    pub smooth: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    pub value: u64,
    pub method: Method,
    pub components: Option<Components>,
}

fn field(p: u64) -> Result<Modulus, CountError> {
    Ok(Modulus::new(p, 1)?)
}

/// s^3 != 27 n in F_p.
pub fn is_smooth_fiber(p: u64, s: u64, n: u64) -> Result<bool, CountError> {
    let f = field(p)?;
    let (s, n) = (s % p, n % p);
    if n == 0 {
        return Err(CountError::ZeroNorm);
    }
    let s = s as u128;
    Ok(f.mul(s, f.mul(s, s)) != f.mul(27, n as u128))
}

/// Exact count of units of B with trace s and norm n, by scanning all p^3
/// elements.
pub fn brute_force_count(alg: &CubicAlgebra, s: u64, n: u64, cap: u64) -> Result<CountReport, CountError> {
    let p = alg.p();
    if p > cap {
        return Err(CountError::CapExceeded { p, cap });
    }
    if n % p == 0 {
        return Err(CountError::ZeroNorm);
    }
    let alg = alg.reduced();
    let (s, n) = ((s % p) as u128, (n % p) as u128);
    let value = alg
        .elements()
        .iter()
        .filter(|x| alg.trace(x) == s && alg.norm(x) == n)
        .count() as u64;
    Ok(CountReport { value, method: Method::BruteForce, components: None })
}

/// Table of N_B(s, n) for all s and all n (index s * p + n; n = 0 counts
/// non-units), from one pass over B.
pub fn fiber_table(alg: &CubicAlgebra, cap: u64) -> Result<Vec<u64>, CountError> {
    let p = alg.p();
    if p > cap {
        return Err(CountError::CapExceeded { p, cap });
    }
    let alg = alg.reduced();
    let mut table = vec![0u64; (p * p) as usize];
    for x in alg.elements() {
        table[(alg.trace(&x) as u64 * p + alg.norm(&x) as u64) as usize] += 1;
    }
    Ok(table)
}

/// p + 1 + sum_u chi(s^2 u^2 - 4u^3 - 4 s^3 n - 27 n^2 + 18 s u n).
pub fn elliptic_count(p: u64, s: u64, n: u64) -> Result<u64, CountError> {
    if !is_smooth_fiber(p, s, n)? {
        return Err(CountError::NodalFiber { s: s % p, n: n % p });
    }
    Ok(elliptic_count_unchecked(p, s, n))
}

fn elliptic_count_unchecked(p: u64, s: u64, n: u64) -> u64 {
    let f = Modulus::any_prime(p, 1).expect("prime");
    let (s, n) = ((s % p) as u128, (n % p) as u128);
    let s2 = f.mul(s, s);
    let s3 = f.mul(s2, s);
    let c0 = f.neg(f.add(f.mul(4, f.mul(s3, n)), f.mul(27, f.mul(n, n))));
    let c1 = f.mul(18, f.mul(s, n));
    let mut sum: i64 = 0;
    for u in 0..p as u128 {
        let u2 = f.mul(u, u);
        let rhs = f.add(f.add(f.sub(f.mul(s2, u2), f.mul(4, f.mul(u2, u))), c0), f.mul(c1, u));
        sum += legendre(rhs as u64, p) as i64;
    }
    (p as i64 + 1 + sum) as u64
}

/// Projective point count of V^2 = RHS(U) by listing affine pairs.
pub fn elliptic_count_brute(p: u64, s: u64, n: u64) -> u64 {
    let f = Modulus::any_prime(p, 1).expect("prime");
    let (s, n) = ((s % p) as u128, (n % p) as u128);
    let mut squares = vec![0u64; p as usize];
    for v in 0..p as u128 {
        squares[f.mul(v, v) as usize] += 1;
    }
    let mut count = 1;
    for u in 0..p as u128 {
        let rhs = f.add(
            f.add(
                f.sub(f.mul(f.mul(s, s), f.mul(u, u)), f.mul(4, f.mul(u, f.mul(u, u)))),
                f.neg(f.add(f.mul(4, f.mul(f.mul(s, f.mul(s, s)), n)), f.mul(27, f.mul(n, n)))),
            ),
            f.mul(18, f.mul(s, f.mul(u, n))),
        );
        count += squares[rhs as usize];
    }
    count
}

/// N_B(s, n) on a smooth fiber: #E - 3, 2p + 1 - #E, or #E.
pub fn smooth_formula_count(kind: SplittingType, p: u64, s: u64, n: u64) -> Result<CountReport, CountError> {
    let e = elliptic_count(p, s, n)?;
    let value = match kind {
        SplittingType::Split => e - 3,
        SplittingType::Mixed => 2 * p + 1 - e,
        SplittingType::Inert => e,
    };
    Ok(CountReport {
        value,
        method: Method::SmoothFormula,
        components: Some(Components {
            elliptic_count: Some(e),
            sign: kind.frobenius_sign(),
            fixed_labels: kind.fixed_labels(),
            exceptional_size: None,
            smooth: true,
        }),
    })
}

/// N_B^nod = p + 3 - f_B - |E_B| on the nodal fiber n = s^3/27.
pub fn nodal_count(kind: SplittingType, p: u64, s: u64) -> Result<CountReport, CountError> {
    field(p)?;
    if s % p == 0 {
        return Err(CountError::ZeroTrace);
    }
    let e = exceptional_size(kind, p);
    Ok(CountReport {
        value: p + 3 - kind.fixed_labels() - e,
        method: Method::NodalFormula,
        components: Some(Components {
            elliptic_count: None,
            sign: kind.frobenius_sign(),
            fixed_labels: kind.fixed_labels(),
            exceptional_size: Some(e),
            smooth: false,
        }),
    })
}

/// The nodal norm s^3/27.
pub fn nodal_norm(p: u64, s: u64) -> Result<u64, CountError> {
    let f = field(p)?;
    let s = (s % p) as u128;
    let inv27 = f.inv(27).expect("p >= 5");
    Ok(f.mul(f.mul(s, f.mul(s, s)), inv27) as u64)
}

/// Formula count for any fiber, smooth or nodal.
pub fn formula_count(kind: SplittingType, p: u64, s: u64, n: u64) -> Result<CountReport, CountError> {
    if is_smooth_fiber(p, s, n)? {
        smooth_formula_count(kind, p, s, n)
    } else {
        nodal_count(kind, p, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationCensus {
    /// irreducible
    pub i: u64,
    /// three distinct roots
    pub s: u64,
    /// one root and an irreducible quadratic
    pub l: u64,
    /// repeated root
    pub r: u64,
    pub elliptic_count: u64,
}

impl FactorizationCensus {
    pub fn identities_hold(&self, p: u64) -> bool {
        let e = self.elliptic_count;
        self.i + self.s + self.l + self.r == p
            && 3 * self.i == e
            && 6 * self.s + 3 * self.r + 3 == e
            && 2 * self.l + self.r + e == 2 * p + 1
    }
}

/// Factorization types of g_u(T) = T^3 + uT - eps for all u in F_p.
pub fn factorization_census(p: u64, eps: u64) -> Result<FactorizationCensus, CountError> {
    let f = field(p)?;
    let eps = (eps % p) as u128;
    if eps == 0 {
        return Err(CountError::ZeroNorm);
    }
    let mut c = FactorizationCensus { i: 0, s: 0, l: 0, r: 0, elliptic_count: elliptic_count(p, 0, eps as u64)? };
    for u in 0..p as u128 {
        let disc = f.neg(f.add(f.mul(4, f.mul(u, f.mul(u, u))), f.mul(27, f.mul(eps, eps))));
        if disc == 0 {
            c.r += 1;
            continue;
        }
        let roots = (0..p as u128)
            .filter(|&x| f.sub(f.add(f.mul(x, f.mul(x, x)), f.mul(u, x)), eps) == 0)
            .count();
        match roots {
            0 => c.i += 1,
            1 => c.l += 1,
            _ => c.s += 1,
        }
    }
    Ok(c)
}

/// (a(-t^2/(t+1)), a(-1/(t(t+1))), a((t+1)^2/t)).
pub fn nodal_parametrization(p: u64, t: u64, a: u64) -> Result<[u64; 3], CountError> {
    if !is_prime(p) {
        return Err(ArithError::NotPrime(p).into());
    }
    let f = field(p)?;
    let (t, a) = ((t % p) as u128, (a % p) as u128);
    if a == 0 {
        return Err(CountError::ZeroScale);
    }
    let t1 = f.add(t, 1);
    let (Some(it), Some(it1)) = (f.inv(t), f.inv(t1)) else {
        return Err(CountError::Pole { t: t as u64 });
    };
    let x1 = f.mul(a, f.neg(f.mul(f.mul(t, t), it1)));
    let x2 = f.mul(a, f.neg(f.mul(it, it1)));
    let x3 = f.mul(a, f.mul(f.mul(t1, t1), it));
    Ok([x1 as u64, x2 as u64, x3 as u64])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_splitting_types_at_five() {
        for (kind, want) in [(SplittingType::Split, 3), (SplittingType::Mixed, 5), (SplittingType::Inert, 6)] {
            let alg = CubicAlgebra::standard(5, kind).unwrap();
            assert_eq!(brute_force_count(&alg, 0, 1, DEFAULT_CAP).unwrap().value, want);
            assert_eq!(smooth_formula_count(kind, 5, 0, 1).unwrap().value, want);
        }
    }

    #[test]
    fn smoothness() {
        assert!(is_smooth_fiber(5, 0, 1).unwrap());
        assert!(!is_smooth_fiber(5, 3, 1).unwrap());
        assert_eq!(is_smooth_fiber(5, 1, 0), Err(CountError::ZeroNorm));
        assert!(matches!(elliptic_count(5, 3, 1), Err(CountError::NodalFiber { .. })));
    }

    #[test]
    fn nodal_table_cells() {
        assert_eq!(nodal_count(SplittingType::Inert, 5, 1).unwrap().value, 7);
        assert_eq!(nodal_count(SplittingType::Split, 7, 1).unwrap().value, 4);
        assert_eq!(nodal_count(SplittingType::Mixed, 5, 1).unwrap().value, 4);
        assert_eq!(nodal_count(SplittingType::Mixed, 5, 0), Err(CountError::ZeroTrace));
    }

    #[test]
    fn census_at_five() {
        let c = factorization_census(5, 1).unwrap();
        assert_eq!(c.elliptic_count, 6);
        assert_eq!(c.i, 2);
        assert!(c.identities_hold(5));
    }

    #[test]
    fn node_parameter() {
        for a in 1..7 {
            assert_eq!(nodal_parametrization(7, 2, a).unwrap(), [a, a, a]);
        }
        assert!(matches!(nodal_parametrization(5, 4, 1), Err(CountError::Pole { .. })));
    }
}
