//! Inert primes p for a norm-one unit of a cubic order Z[t]/(g): the period
//! P in F_{p^3}^x, the tangent (eta^P - 1)/p, and the higher restart when
//! eta^P = 1 mod p^2.

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraError, CubicAlgebra, Elem, SplittingType};
use crate::arith::{checked_pow, is_prime, ArithError, Modulus};

/// Working precision for certifying r.
pub const MAX_PRECISION: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WieferichError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("norm of eta is {0}, expected 1")]
    NormNotOne(i128),
    #[error("p = {0} divides the discriminant")]
    Ramified(u64),
    #[error("p = {p} is not inert ({kind})")]
    NotInert { p: u64, kind: &'static str },
    #[error("{0} is not a prime >= 5")]
    BadPrime(u64),
    #[error("integer overflow in exact norm")]
    Overflow,
}

/// g = T^3 + g2 T^2 + g1 T + g0 stored as [g0, g1, g2]; eta = e0 + e1 t + e2 t^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CubicOrderSpec {
    pub g: [i128; 3],
    pub eta: [i128; 3],
    pub norm: i128,
    pub disc: i128,
}

fn reduce_poly(g: &[i128; 3], c: &mut [i128; 5]) -> Option<()> {
    for deg in (3..5).rev() {
        let lead = c[deg];
        if lead != 0 {
            c[deg] = 0;
            for i in 0..3 {
                c[deg - 3 + i] = c[deg - 3 + i].checked_sub(lead.checked_mul(g[i])?)?;
            }
        }
    }
    Some(())
}

fn mul_poly(g: &[i128; 3], a: &[i128; 3], b: &[i128; 3]) -> Option<[i128; 3]> {
    let mut c = [0i128; 5];
    for i in 0..3 {
        for j in 0..3 {
            c[i + j] = c[i + j].checked_add(a[i].checked_mul(b[j])?)?;
        }
    }
    reduce_poly(g, &mut c)?;
    Some([c[0], c[1], c[2]])
}

/// Exact norm of x in Z[t]/(g): determinant of multiplication by x.
pub fn exact_norm(g: &[i128; 3], x: &[i128; 3]) -> Option<i128> {
    let cols = [
        *x,
        mul_poly(g, x, &[0, 1, 0])?,
        mul_poly(g, x, &[0, 0, 1])?,
    ];
    let m = |r: usize, c: usize| cols[c][r];
    let t = |a: i128, b: i128, c: i128| a.checked_mul(b)?.checked_mul(c);
    let pos = t(m(0, 0), m(1, 1), m(2, 2))?
        .checked_add(t(m(0, 1), m(1, 2), m(2, 0))?)?
        .checked_add(t(m(0, 2), m(1, 0), m(2, 1))?)?;
    let neg = t(m(0, 2), m(1, 1), m(2, 0))?
        .checked_add(t(m(0, 0), m(1, 2), m(2, 1))?)?
        .checked_add(t(m(0, 1), m(1, 0), m(2, 2))?)?;
    pos.checked_sub(neg)
}

/// Discriminant of T^3 + b T^2 + c T + d.
pub fn exact_disc(g: &[i128; 3]) -> i128 {
    let (d, c, b) = (g[0], g[1], g[2]);
    b * b * c * c - 4 * c * c * c - 4 * b * b * b * d - 27 * d * d + 18 * b * c * d
}

impl CubicOrderSpec {
    pub fn new(g: [i128; 3], eta: [i128; 3]) -> Result<Self, WieferichError> {
        let norm = exact_norm(&g, &eta).ok_or(WieferichError::Overflow)?;
        if norm != 1 {
            return Err(WieferichError::NormNotOne(norm));
        }
        Ok(CubicOrderSpec { g, eta, norm, disc: exact_disc(&g) })
    }

    /// Parse "g0,g1,g2" and "e0,e1,e2".
    pub fn parse(g: &str, eta: &str) -> Result<Self, String> {
        let three = |s: &str| -> Result<[i128; 3], String> {
            let v: Vec<i128> = s
                .split(',')
                .map(|t| t.trim().replace('\u{2212}', "-").parse::<i128>())
                .collect::<Result<_, _>>()
                .map_err(|_| format!("bad coefficient list '{s}'"))?;
            v.try_into().map_err(|_| format!("expected three coefficients in '{s}'"))
        };
        Self::new(three(g)?, three(eta)?).map_err(|e| e.to_string())
    }

    fn ramified(&self, p: u64) -> bool {
        self.disc.rem_euclid(p as i128) == 0
    }

    fn algebra(&self, p: u64, k: u32) -> Result<CubicAlgebra, WieferichError> {
        if self.ramified(p) {
            return Err(WieferichError::Ramified(p));
        }
        Ok(CubicAlgebra::new(p, k, self.g)?)
    }
}

/// True iff g has no root mod p (p unramified, p >= 5).
pub fn is_inert(spec: &CubicOrderSpec, p: u64) -> Result<bool, WieferichError> {
    if p < 5 || !is_prime(p) {
        return Err(WieferichError::BadPrime(p));
    }
    Ok(spec.algebra(p, 1)?.kind() == SplittingType::Inert)
}

fn precision_for(p: u64) -> u32 {
    (2..=MAX_PRECISION).rev().find(|&k| checked_pow(p, k).is_some_and(|m| m < 1u128 << 125)).unwrap_or(2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WieferichReport {
    pub p: u64,
    pub inert: bool,
    pub period: u128,
    pub period_divides: bool,
    /// (eta^P - 1)/p mod p
    pub omega_p: [u128; 3],
    pub omega_in_fp: bool,
    pub omega_zero: bool,
    pub one_mod_p2: bool,
    pub three_way: bool,
    /// 1, omega_p, omega_p^2 is a basis
    pub omega_generates: bool,
    /// maximal r with eta^P = 1 mod p^r; None when eta^P = 1 at working precision
    pub r: Option<u32>,
    pub precision: u32,
    pub omega_r: Option<[u128; 3]>,
    pub nonscalar_check: bool,
    /// Norm(eta^P) = 1 mod p^(r+1)
    pub norm_identity: bool,
    pub wieferich: bool,
}

fn is_scalar(x: &Elem) -> bool {
    x.0[1] == 0 && x.0[2] == 0
}

/// Period, tangent, three-way scalar test and the higher restart at an inert p.
pub fn wieferich_test(spec: &CubicOrderSpec, p: u64) -> Result<WieferichReport, WieferichError> {
    if !is_inert(spec, p)? {
        let kind = spec.algebra(p, 1)?.kind().name();
        return Err(WieferichError::NotInert { p, kind });
    }
    let k = precision_for(p);
    let alg = spec.algebra(p, k)?;
    let eta = alg.elem(spec.eta);
    let period = alg.period(&eta)?;
    let p3 = (p as u128).pow(3) - 1;
    let period_divides = p3 % period == 0 && period % p as u128 != 0;

    let tangent = alg.log_tangent(&eta, period)?;
    let omega = tangent.omega;
    let omega_in_fp = is_scalar(&omega);
    let omega_zero = omega.is_zero();
    let p2 = alg.with_precision(2)?;
    let one_mod_p2 = p2.pow(&p2.lift_or_reduce(&eta), period) == p2.one();
    let three_way = omega_in_fp == omega_zero && omega_zero == one_mod_p2;
    let omega_generates = alg.reduced().is_generator(&omega);

    let r = alg.tangent_order(&eta, period);
    let (omega_r, nonscalar_check, norm_identity) = match r {
        Some(r) => {
            let t = alg.log_tangent_at(&eta, period, r)?;
            let md = Modulus::new(p, r + 1)?;
            let low = alg.with_precision(r + 1)?;
            let norm = low.norm(&low.lift_or_reduce(&alg.pow(&eta, period)));
            (Some(t.omega.0), !is_scalar(&t.omega), norm == md.reduce(1))
        }
        None => (None, false, true),
    };
    Ok(WieferichReport {
        p,
        inert: true,
        period,
        period_divides,
        omega_p: omega.0,
        omega_in_fp,
        omega_zero,
        one_mod_p2,
        three_way,
        omega_generates,
        r,
        precision: k,
        omega_r,
        nonscalar_check,
        norm_identity,
        wieferich: one_mod_p2,
    })
}

/// (r, omega^(r), nonscalar) or None when indeterminate at working precision.
pub fn higher_tangent(spec: &CubicOrderSpec, p: u64) -> Result<Option<(u32, [u128; 3], bool)>, WieferichError> {
    let rep = wieferich_test(spec, p)?;
    Ok(rep.r.zip(rep.omega_r).map(|(r, w)| (r, w, rep.nonscalar_check)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status")]
pub enum ScanEntry {
    Inert(WieferichReport),
    Skipped { p: u64, reason: String },
}

impl ScanEntry {
    pub fn p(&self) -> u64 {
        match self {
            ScanEntry::Inert(r) => r.p,
            ScanEntry::Skipped { p, .. } => *p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub spec: CubicOrderSpec,
    pub pmin: u64,
    pub pmax: u64,
    pub entries: Vec<ScanEntry>,
    pub inert: usize,
    pub hits: Vec<u64>,
    pub indeterminate: Vec<u64>,
    /// three-way agreement, nonscalar restart, P | p^3 - 1, norm identity
    pub all_checks: bool,
}

pub fn scan(spec: &CubicOrderSpec, pmin: u64, pmax: u64) -> Result<ScanReport, WieferichError> {
    let mut entries = Vec::new();
    for p in pmin.max(5)..=pmax {
        if !is_prime(p) {
            continue;
        }
        let entry = if spec.ramified(p) {
            ScanEntry::Skipped { p, reason: "ramified".into() }
        } else {
            let kind = spec.algebra(p, 1)?.kind();
            if kind == SplittingType::Inert {
                ScanEntry::Inert(wieferich_test(spec, p)?)
            } else {
                ScanEntry::Skipped { p, reason: kind.name().to_lowercase() }
            }
        };
        entries.push(entry);
    }
    let reports: Vec<&WieferichReport> = entries
        .iter()
        .filter_map(|e| match e {
            ScanEntry::Inert(r) => Some(r),
            _ => None,
        })
        .collect();
    let hits = reports.iter().filter(|r| r.wieferich).map(|r| r.p).collect();
    let indeterminate = reports.iter().filter(|r| r.r.is_none()).map(|r| r.p).collect();
    let all_checks = reports.iter().all(|r| {
        r.three_way
            && r.period_divides
            && r.norm_identity
            && (r.r.is_none() || r.nonscalar_check)
            && (r.wieferich || (r.r == Some(1) && r.omega_generates))
    });
    Ok(ScanReport { spec: *spec, pmin, pmax, inert: reports.len(), entries, hits, indeterminate, all_checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plastic() -> CubicOrderSpec {
        CubicOrderSpec::new([-1, -1, 0], [0, 1, 0]).unwrap()
    }

    #[test]
    fn norm_and_disc() {
        let s = plastic();
        assert_eq!(s.norm, 1);
        assert_eq!(s.disc, -23);
        assert_eq!(exact_norm(&s.g, &[2, 0, 0]), Some(8));
        assert!(CubicOrderSpec::new([-1, -1, 0], [2, 0, 0]).is_err());
    }

    #[test]
    fn inertness() {
        let s = plastic();
        assert!(!is_inert(&s, 5).unwrap());
        assert!(is_inert(&s, 13).unwrap());
        assert_eq!(is_inert(&s, 23), Err(WieferichError::Ramified(23)));
    }

    #[test]
    fn report_at_thirteen() {
        let r = wieferich_test(&plastic(), 13).unwrap();
        assert!(r.period_divides && r.three_way);
        assert_eq!(r.r, Some(1));
        assert!(r.nonscalar_check && r.omega_generates && r.norm_identity);
    }
}
