//! Branches in split algebras (Z/p^k)^d: Weierstrass degree bounds and the
//! sharpness and versality constructions.

use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{checked_pow, order_by_descent, ArithError, Modulus};
use crate::algebra::CubicAlgebra;
use crate::branch::{digit_recursion, BranchContext};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RankDError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("need p > {need}, got p = {p}")]
    SmallPrime { p: u64, need: u64 },
    #[error("expected {d} coordinates, got {got}")]
    Dimension { d: usize, got: usize },
    #[error("tangent coordinates must be pairwise distinct mod p")]
    NotDistinct,
    #[error("{0} is not a unit")]
    NotUnit(String),
    #[error("leading jet coefficient must be nonzero mod p")]
    ZeroLeading,
    #[error("jet degree {e} exceeds d - 1 = {max}")]
    Degree { e: usize, max: usize },
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),
    #[error("precision {have} too low, need {need}")]
    Precision { need: u32, have: u32 },
}

fn pw(p: u64, e: u32) -> u128 {
    checked_pow(p, e).expect("power fits")
}

/// The split algebra (Z/p^k)^d with componentwise operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankDSplitAlgebra {
    md: Modulus,
    d: usize,
}

pub type Vector = Vec<u128>;

impl RankDSplitAlgebra {
    pub fn new(p: u64, k: u32, d: usize) -> Result<Self, RankDError> {
        let md = Modulus::new(p, k)?;
        if p <= d as u64 {
            return Err(RankDError::SmallPrime { p, need: d as u64 });
        }
        Ok(RankDSplitAlgebra { md, d })
    }
    pub fn modulus(&self) -> &Modulus {
        &self.md
    }
    pub fn p(&self) -> u64 {
        self.md.p()
    }
    pub fn k(&self) -> u32 {
        self.md.k()
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn elem(&self, c: &[i128]) -> Result<Vector, RankDError> {
        if c.len() != self.d {
            return Err(RankDError::Dimension { d: self.d, got: c.len() });
        }
        Ok(c.iter().map(|&x| self.md.from_i128(x)).collect())
    }
    pub fn one(&self) -> Vector {
        vec![1 % self.md.m(); self.d]
    }
    pub fn mul(&self, a: &[u128], b: &[u128]) -> Vector {
        a.iter().zip(b).map(|(&x, &y)| self.md.mul(x, y)).collect()
    }
    pub fn add(&self, a: &[u128], b: &[u128]) -> Vector {
        a.iter().zip(b).map(|(&x, &y)| self.md.add(x, y)).collect()
    }
    pub fn scale(&self, c: u128, a: &[u128]) -> Vector {
        a.iter().map(|&x| self.md.mul(c, x)).collect()
    }
    pub fn pow(&self, a: &[u128], e: u128) -> Vector {
        a.iter().map(|&x| self.md.pow(x, e)).collect()
    }
    pub fn trace(&self, a: &[u128]) -> u128 {
        a.iter().fold(0, |acc, &x| self.md.add(acc, x))
    }
    pub fn is_unit(&self, a: &[u128]) -> bool {
        a.iter().all(|&x| self.md.is_unit(x))
    }

    /// z_0..z_{d-1} with Tr(z_j w^m) = delta_jm, from the inverse of the
    /// Vandermonde pairing matrix.
    pub fn trace_dual_basis(&self, w: &[u128]) -> Result<Vec<Vector>, RankDError> {
        let d = self.d;
        let md = self.md;
        // rows of V^T: entry (i, m) = w_i^m; Z = (V^T)^{-1} transposed appropriately
        let mut m: Vec<Vec<u128>> = (0..d).map(|i| (0..d).map(|j| md.pow(w[i], j as u128)).collect()).collect();
        let mut inv: Vec<Vec<u128>> = (0..d).map(|i| (0..d).map(|j| u128::from(i == j)).collect()).collect();
        for col in 0..d {
            let piv = (col..d).find(|&r| md.is_unit(m[r][col])).ok_or(RankDError::NotDistinct)?;
            m.swap(col, piv);
            inv.swap(col, piv);
            let iv = md.inv(m[col][col]).expect("unit");
            for j in 0..d {
                m[col][j] = md.mul(m[col][j], iv);
                inv[col][j] = md.mul(inv[col][j], iv);
            }
            for r in 0..d {
                if r != col && m[r][col] != 0 {
                    let f = m[r][col];
                    for j in 0..d {
                        m[r][j] = md.sub(m[r][j], md.mul(f, m[col][j]));
                        inv[r][j] = md.sub(inv[r][j], md.mul(f, inv[col][j]));
                    }
                }
            }
        }
        // M[i][m] = w_i^m, and Tr(z_j w^m) = sum_i z_j[i] M[i][m] = delta, so z_j[i] = (M^{-1})[m=j][i]
        Ok((0..d).map(|j| (0..d).map(|i| inv[j][i]).collect()).collect())
    }

    /// Order of the reduction mod p (lcm of the component orders).
    pub fn period(&self, eta: &[u128]) -> Result<u128, RankDError> {
        let f = Modulus::new(self.p(), 1)?;
        if !self.is_unit(eta) {
            return Err(RankDError::NotUnit("eta".into()));
        }
        let group = self.p() as u128 - 1;
        Ok(order_by_descent(group, |e| eta.iter().all(|&x| f.pow(x % self.p() as u128, e) == 1)))
    }
}

/// Tr(gamma eta^n) = c over (Z/p^k)^d.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankDContext {
    pub alg: RankDSplitAlgebra,
    pub eta: Vector,
    pub gamma: Vector,
    pub c: u128,
    pub period: u128,
    /// U = (eta^P - 1)/p lifted to precision k (valid mod p^(k-1))
    pub u: Vector,
}

impl RankDContext {
    pub fn new(alg: RankDSplitAlgebra, eta: Vector, gamma: Vector, c: u128) -> Result<Self, RankDError> {
        if alg.k() < 2 {
            return Err(RankDError::Precision { need: 2, have: alg.k() });
        }
        let period = alg.period(&eta)?;
        let pp = alg.pow(&eta, period);
        let p = alg.p() as u128;
        let u = pp.iter().map(|&x| alg.md.sub(x, 1) / p).collect();
        Ok(RankDContext { c: alg.md.reduce(c), alg, eta, gamma, period, u })
    }

    pub fn p(&self) -> u64 {
        self.alg.p()
    }

    pub fn omega(&self) -> Vec<u64> {
        self.u.iter().map(|&x| (x % self.p() as u128) as u64).collect()
    }

    pub fn y(&self, a: u128) -> Vector {
        self.alg.mul(&self.gamma, &self.alg.pow(&self.eta, a))
    }

    /// F_a(t) = Tr(y_a (eta^P)^t) - c mod p^k.
    pub fn value(&self, a: u128, t: u128) -> u128 {
        let step = self.alg.pow(&self.eta, self.period);
        let md = self.alg.md;
        md.sub(self.alg.trace(&self.alg.mul(&self.y(a), &self.alg.pow(&step, t))), self.c)
    }

    /// C_0 = Tr(y_a) - c, C_m = Tr(y_a U^m).
    pub fn coefficient(&self, a: u128, m: u32) -> u128 {
        let y = self.y(a);
        if m == 0 {
            return self.alg.md.sub(self.alg.trace(&y), self.c);
        }
        self.alg.trace(&self.alg.mul(&y, &self.alg.pow(&self.u, m as u128)))
    }

    /// r = dim F_p[omega] = number of distinct coordinates of omega.
    pub fn tangent_rank(&self) -> usize {
        self.omega().into_iter().collect::<BTreeSet<_>>().len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    /// homogeneous target, 1, omega, .., omega^(d-1) a basis: d - 1
    Basis,
    /// x_a not orthogonal to F_p[omega] of dimension r: r - 1
    Subalgebra,
    /// affine target with omega a unit generator: d
    Affine,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankDBranchRecord {
    pub a: u128,
    pub kind: BoundKind,
    pub bound: usize,
    pub shift: u32,
    /// reduced jet in the binomial basis
    pub phi: Vec<u64>,
    pub degree: usize,
    /// R_a(k): residues t mod p^(k-1) with F_a(t) = 0 mod p^k
    pub residues: usize,
    /// classes of R_a(k) modulo p^ceil((k - shift)/degree); at most `degree`
    pub clusters: usize,
    pub within_bound: bool,
}

fn ceil_div(a: u32, b: u32) -> u32 {
    a.div_ceil(b)
}

/// Weierstrass data of class a together with the digit-recursion cluster count.
pub fn rankd_classify(ctx: &RankDContext, a: u128) -> Result<RankDBranchRecord, RankDError> {
    let alg = ctx.alg;
    let p = ctx.p();
    let k = alg.k();
    let d = alg.d();
    let md = alg.md;
    let r = ctx.tangent_rank();
    let x: Vec<u128> = ctx.y(a).iter().map(|&v| v % p as u128).collect();
    if x.iter().all(|&v| v == 0) {
        return Err(RankDError::Hypothesis("x_a = 0".into()));
    }
    let omega = ctx.omega();
    let f = Modulus::new(p, 1)?;
    let pairing = |m: u32| x.iter().zip(&omega).fold(0, |acc, (&xi, &wi)| f.add(acc, f.mul(xi, f.pow(wi as u128, m as u128))));
    let (kind, top) = if ctx.c == 0 {
        if r == d {
            (BoundKind::Basis, d - 1)
        } else if (0..r as u32).any(|m| pairing(m) != 0) {
            (BoundKind::Subalgebra, r - 1)
        } else {
            return Err(RankDError::Hypothesis("x_a is orthogonal to F_p[omega]".into()));
        }
    } else {
        if r != d || omega.iter().any(|&w| w == 0) || p <= d as u64 + 1 {
            return Err(RankDError::Hypothesis("affine bound needs a unit generator omega and p > d + 1".into()));
        }
        if f.sub(x.iter().fold(0, |acc, &v| f.add(acc, v)), ctx.c % p as u128) != 0 {
            return Err(RankDError::Hypothesis("class is not a target class mod p".into()));
        }
        (BoundKind::Affine, d)
    };
    // valuations of C_m are reliable below p^(k-1)
    let vals: Vec<u32> = (0..=top as u32).map(|m| md.val(ctx.coefficient(a, m)).min(k - 1)).collect();
    let shift = (0..=top).map(|m| m as u32 + vals[m]).min().expect("nonempty");
    if shift >= k - 1 {
        return Err(RankDError::Precision { need: shift + 2, have: k });
    }
    let mut phi = vec![0u64; top + 1];
    for m in 0..=top {
        if m as u32 + vals[m] == shift {
            phi[m] = (ctx.coefficient(a, m as u32) / pw(p, shift - m as u32) % p as u128) as u64;
        }
    }
    let degree = phi.iter().rposition(|&c| c != 0).expect("nonzero jet");
    let residues = digit_recursion(p, k, |t, j| ctx.value(a, t) % pw(p, j) == 0);
    let clusters = if degree == 0 {
        residues.len()
    } else {
        let level = ceil_div(k - shift, degree as u32).min(k - 1);
        residues.iter().map(|t| t % pw(p, level)).collect::<BTreeSet<_>>().len()
    };
    Ok(RankDBranchRecord {
        a,
        kind,
        bound: top,
        shift,
        phi,
        degree,
        residues: residues.len(),
        clusters,
        within_bound: shift as usize <= top && degree <= top && clusters <= degree,
    })
}

/// {t mod p^(k-1) : sum_i v(t - z_i) >= k - s} for exact integral zeros z_i
/// of a branch p^s W V with W = prod (X - z_i).
pub fn predicted_residues(p: u64, k: u32, shift: u32, zeros: &[u128]) -> BTreeSet<u128> {
    let m = pw(p, k - 1);
    (0..m)
        .filter(|&t| {
            let total: u32 = zeros
                .iter()
                .map(|&z| {
                    let diff = (t + m * p as u128 - z % m) % m;
                    if diff == 0 { k } else { crate::arith::vp(diff, p).min(k) }
                })
                .sum();
            shift >= k || total >= k - shift
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sharpness {
    pub p: u64,
    pub d: usize,
    pub k: u32,
    pub gamma: Vector,
    pub eta: Vector,
    pub gamma_units: bool,
    /// F(0), .., F(d-1) mod p^k
    pub values: Vec<u128>,
    pub pass: bool,
}

fn distinct_mod_p(p: u64, omega: &[i128]) -> bool {
    let set: BTreeSet<i128> = omega.iter().map(|&w| w.rem_euclid(p as i128)).collect();
    set.len() == omega.len()
}

/// gamma_i = p^(d-1)/prod_{j != i}(q_i - q_j) with q_i = 1 + p Omega_i, so that
/// F(0) = .. = F(d-2) = 0 and F(d-1) = p^(d-1).
pub fn sharpness_construction(p: u64, d: usize, omega: &[i128], k: u32) -> Result<(RankDContext, Sharpness), RankDError> {
    if omega.len() != d {
        return Err(RankDError::Dimension { d, got: omega.len() });
    }
    if !distinct_mod_p(p, omega) {
        return Err(RankDError::NotDistinct);
    }
    if k < d as u32 {
        return Err(RankDError::Precision { need: d as u32, have: k });
    }
    let alg = RankDSplitAlgebra::new(p, k, d)?;
    let md = alg.md;
    let pi = p as i128;
    let eta = alg.elem(&omega.iter().map(|&w| 1 + pi * w).collect::<Vec<_>>())?;
    let mut gamma = Vec::with_capacity(d);
    for i in 0..d {
        let prod = (0..d).filter(|&j| j != i).fold(1u128, |acc, j| md.mul(acc, md.from_i128(omega[i] - omega[j])));
        gamma.push(md.inv(prod).expect("distinct mod p"));
    }
    let ctx = RankDContext::new(alg, eta.clone(), gamma.clone(), 0)?;
    let values: Vec<u128> = (0..d as u128).map(|t| ctx.value(0, t)).collect();
    let target = md.reduce(pw(p, d as u32 - 1));
    let pass = values[..d - 1].iter().all(|&v| v == 0) && values[d - 1] == target;
    let gamma_units = alg.is_unit(&gamma);
    Ok((ctx, Sharpness { p, d, k, gamma, eta, gamma_units, values, pass: pass && gamma_units }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Versality {
    pub p: u64,
    pub d: usize,
    pub jet: Vec<u64>,
    pub gamma: Vector,
    /// p^m C_m / p^e mod p for m <= d - 1 (C_m = Tr(gamma Omega^m))
    pub reduced_jet: Vec<u64>,
    /// p^-e F(t) = Q(t) mod p for every t in [0, p^2)
    pub values_match: bool,
    pub pass: bool,
}

/// gamma = sum_j p^(e-j) c_j z_j in the dual basis of 1, Omega, .., Omega^(d-1).
pub fn jet_versality(p: u64, d: usize, omega: &[i128], jet: &[u64], k: u32) -> Result<(RankDContext, Versality), RankDError> {
    let e = jet.iter().rposition(|&c| c % p != 0).ok_or(RankDError::ZeroLeading)?;
    if jet.len() > d {
        return Err(RankDError::Degree { e: jet.len() - 1, max: d - 1 });
    }
    if !distinct_mod_p(p, omega) || omega.len() != d {
        return Err(RankDError::NotDistinct);
    }
    if k < e as u32 + 2 {
        return Err(RankDError::Precision { need: e as u32 + 2, have: k });
    }
    let alg = RankDSplitAlgebra::new(p, k, d)?;
    let md = alg.md;
    let om = alg.elem(omega)?;
    let z = alg.trace_dual_basis(&om)?;
    let mut gamma = vec![0u128; d];
    for (j, &c) in jet.iter().enumerate().take(e + 1) {
        gamma = alg.add(&gamma, &alg.scale(md.mul(pw(p, (e - j) as u32), c as u128), &z[j]));
    }
    let eta: Vector = om.iter().map(|&w| md.add(1, md.mul(p as u128, w))).collect();
    let ctx = RankDContext::new(alg, eta, gamma.clone(), 0)?;
    let pe = pw(p, e as u32);
    let reduced_jet: Vec<u64> = (0..d as u32)
        .map(|m| {
            let cm = alg.trace(&alg.mul(&gamma, &alg.pow(&om, m as u128)));
            let b = md.mul(md.reduce(pw(p, m)), cm);
            ((b / pe) % p as u128) as u64
        })
        .collect();
    let expected: Vec<u64> = (0..d).map(|m| jet.get(m).map_or(0, |&c| c % p)).collect();
    let f = Modulus::new(p, 1)?;
    let values_match = (0..(p as u128).pow(2)).all(|t| {
        let v = ctx.value(0, t);
        let q = jet.iter().enumerate().fold(0, |acc, (m, &c)| f.add(acc, f.mul(c as u128 % p as u128, f.binom(t, m as u64))));
        v % pe == 0 && (v / pe) % p as u128 == q
    });
    let pass = reduced_jet == expected && values_match && gamma.iter().any(|&g| g % p as u128 != 0);
    Ok((ctx, Versality { p, d, jet: jet.to_vec(), gamma, reduced_jet, values_match, pass }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffineSharpness {
    pub p: u64,
    pub d: usize,
    pub k: u32,
    /// a0 = (-1)^d prod Omega_i
    pub a0: i128,
    pub values: Vec<u128>,
    /// -a0 p^d mod p^k
    pub expected_last: u128,
    /// reduced y equals c-bar z0
    pub exceptional_class: bool,
    pub pass: bool,
}

/// y = z0 (dual to 1 for the basis 1, Omega, ..), c = 1, eta = 1 + p Omega.
pub fn affine_sharpness(p: u64, d: usize, omega: &[i128], k: u32) -> Result<(RankDContext, AffineSharpness), RankDError> {
    if p <= d as u64 + 1 {
        return Err(RankDError::SmallPrime { p, need: d as u64 + 1 });
    }
    if !distinct_mod_p(p, omega) || omega.len() != d || omega.iter().any(|&w| w.rem_euclid(p as i128) == 0) {
        return Err(RankDError::NotDistinct);
    }
    if k <= d as u32 {
        return Err(RankDError::Precision { need: d as u32 + 1, have: k });
    }
    let alg = RankDSplitAlgebra::new(p, k, d)?;
    let md = alg.md;
    let om = alg.elem(omega)?;
    let z = alg.trace_dual_basis(&om)?;
    let eta: Vector = om.iter().map(|&w| md.add(1, md.mul(p as u128, w))).collect();
    let ctx = RankDContext::new(alg, eta, z[0].clone(), 1)?;
    let values: Vec<u128> = (0..=d as u128).map(|t| ctx.value(0, t)).collect();
    let sign = if d % 2 == 0 { 1 } else { -1 };
    let a0 = sign * omega.iter().product::<i128>();
    let expected_last = md.mul(md.from_i128(-a0), md.reduce(pw(p, d as u32)));
    let b = Modulus::new(p, 1)?;
    let zb: Vec<u128> = z[0].iter().map(|&v| v % p as u128).collect();
    let exceptional_class = zb.iter().zip(&ctx.gamma).all(|(&a, &g)| a == b.mul(1, g % p as u128));
    let pass = values[..d].iter().all(|&v| v == 0) && values[d] == expected_last && exceptional_class;
    Ok((ctx, AffineSharpness { p, d, k, a0, values, expected_last, exceptional_class, pass }))
}

/// The same d = 3 problem as a split cubic algebra, for the generic engine.
pub fn as_cubic_context(ctx: &RankDContext) -> Result<BranchContext, RankDError> {
    if ctx.alg.d() != 3 {
        return Err(RankDError::Dimension { d: 3, got: ctx.alg.d() });
    }
    let wrap = |e: crate::algebra::AlgebraError| RankDError::Hypothesis(e.to_string());
    let alg = CubicAlgebra::from_split_roots(ctx.p(), ctx.alg.k(), [0, 1, 2]).map_err(wrap)?;
    let coords = |v: &[u128]| [v[0] as i128, v[1] as i128, v[2] as i128];
    let eta = alg.from_split_coords_i(coords(&ctx.eta)).map_err(wrap)?;
    let gamma = alg.from_split_coords_i(coords(&ctx.gamma)).map_err(wrap)?;
    BranchContext::new(alg, eta, gamma, ctx.c).map_err(|e| RankDError::Hypothesis(e.to_string()))
}

/// A random context over (Z/p^k)^d: a random unit eta, primitive gamma, and
/// either c = 0 or c chosen on a target class.
pub fn random_rankd_context<R: Rng>(rng: &mut R, p: u64, d: usize, k: u32, affine: bool) -> Result<RankDContext, RankDError> {
    let alg = RankDSplitAlgebra::new(p, k, d)?;
    let m = alg.md.m();
    let pu = p as u128;
    loop {
        let eta: Vector = (0..d).map(|_| loop {
            let x = rng.gen_range(0..m);
            if x % pu != 0 {
                break x;
            }
        })
        .collect();
        let gamma: Vector = (0..d).map(|_| rng.gen_range(0..m)).collect();
        if gamma.iter().all(|&g| g % pu == 0) {
            continue;
        }
        let c = if affine {
            let a = rng.gen_range(0..alg.period(&eta)?);
            let probe = RankDContext::new(alg, eta.clone(), gamma.clone(), 0)?;
            let tr = alg.trace(&probe.y(a));
            alg.md.add(tr, alg.md.mul(pw(p, rng.gen_range(1..k)), rng.gen_range(0..pu)))
        } else {
            0
        };
        if affine && c % pu == 0 {
            continue;
        }
        return RankDContext::new(alg, eta, gamma, c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_basis_pairing() {
        let alg = RankDSplitAlgebra::new(7, 3, 4).unwrap();
        let w = alg.elem(&[1, 2, 3, 5]).unwrap();
        let z = alg.trace_dual_basis(&w).unwrap();
        for (j, zj) in z.iter().enumerate() {
            for m in 0..4 {
                let v = alg.trace(&alg.mul(zj, &alg.pow(&w, m as u128)));
                assert_eq!(v, u128::from(j == m));
            }
        }
    }

    #[test]
    fn sharpness_examples() {
        let (_, s) = sharpness_construction(7, 3, &[1, 2, 3], 4).unwrap();
        assert_eq!(s.values, vec![0, 0, 49]);
        assert!(s.pass);
        let (_, s) = sharpness_construction(11, 4, &[1, 2, 3, 4], 5).unwrap();
        assert_eq!(s.values[3], 1331);
    }

    #[test]
    fn affine_example() {
        let (_, a) = affine_sharpness(7, 3, &[1, 2, 3], 5).unwrap();
        assert_eq!(a.a0, -6);
        assert_eq!(a.values[3], 2058);
        assert!(a.pass);
    }

    #[test]
    fn versal_jet() {
        let (_, v) = jet_versality(7, 4, &[1, 2, 3, 4], &[3, 0, 1, 2], 6).unwrap();
        assert!(v.pass, "{v:?}");
    }
}
