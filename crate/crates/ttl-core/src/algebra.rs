//! Cubic étale algebras (Z/p^k)[T]/(F) with F monic and squarefree mod p.
//!
//! Elements are stored in the monomial basis 1, T, T^2.  Trace and norm are
//! read off the 3x3 multiplication matrix.  The splitting type is derived from
//! the factorization of F mod p.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{order_by_descent, ArithError, Modulus};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("cubic is not squarefree modulo {0}")]
    NotSquarefree(u64),
    #[error("algebra is not split")]
    NotSplit,
    #[error("element {0} is not a unit")]
    NotUnit(Elem),
    #[error("element {0} does not generate the reduced algebra")]
    NotGenerator(Elem),
    #[error("element {0} does not belong to this algebra")]
    Mismatch(Elem),
    #[error("cannot parse element: {0}")]
    BadElement(String),
    #[error("cannot parse algebra spec: {0}")]
    BadSpec(String),
    #[error("precision {have} too low, need at least {need}")]
    Precision { need: u32, have: u32 },
    #[error("element {0} is not congruent to 1 modulo p; wrong period?")]
    NotOneModP(Elem),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplittingType {
    Split,
    Mixed,
    Inert,
}

impl SplittingType {
    pub const ALL: [SplittingType; 3] = [SplittingType::Split, SplittingType::Mixed, SplittingType::Inert];

    /// Sign of the Frobenius permutation on the three geometric roots.
    pub fn frobenius_sign(self) -> i64 {
        match self {
            SplittingType::Mixed => -1,
            _ => 1,
        }
    }

    /// Number of Frobenius-fixed roots.
    pub fn fixed_labels(self) -> u64 {
        match self {
            SplittingType::Split => 3,
            SplittingType::Mixed => 1,
            SplittingType::Inert => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SplittingType::Split => "split",
            SplittingType::Mixed => "mixed",
            SplittingType::Inert => "inert",
        }
    }

    /// Order of the norm-one torus over F_p.
    pub fn torus_order(self, p: u64) -> u128 {
        let p = p as u128;
        match self {
            SplittingType::Split => (p - 1) * (p - 1),
            SplittingType::Mixed => p * p - 1,
            SplittingType::Inert => p * p + p + 1,
        }
    }

    /// Order of the unit group over F_p.
    pub fn unit_order(self, p: u64) -> u128 {
        let p = p as u128;
        match self {
            SplittingType::Split => (p - 1).pow(3),
            SplittingType::Mixed => (p - 1) * (p * p - 1),
            SplittingType::Inert => p * p * p - 1,
        }
    }
}

impl fmt::Display for SplittingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SplittingType {
    type Err = AlgebraError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "split" => Ok(SplittingType::Split),
            "mixed" => Ok(SplittingType::Mixed),
            "inert" => Ok(SplittingType::Inert),
            other => Err(AlgebraError::BadSpec(format!("unknown splitting type '{other}'"))),
        }
    }
}

/// Coefficients of 1, T, T^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Elem(pub [u128; 3]);

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.0[0], self.0[1], self.0[2])
    }
}

impl Elem {
    pub fn is_zero(&self) -> bool {
        self.0 == [0; 3]
    }
}

/// Discriminant of the monic cubic T^3 + a T^2 + b T + c.
pub fn disc_monic_cubic(md: &Modulus, coeffs: [u128; 3]) -> u128 {
    let [c, b, a] = coeffs;
    let m = |x, y| md.mul(x, y);
    let ab = m(a, b);
    let t1 = m(ab, ab);
    let t2 = m(4, m(b, m(b, b)));
    let t3 = m(4, m(m(a, m(a, a)), c));
    let t4 = m(27, m(c, c));
    let t5 = m(18, m(ab, c));
    md.add(md.sub(md.sub(md.sub(t1, t2), t3), t4), t5)
}

/// Evaluate a monic cubic (constant-first lower coefficients) at x.
fn eval_monic(md: &Modulus, f: &[u128; 3], x: u128) -> u128 {
    let mut acc = 1;
    for i in (0..3).rev() {
        acc = md.add(md.mul(acc, x), f[i]);
    }
    acc
}

fn eval_monic_deriv(md: &Modulus, f: &[u128; 3], x: u128) -> u128 {
    // 3x^2 + 2 f2 x + f1
    let x2 = md.mul(x, x);
    md.add(md.add(md.mul(3, x2), md.mul(md.mul(2, f[2]), x)), f[1])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicAlgebra {
    md: Modulus,
    f: [u128; 3],
    kind: SplittingType,
    roots: Option<[u128; 3]>,
}

impl CubicAlgebra {
    /// (Z/p^k)[T]/(T^3 + f2 T^2 + f1 T + f0), with `f = [f0, f1, f2]`.
    pub fn new(p: u64, k: u32, f: [i128; 3]) -> Result<Self, AlgebraError> {
        let md = Modulus::new(p, k)?;
        let f = [md.from_i128(f[0]), md.from_i128(f[1]), md.from_i128(f[2])];
        Self::from_residues(md, f, None)
    }

    /// The split algebra (Z/p^k)[T]/((T-r1)(T-r2)(T-r3)); split coordinates
    /// are taken in the given root order.
    pub fn from_split_roots(p: u64, k: u32, roots: [i128; 3]) -> Result<Self, AlgebraError> {
        let md = Modulus::new(p, k)?;
        let r = roots.map(|x| md.from_i128(x));
        let (s1, s2, s3) = (
            md.add(md.add(r[0], r[1]), r[2]),
            md.add(md.add(md.mul(r[0], r[1]), md.mul(r[0], r[2])), md.mul(r[1], r[2])),
            md.mul(md.mul(r[0], r[1]), r[2]),
        );
        Self::from_residues(md, [md.neg(s3), s2, md.neg(s1)], Some(r))
    }

    fn from_residues(md: Modulus, f: [u128; 3], roots: Option<[u128; 3]>) -> Result<Self, AlgebraError> {
        let p = md.p();
        let fp = Modulus::new(p, 1)?;
        let fbar = f.map(|c| c % p as u128);
        if disc_monic_cubic(&fp, fbar) == 0 {
            return Err(AlgebraError::NotSquarefree(p));
        }
        let roots_mod_p: Vec<u128> = (0..p as u128).filter(|&x| eval_monic(&fp, &fbar, x) == 0).collect();
        let kind = match roots_mod_p.len() {
            3 => SplittingType::Split,
            1 => SplittingType::Mixed,
            _ => SplittingType::Inert,
        };
        let roots = match (kind, roots) {
            (SplittingType::Split, Some(r)) => Some(r),
            (SplittingType::Split, None) => {
                let mut r = [0u128; 3];
                for (slot, &r0) in r.iter_mut().zip(&roots_mod_p) {
                    *slot = hensel_root(&md, &f, r0);
                }
                Some(r)
            }
            _ => None,
        };
        Ok(CubicAlgebra { md, f, kind, roots })
    }

    /// A fixed representative algebra of each splitting type over F_p:
    /// split T(T-1)(T-2), mixed T(T^2 - n) with n the least nonresidue,
    /// inert the first irreducible T^3 + aT + b in (b, a) order.
    pub fn standard(p: u64, kind: SplittingType) -> Result<Self, AlgebraError> {
        Self::standard_k(p, 1, kind)
    }

    pub fn standard_k(p: u64, k: u32, kind: SplittingType) -> Result<Self, AlgebraError> {
        match kind {
            SplittingType::Split => Self::from_split_roots(p, k, [0, 1, 2]),
            SplittingType::Mixed => {
                let n = (2..p).find(|&n| crate::arith::legendre(n, p) == -1).unwrap_or(2);
                Self::new(p, k, [0, -(n as i128), 0])
            }
            SplittingType::Inert => {
                for b in 1..p as i128 {
                    for a in 0..p as i128 {
                        if let Ok(alg) = Self::new(p, k, [b, a, 0]) {
                            if alg.kind == SplittingType::Inert {
                                return Ok(alg);
                            }
                        }
                    }
                }
                Err(AlgebraError::BadSpec(format!("no inert cubic found for p={p}")))
            }
        }
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
    /// Lower coefficients [f0, f1, f2] of the defining cubic.
    pub fn f(&self) -> [u128; 3] {
        self.f
    }
    pub fn kind(&self) -> SplittingType {
        self.kind
    }
    /// Roots of F modulo p^k in split-coordinate order (split algebras only).
    pub fn roots(&self) -> Option<[u128; 3]> {
        self.roots
    }

    /// Same defining data at precision k' (coefficients are reduced, or lifted
    /// by their canonical representatives).
    pub fn with_precision(&self, k: u32) -> Result<Self, AlgebraError> {
        let md = self.md.with_k(k)?;
        let f = self.f.map(|c| md.reduce(c));
        let roots = match self.roots {
            Some(r) if k <= self.k() => Some(r.map(|x| md.reduce(x))),
            Some(r) => {
                let lifted = r.map(|x| hensel_root(&md, &f, x));
                if lifted.iter().all(|&x| eval_monic(&md, &f, x) == 0) {
                    Some(lifted)
                } else {
                    // the given roots were not roots of the lifted cubic; refit
                    None
                }
            }
            None => None,
        };
        Self::from_residues(md, f, roots)
    }

    /// The reduced algebra A/pA.
    pub fn reduced(&self) -> Self {
        self.with_precision(1).expect("reduction is always valid")
    }

    pub fn contains(&self, x: &Elem) -> bool {
        x.0.iter().all(|&c| c < self.md.m())
    }

    pub fn elem(&self, c: [i128; 3]) -> Elem {
        Elem(c.map(|x| self.md.from_i128(x)))
    }

    /// Reduce an element given at any precision into this algebra.
    pub fn lift_or_reduce(&self, x: &Elem) -> Elem {
        Elem(x.0.map(|c| self.md.reduce(c)))
    }

    pub fn zero(&self) -> Elem {
        Elem([0; 3])
    }
    pub fn one(&self) -> Elem {
        Elem([1 % self.md.m(), 0, 0])
    }
    pub fn t(&self) -> Elem {
        Elem([0, 1, 0])
    }
    pub fn scalar(&self, c: u128) -> Elem {
        Elem([self.md.reduce(c), 0, 0])
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        Elem([0, 1, 2].map(|i| self.md.add(a.0[i], b.0[i])))
    }
    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        Elem([0, 1, 2].map(|i| self.md.sub(a.0[i], b.0[i])))
    }
    pub fn neg(&self, a: &Elem) -> Elem {
        Elem(a.0.map(|c| self.md.neg(c)))
    }
    pub fn scale(&self, c: u128, a: &Elem) -> Elem {
        let c = self.md.reduce(c);
        Elem(a.0.map(|x| self.md.mul(c, x)))
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let md = &self.md;
        let mut c = [0u128; 5];
        for i in 0..3 {
            for j in 0..3 {
                c[i + j] = md.add(c[i + j], md.mul(a.0[i], b.0[j]));
            }
        }
        for deg in [4usize, 3] {
            let top = c[deg];
            if top != 0 {
                for i in 0..3 {
                    c[deg - 3 + i] = md.sub(c[deg - 3 + i], md.mul(top, self.f[i]));
                }
            }
            c[deg] = 0;
        }
        Elem([c[0], c[1], c[2]])
    }

    /// Multiplication with a context check on both operands.
    pub fn checked_mul(&self, a: &Elem, b: &Elem) -> Result<Elem, AlgebraError> {
        for x in [a, b] {
            if !self.contains(x) {
                return Err(AlgebraError::Mismatch(*x));
            }
        }
        Ok(self.mul(a, b))
    }

    pub fn pow(&self, a: &Elem, mut e: u128) -> Elem {
        let mut acc = self.one();
        let mut b = *a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    /// Matrix of multiplication by x: column j holds the coordinates of x*T^j.
    pub fn mult_matrix(&self, x: &Elem) -> [[u128; 3]; 3] {
        let c0 = *x;
        let c1 = self.mul(x, &self.t());
        let c2 = self.mul(&c1, &self.t());
        let cols = [c0, c1, c2];
        let mut m = [[0u128; 3]; 3];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..3 {
                m[i][j] = col.0[i];
            }
        }
        m
    }

    pub fn trace(&self, x: &Elem) -> u128 {
        let m = self.mult_matrix(x);
        self.md.add(self.md.add(m[0][0], m[1][1]), m[2][2])
    }

    pub fn norm(&self, x: &Elem) -> u128 {
        det3(&self.md, &self.mult_matrix(x))
    }

    pub fn is_unit(&self, x: &Elem) -> bool {
        self.md.is_unit(self.norm(x))
    }

    pub fn inv(&self, x: &Elem) -> Result<Elem, AlgebraError> {
        let m = self.mult_matrix(x);
        let d = det3(&self.md, &m);
        let dinv = self.md.inv(d).ok_or(AlgebraError::NotUnit(*x))?;
        // first column of adj(M): y_i = (-1)^i minor(0, i)
        let md = &self.md;
        let minor = |r: usize, c: usize| {
            let rows: Vec<usize> = (0..3).filter(|&i| i != r).collect();
            let cols: Vec<usize> = (0..3).filter(|&j| j != c).collect();
            md.sub(
                md.mul(m[rows[0]][cols[0]], m[rows[1]][cols[1]]),
                md.mul(m[rows[0]][cols[1]], m[rows[1]][cols[0]]),
            )
        };
        let y = [minor(0, 0), md.neg(minor(0, 1)), minor(0, 2)];
        Ok(Elem(y.map(|c| md.mul(c, dinv))))
    }

    /// Characteristic polynomial of multiplication by x, as the lower
    /// coefficients [c0, c1, c2] of T^3 + c2 T^2 + c1 T + c0.
    pub fn charpoly_mult(&self, x: &Elem) -> [u128; 3] {
        let md = &self.md;
        let m = self.mult_matrix(x);
        let tr = md.add(md.add(m[0][0], m[1][1]), m[2][2]);
        let pm = |i: usize, j: usize| md.sub(md.mul(m[i][i], m[j][j]), md.mul(m[i][j], m[j][i]));
        let e2 = md.add(md.add(pm(0, 1), pm(0, 2)), pm(1, 2));
        let det = det3(md, &m);
        [md.neg(det), e2, md.neg(tr)]
    }

    /// Evaluate a monic cubic (lower coefficients, constant first) at x.
    pub fn eval_monic_at(&self, f: &[u128; 3], x: &Elem) -> Elem {
        let mut acc = self.one();
        for i in (0..3).rev() {
            acc = self.add(&self.mul(&acc, x), &self.scalar(f[i]));
        }
        acc
    }

    /// Discriminant of the characteristic polynomial of x.
    pub fn disc_of(&self, x: &Elem) -> u128 {
        disc_monic_cubic(&self.md, self.charpoly_mult(x))
    }

    /// True iff 1, w, w^2 is an F_p-basis of A/pA.
    pub fn is_generator(&self, w: &Elem) -> bool {
        self.md.is_unit(self.disc_of(w))
    }

    /// Basis z0, z1, z2 with Tr(w^i z_j) = delta_ij.
    pub fn trace_dual_basis(&self, w: &Elem) -> Result<[Elem; 3], AlgebraError> {
        if !self.is_generator(w) {
            return Err(AlgebraError::NotGenerator(*w));
        }
        let [_, b, a] = self.charpoly_mult(w);
        let w2 = self.mul(w, w);
        let fprime = self.add(
            &self.add(&self.scale(3, &w2), &self.scale(self.md.mul(2, a), w)),
            &self.scalar(b),
        );
        let inv = self.inv(&fprime)?;
        let z0 = self.mul(&self.add(&self.add(&w2, &self.scale(a, w)), &self.scalar(b)), &inv);
        let z1 = self.mul(&self.add(w, &self.scalar(a)), &inv);
        Ok([z0, z1, inv])
    }

    /// f_w'(w) for the characteristic polynomial f_w of w.
    pub fn charpoly_derivative_at(&self, w: &Elem) -> Elem {
        let [_, b, a] = self.charpoly_mult(w);
        let w2 = self.mul(w, w);
        self.add(&self.add(&self.scale(3, &w2), &self.scale(self.md.mul(2, a), w)), &self.scalar(b))
    }

    /// Values of x at the three roots (split algebras).
    pub fn split_coords(&self, x: &Elem) -> Result<[u128; 3], AlgebraError> {
        let r = self.roots.ok_or(AlgebraError::NotSplit)?;
        let md = &self.md;
        Ok(r.map(|ri| md.add(md.add(x.0[0], md.mul(x.0[1], ri)), md.mul(x.0[2], md.mul(ri, ri)))))
    }

    /// Inverse of `split_coords` by Lagrange interpolation.
    pub fn from_split_coords(&self, c: [u128; 3]) -> Result<Elem, AlgebraError> {
        let r = self.roots.ok_or(AlgebraError::NotSplit)?;
        let md = &self.md;
        let mut out = [0u128; 3];
        for i in 0..3 {
            let (j, l) = ((i + 1) % 3, (i + 2) % 3);
            let den = md.mul(md.sub(r[i], r[j]), md.sub(r[i], r[l]));
            let w = md.mul(md.reduce(c[i]), md.inv(den).expect("distinct roots mod p"));
            // (T - r_j)(T - r_l) = T^2 - (r_j + r_l) T + r_j r_l
            let basis = [md.mul(r[j], r[l]), md.neg(md.add(r[j], r[l])), 1];
            for (o, b) in out.iter_mut().zip(basis) {
                *o = md.add(*o, md.mul(w, b));
            }
        }
        Ok(Elem(out))
    }

    pub fn from_split_coords_i(&self, c: [i128; 3]) -> Result<Elem, AlgebraError> {
        self.from_split_coords(c.map(|x| self.md.from_i128(x)))
    }

    /// All p^3 elements of a prime-field algebra, in lexicographic order.
    pub fn elements(&self) -> Vec<Elem> {
        let m = self.md.m();
        let mut out = Vec::with_capacity((m * m * m) as usize);
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    out.push(Elem([a, b, c]));
                }
            }
        }
        out
    }

    /// Order of the reduction of eta in (A/pA)^x.
    pub fn period(&self, eta: &Elem) -> Result<u128, AlgebraError> {
        let red = self.reduced();
        let e = red.lift_or_reduce(eta);
        if !red.is_unit(&e) {
            return Err(AlgebraError::NotUnit(*eta));
        }
        let one = red.one();
        Ok(order_by_descent(self.kind.unit_order(self.p()), |d| red.pow(&e, d) == one))
    }

    /// U = (eta^P - 1)/p (at precision k-1) and its reduction omega.
    pub fn log_tangent(&self, eta: &Elem, period: u128) -> Result<LogTangent, AlgebraError> {
        self.log_tangent_at(eta, period, 1)
    }

    /// U = (eta^P - 1)/p^r at precision k-r, for a given r >= 1.
    pub fn log_tangent_at(&self, eta: &Elem, period: u128, r: u32) -> Result<LogTangent, AlgebraError> {
        if self.k() <= r {
            return Err(AlgebraError::Precision { need: r + 1, have: self.k() });
        }
        let w = self.sub(&self.pow(eta, period), &self.one());
        let pr = crate::arith::checked_pow(self.p(), r).expect("fits");
        if w.0.iter().any(|c| c % pr != 0) {
            return Err(AlgebraError::NotOneModP(self.pow(eta, period)));
        }
        let u_alg = self.with_precision(self.k() - r)?;
        let u = u_alg.lift_or_reduce(&Elem(w.0.map(|c| c / pr)));
        let omega = u_alg.reduced().lift_or_reduce(&u);
        Ok(LogTangent { period, r, u_alg, u, omega })
    }

    /// Largest r < k with eta^P = 1 mod p^r, or None when eta^P = 1 mod p^k.
    pub fn tangent_order(&self, eta: &Elem, period: u128) -> Option<u32> {
        let w = self.sub(&self.pow(eta, period), &self.one());
        let v = w.0.iter().map(|&c| self.md.val(c)).min().unwrap_or(self.k());
        (v < self.k()).then_some(v)
    }

    /// Parse "c0,c1,c2" (monomial) or "a|b|c" (split coordinates).
    pub fn parse_elem(&self, s: &str) -> Result<Elem, AlgebraError> {
        let s = s.trim();
        let (sep, split) = if s.contains('|') { ('|', true) } else { (',', false) };
        let parts: Vec<i128> = s
            .split(sep)
            .map(|t| t.trim().replace('\u{2212}', "-").parse::<i128>())
            .collect::<Result<_, _>>()
            .map_err(|_| AlgebraError::BadElement(s.to_string()))?;
        if parts.len() != 3 {
            return Err(AlgebraError::BadElement(s.to_string()));
        }
        let c = [parts[0], parts[1], parts[2]];
        if split {
            self.from_split_coords_i(c)
        } else {
            Ok(self.elem(c))
        }
    }

    /// Canonical spec string "p=..;k=..;f=f0,f1,f2".
    pub fn spec_string(&self) -> String {
        format!("p={};k={};f={},{},{}", self.p(), self.k(), self.f[0], self.f[1], self.f[2])
    }
}

impl FromStr for CubicAlgebra {
    type Err = AlgebraError;

    /// "p=5;k=3;f=0,2,2" or "p=5;k=3;split=0,1,2"; k defaults to 1.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AlgebraError::BadSpec(s.to_string());
        let (mut p, mut k, mut f, mut split) = (None, 1u32, None, None);
        for part in s.split(';').map(str::trim).filter(|x| !x.is_empty()) {
            let (key, val) = part.split_once('=').ok_or_else(bad)?;
            let nums = || -> Result<[i128; 3], AlgebraError> {
                let v: Vec<i128> = val
                    .split(',')
                    .map(|t| t.trim().replace('\u{2212}', "-").parse::<i128>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad())?;
                v.try_into().map_err(|_| bad())
            };
            match key.trim() {
                "p" => p = Some(val.trim().parse::<u64>().map_err(|_| bad())?),
                "k" => k = val.trim().parse::<u32>().map_err(|_| bad())?,
                "f" => f = Some(nums()?),
                "split" => split = Some(nums()?),
                _ => return Err(bad()),
            }
        }
        let p = p.ok_or_else(bad)?;
        match (f, split) {
            (Some(f), None) => CubicAlgebra::new(p, k, f),
            (None, Some(r)) => CubicAlgebra::from_split_roots(p, k, r),
            _ => Err(bad()),
        }
    }
}

/// The logarithmic tangent data of a unit: eta^P = 1 + p^r U.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogTangent {
    pub period: u128,
    pub r: u32,
    /// Algebra at precision k - r in which `u` lives.
    pub u_alg: CubicAlgebra,
    pub u: Elem,
    /// Reduction of U modulo p.
    pub omega: Elem,
}

fn det3(md: &Modulus, m: &[[u128; 3]; 3]) -> u128 {
    let t = |a: u128, b: u128, c: u128| md.mul(md.mul(a, b), c);
    let pos = md.add(
        md.add(t(m[0][0], m[1][1], m[2][2]), t(m[0][1], m[1][2], m[2][0])),
        t(m[0][2], m[1][0], m[2][1]),
    );
    let neg = md.add(
        md.add(t(m[0][2], m[1][1], m[2][0]), t(m[0][0], m[1][2], m[2][1])),
        t(m[0][1], m[1][0], m[2][2]),
    );
    md.sub(pos, neg)
}

fn hensel_root(md: &Modulus, f: &[u128; 3], r0: u128) -> u128 {
    let mut r = r0 % md.m();
    for _ in 0..md.k() + 1 {
        let d = eval_monic_deriv(md, f, r);
        let dinv = md.inv(d).expect("simple root");
        r = md.sub(r, md.mul(eval_monic(md, f, r), dinv));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split5() -> CubicAlgebra {
        CubicAlgebra::from_split_roots(5, 1, [0, 1, 2]).unwrap()
    }

    #[test]
    fn split_coordinate_products() {
        let a = split5();
        let x = a.from_split_coords_i([1, 1, 2]).unwrap();
        assert_eq!(a.split_coords(&a.mul(&x, &x)).unwrap(), [1, 1, 4]);
        assert_eq!(a.trace(&x), 4);
        assert_eq!(a.norm(&x), 2);
        assert_eq!(a.split_coords(&a.t()).unwrap(), [0, 1, 2]);
        assert_eq!(a.f(), [0, 2, 2]);
    }

    #[test]
    fn reduction_of_t_cubed() {
        let a = CubicAlgebra::new(5, 1, [0, -1, 0]).unwrap();
        let t = a.t();
        let t2 = a.mul(&t, &t);
        assert_eq!(t2, Elem([0, 0, 1]));
        assert_eq!(a.mul(&t, &t2), t);
    }

    #[test]
    fn charpoly_and_generator() {
        let a = split5();
        let w = a.from_split_coords_i([0, 1, 2]).unwrap();
        assert_eq!(a.charpoly_mult(&w), [0, 2, 2]);
        assert!(a.is_generator(&w));
        let s = a.from_split_coords_i([1, 1, 1]).unwrap();
        assert!(!a.is_generator(&s));
        assert_eq!(a.charpoly_mult(&a.one()), [a.modulus().from_i64(-1), 3, a.modulus().from_i64(-3)]);
    }

    #[test]
    fn dual_basis_example() {
        let a = CubicAlgebra::new(5, 1, [0, -1, 0]).unwrap();
        let w = a.t();
        assert_eq!(a.disc_of(&w), 4);
        let z = a.trace_dual_basis(&w).unwrap();
        assert_eq!(a.norm(&z[2]), 1);
        let mut wi = a.one();
        for i in 0..3 {
            for (j, zj) in z.iter().enumerate() {
                assert_eq!(a.trace(&a.mul(&wi, zj)), (i == j) as u128);
            }
            wi = a.mul(&wi, &w);
        }
    }

    #[test]
    fn p_adic_period_and_tangent() {
        let a = CubicAlgebra::from_split_roots(5, 3, [0, 1, 2]).unwrap();
        let eta = a.from_split_coords_i([1, 6, 11]).unwrap();
        let p = a.period(&eta).unwrap();
        assert_eq!(p, 1);
        let lt = a.log_tangent(&eta, p).unwrap();
        let red = a.reduced();
        assert_eq!(red.split_coords(&lt.omega).unwrap(), [0, 1, 2]);
    }

    #[test]
    fn split_roots_lift_and_parse() {
        let a: CubicAlgebra = "p=5;k=2;split=0,6,12".parse().unwrap();
        let eta = a.parse_elem("1|6|11").unwrap();
        assert_eq!(a.split_coords(&eta).unwrap(), [1, 6, 11]);
        let b: CubicAlgebra = "p=5;k=3;f=0,2,2".parse().unwrap();
        assert_eq!(b.kind(), SplittingType::Split);
        let x = b.parse_elem("3,-1,4").unwrap();
        let y = b.from_split_coords(b.split_coords(&x).unwrap()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn standard_types() {
        for p in [5u64, 7, 11, 13] {
            for kind in SplittingType::ALL {
                assert_eq!(CubicAlgebra::standard(p, kind).unwrap().kind(), kind);
            }
        }
    }
}
