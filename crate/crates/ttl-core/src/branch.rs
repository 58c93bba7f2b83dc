//! Local branch analysis of Tr(gamma eta^n) = c over Z/p^k.
//!
//! Write n = a + P t with P the period of eta mod p and eta^P = 1 + pU.  For
//! every class a mod P the algorithm emits a descriptor whose expansion is
//! exactly the set of t mod p^(k-1) solving the congruence.  A brute-force
//! oracle scans all n mod P p^(k-1) directly.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use rand::Rng;

use crate::algebra::{AlgebraError, CubicAlgebra, Elem, SplittingType};
use crate::arith::{checked_pow, vp, vp_factorial, ArithError, Modulus};

pub const DEFAULT_ORACLE_CAP: u128 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BranchError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("eta = {0} is not a unit")]
    NotUnit(Elem),
    #[error("precision {have} too low, need {need}")]
    Precision { need: u32, have: u32 },
    #[error("oracle would scan {size} classes, cap is {cap}")]
    OracleCap { size: u128, cap: u128 },
    #[error("class {a} is not a solution class mod p")]
    DeadClass { a: u128 },
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),
    #[error("all computed series coefficients vanish at precision {precision}")]
    Indeterminate { precision: u32 },
}

fn pw(p: u64, e: u32) -> u128 {
    checked_pow(p, e).expect("power fits")
}

/// Smallest M with m - v_p(m!) >= N for every m >= M (closed-form bound).
pub fn term_bound(p: u64, n: u32) -> u64 {
    let num = n as u64 * (p - 1) - 1;
    num.div_ceil(p - 2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZeroSet {
    pub modulus: u128,
    pub classes: BTreeSet<u128>,
}

impl ZeroSet {
    /// The same set of p-adic integers described modulo a multiple of the
    /// current modulus.
    pub fn lift_to(&self, modulus: u128) -> ZeroSet {
        assert!(modulus % self.modulus == 0, "modulus must be a multiple");
        let reps = modulus / self.modulus;
        let classes = self
            .classes
            .iter()
            .flat_map(|&n| (0..reps).map(move |w| n + self.modulus * w))
            .collect();
        ZeroSet { modulus, classes }
    }

    pub fn same_as(&self, other: &ZeroSet) -> bool {
        let m = self.modulus.max(other.modulus);
        self.lift_to(m).classes == other.lift_to(m).classes
    }
}

/// Problem data: Tr(gamma eta^n) = c mod p^k with integral gamma and c.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchContext {
    alg: CubicAlgebra,
    eta: Elem,
    gamma: Elem,
    c: u128,
    period: u128,
}

impl BranchContext {
    pub fn new(alg: CubicAlgebra, eta: Elem, gamma: Elem, c: u128) -> Result<Self, BranchError> {
        let eta = alg.lift_or_reduce(&eta);
        let gamma = alg.lift_or_reduce(&gamma);
        if !alg.is_unit(&eta) {
            return Err(BranchError::NotUnit(eta));
        }
        let period = alg.period(&eta)?;
        let c = alg.modulus().reduce(c);
        Ok(BranchContext { alg, eta, gamma, c, period })
    }

    pub fn algebra(&self) -> &CubicAlgebra {
        &self.alg
    }
    pub fn eta(&self) -> Elem {
        self.eta
    }
    pub fn gamma(&self) -> Elem {
        self.gamma
    }
    pub fn target(&self) -> u128 {
        self.c
    }
    pub fn period(&self) -> u128 {
        self.period
    }
    pub fn p(&self) -> u64 {
        self.alg.p()
    }
    pub fn k(&self) -> u32 {
        self.alg.k()
    }

    /// Modulus P p^(k-1) of the solution classes.
    pub fn class_modulus(&self) -> u128 {
        self.period * pw(self.p(), self.k() - 1)
    }

    /// The primitive-reduction trichotomy.
    pub fn reduce(&self) -> Result<Reduction, BranchError> {
        let md = self.alg.modulus();
        let k = self.k();
        let s = self.gamma.0.iter().map(|&x| md.val(x)).min().unwrap_or(k);
        if k <= s {
            return Ok(if self.c == 0 { Reduction::AllClasses } else { Reduction::NoClasses });
        }
        if md.val(self.c) < s {
            return Ok(Reduction::NoClasses);
        }
        let k0 = k - s;
        let alg = self.alg.with_precision(k0)?;
        let ps = pw(self.p(), s);
        let gamma = alg.lift_or_reduce(&Elem(self.gamma.0.map(|x| x / ps)));
        let c = alg.modulus().reduce(self.c / ps);
        let eta = alg.lift_or_reduce(&self.eta);
        Ok(Reduction::Reduced(ReducedContext::new(alg, eta, gamma, c, self.period, k, s)?))
    }

    /// {n mod P p^(k-1) : Tr(gamma eta^n) = c mod p^k} by direct scan.
    pub fn oracle(&self, cap: u128) -> Result<ZeroSet, BranchError> {
        let modulus = self.class_modulus();
        if modulus > cap {
            return Err(BranchError::OracleCap { size: modulus, cap });
        }
        let mut x = self.gamma;
        let mut classes = BTreeSet::new();
        for n in 0..modulus {
            if self.alg.trace(&x) == self.c {
                classes.insert(n);
            }
            x = self.alg.mul(&x, &self.eta);
        }
        Ok(ZeroSet { modulus, classes })
    }

    /// Descriptors for every class, and their expansion mod P p^(k-1).
    pub fn certified_zero_set(&self) -> Result<CertifiedZeroSet, BranchError> {
        let modulus = self.class_modulus();
        match self.reduce()? {
            Reduction::AllClasses => Ok(CertifiedZeroSet {
                modulus,
                s_div: self.k(),
                descriptors: vec![BranchDescriptor::AllSolutions],
                zeros: ZeroSet { modulus, classes: (0..modulus).collect() },
            }),
            Reduction::NoClasses => Ok(CertifiedZeroSet {
                modulus,
                s_div: 0,
                descriptors: vec![BranchDescriptor::NoSolutions],
                zeros: ZeroSet { modulus, classes: BTreeSet::new() },
            }),
            Reduction::Reduced(rc) => {
                let mut descriptors = Vec::new();
                let mut classes = BTreeSet::new();
                let inner_mod = rc.period * pw(rc.p(), rc.k0() - 1);
                let free = pw(rc.p(), rc.s_div);
                for a in 0..rc.period {
                    let d = rc.describe(a)?;
                    for t in rc.expand(&d) {
                        let n = a + rc.period * t;
                        for w in 0..free {
                            classes.insert(n + inner_mod * w);
                        }
                    }
                    descriptors.push(if rc.s_div > 0 {
                        BranchDescriptor::InflationWrapper { inner: Box::new(d), free_digits: rc.s_div }
                    } else {
                        d
                    });
                }
                Ok(CertifiedZeroSet { modulus, s_div: rc.s_div, descriptors, zeros: ZeroSet { modulus, classes } })
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum Reduction {
    AllClasses,
    NoClasses,
    Reduced(ReducedContext),
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifiedZeroSet {
    pub modulus: u128,
    pub s_div: u32,
    pub descriptors: Vec<BranchDescriptor>,
    pub zeros: ZeroSet,
}

/// A first-digit branch inside a surviving singular class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Branch {
    /// t = tau mod p^precision, each lifting to p^(shift-1) classes.
    SimpleRoot { r: u64, tau: u128, precision: u32 },
    /// t = r + Y with Y in pZ and W(Y) = 0 mod p^precision.
    WeierstrassDisk { r: u64, factor: WeierstrassFactor },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "tag")]
pub enum BranchDescriptor {
    AllSolutions,
    NoSolutions,
    DeadModP { a: u128 },
    /// Reduced precision 1: the class is kept without further tests.
    RetainedModP { a: u128 },
    TransverseSimple { a: u128, d: u64, tau: u128, precision: u32 },
    SingularObstructed { a: u128, obstruction: u64 },
    SingularAllModP2 { a: u128 },
    /// Quadratic jet A + B X + Delta binom(X, 2) without roots.
    SingularNoRoot { a: u128, jet: [u64; 3] },
    SingularSurviving { a: u128, jet: [u64; 3], branches: Vec<Branch> },
    /// Cubic jet in the binomial basis without roots.
    CubicNoRoot { a: u128, jet: [u64; 4] },
    CubicSurviving { a: u128, jet: [u64; 4], branches: Vec<Branch> },
    /// Explicit residues t mod p^(k0-1) from digit recursion.
    Recursion { a: u128, reason: String, residues: Vec<u128> },
    InflationWrapper { inner: Box<BranchDescriptor>, free_digits: u32 },
}

impl BranchDescriptor {
    pub fn tag(&self) -> &'static str {
        match self {
            BranchDescriptor::AllSolutions => "AllSolutions",
            BranchDescriptor::NoSolutions => "NoSolutions",
            BranchDescriptor::DeadModP { .. } => "DeadModP",
            BranchDescriptor::RetainedModP { .. } => "RetainedModP",
            BranchDescriptor::TransverseSimple { .. } => "TransverseSimple",
            BranchDescriptor::SingularObstructed { .. } => "SingularObstructed",
            BranchDescriptor::SingularAllModP2 { .. } => "SingularAllModP2",
            BranchDescriptor::SingularNoRoot { .. } => "SingularNoRoot",
            BranchDescriptor::SingularSurviving { .. } => "SingularSurviving",
            BranchDescriptor::CubicNoRoot { .. } => "CubicNoRoot",
            BranchDescriptor::CubicSurviving { .. } => "CubicSurviving",
            BranchDescriptor::Recursion { .. } => "Recursion",
            BranchDescriptor::InflationWrapper { .. } => "InflationWrapper",
        }
    }

    /// Innermost descriptor (through inflation wrappers).
    pub fn core(&self) -> &BranchDescriptor {
        match self {
            BranchDescriptor::InflationWrapper { inner, .. } => inner.core(),
            d => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeierstrassFactor {
    /// Power of p removed from F(r + Y) before factoring.
    pub shift: u32,
    /// Monic coefficients, constant first, modulo p^precision.
    pub coeffs: Vec<u128>,
    pub precision: u32,
}

impl WeierstrassFactor {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, p: u64, y: u128) -> u128 {
        let md = Modulus::any_prime(p, self.precision).expect("valid");
        self.coeffs.iter().rev().fold(0, |acc, &c| md.add(md.mul(acc, md.reduce(y)), c))
    }

    /// b^2 - 4c for a quadratic factor.
    pub fn discriminant(&self, p: u64) -> Option<u128> {
        if self.degree() != 2 {
            return None;
        }
        let md = Modulus::any_prime(p, self.precision).ok()?;
        let (c, b) = (self.coeffs[0], self.coeffs[1]);
        Some(md.sub(md.mul(b, b), md.mul(4, c)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClassKind {
    Dead,
    Retained,
    Transverse,
    SingularObstructed,
    /// d_a = 0, no lower obstruction, Delta_a != 0 (or not yet tested at k0 = 2)
    Singular,
    /// d_a = 0, no lower obstruction, Delta_a = 0
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassInfo {
    pub a: u128,
    pub kind: ClassKind,
    pub x_a: Elem,
    pub d: Option<u64>,
    pub obstruction: Option<u64>,
    pub delta: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Jet {
    /// Coefficients in the binomial basis binom(X, m), mod p.
    pub coeffs: Vec<u64>,
    pub roots: Vec<u64>,
}

impl Jet {
    fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let roots = (0..p).filter(|&x| eval_binomial_jet(p, &coeffs, x) == 0).collect();
        Jet { coeffs, roots }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// Sum coeffs[m] binom(x, m) mod p.
pub fn eval_binomial_jet(p: u64, coeffs: &[u64], x: u64) -> u64 {
    let f = Modulus::any_prime(p, 1).expect("prime");
    coeffs.iter().enumerate().fold(0u128, |acc, (m, &c)| f.add(acc, f.mul(c as u128, f.binom(x as u128, m as u64)))) as u64
}

/// Derivative at x of a binomial-basis jet of degree < p.
fn deriv_binomial_jet(p: u64, coeffs: &[u64], x: u64) -> u64 {
    let f = Modulus::any_prime(p, 1).expect("prime");
    // d/dX binom(X, m) = binom(X, m) * sum_{i<m} 1/(X - i)
    let mut acc = 0u128;
    for (m, &c) in coeffs.iter().enumerate().skip(1) {
        // product rule over (X - i)/(i+1)
        let mut term = 0u128;
        for skip in 0..m {
            let mut prod = 1u128;
            for i in 0..m {
                let factor = if i == skip { 1 } else { f.from_i128(x as i128 - i as i128) };
                prod = f.mul(prod, factor);
            }
            term = f.add(term, prod);
        }
        let fact: u128 = (1..=m as u128).fold(1, |a, i| f.mul(a, i));
        acc = f.add(acc, f.mul(c as u128, f.mul(term, f.inv(fact).expect("m < p"))));
    }
    acc as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadraticModel {
    pub a_coef: u64,
    pub b_coef: u64,
    pub delta: u64,
    /// (B - Delta/2)^2 - 2 Delta A
    pub disc: u64,
    pub alternative: QuadraticAlternative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuadraticAlternative {
    NoRoot,
    TwoSimple(u64, u64),
    DoubleRoot(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CubicModel {
    /// (C0 - c)/p^3, C1/p^2, C2/p, C3 in the binomial basis, mod p.
    pub jet: [u64; 4],
    /// s Norm(omega), which the leading coefficient must equal.
    pub expected_leading: u64,
    /// Tr(x w), Tr(x w^2), Tr(x w^3) mod p.
    pub trace_identities: [u64; 3],
    pub roots: Vec<(u64, bool)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Multiplicity {
    Certified { shift: u32, degree: u32 },
    Indeterminate { precision: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TruncatedBranchSeries {
    pub p: u64,
    pub precision: u32,
    pub bound: u64,
    /// Coefficients of binom(X, m), modulo p^precision.
    pub coeffs: Vec<u128>,
}

impl TruncatedBranchSeries {
    pub fn eval(&self, t: u128) -> u128 {
        let md = Modulus::any_prime(self.p, self.precision).expect("valid");
        self.coeffs
            .iter()
            .enumerate()
            .fold(0, |acc, (m, &b)| md.add(acc, md.mul(b, md.binom(t, m as u64))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HigherTransverse {
    pub r: u32,
    pub d: u64,
    pub tau: u128,
    pub precision: u32,
}

/// A primitive problem Tr(gamma0 eta^n) = c0 mod p^k0.
#[derive(Debug, Clone)]
pub struct ReducedContext {
    alg: CubicAlgebra,
    red: CubicAlgebra,
    eta: Elem,
    gamma: Elem,
    c: u128,
    period: u128,
    k: u32,
    s_div: u32,
    eta_p: Elem,
    /// U lifted to precision k0 (correct mod p^(k0-1)); None at k0 = 1.
    u: Option<Elem>,
    omega: Option<Elem>,
}

impl ReducedContext {
    fn new(alg: CubicAlgebra, eta: Elem, gamma: Elem, c: u128, period: u128, k: u32, s_div: u32) -> Result<Self, BranchError> {
        let red = alg.reduced();
        let eta_p = alg.pow(&eta, period);
        let (u, omega) = if alg.k() >= 2 {
            let lt = alg.log_tangent(&eta, period)?;
            (Some(alg.lift_or_reduce(&lt.u)), Some(lt.omega))
        } else {
            (None, None)
        };
        Ok(ReducedContext { alg, red, eta, gamma, c, period, k, s_div, eta_p, u, omega })
    }

    pub fn p(&self) -> u64 {
        self.alg.p()
    }
    pub fn k0(&self) -> u32 {
        self.alg.k()
    }
    pub fn s_div(&self) -> u32 {
        self.s_div
    }
    pub fn original_k(&self) -> u32 {
        self.k
    }
    pub fn period(&self) -> u128 {
        self.period
    }
    pub fn algebra(&self) -> &CubicAlgebra {
        &self.alg
    }
    pub fn gamma(&self) -> Elem {
        self.gamma
    }
    pub fn target(&self) -> u128 {
        self.c
    }
    pub fn omega(&self) -> Option<Elem> {
        self.omega
    }
    pub fn u(&self) -> Option<Elem> {
        self.u
    }

    fn md(&self) -> &Modulus {
        self.alg.modulus()
    }

    /// y_n = gamma0 eta^n.
    fn y(&self, n: u128) -> Elem {
        self.alg.mul(&self.gamma, &self.alg.pow(&self.eta, n))
    }

    /// Tr(gamma0 eta^n) - c0 mod p^k0.
    pub fn value(&self, n: u128) -> u128 {
        self.md().sub(self.alg.trace(&self.y(n)), self.c)
    }

    /// F_{a,c}(t) = Tr(gamma0 eta^(a + P t)) - c0.
    pub fn class_value(&self, a: u128, t: u128) -> u128 {
        self.md().sub(self.alg.trace(&self.alg.mul(&self.y(a), &self.alg.pow(&self.eta_p, t))), self.c)
    }

    /// x_a = gamma0-bar eta-bar^a.
    pub fn x_a(&self, a: u128) -> Elem {
        self.red.lift_or_reduce(&self.y(a))
    }

    pub fn mod_p_classes(&self) -> Vec<u128> {
        let cbar = self.c % self.p() as u128;
        let eta = self.red.lift_or_reduce(&self.eta);
        let mut x = self.red.lift_or_reduce(&self.gamma);
        let mut out = Vec::new();
        for a in 0..self.period {
            if self.red.trace(&x) == cbar {
                out.push(a);
            }
            x = self.red.mul(&x, &eta);
        }
        out
    }

    /// C_m = Tr(gamma0 eta^a U^m), with C_0 = T_a - c0.
    pub fn c_m(&self, a: u128, m: u32) -> Result<u128, BranchError> {
        if m == 0 {
            return Ok(self.value(a));
        }
        let u = self.u.ok_or(BranchError::Precision { need: 2, have: self.k0() })?;
        Ok(self.alg.trace(&self.alg.mul(&self.y(a), &self.alg.pow(&u, m as u128))))
    }

    fn div_p(&self, x: u128, r: u32) -> Option<u64> {
        let pr = pw(self.p(), r);
        (x % pr == 0).then(|| ((x / pr) % self.p() as u128) as u64)
    }

    pub fn classify(&self, a: u128) -> ClassInfo {
        let p = self.p() as u128;
        let x_a = self.x_a(a);
        let mut info = ClassInfo { a, kind: ClassKind::Dead, x_a, d: None, obstruction: None, delta: None };
        if self.red.trace(&x_a) != self.c % p {
            return info;
        }
        let Some(omega) = self.omega else {
            info.kind = ClassKind::Retained;
            return info;
        };
        let d = self.red.trace(&self.red.mul(&x_a, &omega)) as u64;
        info.d = Some(d);
        if d != 0 {
            info.kind = ClassKind::Transverse;
            return info;
        }
        let obstruction = self.div_p(self.value(a), 1).expect("alive class");
        info.obstruction = Some(obstruction);
        let delta = self.red.trace(&self.red.mul(&x_a, &self.red.mul(&omega, &omega))) as u64;
        info.delta = Some(delta);
        info.kind = if obstruction != 0 {
            ClassKind::SingularObstructed
        } else if delta != 0 {
            ClassKind::Singular
        } else {
            ClassKind::Degenerate
        };
        info
    }

    /// Hensel lifting of a simple root: F(t + p^j x) = F(t) + p^(shift+j) phi x.
    fn hensel(&self, a: u128, mut t: u128, mut j: u32, shift: u32, phi: u64) -> Result<u128, BranchError> {
        let p = self.p();
        let f = Modulus::any_prime(p, 1)?;
        let phi_inv = f.inv(phi as u128).ok_or_else(|| BranchError::Hypothesis("zero derivative".into()))?;
        while j + shift < self.k0() {
            let v = self.class_value(a, t);
            let q = self
                .div_p(v, shift + j)
                .ok_or_else(|| BranchError::Hypothesis(format!("class {a}: lifting lost divisibility")))?;
            let x = f.neg(f.mul(q as u128, phi_inv));
            t += pw(p, j) * x;
            j += 1;
        }
        Ok(t)
    }

    /// Q_{a,r}(X) = sum_{m<r} binom(X,m) C_m/p^(r-m) + binom(X,r) C_r mod p.
    pub fn finite_jet(&self, a: u128, r: u32) -> Result<Jet, BranchError> {
        let p = self.p();
        if r as u64 >= p {
            return Err(BranchError::Hypothesis(format!("jet order {r} must be < p")));
        }
        if r + 1 > self.k0() {
            return Err(BranchError::Precision { need: r + 1, have: self.k0() });
        }
        let mut coeffs = Vec::new();
        for m in 0..=r {
            let cm = self.c_m(a, m)?;
            let q = self
                .div_p(cm, r - m)
                .ok_or_else(|| BranchError::Hypothesis(format!("C_{m} not divisible by p^{}", r - m)))?;
            coeffs.push(q);
        }
        Ok(Jet::new(p, coeffs))
    }

    /// The jet of t -> F_a(t0 + p^j Y) at level R: coefficients
    /// C_m/p^(R-(j+1)m) with C_m = Tr(y_t0 U_j^m), U_j = ((eta^P)^(p^j) - 1)/p^(j+1).
    pub fn shifted_jet(&self, a: u128, t0: u128, j: u32, big_r: u32) -> Result<Jet, BranchError> {
        let p = self.p();
        if big_r + 1 > self.k0() {
            return Err(BranchError::Precision { need: big_r + 1, have: self.k0() });
        }
        let mm = big_r / (j + 1);
        if mm as u64 >= p {
            return Err(BranchError::Hypothesis("jet degree must be < p".into()));
        }
        let step = self.alg.pow(&self.eta_p, pw(p, j));
        let w = self.alg.sub(&step, &self.alg.one());
        let pj = pw(p, j + 1);
        if w.0.iter().any(|&x| x % pj != 0) {
            return Err(BranchError::Hypothesis("eta^(P p^j) is not 1 mod p^(j+1)".into()));
        }
        let uj = Elem(w.0.map(|x| x / pj));
        let y = self.alg.mul(&self.y(a), &self.alg.pow(&self.eta_p, t0));
        let mut coeffs = Vec::new();
        for m in 0..=mm {
            let cm = if m == 0 {
                self.md().sub(self.alg.trace(&y), self.c)
            } else {
                self.alg.trace(&self.alg.mul(&y, &self.alg.pow(&uj, m as u128)))
            };
            let e = big_r - (j + 1) * m;
            let q = self
                .div_p(cm, e)
                .ok_or_else(|| BranchError::Hypothesis(format!("shifted C_{m} not divisible by p^{e}")))?;
            coeffs.push(q);
        }
        Ok(Jet::new(p, coeffs))
    }

    pub fn quadratic_singular(&self, a: u128) -> Result<QuadraticModel, BranchError> {
        let info = self.classify(a);
        if info.kind != ClassKind::Singular || self.k0() < 3 {
            return Err(BranchError::Hypothesis(format!(
                "class {a} is {:?} at precision {}; the quadratic model needs a surviving singular class and k0 >= 3",
                info.kind,
                self.k0()
            )));
        }
        let p = self.p();
        let f = Modulus::any_prime(p, 1)?;
        let jet = self.finite_jet(a, 2)?;
        let (a_coef, b_coef, delta) = (jet.coeffs[0], jet.coeffs[1], jet.coeffs[2]);
        let half = f.inv(2).expect("odd p");
        let bm = f.sub(b_coef as u128, f.mul(delta as u128, half));
        let disc = f.sub(f.mul(bm, bm), f.mul(2, f.mul(delta as u128, a_coef as u128))) as u64;
        let alternative = match jet.roots.as_slice() {
            [] => QuadraticAlternative::NoRoot,
            [r] => QuadraticAlternative::DoubleRoot(*r),
            [r1, r2] => QuadraticAlternative::TwoSimple(*r1, *r2),
            _ => unreachable!("quadratic with nonzero leading term"),
        };
        Ok(QuadraticModel { a_coef, b_coef, delta, disc, alternative })
    }

    /// The cubic model on the codifferent line x_a = s z0 when C0 - c, C1,
    /// C2 lie in p^3, p^2, p.
    pub fn cubic_degenerate(&self, a: u128) -> Result<CubicModel, BranchError> {
        let p = self.p();
        if self.k0() < 4 {
            return Err(BranchError::Precision { need: 4, have: self.k0() });
        }
        let omega = self.omega.expect("k0 >= 2");
        let sbar = (self.c % p as u128) as u64;
        if sbar == 0 {
            return Err(BranchError::Hypothesis("target must be nonzero mod p".into()));
        }
        if !self.red.is_unit(&omega) || !self.red.is_generator(&omega) {
            return Err(BranchError::Hypothesis("omega must be a unit generator".into()));
        }
        let z = self.red.trace_dual_basis(&omega)?;
        let x_a = self.x_a(a);
        if x_a != self.red.scale(sbar as u128, &z[0]) {
            return Err(BranchError::Hypothesis(format!("x_{a} is not s z0")));
        }
        let jet = self.finite_jet(a, 3)?;
        let w2 = self.red.mul(&omega, &omega);
        let w3 = self.red.mul(&w2, &omega);
        let tr = |e: &Elem| self.red.trace(&self.red.mul(&x_a, e)) as u64;
        let expected_leading = self.red.modulus().mul(sbar as u128, self.red.norm(&omega)) as u64;
        let j: [u64; 4] = [jet.coeffs[0], jet.coeffs[1], jet.coeffs[2], jet.coeffs[3]];
        let roots = jet.roots.iter().map(|&r| (r, deriv_binomial_jet(p, &j, r) != 0)).collect();
        Ok(CubicModel { jet: j, expected_leading, trace_identities: [tr(&omega), tr(&w2), tr(&w3)], roots })
    }

    /// L1 = log(1 + pU)/p = sum (-1)^(j+1) p^(j-1) U^j / j, at precision k0.
    fn log_quotient(&self) -> Option<Elem> {
        let u = self.u?;
        let p = self.p();
        let md = self.md();
        let mut acc = self.alg.zero();
        let mut upow = self.alg.one();
        for j in 1u64.. {
            upow = self.alg.mul(&upow, &u);
            let e = (j - 1) as i64 - vp(j as u128, p) as i64;
            if e >= self.k0() as i64 {
                if j > 2 * self.k0() as u64 * p {
                    break;
                }
                continue;
            }
            let unit = (j / pw(p, vp(j as u128, p)) as u64) as u128;
            let coef = md.mul(pw(p, e as u32) % md.m(), md.inv(unit).expect("unit"));
            let term = self.alg.scale(coef, &upow);
            acc = if j % 2 == 1 { self.alg.add(&acc, &term) } else { self.alg.sub(&acc, &term) };
        }
        Some(acc)
    }

    /// Monomial Taylor coefficients h_i of Y -> F_a(t0 + Y), mod p^k0.
    pub fn taylor_coefficients(&self, a: u128, t0: u128) -> Result<Vec<u128>, BranchError> {
        let l1 = self.log_quotient().ok_or(BranchError::Precision { need: 2, have: self.k0() })?;
        let p = self.p();
        let md = self.md();
        let y = self.alg.mul(&self.y(a), &self.alg.pow(&self.eta_p, t0));
        let mut h = vec![md.sub(self.alg.trace(&y), self.c)];
        let mut lpow = self.alg.one();
        let bound = term_bound(p, self.k0());
        for i in 1..=bound {
            lpow = self.alg.mul(&lpow, &l1);
            let vf = vp_factorial(i, p);
            let e = i - vf as u64;
            if e >= self.k0() as u64 {
                h.push(0);
                continue;
            }
            let unit_fact = (1..=i as u128).fold(1u128, |acc, x| {
                let x = x / pw(p, vp(x, p));
                md.mul(acc, x % md.m())
            });
            let coef = md.mul(pw(p, e as u32), md.inv(unit_fact).expect("unit"));
            h.push(md.mul(coef, self.alg.trace(&md_scale_elem(&self.alg, &y, &lpow))));
        }
        Ok(h)
    }

    /// Distinguished factor W of F_a(r + Y)/p^shift, with W = Y^e mod p.
    pub fn weierstrass_factor(&self, a: u128, r: u128, shift: u32) -> Result<WeierstrassFactor, BranchError> {
        let k0 = self.k0();
        if k0 <= shift {
            return Err(BranchError::Precision { need: shift + 1, have: k0 });
        }
        let p = self.p();
        let n = k0 - shift;
        let mdn = Modulus::any_prime(p, n)?;
        let f = Modulus::any_prime(p, 1)?;
        let h = self.taylor_coefficients(a, r)?;
        let len = (n + shift) as usize;
        let ps = pw(p, shift);
        let mut big_h = vec![0u128; len];
        for (i, slot) in big_h.iter_mut().enumerate() {
            let hi = h.get(i).copied().unwrap_or(0);
            if hi % ps != 0 {
                return Err(BranchError::Hypothesis(format!("Taylor coefficient {i} not divisible by p^{shift}")));
            }
            *slot = mdn.reduce(hi / ps);
        }
        let hbar: Vec<u128> = big_h.iter().map(|x| x % p as u128).collect();
        let e = hbar.iter().position(|&x| x != 0).ok_or(BranchError::Indeterminate { precision: k0 })?;
        let v0: Vec<u128> = hbar[e..].to_vec();
        // inverse of V0 as a power series mod Y^e over F_p
        let mut v0inv = vec![0u128; e];
        if e > 0 {
            let c0 = f.inv(v0[0]).expect("nonzero");
            v0inv[0] = c0;
            for i in 1..e {
                let mut s = 0;
                for j in 1..=i.min(v0.len() - 1) {
                    s = f.add(s, f.mul(v0[j], v0inv[i - j]));
                }
                v0inv[i] = f.neg(f.mul(c0, s));
            }
        }
        let mut w = vec![0u128; e + 1];
        w[e] = 1;
        let mut v = v0.clone();
        for j in 1..n {
            let prod = poly_mul(&mdn, &w, &v, len);
            let pj = pw(p, j);
            let mut err = vec![0u128; len];
            for i in 0..len {
                let d = mdn.sub(big_h[i], prod[i]);
                if d % pj != 0 {
                    return Err(BranchError::Hypothesis("factor lifting lost divisibility".into()));
                }
                err[i] = (d / pj) % p as u128;
            }
            let dw: Vec<u128> = (0..e)
                .map(|i| (0..=i).fold(0, |acc, l| f.add(acc, f.mul(err[l], v0inv[i - l]))))
                .collect();
            let v0dw = poly_mul(&f, &v0, &dw, len);
            let rest: Vec<u128> = (0..len).map(|i| f.sub(err[i], v0dw[i])).collect();
            if rest[..e].iter().any(|&x| x != 0) {
                return Err(BranchError::Hypothesis("factor lifting failed".into()));
            }
            for (i, dwi) in dw.iter().enumerate() {
                w[i] = mdn.add(w[i], mdn.mul(pj, *dwi));
            }
            for (i, vi) in v.iter_mut().enumerate() {
                if i + e < len {
                    *vi = mdn.add(*vi, mdn.mul(pj, rest[i + e]));
                }
            }
        }
        Ok(WeierstrassFactor { shift, coeffs: w, precision: n })
    }

    /// R_a(level) = {t mod p^(level-1) : F_a(t) = 0 mod p^level}.
    pub fn digit_recursion(&self, a: u128, level: u32) -> Vec<u128> {
        let level = level.min(self.k0());
        let p = self.p();
        digit_recursion(p, level, |t, j| self.class_value(a, t) % pw(p, j) == 0)
    }

    pub fn intersection_multiplicity(&self, a: u128) -> Result<Multiplicity, BranchError> {
        let h = self.taylor_coefficients(a, 0)?;
        let md = self.md();
        let s = h.iter().map(|&x| md.val(x)).min().unwrap_or(self.k0());
        if s >= self.k0() {
            return Ok(Multiplicity::Indeterminate { precision: self.k0() });
        }
        let degree = h.iter().rposition(|&x| md.val(x) == s).expect("attained") as u32;
        Ok(Multiplicity::Certified { shift: s, degree })
    }

    /// Sum_m binom(X, m) p^m C_m minus c, truncated at M(N).
    pub fn branch_series(&self, a: u128, n: u32) -> Result<TruncatedBranchSeries, BranchError> {
        if n > self.k0() {
            return Err(BranchError::Precision { need: n, have: self.k0() });
        }
        let p = self.p();
        let mdn = Modulus::any_prime(p, n)?;
        let bound = term_bound(p, n);
        let mut coeffs = vec![mdn.reduce(self.value(a))];
        for m in 1..bound.max(1) {
            if m >= n as u64 {
                coeffs.push(0);
                continue;
            }
            let cm = self.c_m(a, m as u32)?;
            coeffs.push(mdn.mul(pw(p, m as u32), mdn.reduce(cm)));
        }
        Ok(TruncatedBranchSeries { p, precision: n, bound, coeffs })
    }

    /// With eta^P = 1 + p^r U_r, F_a(0) in p^r and Tr(x_a omega_r) != 0, the
    /// unique zero tau mod p^(k0-r).
    pub fn higher_order_transverse(&self, a: u128, r: u32) -> Result<HigherTransverse, BranchError> {
        let p = self.p();
        if self.k0() <= r {
            return Err(BranchError::Precision { need: r + 1, have: self.k0() });
        }
        let lt = self.alg.log_tangent_at(&self.eta, self.period, r)?;
        let d = self.red.trace(&self.red.mul(&self.x_a(a), &lt.omega)) as u64;
        if d == 0 {
            return Err(BranchError::Hypothesis("higher tangent is orthogonal to x_a".into()));
        }
        if self.value(a) % pw(p, r) != 0 {
            return Err(BranchError::Hypothesis(format!("F_a(0) not in p^{r}")));
        }
        let tau = self.hensel(a, 0, 0, r, d)?;
        Ok(HigherTransverse { r, d, tau, precision: self.k0() - r })
    }

    pub fn describe(&self, a: u128) -> Result<BranchDescriptor, BranchError> {
        let info = self.classify(a);
        let k0 = self.k0();
        Ok(match info.kind {
            ClassKind::Dead => BranchDescriptor::DeadModP { a },
            ClassKind::Retained => BranchDescriptor::RetainedModP { a },
            ClassKind::Transverse => {
                let d = info.d.expect("set");
                BranchDescriptor::TransverseSimple { a, d, tau: self.hensel(a, 0, 0, 1, d)?, precision: k0 - 1 }
            }
            ClassKind::SingularObstructed => {
                BranchDescriptor::SingularObstructed { a, obstruction: info.obstruction.expect("set") }
            }
            _ if k0 == 2 => BranchDescriptor::SingularAllModP2 { a },
            ClassKind::Singular => {
                let q = self.quadratic_singular(a)?;
                let jet = [q.a_coef, q.b_coef, q.delta];
                let roots: Vec<u64> = match q.alternative {
                    QuadraticAlternative::NoRoot => return Ok(BranchDescriptor::SingularNoRoot { a, jet }),
                    QuadraticAlternative::TwoSimple(r1, r2) => vec![r1, r2],
                    QuadraticAlternative::DoubleRoot(r) => vec![r],
                };
                let branches = self.root_branches(a, &jet, &roots, 2)?;
                BranchDescriptor::SingularSurviving { a, jet, branches }
            }
            ClassKind::Degenerate => match self.cubic_degenerate(a) {
                Ok(model) => {
                    let roots: Vec<u64> = model.roots.iter().map(|r| r.0).collect();
                    if roots.is_empty() {
                        BranchDescriptor::CubicNoRoot { a, jet: model.jet }
                    } else {
                        let branches = self.root_branches(a, &model.jet, &roots, 3)?;
                        BranchDescriptor::CubicSurviving { a, jet: model.jet, branches }
                    }
                }
                Err(e) => BranchDescriptor::Recursion {
                    a,
                    reason: e.to_string(),
                    residues: self.digit_recursion(a, k0),
                },
            },
        })
    }

    fn root_branches(&self, a: u128, jet: &[u64], roots: &[u64], shift: u32) -> Result<Vec<Branch>, BranchError> {
        let p = self.p();
        roots
            .iter()
            .map(|&r| {
                let phi = deriv_binomial_jet(p, jet, r);
                if phi != 0 {
                    let tau = self.hensel(a, r as u128, 1, shift, phi)?;
                    Ok(Branch::SimpleRoot { r, tau, precision: self.k0() - shift })
                } else {
                    Ok(Branch::WeierstrassDisk { r, factor: self.weierstrass_factor(a, r as u128, shift)? })
                }
            })
            .collect()
    }

    /// Residues t mod p^(k0-1) represented by a class descriptor.
    pub fn expand(&self, d: &BranchDescriptor) -> Vec<u128> {
        let p = self.p();
        let k0 = self.k0();
        let full = pw(p, k0 - 1);
        match d {
            BranchDescriptor::RetainedModP { .. } => vec![0],
            BranchDescriptor::TransverseSimple { tau, .. } => vec![*tau],
            BranchDescriptor::SingularAllModP2 { .. } => (0..p as u128).collect(),
            BranchDescriptor::SingularSurviving { branches, .. } | BranchDescriptor::CubicSurviving { branches, .. } => {
                let mut out = BTreeSet::new();
                for b in branches {
                    match b {
                        Branch::SimpleRoot { tau, precision, .. } => {
                            let step = pw(p, *precision);
                            for j in 0..full / step {
                                out.insert(tau + step * j);
                            }
                        }
                        Branch::WeierstrassDisk { r, factor } => {
                            let modn = pw(p, factor.precision);
                            for z in 0..full / p as u128 {
                                let y = p as u128 * z;
                                if factor.eval(p, y) % modn == 0 {
                                    out.insert(*r as u128 + y);
                                }
                            }
                        }
                    }
                }
                out.into_iter().collect()
            }
            BranchDescriptor::Recursion { residues, .. } => residues.clone(),
            BranchDescriptor::InflationWrapper { inner, .. } => self.expand(inner),
            _ => Vec::new(),
        }
    }
}

fn md_scale_elem(alg: &CubicAlgebra, a: &Elem, b: &Elem) -> Elem {
    alg.mul(a, b)
}

fn poly_mul(md: &Modulus, a: &[u128], b: &[u128], len: usize) -> Vec<u128> {
    let mut out = vec![0u128; len];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if i + j < len {
                out[i + j] = md.add(out[i + j], md.mul(x, y));
            }
        }
    }
    out
}

/// R(1) = {0}; R(j+1) keeps r + p^(j-1) d when `holds(r + p^(j-1) d, j+1)`.
/// The predicate must depend only on t mod p^(j) at level j+1.
pub fn digit_recursion(p: u64, level: u32, mut holds: impl FnMut(u128, u32) -> bool) -> Vec<u128> {
    if level == 0 {
        return vec![0];
    }
    let mut set: Vec<u128> = if holds(0, 1) { vec![0] } else { Vec::new() };
    for j in 1..level {
        let step = pw(p, j - 1);
        set = set
            .iter()
            .flat_map(|&r| (0..p as u128).map(move |d| r + step * d))
            .filter(|&t| holds(t, j + 1))
            .collect();
    }
    set.sort_unstable();
    set
}

/// Result of clearing p-power denominators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Clearing {
    pub gamma: [i128; 3],
    pub c: i128,
    pub e: u32,
    pub e_aff: u32,
}

fn vp_i(x: i128, p: u64) -> Option<u32> {
    (x != 0).then(|| vp(x.unsigned_abs(), p))
}

/// gamma = gamma_num / p^e_gamma, c = c_num / p^e_c; returns
/// (p^e_aff gamma, p^e_aff c) with e_aff = max(e, -v_p(c)).
pub fn denominator_clear(p: u64, gamma_num: [i128; 3], e_gamma: u32, c_num: i128, e_c: u32) -> Clearing {
    let vg = gamma_num.iter().filter_map(|&x| vp_i(x, p)).min();
    let e = vg.map_or(0, |v| e_gamma.saturating_sub(v));
    let neg_vc = vp_i(c_num, p).map_or(0, |v| e_c.saturating_sub(v));
    let e_aff = e.max(neg_vc);
    let scale = |x: i128, den: u32| -> i128 {
        if x == 0 {
            return 0;
        }
        if e_aff >= den {
            x * pw(p, e_aff - den) as i128
        } else {
            x / pw(p, den - e_aff) as i128
        }
    };
    Clearing { gamma: gamma_num.map(|x| scale(x, e_gamma)), c: scale(c_num, e_c), e, e_aff }
}

/// A problem with rational gamma and c: Tr(gamma eta^n) - c in p^k Z_p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RationalProblem {
    pub p: u64,
    pub f: [i128; 3],
    pub eta: [i128; 3],
    pub gamma_num: [i128; 3],
    pub e_gamma: u32,
    pub c_num: i128,
    pub e_c: u32,
    pub k: u32,
}

impl RationalProblem {
    pub fn clearing(&self) -> Clearing {
        denominator_clear(self.p, self.gamma_num, self.e_gamma, self.c_num, self.e_c)
    }

    /// Cleared integral context at precision k + e_aff.
    pub fn cleared_context(&self) -> Result<BranchContext, BranchError> {
        let cl = self.clearing();
        let alg = CubicAlgebra::new(self.p, self.k + cl.e_aff, self.f)?;
        let c = alg.modulus().from_i128(cl.c);
        BranchContext::new(alg.clone(), alg.elem(self.eta), alg.elem(cl.gamma), c)
    }

    pub fn certified(&self) -> Result<CertifiedZeroSet, BranchError> {
        self.cleared_context()?.certified_zero_set()
    }

    /// Independent oracle: scale by the full common denominator p^E.
    pub fn oracle(&self, cap: u128) -> Result<ZeroSet, BranchError> {
        let e = self.e_gamma.max(self.e_c);
        let alg = CubicAlgebra::new(self.p, self.k + e, self.f)?;
        let gamma = alg.elem(self.gamma_num.map(|x| x * pw(self.p, e - self.e_gamma) as i128));
        let c = alg.modulus().from_i128(self.c_num * pw(self.p, e - self.e_c) as i128);
        BranchContext::new(alg.clone(), alg.elem(self.eta), gamma, c)?.oracle(cap)
    }
}

/// Worked example: p = 5, split roots (0,1,2), eta = (1,6,11),
/// gamma = (1,-2,1) in split coordinates, homogeneous target.
pub fn singular_splits_example(k: u32) -> Result<BranchContext, BranchError> {
    let alg = CubicAlgebra::from_split_roots(5, k, [0, 1, 2])?;
    let eta = alg.from_split_coords_i([1, 6, 11])?;
    let gamma = alg.from_split_coords_i([1, -2, 1])?;
    BranchContext::new(alg, eta, gamma, 0)
}

/// Context with Q_0(X) = a0 + b0 X + c0 binom(X, 2): split algebra with
/// roots (0,1,2), eta = 1 + p(0,1,2) and
/// gamma = (c0/2)(1,-2,1) + p(-b0,b0,0) + p^2(a0,0,0).
pub fn versal_quadratic(p: u64, k: u32, a0: i128, b0: i128, c0: i128) -> Result<BranchContext, BranchError> {
    let alg = CubicAlgebra::from_split_roots(p, k, [0, 1, 2])?;
    let md = *alg.modulus();
    let pi = p as i128;
    let eta = alg.from_split_coords_i([1, 1 + pi, 1 + 2 * pi])?;
    let half = md.mul(md.from_i128(c0), md.inv(2).expect("odd"));
    let h = md.centered(half);
    let gamma = alg.from_split_coords_i([h + pi * pi * a0 - pi * b0, -2 * h + pi * b0, h])?;
    BranchContext::new(alg, eta, gamma, 0)
}

/// Degenerate codifferent instance: omega = T in (Z/p^k)[T]/(F), eta = 1 + pT,
/// gamma = (s + p^3 a1) z0 + p^2 b1 z1 + p c1 z2, target s.  Its cubic model is
/// a1 + b1 X + c1 binom(X,2) + s Norm(T) binom(X,3).
pub fn cubic_degenerate_instance(p: u64, k: u32, f: [i128; 3], s: i128, a1: i128, b1: i128, c1: i128) -> Result<BranchContext, BranchError> {
    let alg = CubicAlgebra::new(p, k, f)?;
    let md = *alg.modulus();
    let t = alg.t();
    let eta = alg.add(&alg.one(), &alg.scale(p as u128, &t));
    let z = alg.trace_dual_basis(&t)?;
    let pi = p as i128;
    let coef = |x: i128| md.from_i128(x);
    let gamma = alg.add(
        &alg.add(&alg.scale(coef(s + pi.pow(3) * a1), &z[0]), &alg.scale(coef(pi * pi * b1), &z[1])),
        &alg.scale(coef(pi * c1), &z[2]),
    );
    BranchContext::new(alg, eta, gamma, coef(s))
}

/// Shape of a randomly generated branch problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProblemShape {
    Primitive,
    Nonprimitive,
    /// target forced onto an existing class with extra p-adic agreement
    Affine,
    /// class 0 made singular (and sometimes degenerate) by choice of gamma
    Singular,
    Rational,
}

impl ProblemShape {
    pub const ALL: [ProblemShape; 5] = [
        ProblemShape::Primitive,
        ProblemShape::Nonprimitive,
        ProblemShape::Affine,
        ProblemShape::Singular,
        ProblemShape::Rational,
    ];
}

fn random_elem<R: Rng>(rng: &mut R, m: u128) -> [i128; 3] {
    [0; 3].map(|_| rng.gen_range(0..m) as i128)
}

/// A random problem over a lift of the standard algebra of `kind`.  The
/// precision is the largest k <= max_k keeping every class count (certified
/// and oracle side) at or below `class_cap`.
pub fn random_problem<R: Rng>(
    rng: &mut R,
    kind: SplittingType,
    p: u64,
    max_k: u32,
    shape: ProblemShape,
    class_cap: u128,
) -> Result<RationalProblem, BranchError> {
    let base = CubicAlgebra::standard(p, kind)?;
    let pi = p as i128;
    let f = base.f().map(|c| c as i128 + pi * rng.gen_range(0..pi));
    let red = base.reduced();
    let units: u128 = kind.unit_order(p);
    // eta: a random unit, sometimes raised to a power to shorten its period
    let eta = loop {
        let x = random_elem(rng, pw(p, max_k.max(1)));
        let xr = red.elem(x);
        if !red.is_unit(&xr) {
            continue;
        }
        if rng.gen_bool(0.5) {
            let e = crate::arith::factorize(units)
                .into_iter()
                .filter(|_| rng.gen_bool(0.5))
                .fold(1u128, |acc, (q, _)| acc * q);
            let alg = CubicAlgebra::new(p, max_k.max(1), f)?;
            let y = alg.pow(&alg.elem(x), e);
            if red.lift_or_reduce(&y) == red.one() && rng.gen_bool(0.5) {
                continue;
            }
            break y.0.map(|c| c as i128);
        }
        break x;
    };
    let period = red.period(&red.elem(eta))?;
    let (e_gamma, e_c) = if shape == ProblemShape::Rational {
        (rng.gen_range(0..=2), rng.gen_range(0..=2))
    } else {
        (0, 0)
    };
    let extra = e_gamma.max(e_c);
    let mut k = max_k.max(1);
    while k > 1 && period * pw(p, k - 1 + extra) > class_cap {
        k -= 1;
    }
    let work = k + extra;
    let alg = CubicAlgebra::new(p, work, f)?;
    let md = *alg.modulus();
    let m = md.m();
    let eta_e = alg.elem(eta);
    let trace_at = |g: &[i128; 3], a: u128| -> i128 {
        md.centered(alg.trace(&alg.mul(&alg.elem(*g), &alg.pow(&eta_e, a))))
    };
    let nonzero_mod_p = |rng: &mut R| loop {
        let g = random_elem(rng, m);
        if g.iter().any(|&x| x % pi != 0) {
            break g;
        }
    };
    let (gamma_num, c_num) = match shape {
        ProblemShape::Primitive => {
            let g = nonzero_mod_p(rng);
            let c = match rng.gen_range(0..3) {
                0 => 0,
                1 => rng.gen_range(0..m) as i128,
                _ => trace_at(&g, rng.gen_range(0..period)) + pi * rng.gen_range(0..m) as i128,
            };
            (g, c)
        }
        ProblemShape::Nonprimitive => {
            let s = rng.gen_range(1..=k);
            let g = nonzero_mod_p(rng).map(|x| x * pw(p, s) as i128);
            let c = match rng.gen_range(0..3) {
                0 => 0,
                1 => rng.gen_range(0..m) as i128,
                _ => trace_at(&g, rng.gen_range(0..period)) + pw(p, s + rng.gen_range(0..=1)) as i128 * rng.gen_range(0..pi),
            };
            (g, c)
        }
        ProblemShape::Affine => {
            let g = nonzero_mod_p(rng);
            let j = rng.gen_range(1..=k);
            let c = trace_at(&g, rng.gen_range(0..period)) + pw(p, j) as i128 * rng.gen_range(0..m) as i128;
            (g, c)
        }
        ProblemShape::Singular => {
            let degenerate = rng.gen_bool(0.3);
            let g = if k >= 2 { singular_gamma(rng, &alg, &eta_e, period, degenerate)? } else { nonzero_mod_p(rng) };
            let c = trace_at(&g, 0) + pw(p, rng.gen_range(1..=3)) as i128 * rng.gen_range(0..pi);
            (g, c)
        }
        ProblemShape::Rational => {
            let g = random_elem(rng, m);
            let c = if rng.gen_bool(0.5) {
                trace_at(&g, rng.gen_range(0..period)) + pi * rng.gen_range(0..pi)
            } else {
                rng.gen_range(0..m) as i128
            };
            (g, c)
        }
    };
    let fm = |x: i128| md.centered(md.from_i128(x));
    Ok(RationalProblem {
        p,
        f,
        eta,
        gamma_num: gamma_num.map(fm),
        e_gamma,
        c_num: fm(c_num),
        e_c,
        k,
    })
}

/// gamma with Tr(gamma-bar omega) = 0 (and Tr(gamma-bar omega^2) = 0 when
/// `degenerate`), lifted by random p-multiples.
fn singular_gamma<R: Rng>(rng: &mut R, alg: &CubicAlgebra, eta: &Elem, period: u128, degenerate: bool) -> Result<[i128; 3], BranchError> {
    let red = alg.reduced();
    let f = *red.modulus();
    let lt = alg.log_tangent(eta, period)?;
    let w = lt.omega;
    let w2 = red.mul(&w, &w);
    let basis = [red.one(), red.t(), red.mul(&red.t(), &red.t())];
    let l1: Vec<u128> = basis.iter().map(|b| red.trace(&red.mul(b, &w))).collect();
    let l2: Vec<u128> = basis.iter().map(|b| red.trace(&red.mul(b, &w2))).collect();
    let p = red.p() as u128;
    let m = alg.modulus().m();
    for _ in 0..200 {
        let x = [rng.gen_range(0..p), rng.gen_range(0..p), rng.gen_range(0..p)];
        if x == [0, 0, 0] {
            continue;
        }
        let dot = |l: &[u128]| (0..3).fold(0, |acc, i| f.add(acc, f.mul(l[i], x[i])));
        if dot(&l1) == 0 && (!degenerate || dot(&l2) == 0) {
            return Ok([0, 1, 2].map(|i| (x[i] + p * rng.gen_range(0..m / p)) as i128));
        }
    }
    // fall back to a primitive element when the constraint set is tiny
    Ok([1, 0, 0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_bound_values() {
        assert_eq!(term_bound(5, 1), 1);
        for p in [5u64, 7, 11] {
            for n in 1..6 {
                let m0 = term_bound(p, n);
                for m in m0..m0 + 40 {
                    assert!(m - vp_factorial(m, p) as u64 >= n as u64);
                }
            }
        }
    }

    #[test]
    fn singular_splits() {
        let ctx = singular_splits_example(3).unwrap();
        assert_eq!(ctx.period(), 1);
        let Reduction::Reduced(rc) = ctx.reduce().unwrap() else { panic!() };
        assert_eq!(rc.mod_p_classes(), vec![0]);
        let q = rc.quadratic_singular(0).unwrap();
        assert_eq!((q.a_coef, q.b_coef, q.delta), (0, 0, 2));
        assert_eq!(q.alternative, QuadraticAlternative::TwoSimple(0, 1));
        let digits: BTreeSet<u128> = rc.digit_recursion(0, 3).iter().map(|t| t % 5).collect();
        assert_eq!(digits, BTreeSet::from([0, 1]));
        let cz = ctx.certified_zero_set().unwrap();
        assert_eq!(cz.descriptors.len(), 1);
        assert!(matches!(&cz.descriptors[0], BranchDescriptor::SingularSurviving { branches, .. } if branches.len() == 2));
        assert_eq!(cz.zeros, ctx.oracle(DEFAULT_ORACLE_CAP).unwrap());
    }

    #[test]
    fn versal_alternatives() {
        let no_root = versal_quadratic(5, 4, 2, 1, 2).unwrap();
        let Reduction::Reduced(rc) = no_root.reduce().unwrap() else { panic!() };
        assert_eq!(rc.quadratic_singular(0).unwrap().alternative, QuadraticAlternative::NoRoot);
        let double = versal_quadratic(5, 5, 0, 1, 2).unwrap();
        let Reduction::Reduced(rc) = double.reduce().unwrap() else { panic!() };
        assert_eq!(rc.quadratic_singular(0).unwrap().alternative, QuadraticAlternative::DoubleRoot(0));
        let w = rc.weierstrass_factor(0, 0, 2).unwrap();
        assert_eq!(w.degree(), 2);
        assert!(w.coeffs[..2].iter().all(|c| c % 5 == 0));
        for ctx in [no_root, double] {
            assert_eq!(ctx.certified_zero_set().unwrap().zeros, ctx.oracle(DEFAULT_ORACLE_CAP).unwrap());
        }
    }

    #[test]
    fn primitive_reduction_cases() {
        let alg = CubicAlgebra::from_split_roots(5, 2, [0, 1, 2]).unwrap();
        let eta = alg.from_split_coords_i([2, 3, 4]).unwrap();
        let g0 = alg.from_split_coords_i([1, 2, 3]).unwrap();
        let zero = BranchContext::new(alg.clone(), eta, alg.zero(), 0).unwrap();
        assert!(matches!(zero.reduce().unwrap(), Reduction::AllClasses));
        let pg = alg.scale(5, &g0);
        let none = BranchContext::new(alg.clone(), eta, pg, 1).unwrap();
        assert!(matches!(none.reduce().unwrap(), Reduction::NoClasses));
        let alg3 = alg.with_precision(3).unwrap();
        let ctx = BranchContext::new(alg3.clone(), eta, alg3.scale(5, &g0), 5).unwrap();
        let Reduction::Reduced(rc) = ctx.reduce().unwrap() else { panic!() };
        assert_eq!((rc.target(), rc.k0(), rc.s_div()), (1, 2, 1));
    }

    #[test]
    fn clearing_rules() {
        let c = denominator_clear(5, [1, 2, 3], 0, 4, 0);
        assert_eq!((c.e, c.e_aff, c.c), (0, 0, 4));
        let c = denominator_clear(5, [1, 2, 3], 1, 1, 0);
        assert_eq!((c.e_aff, c.c, c.gamma), (1, 5, [1, 2, 3]));
        let c = denominator_clear(5, [1, 2, 3], 0, 1, 2);
        assert_eq!((c.e_aff, c.c, c.gamma), (2, 1, [25, 50, 75]));
        let c = denominator_clear(5, [5, 10, 0], 1, 0, 0);
        assert_eq!((c.e, c.gamma), (0, [1, 2, 0]));
    }

    #[test]
    fn cubic_instance_model() {
        let ctx = cubic_degenerate_instance(5, 5, [1, -1, 0], 1, 0, 0, 0).unwrap();
        let Reduction::Reduced(rc) = ctx.reduce().unwrap() else { panic!() };
        let m = rc.cubic_degenerate(0).unwrap();
        assert_eq!(m.trace_identities[..2], [0, 0]);
        assert_eq!(m.trace_identities[2], m.expected_leading);
        assert_eq!(m.jet[3], m.expected_leading);
        assert_eq!(rc.intersection_multiplicity(0).unwrap(), Multiplicity::Certified { shift: 3, degree: 3 });
        assert_eq!(ctx.certified_zero_set().unwrap().zeros, ctx.oracle(DEFAULT_ORACLE_CAP).unwrap());
    }
}
