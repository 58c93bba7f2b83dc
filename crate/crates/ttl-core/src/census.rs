//! Singular classes on the codifferent line and exact censuses over full
//! norm-fiber orbits.

use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraError, CubicAlgebra, Elem, SplittingType};
use crate::arith::{order_by_descent, Modulus};
use crate::branch::{BranchContext, BranchError, ClassKind, Reduction};
use crate::counts::{formula_count, CountError, Method};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CensusError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error("omega = {0} does not generate the algebra")]
    NotGenerator(Elem),
    #[error("gamma = {0} is not a unit")]
    NotUnit(Elem),
    #[error("norm set must be a nonempty set of nonzero residues")]
    BadFibers,
    #[error("context is not primitive at precision >= 2")]
    NotPrimitive,
    #[error("no suitable orbit generator found")]
    NoOrbit,
}

/// Coordinates of x = s z0 + t z1 + u z2 in the basis dual to 1, omega, omega^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinePoint {
    pub u: u64,
    pub t: u64,
}

/// Some((u, 0)) when Tr(x) = s and Tr(omega x) = 0, so x = s z0 + u z2.
pub fn singular_line_membership(b: &CubicAlgebra, omega: &Elem, s: u64, x: &Elem) -> Result<Option<LinePoint>, CensusError> {
    let b = b.reduced();
    if !b.is_generator(omega) {
        return Err(CensusError::NotGenerator(*omega));
    }
    let x = b.lift_or_reduce(x);
    let p = b.p() as u128;
    if b.trace(&x) != s as u128 % p || b.trace(&b.mul(omega, &x)) != 0 {
        return Ok(None);
    }
    let z = b.trace_dual_basis(omega)?;
    let u = b.trace(&b.mul(&x, &b.mul(omega, omega)));
    debug_assert_eq!(x, b.add(&b.scale(s as u128, &z[0]), &b.scale(u, &z[2])));
    Ok(Some(LinePoint { u: u as u64, t: 0 }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusQuery {
    pub algebra: String,
    #[serde(skip)]
    pub b: CubicAlgebra,
    pub gamma: Elem,
    pub omega: Elem,
    pub s: u64,
    pub fibers: Vec<u64>,
}

impl CensusQuery {
    pub fn new(b: &CubicAlgebra, gamma: Elem, omega: Elem, s: u64, fibers: Vec<u64>) -> Result<Self, CensusError> {
        let b = b.reduced();
        let p = b.p();
        let gamma = b.lift_or_reduce(&gamma);
        let omega = b.lift_or_reduce(&omega);
        if !b.is_unit(&gamma) {
            return Err(CensusError::NotUnit(gamma));
        }
        if !b.is_generator(&omega) {
            return Err(CensusError::NotGenerator(omega));
        }
        let fibers: BTreeSet<u64> = fibers.into_iter().map(|d| d % p).collect();
        if fibers.is_empty() || fibers.contains(&0) {
            return Err(CensusError::BadFibers);
        }
        Ok(CensusQuery { algebra: b.spec_string(), b, gamma, omega, s: s % p, fibers: fibers.into_iter().collect() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberCensus {
    pub delta: u64,
    /// N_delta = Norm(gamma) delta
    pub norm: u64,
    pub total: u64,
    pub total_method: Method,
    pub singular: u64,
    /// u = 0 lies on this fiber: one degenerate singular class
    pub degenerate: bool,
    /// #{u != 0 : u^3 = -Norm(gamma) delta disc(f_omega)} when s = 0
    pub cube_equation: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusReport {
    pub total: u64,
    pub singular: u64,
    pub transverse: u64,
    pub degenerate: bool,
    pub fibers: Vec<FiberCensus>,
}

/// Closed-form census: M = sum N_B(s, N_delta), S = sum #{u : Norm(s z0 + u z2) = N_delta}.
pub fn singular_census(q: &CensusQuery) -> Result<CensusReport, CensusError> {
    let b = &q.b;
    let f = *b.modulus();
    let p = b.p();
    let z = b.trace_dual_basis(&q.omega)?;
    let ng = b.norm(&q.gamma);
    let disc = b.disc_of(&q.omega);
    let mut fibers = Vec::new();
    for &delta in &q.fibers {
        let n = f.mul(ng, delta as u128) as u64;
        let rep = formula_count(b.kind(), p, q.s, n)?;
        let on_line = |u: u128| b.norm(&b.add(&b.scale(q.s as u128, &z[0]), &b.scale(u, &z[2])));
        let singular = (0..p as u128).filter(|&u| on_line(u) == n as u128).count() as u64;
        let cube_equation = (q.s == 0).then(|| {
            let rhs = f.neg(f.mul(n as u128, disc));
            (1..p as u128).filter(|&u| f.pow(u, 3) == rhs).count() as u64
        });
        fibers.push(FiberCensus {
            delta,
            norm: n,
            total: rep.value,
            total_method: rep.method,
            singular,
            degenerate: on_line(0) == n as u128,
            cube_equation,
        });
    }
    let total: u64 = fibers.iter().map(|x| x.total).sum();
    let singular: u64 = fibers.iter().map(|x| x.singular).sum();
    Ok(CensusReport { total, singular, transverse: total - singular, degenerate: fibers.iter().any(|x| x.degenerate), fibers })
}

/// (#X, #X^sing) by scanning every unit h with Norm(h) in C.
pub fn brute_force_census(q: &CensusQuery) -> (u64, u64) {
    let b = &q.b;
    let s = q.s as u128;
    let fibers: BTreeSet<u128> = q.fibers.iter().map(|&d| d as u128).collect();
    let (mut m, mut sing) = (0, 0);
    for h in b.elements() {
        if !fibers.contains(&b.norm(&h)) {
            continue;
        }
        let x = b.mul(&q.gamma, &h);
        if b.trace(&x) == s {
            m += 1;
            if b.trace(&b.mul(&q.omega, &x)) == 0 {
                sing += 1;
            }
        }
    }
    (m, sing)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitCensus {
    pub period: u128,
    pub fibers: Vec<u64>,
    pub full_fiber: bool,
    pub census: Option<CensusReport>,
    pub classes: u64,
    pub singular: u64,
    pub transverse: u64,
    pub degenerate: u64,
    /// Delta_a equals the line coordinate u for every singular class
    pub delta_matches_u: bool,
    /// census M, S agree with the branch tallies (only asserted on full fibers)
    pub reconciled: bool,
}

/// Norms occurring in the orbit of eta-bar, and whether the orbit is the full
/// union of those norm fibers (checked by enumeration).
pub fn orbit_fibers(b: &CubicAlgebra, eta: &Elem) -> (BTreeSet<Elem>, Vec<u64>, bool) {
    let b = b.reduced();
    let eta = b.lift_or_reduce(eta);
    let mut orbit = BTreeSet::new();
    let mut x = b.one();
    loop {
        orbit.insert(x);
        x = b.mul(&x, &eta);
        if x == b.one() {
            break;
        }
    }
    let norms: BTreeSet<u128> = orbit.iter().map(|h| b.norm(h)).collect();
    let full = b.elements().iter().filter(|h| norms.contains(&b.norm(h))).all(|h| orbit.contains(h));
    (orbit, norms.into_iter().map(|n| n as u64).collect(), full)
}

/// Reconcile the census formulas with the class-by-class branch
/// classification over one period of a primitive context.
pub fn full_orbit_branch_census(ctx: &BranchContext) -> Result<OrbitCensus, CensusError> {
    let Reduction::Reduced(rc) = ctx.reduce()? else {
        return Err(CensusError::NotPrimitive);
    };
    if rc.s_div() != 0 || rc.k0() < 2 {
        return Err(CensusError::NotPrimitive);
    }
    let b = rc.algebra().reduced();
    let omega = rc.omega().expect("k0 >= 2");
    let gamma = b.lift_or_reduce(&rc.gamma());
    if !b.is_unit(&gamma) {
        return Err(CensusError::NotUnit(gamma));
    }
    if !b.is_generator(&omega) {
        return Err(CensusError::NotGenerator(omega));
    }
    let s = (rc.target() % b.p() as u128) as u64;
    let (_, fibers, full_fiber) = orbit_fibers(&b, &ctx.eta());
    let (mut classes, mut singular, mut transverse, mut degenerate) = (0, 0, 0, 0);
    let mut delta_matches_u = true;
    for a in 0..rc.period() {
        let info = rc.classify(a);
        match info.kind {
            ClassKind::Dead => continue,
            ClassKind::Transverse => transverse += 1,
            ClassKind::Retained => unreachable!("k0 >= 2"),
            _ => {
                singular += 1;
                let pt = singular_line_membership(&b, &omega, s, &info.x_a)?.expect("singular class lies on the line");
                if info.delta != Some(pt.u) {
                    delta_matches_u = false;
                }
                if pt.u == 0 {
                    degenerate += 1;
                }
            }
        }
        classes += 1;
    }
    let census = if full_fiber {
        // census counts h with Norm(h) in C; the query is phrased through delta
        let q = CensusQuery::new(&b, gamma, omega, s, fibers.clone())?;
        Some(singular_census(&q)?)
    } else {
        None
    };
    let reconciled = census
        .as_ref()
        .map_or(true, |c| c.total == classes && c.singular == singular && c.transverse == transverse);
    Ok(OrbitCensus {
        period: rc.period(),
        fibers,
        full_fiber,
        census,
        classes,
        singular,
        transverse,
        degenerate,
        delta_matches_u,
        reconciled,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PreimageCount {
    pub preimage_count: u64,
    pub image_count: u64,
}

/// #{h in <eta> : Tr(gamma h) = c} and #(gamma <eta> intersect {Tr = c}).
pub fn orbit_preimage_count(b: &CubicAlgebra, eta: &Elem, gamma: &Elem, c: u64) -> PreimageCount {
    let b = b.reduced();
    let gamma = b.lift_or_reduce(gamma);
    let (orbit, _, _) = orbit_fibers(&b, eta);
    let c = c as u128 % b.p() as u128;
    let pre: Vec<Elem> = orbit.iter().map(|h| b.mul(&gamma, h)).filter(|x| b.trace(x) == c).collect();
    let image: BTreeSet<Elem> = pre.iter().copied().collect();
    PreimageCount { preimage_count: pre.len() as u64, image_count: image.len() as u64 }
}

/// Which norm fibers a constructed orbit should fill.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrbitShape {
    /// the norm-one torus (cyclic for mixed and inert algebras)
    NormOne,
    /// all units (cyclic only for inert algebras)
    AllUnits,
}

/// A lift eta in `alg` (precision >= 2) whose reduction generates the orbit of
/// the requested shape and whose logarithmic tangent generates A/pA.
pub fn full_orbit_eta<R: Rng>(alg: &CubicAlgebra, shape: OrbitShape, rng: &mut R) -> Result<Elem, CensusError> {
    let b = alg.reduced();
    let p = b.p();
    let target = match shape {
        OrbitShape::NormOne => b.kind().torus_order(p),
        OrbitShape::AllUnits => b.kind().unit_order(p),
    };
    if shape == OrbitShape::NormOne && b.kind() == SplittingType::Split
        || shape == OrbitShape::AllUnits && b.kind() != SplittingType::Inert
    {
        return Err(CensusError::NoOrbit);
    }
    let units = b.kind().unit_order(p);
    let one = b.one();
    let base = b
        .elements()
        .into_iter()
        .filter(|x| b.is_unit(x))
        .filter(|x| shape == OrbitShape::AllUnits || b.norm(x) == 1)
        .find(|x| order_by_descent(units, |d| b.pow(x, d) == one) == target)
        .ok_or(CensusError::NoOrbit)?;
    let md: Modulus = *alg.modulus();
    for _ in 0..500 {
        let w = Elem([0; 3].map(|_| rng.gen_range(0..md.m())));
        let eta = alg.mul(&alg.lift_or_reduce(&base), &alg.add(&alg.one(), &alg.scale(p as u128, &w)));
        let lt = alg.log_tangent(&eta, target)?;
        if b.is_generator(&lt.omega) {
            return Ok(eta);
        }
    }
    Err(CensusError::NoOrbit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn line_membership_of_z2() {
        let b = CubicAlgebra::standard(5, SplittingType::Inert).unwrap();
        let w = b.t();
        let z = b.trace_dual_basis(&w).unwrap();
        assert_eq!(singular_line_membership(&b, &w, 0, &z[2]).unwrap(), Some(LinePoint { u: 1, t: 0 }));
        assert_eq!(singular_line_membership(&b, &w, 0, &b.one()).unwrap(), None);
        assert!(singular_line_membership(&b, &b.one(), 0, &z[2]).is_err());
    }

    #[test]
    fn nonunit_caveat() {
        let b = CubicAlgebra::from_split_roots(5, 1, [0, 1, 2]).unwrap();
        let eta = b.from_split_coords_i([1, 1, 2]).unwrap();
        let gamma = b.from_split_coords_i([1, -1, 0]).unwrap();
        let c = orbit_preimage_count(&b, &eta, &gamma, 0);
        assert_eq!((c.preimage_count, c.image_count), (4, 1));
    }

    #[test]
    fn supersingular_full_fiber() {
        let alg = CubicAlgebra::standard_k(5, 2, SplittingType::Inert).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let eta = full_orbit_eta(&alg, OrbitShape::NormOne, &mut rng).unwrap();
        let ctx = BranchContext::new(alg.clone(), eta, alg.one(), 0).unwrap();
        let oc = full_orbit_branch_census(&ctx).unwrap();
        assert!(oc.full_fiber && oc.reconciled && oc.delta_matches_u);
        assert_eq!((oc.classes, oc.singular, oc.transverse), (6, 1, 5));
    }
}
