//! Exhaustive distributional tallies: cube classes of generator
//! discriminants, and quadratic jet alternatives over the full lift family.

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraError, CubicAlgebra, Elem, SplittingType};
use crate::arith::{cube_class, legendre, Modulus, Ratio};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("scalar must be nonzero")]
    ZeroScalar,
    #[error("x must be a unit with Tr(x) = c mod p and Tr(omega x) = 0")]
    NotSingular,
    #[error("second tangent Tr(omega^2 x) vanishes (degenerate class)")]
    Degenerate,
    #[error("omega does not generate the algebra")]
    NotGenerator,
    #[error("lift family needs precision 3, algebra has {0}")]
    Precision(u32),
    #[error("lift family of size p^6 = {size} exceeds the cap {cap}")]
    Cap { size: u128, cap: u128 },
}

/// #B_gen from the closed forms.
pub fn generator_count(kind: SplittingType, q: u64) -> u64 {
    match kind {
        SplittingType::Split => q * (q - 1) * (q - 2),
        SplittingType::Mixed => q * q * (q - 1),
        SplittingType::Inert => q * q * q - q,
    }
}

/// #{omega : disc(charpoly(omega)) != 0} by enumeration.
pub fn generator_count_exhaustive(b: &CubicAlgebra) -> u64 {
    let b = b.reduced();
    b.elements().iter().filter(|w| b.disc_of(w) != 0).count() as u64
}

/// A sum a + b zeta in Z[zeta_3].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Eisenstein {
    pub a: i128,
    pub b: i128,
}

impl Eisenstein {
    pub fn norm(&self) -> i128 {
        self.a * self.a - self.a * self.b + self.b * self.b
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CubeClassTally {
    pub q: u64,
    pub scalar: u64,
    pub generators: u64,
    /// counts of A disc(omega) in the cube classes 0, 1, 2
    pub counts: [u64; 3],
    /// (3 count - #B_gen)^2 <= 4 q^3 (q-1)^2 for each class
    pub within_bound: [bool; 3],
    /// the 9x sharper squared form 9 (3 count - #B_gen)^2 <= 4 q^3 (q-1)^2
    pub within_sharp_form: [bool; 3],
    /// sums of psi^j(disc) for j = 1, 2 and whether |S|^2 <= q^3 (q-1)^2
    pub character_sums: Vec<(Eisenstein, bool)>,
    pub pass: bool,
}

pub fn cube_class_tally(b: &CubicAlgebra, scalar: u64) -> Result<CubeClassTally, StatsError> {
    let b = b.reduced();
    let q = b.p();
    let f = *b.modulus();
    if scalar % q == 0 {
        return Err(StatsError::ZeroScalar);
    }
    let mut counts = [0u64; 3];
    let mut plain = [0i128; 3];
    for w in b.elements() {
        let d = b.disc_of(&w);
        if d == 0 {
            continue;
        }
        plain[cube_class(d as u64, q) as usize] += 1;
        counts[cube_class(f.mul(d, scalar as u128) as u64, q) as usize] += 1;
    }
    let generators: u64 = counts.iter().sum();
    let bound = 4 * (q as i128).pow(3) * ((q - 1) as i128).pow(2);
    let dev = |c: u64| (3 * c as i128 - generators as i128).pow(2);
    let within_bound = counts.map(|c| q % 3 == 2 || dev(c) <= bound);
    let within_sharp_form = counts.map(|c| q % 3 == 2 || 9 * dev(c) <= bound);
    let mut character_sums = Vec::new();
    if q % 3 == 1 {
        let [c0, c1, c2] = plain;
        // psi(x) = zeta^class(x); zeta^2 = -1 - zeta
        let s1 = Eisenstein { a: c0 - c2, b: c1 - c2 };
        let s2 = Eisenstein { a: c0 - c1, b: c2 - c1 };
        let lim = (q as i128).pow(3) * ((q - 1) as i128).pow(2);
        character_sums = vec![(s1, s1.norm() <= lim), (s2, s2.norm() <= lim)];
    }
    let single_class = q % 3 == 1 || counts.iter().filter(|&&c| c > 0).count() == 1;
    let pass = single_class
        && generators == generator_count(b.kind(), q)
        && within_bound.iter().all(|&x| x)
        && character_sums.iter().all(|x| x.1);
    Ok(CubeClassTally { q, scalar, generators, counts, within_bound, within_sharp_form, character_sums, pass })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AverageSingular {
    pub generators: u64,
    pub total: u64,
    pub average: Ratio,
    /// every S_omega lies in {0, 1, 3}
    pub values_ok: bool,
    /// (sum S_omega - #B_gen)^2 <= 4 q^3 (q-1)^2 (equality case when q = 2 mod 3)
    pub within_bound: bool,
}

/// Average over generators omega of #{u != 0 : u^3 = -Norm(gamma) delta disc(omega)}.
pub fn average_singular(b: &CubicAlgebra, gamma: &Elem, delta: u64) -> Result<AverageSingular, StatsError> {
    let b = b.reduced();
    let q = b.p();
    let f = *b.modulus();
    let ng = b.norm(gamma);
    if ng == 0 || delta % q == 0 {
        return Err(StatsError::ZeroScalar);
    }
    let cubes: Vec<u128> = (1..q as u128).map(|u| f.pow(u, 3)).collect();
    let (mut generators, mut total, mut values_ok) = (0u64, 0u64, true);
    for w in b.elements() {
        let d = b.disc_of(&w);
        if d == 0 {
            continue;
        }
        generators += 1;
        let rhs = f.neg(f.mul(f.mul(ng, delta as u128), d));
        let s = cubes.iter().filter(|&&c| c == rhs).count() as u64;
        values_ok &= matches!(s, 0 | 1 | 3);
        total += s;
    }
    let dev = (total as i128 - generators as i128).pow(2);
    let within_bound = if q % 3 == 2 {
        total == generators
    } else {
        dev <= 4 * (q as i128).pow(3) * ((q - 1) as i128).pow(2)
    };
    Ok(AverageSingular {
        generators,
        total,
        average: Ratio::new(total as i128, generators as i128),
        values_ok,
        within_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JetTally {
    pub label: &'static str,
    pub p: u64,
    pub lifts: u64,
    pub surviving: u64,
    pub nonsquare: u64,
    pub nonzero_square: u64,
    pub zero: u64,
    pub freq_nonsquare: Ratio,
    pub freq_nonzero_square: Ratio,
    pub freq_zero: Ratio,
    /// counts of (A_y, B_y), indexed A p + B
    pub uniformity: Vec<u64>,
    pub uniform: bool,
    /// F_y(T)/p^2 = Q_y(T) mod p for every surviving lift and digit T
    pub jet_identity: bool,
    pub frequencies_exact: bool,
}

/// Tally of the quadratic alternatives over every lift y of x mod p^3 with
/// Tr(y) = c mod p^2.  `u_lift` is the lift of omega used in (1 + pU)^T.
pub fn jet_family_statistics(alg: &CubicAlgebra, omega: &Elem, x: &Elem, c: u64, u_lift: &Elem, cap: u128) -> Result<JetTally, StatsError> {
    if alg.k() < 3 {
        return Err(StatsError::Precision(alg.k()));
    }
    let a3 = alg.with_precision(3)?;
    let b = a3.reduced();
    let p = b.p();
    let pu = p as u128;
    let size = pu.pow(6);
    if size > cap {
        return Err(StatsError::Cap { size, cap });
    }
    let omega = b.lift_or_reduce(omega);
    let x = b.lift_or_reduce(x);
    if !b.is_generator(&omega) {
        return Err(StatsError::NotGenerator);
    }
    if !b.is_unit(&x) || b.trace(&x) != c as u128 % pu || b.trace(&b.mul(&omega, &x)) != 0 {
        return Err(StatsError::NotSingular);
    }
    let delta = b.trace(&b.mul(&x, &b.mul(&omega, &omega)));
    if delta == 0 {
        return Err(StatsError::Degenerate);
    }
    let md = *a3.modulus();
    let fp = Modulus::any_prime(p, 1).expect("prime");
    let u = a3.lift_or_reduce(u_lift);
    let step = a3.add(&a3.one(), &a3.scale(pu, &u));
    let powers: Vec<Elem> = (0..p as u128).map(|t| a3.pow(&step, t)).collect();
    let c3 = md.reduce(c as u128);
    let half = fp.inv(2).expect("odd");
    let basis: Vec<Elem> = b.elements();
    let mut tally = JetTally {
        label: "lift-family statistic",
        p,
        lifts: size as u64,
        surviving: 0,
        nonsquare: 0,
        nonzero_square: 0,
        zero: 0,
        freq_nonsquare: Ratio::int(0),
        freq_nonzero_square: Ratio::int(0),
        freq_zero: Ratio::int(0),
        uniformity: vec![0; (p * p) as usize],
        uniform: false,
        jet_identity: true,
        frequencies_exact: false,
    };
    let y0 = a3.lift_or_reduce(&x);
    for alpha in &basis {
        let y1 = a3.add(&y0, &a3.scale(pu, alpha));
        // survival only depends on Tr(y) mod p^2, which beta does not touch
        if md.sub(a3.trace(&y1), c3) % (pu * pu) != 0 {
            continue;
        }
        for beta in &basis {
            let y = a3.add(&y1, &a3.scale(pu * pu, beta));
            let t0 = md.sub(a3.trace(&y), c3);
            let a_y = t0 / (pu * pu) % pu;
            let t1 = a3.trace(&a3.mul(&y, &u));
            debug_assert_eq!(t1 % pu, 0);
            let b_y = t1 / pu % pu;
            tally.surviving += 1;
            tally.uniformity[(a_y * pu + b_y) as usize] += 1;
            let bm = fp.sub(b_y, fp.mul(delta, half));
            let d = fp.sub(fp.mul(bm, bm), fp.mul(2, fp.mul(delta, a_y)));
            match legendre(d as u64, p) {
                0 => tally.zero += 1,
                1 => tally.nonzero_square += 1,
                _ => tally.nonsquare += 1,
            }
            for (t, pw_t) in powers.iter().enumerate() {
                let v = md.sub(a3.trace(&a3.mul(&y, pw_t)), c3);
                let t = t as u128;
                let q = fp.add(fp.add(a_y, fp.mul(b_y, t)), fp.mul(delta, fp.binom(t, 2)));
                if v % (pu * pu) != 0 || v / (pu * pu) != q {
                    tally.jet_identity = false;
                }
            }
        }
    }
    let n = tally.surviving as i128;
    tally.freq_nonsquare = Ratio::new(tally.nonsquare as i128, n);
    tally.freq_nonzero_square = Ratio::new(tally.nonzero_square as i128, n);
    tally.freq_zero = Ratio::new(tally.zero as i128, n);
    let pi = p as i128;
    tally.frequencies_exact = tally.freq_nonsquare == Ratio::new(pi - 1, 2 * pi)
        && tally.freq_nonzero_square == Ratio::new(pi - 1, 2 * pi)
        && tally.freq_zero == Ratio::new(1, pi);
    tally.uniform = tally.uniformity.iter().all(|&k| k == tally.uniformity[0]);
    Ok(tally)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiftChange {
    /// Tr(x V) mod p
    pub offset: u64,
    /// B_y(U + pV) - B_y(U) = Tr(x V) for every surviving lift
    pub translated: bool,
    pub frequencies_unchanged: bool,
}

/// Compare the tallies for the lifts U and U + pV of omega.
pub fn lift_change_check(alg: &CubicAlgebra, omega: &Elem, x: &Elem, c: u64, u: &Elem, v: &Elem, cap: u128) -> Result<LiftChange, StatsError> {
    let a3 = alg.with_precision(3)?;
    let b = a3.reduced();
    let pu = b.p() as u128;
    let u = a3.lift_or_reduce(u);
    let u2 = a3.add(&u, &a3.scale(pu, &a3.lift_or_reduce(v)));
    let t1 = jet_family_statistics(&a3, omega, x, c, &u, cap)?;
    let t2 = jet_family_statistics(&a3, omega, x, c, &u2, cap)?;
    let offset = b.trace(&b.mul(&b.lift_or_reduce(x), &b.lift_or_reduce(v)));
    let md = *a3.modulus();
    let x3 = a3.lift_or_reduce(x);
    let mut translated = true;
    for alpha in b.elements() {
        for beta in b.elements() {
            let y = a3.add(&x3, &a3.add(&a3.scale(pu, &alpha), &a3.scale(pu * pu, &beta)));
            if md.sub(a3.trace(&y), c as u128) % (pu * pu) != 0 {
                break;
            }
            let by = |w: &Elem| a3.trace(&a3.mul(&y, w)) / pu % pu;
            translated &= (by(&u) + offset) % pu == by(&u2);
        }
    }
    let frequencies_unchanged = t1.freq_nonsquare == t2.freq_nonsquare
        && t1.freq_nonzero_square == t2.freq_nonzero_square
        && t1.freq_zero == t2.freq_zero
        && t1.surviving == t2.surviving;
    Ok(LiftChange { offset: offset as u64, translated, frequencies_unchanged })
}

/// A nondegenerate singular point x = s z0 + u z2 (u != 0) that is a unit.
pub fn singular_point(b: &CubicAlgebra, omega: &Elem, s: u64) -> Option<Elem> {
    let b = b.reduced();
    let z = b.trace_dual_basis(omega).ok()?;
    (1..b.p() as u128)
        .map(|u| b.add(&b.scale(s as u128, &z[0]), &b.scale(u, &z[2])))
        .find(|x| b.is_unit(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_counts_at_five() {
        for (kind, n) in [(SplittingType::Split, 60), (SplittingType::Mixed, 100), (SplittingType::Inert, 120)] {
            let b = CubicAlgebra::standard(5, kind).unwrap();
            assert_eq!(generator_count(kind, 5), n);
            assert_eq!(generator_count_exhaustive(&b), n);
        }
    }

    #[test]
    fn cube_classes() {
        let b5 = CubicAlgebra::standard(5, SplittingType::Split).unwrap();
        let t = cube_class_tally(&b5, 1).unwrap();
        assert_eq!(t.counts, [60, 0, 0]);
        assert!(t.pass);
        let b7 = CubicAlgebra::standard(7, SplittingType::Split).unwrap();
        let t = cube_class_tally(&b7, 3).unwrap();
        assert_eq!(t.counts.iter().sum::<u64>(), 210);
        assert!(t.pass, "{t:?}");
    }

    #[test]
    fn jets_at_five() {
        let alg = CubicAlgebra::standard_k(5, 3, SplittingType::Inert).unwrap();
        let b = alg.reduced();
        let w = b.t();
        let x = singular_point(&b, &w, 1).unwrap();
        let u = alg.lift_or_reduce(&w);
        let t = jet_family_statistics(&alg, &w, &x, 1, &u, 1 << 20).unwrap();
        assert!(t.frequencies_exact && t.uniform && t.jet_identity, "{t:?}");
        assert_eq!(t.freq_zero, Ratio::new(1, 5));
        let v = alg.elem([1, 2, 0]);
        let lc = lift_change_check(&alg, &w, &x, 1, &u, &v, 1 << 20).unwrap();
        assert!(lc.translated && lc.frequencies_unchanged);
    }
}
