//! The norm-one torus T_B(F_p) as an explicit finite abelian group.
//!
//! Elements are indexed by mixed-radix exponent coordinates against a fixed
//! generating set: two generators of order p-1 in the split case, one
//! generator of order |T| otherwise.  Characters are exponent tuples.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraError, CubicAlgebra, Elem, SplittingType};
use crate::arith::{dlog, primitive_root, ArithError, Ratio};
use crate::counts::{self, CountError};

/// Groups up to this order get the full subgroup lattice.
pub const EXHAUSTIVE_SUBGROUP_LIMIT: usize = 400;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TorusError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error("p={p} exceeds the enumeration cap {cap}")]
    CapExceeded { p: u64, cap: u64 },
    #[error("coefficient {0} is not a unit")]
    NotUnit(Elem),
    #[error("fiber s={s}, n={n} is nodal; use the nodal check")]
    NodalFiber { s: u64, n: u64 },
    #[error("fiber s={s}, n={n} is smooth; the nodal check needs s^3 = 27 n")]
    SmoothFiber { s: u64, n: u64 },
    #[error("element {0} is not in the torus")]
    NotMember(Elem),
    #[error("generated group has {generated} elements, enumeration found {enumerated}")]
    StructureMismatch { generated: usize, enumerated: usize },
}

/// |E_B| = 3 iff p * eps_B = 1 mod 3.
pub fn exceptional_size(kind: SplittingType, p: u64) -> u64 {
    let pe = (p as i64 * kind.frobenius_sign()).rem_euclid(3);
    if pe == 1 {
        3
    } else {
        1
    }
}

/// A character as an exponent tuple: chi(x) = sum e_i c_i / d_i mod 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Character {
    pub exps: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Subgroup {
    /// Sorted element indices.
    pub members: Vec<usize>,
    pub gens: Vec<usize>,
}

impl Subgroup {
    pub fn order(&self) -> usize {
        self.members.len()
    }
    pub fn contains(&self, idx: usize) -> bool {
        self.members.binary_search(&idx).is_ok()
    }
}

#[derive(Debug, Clone)]
pub struct TorusGroup {
    alg: CubicAlgebra,
    elements: Vec<Elem>,
    lookup: HashMap<Elem, usize>,
    moduli: Vec<u64>,
    gens: Vec<Elem>,
}

impl TorusGroup {
    /// Enumerate T_B(F_p) and fix generators; the generated group is checked
    /// against a direct norm-one filter of B.
    pub fn enumerate(alg: &CubicAlgebra, cap: u64) -> Result<Self, TorusError> {
        let p = alg.p();
        if p > cap {
            return Err(TorusError::CapExceeded { p, cap });
        }
        let alg = alg.reduced();
        let one = alg.one();
        let filtered: BTreeSet<Elem> = alg.elements().into_iter().filter(|x| alg.norm(x) == 1).collect();
        let order = alg.kind().torus_order(p) as u64;

        let (gens, moduli) = match alg.kind() {
            SplittingType::Split => {
                let g = primitive_root(p) as i128;
                let ginv = alg.modulus().inv(g as u128).expect("unit") as i128;
                let a = alg.from_split_coords_i([g, ginv, 1])?;
                let b = alg.from_split_coords_i([1, g, ginv])?;
                (vec![a, b], vec![p - 1, p - 1])
            }
            _ => {
                let g = filtered
                    .iter()
                    .find(|x| {
                        crate::arith::order_by_descent(order as u128, |d| alg.pow(x, d) == one) == order as u128
                    })
                    .copied()
                    .ok_or(TorusError::StructureMismatch { generated: 0, enumerated: filtered.len() })?;
                (vec![g], vec![order])
            }
        };

        let mut elements = vec![one];
        for (g, &d) in gens.iter().zip(&moduli).rev() {
            // mixed radix: the last generator varies fastest
            let base = std::mem::take(&mut elements);
            let powers: Vec<Elem> = std::iter::successors(Some(one), |x| Some(alg.mul(x, g))).take(d as usize).collect();
            elements = powers.iter().flat_map(|pw| base.iter().map(move |b| (pw, b))).map(|(pw, b)| alg.mul(pw, b)).collect();
        }
        let lookup: HashMap<Elem, usize> = elements.iter().enumerate().map(|(i, x)| (*x, i)).collect();
        let generated: BTreeSet<Elem> = elements.iter().copied().collect();
        if lookup.len() != elements.len() || generated != filtered || elements.len() as u64 != order {
            return Err(TorusError::StructureMismatch { generated: lookup.len(), enumerated: filtered.len() });
        }
        Ok(TorusGroup { alg, elements, lookup, moduli, gens })
    }

    pub fn algebra(&self) -> &CubicAlgebra {
        &self.alg
    }
    pub fn order(&self) -> usize {
        self.elements.len()
    }
    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }
    pub fn element(&self, idx: usize) -> Elem {
        self.elements[idx]
    }
    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }
    pub fn generators(&self) -> &[Elem] {
        &self.gens
    }
    pub fn index_of(&self, x: &Elem) -> Option<usize> {
        self.lookup.get(x).copied()
    }

    pub fn coords(&self, mut idx: usize) -> Vec<u64> {
        let mut c = vec![0; self.moduli.len()];
        for i in (0..self.moduli.len()).rev() {
            let d = self.moduli[i] as usize;
            c[i] = (idx % d) as u64;
            idx /= d;
        }
        c
    }

    pub fn index_of_coords(&self, c: &[u64]) -> usize {
        c.iter().zip(&self.moduli).fold(0usize, |acc, (&ci, &d)| acc * d as usize + (ci % d) as usize)
    }

    pub fn mul_idx(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coords(a), self.coords(b));
        let c: Vec<u64> = ca.iter().zip(&cb).zip(&self.moduli).map(|((x, y), d)| (x + y) % d).collect();
        self.index_of_coords(&c)
    }

    pub fn inv_idx(&self, a: usize) -> usize {
        let c: Vec<u64> = self.coords(a).iter().zip(&self.moduli).map(|(x, d)| (d - x) % d).collect();
        self.index_of_coords(&c)
    }

    /// lcm of the moduli; character values live in Z/exponent.
    pub fn exponent(&self) -> u64 {
        self.moduli.iter().fold(1, |l, &d| l / gcd(l, d) * d)
    }

    pub fn char_value(&self, chi: &Character, idx: usize) -> u64 {
        let l = self.exponent();
        let c = self.coords(idx);
        chi.exps.iter().zip(&c).zip(&self.moduli).fold(0, |acc, ((e, x), d)| (acc + e * x % d * (l / d)) % l)
    }

    pub fn all_characters(&self) -> Vec<Character> {
        (0..self.order()).map(|i| Character { exps: self.coords(i) }).collect()
    }

    /// H-perp: characters trivial on H.
    pub fn annihilator(&self, h: &Subgroup) -> Vec<Character> {
        let test: &[usize] = if h.gens.is_empty() { &h.members } else { &h.gens };
        self.all_characters()
            .into_iter()
            .filter(|chi| test.iter().all(|&x| self.char_value(chi, x) == 0))
            .collect()
    }

    pub fn subgroup_generated(&self, gens: &[usize]) -> Subgroup {
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut members = vec![0usize];
        let mut frontier = vec![0usize];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul_idx(x, g);
                if !seen[y] {
                    seen[y] = true;
                    members.push(y);
                    frontier.push(y);
                }
            }
        }
        members.sort_unstable();
        Subgroup { members, gens: gens.to_vec() }
    }

    /// Subgroup from a member list, with a greedy generating set.
    pub fn subgroup_from_members(&self, mut members: Vec<usize>) -> Subgroup {
        members.sort_unstable();
        let mut gens = Vec::new();
        let mut current = self.subgroup_generated(&[]);
        for &x in &members {
            if !current.contains(x) {
                gens.push(x);
                current = self.subgroup_generated(&gens);
            }
        }
        Subgroup { members, gens }
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        self.subgroup_generated(&[])
    }

    pub fn whole(&self) -> Subgroup {
        let gens: Vec<usize> = (0..self.moduli.len())
            .map(|i| {
                let mut c = vec![0; self.moduli.len()];
                c[i] = 1;
                self.index_of_coords(&c)
            })
            .collect();
        self.subgroup_generated(&gens)
    }

    /// All subgroups when |T| <= 400 (cyclic subgroups closed under joins),
    /// otherwise cyclic subgroups plus the coordinate-projection kernels.
    pub fn enumerate_subgroups(&self, max_count: Option<usize>) -> Vec<Subgroup> {
        let mut found: Vec<Subgroup> = Vec::new();
        let mut keys: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut push = |s: Subgroup, found: &mut Vec<Subgroup>| {
            if keys.insert(s.members.clone()) {
                found.push(s);
            }
        };
        for x in 0..self.order() {
            push(self.subgroup_generated(&[x]), &mut found);
        }
        if self.order() <= EXHAUSTIVE_SUBGROUP_LIMIT {
            let mut start = 0;
            loop {
                let n = found.len();
                let mut fresh = Vec::new();
                for i in 0..n {
                    for j in (i + 1).max(start)..n {
                        let mut g = found[i].gens.clone();
                        g.extend(&found[j].gens);
                        fresh.push(self.subgroup_generated(&g));
                    }
                }
                for s in fresh {
                    push(s, &mut found);
                }
                if found.len() == n {
                    break;
                }
                start = n;
            }
        } else {
            for i in 0..self.moduli.len() {
                let members: Vec<usize> = (0..self.order()).filter(|&x| self.coords(x)[i] == 0).collect();
                push(self.subgroup_from_members(members), &mut found);
            }
            push(self.whole(), &mut found);
        }
        found.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.members.cmp(&b.members)));
        if let Some(cap) = max_count {
            found.truncate(cap);
        }
        found
    }

    /// Coset label of every element and a representative per coset.
    pub fn cosets(&self, h: &Subgroup) -> (Vec<usize>, Vec<usize>) {
        let mut label = vec![usize::MAX; self.order()];
        let mut reps = Vec::new();
        for x in 0..self.order() {
            if label[x] == usize::MAX {
                for &y in &h.members {
                    label[self.mul_idx(x, y)] = reps.len();
                }
                reps.push(x);
            }
        }
        (label, reps)
    }

    /// Tr(gamma * t) for every torus element t.
    pub fn trace_profile(&self, gamma: &Elem) -> Result<Vec<u64>, TorusError> {
        let gamma = self.alg.lift_or_reduce(gamma);
        if !self.alg.is_unit(&gamma) {
            return Err(TorusError::NotUnit(gamma));
        }
        Ok(self.elements.iter().map(|t| self.alg.trace(&self.alg.mul(&gamma, t)) as u64).collect())
    }

    /// #{h in gH : Tr(gamma h) = s}.
    pub fn coset_trace_count(&self, h: &Subgroup, g: usize, gamma: &Elem, s: u64) -> Result<u64, TorusError> {
        let prof = self.trace_profile(gamma)?;
        let s = s % self.alg.p();
        Ok(h.members.iter().filter(|&&x| prof[self.mul_idx(g, x)] == s).count() as u64)
    }

    fn norm_of(&self, gamma: &Elem) -> u64 {
        self.alg.norm(&self.alg.lift_or_reduce(gamma)) as u64
    }

    /// Exact check of (m N_gH - N_B)^2 <= 9 (m-1)^2 p on a smooth fiber.
    pub fn verify_coset_bound(&self, h: &Subgroup, g: usize, gamma: &Elem, s: u64) -> Result<CosetBound, TorusError> {
        let p = self.alg.p();
        let n = self.norm_of(gamma);
        if !counts::is_smooth_fiber(p, s, n)? {
            return Err(TorusError::NodalFiber { s: s % p, n });
        }
        let prof = self.trace_profile(gamma)?;
        let s = s % p;
        let full = prof.iter().filter(|&&t| t == s).count() as u64;
        let coset = h.members.iter().filter(|&&x| prof[self.mul_idx(g, x)] == s).count() as u64;
        Ok(CosetBound::new(self.order() / h.order(), coset, full, p))
    }

    /// Every (coset, smooth s) pair for one subgroup and coefficient.
    pub fn coset_bounds_all(&self, h: &Subgroup, gamma: &Elem) -> Result<Vec<(usize, u64, CosetBound)>, TorusError> {
        let p = self.alg.p();
        let n = self.norm_of(gamma);
        let prof = self.trace_profile(gamma)?;
        let (label, reps) = self.cosets(h);
        let m = reps.len();
        let mut out = Vec::new();
        for s in 0..p {
            if !counts::is_smooth_fiber(p, s, n)? {
                continue;
            }
            let mut per = vec![0u64; m];
            for (x, &t) in prof.iter().enumerate() {
                if t == s {
                    per[label[x]] += 1;
                }
            }
            let full: u64 = per.iter().sum();
            for (c, &cnt) in per.iter().enumerate() {
                out.push((reps[c], s, CosetBound::new(m, cnt, full, p)));
            }
        }
        Ok(out)
    }

    /// If N_B > 0 and N_B^2 > 9 (m-1)^2 p, every coset meets the fiber; the
    /// claim is then checked by enumeration.
    pub fn nonemptiness_check(&self, h: &Subgroup, gamma: &Elem, s: u64) -> Result<Nonemptiness, TorusError> {
        let p = self.alg.p();
        let n = self.norm_of(gamma);
        if !counts::is_smooth_fiber(p, s, n)? {
            return Err(TorusError::NodalFiber { s: s % p, n });
        }
        let prof = self.trace_profile(gamma)?;
        let s = s % p;
        let (label, reps) = self.cosets(h);
        let m = reps.len() as u128;
        let mut per = vec![0u64; reps.len()];
        for (x, &t) in prof.iter().enumerate() {
            if t == s {
                per[label[x]] += 1;
            }
        }
        let full: u64 = per.iter().sum();
        let certified = full > 0 && (full as u128).pow(2) > 9 * (m - 1).pow(2) * p as u128;
        Ok(Nonemptiness {
            m: m as usize,
            fiber_size: full,
            certified,
            all_cosets_meet: per.iter().all(|&c| c > 0),
        })
    }

    /// E_B with its generating cubic character and kernel K.
    pub fn exceptional_group(&self) -> ExceptionalGroup {
        let p = self.alg.p();
        let kind = self.alg.kind();
        let size = exceptional_size(kind, p);
        if size == 1 {
            return ExceptionalGroup { size, generator: None, kernel: self.whole() };
        }
        let exps: Vec<u64> = match kind {
            SplittingType::Split => self
                .gens
                .iter()
                .zip(&self.moduli)
                .map(|(g, &d)| {
                    let t = self.alg.split_coords(g).expect("split");
                    let md = self.alg.modulus();
                    let arg = md.mul(t[1], md.mul(t[2], t[2])) as u64;
                    (dlog(arg, p) % 3) * (d / 3)
                })
                .collect(),
            _ => vec![self.moduli[0] / 3],
        };
        let chi = Character { exps };
        let kernel: Vec<usize> = (0..self.order()).filter(|&x| self.char_value(&chi, x) == 0).collect();
        ExceptionalGroup { size, kernel: self.subgroup_from_members(kernel), generator: Some(chi) }
    }

    fn exceptional_chars(&self, e: &ExceptionalGroup) -> Vec<Character> {
        let mut out = vec![Character { exps: vec![0; self.moduli.len()] }];
        if let Some(chi) = &e.generator {
            for j in 1..3u64 {
                out.push(Character {
                    exps: chi.exps.iter().zip(&self.moduli).map(|(x, d)| x * j % d).collect(),
                });
            }
        }
        out
    }

    /// h_* = (s/3) gamma^{-1}, the rational point over the node.
    pub fn h_star(&self, gamma: &Elem, s: u64) -> Result<usize, TorusError> {
        let md = self.alg.modulus();
        let gamma = self.alg.lift_or_reduce(gamma);
        let ginv = self.alg.inv(&gamma).map_err(|_| TorusError::NotUnit(gamma))?;
        let c = md.mul(s as u128 % md.m(), md.inv(3).expect("p >= 5"));
        let h = self.alg.scale(c, &ginv);
        self.index_of(&h).ok_or(TorusError::NotMember(h))
    }

    fn nodal_setup(&self, gamma: &Elem, s: u64) -> Result<(u64, Vec<u64>, usize), TorusError> {
        let p = self.alg.p();
        let n = self.norm_of(gamma);
        if n == 0 {
            return Err(TorusError::NotUnit(*gamma));
        }
        if counts::is_smooth_fiber(p, s, n)? {
            return Err(TorusError::SmoothFiber { s: s % p, n });
        }
        let prof = self.trace_profile(gamma)?;
        let hs = self.h_star(gamma, s)?;
        Ok((s % p, prof, hs))
    }

    /// All rational points of the nodal trace fiber lie in h_* K.
    pub fn nodal_concentration_check(&self, gamma: &Elem, s: u64) -> Result<NodalConcentration, TorusError> {
        let (s, prof, hs) = self.nodal_setup(gamma, s)?;
        let exc = self.exceptional_group();
        let chars = self.exceptional_chars(&exc);
        let points: Vec<usize> = (0..self.order()).filter(|&x| prof[x] == s).collect();
        let hs_inv = self.inv_idx(hs);
        let all_in_coset = points.iter().all(|&x| exc.kernel.contains(self.mul_idx(hs_inv, x)));
        let pointwise = points
            .iter()
            .all(|&x| chars.iter().all(|chi| self.char_value(chi, x) == self.char_value(chi, hs)));
        let expected = counts::nodal_count(self.alg.kind(), self.alg.p(), s)?.value;
        let kernel_index = self.order() / exc.kernel.order();
        let pass = all_in_coset
            && pointwise
            && points.len() as u64 == expected
            && kernel_index as u64 == exc.size;
        Ok(NodalConcentration {
            exceptional_size: exc.size,
            kernel_index,
            points: points.len() as u64,
            expected,
            h_star: self.element(hs),
            all_in_coset,
            pointwise,
            pass,
        })
    }

    /// Exceptional main term N^nod |H-perp cap E_B| / m on cosets meeting
    /// h_* K (0 elsewhere) and the exact remainder bound
    /// |N_gH - main| <= ((m - e)/m)(3 sqrt p + 3).
    pub fn nodal_coset_check(&self, h: &Subgroup, g: usize, gamma: &Elem, s: u64) -> Result<NodalCosetCheck, TorusError> {
        let (s, prof, hs) = self.nodal_setup(gamma, s)?;
        let p = self.alg.p();
        let exc = self.exceptional_group();
        let chars = self.exceptional_chars(&exc);
        let e = chars.iter().filter(|chi| h.members.iter().all(|&x| self.char_value(chi, x) == 0)).count() as u64;
        let mut hk_gens = h.gens.clone();
        hk_gens.extend(&exc.kernel.gens);
        let hk = self.subgroup_generated(&hk_gens);
        let meets = hk.contains(self.mul_idx(self.inv_idx(g), hs));
        let n_nod = counts::nodal_count(self.alg.kind(), p, s)?.value;
        let m = (self.order() / h.order()) as u64;
        let main_num = if meets { n_nod * e } else { 0 };
        let count = h.members.iter().filter(|&&x| prof[self.mul_idx(g, x)] == s).count() as u64;
        let x = (m as i128 * count as i128 - main_num as i128).unsigned_abs();
        let y = (m - e) as u128;
        let d = x as i128 - 3 * y as i128;
        let pass = d <= 0 || (d * d) as u128 <= 9 * y * y * p as u128;
        Ok(NodalCosetCheck {
            m,
            exceptional_overlap: e,
            meets_exceptional_coset: meets,
            count,
            nodal_total: n_nod,
            main_term: Ratio::new(main_num as i128, m as i128),
            remainder: Ratio::new(m as i128 * count as i128 - main_num as i128, m as i128),
            pass,
        })
    }

    /// (1/m) sum_{chi in H-perp} chi(g^{-1}) S_chi in floating point; a
    /// diagnostic for the character decomposition, never a verdict.
    pub fn character_decomposition(&self, h: &Subgroup, g: usize, gamma: &Elem, s: u64) -> Result<f64, TorusError> {
        let prof = self.trace_profile(gamma)?;
        let s = s % self.alg.p();
        let l = self.exponent() as f64;
        let fiber: Vec<usize> = (0..self.order()).filter(|&x| prof[x] == s).collect();
        let ginv = self.inv_idx(g);
        let mut re = 0.0;
        for chi in self.annihilator(h) {
            let (mut sr, mut si) = (0.0f64, 0.0f64);
            for &x in &fiber {
                let a = std::f64::consts::TAU * self.char_value(&chi, x) as f64 / l;
                sr += a.cos();
                si += a.sin();
            }
            let b = std::f64::consts::TAU * self.char_value(&chi, ginv) as f64 / l;
            re += b.cos() * sr - b.sin() * si;
        }
        Ok(re * h.order() as f64 / self.order() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CosetBound {
    pub m: usize,
    pub coset_count: u64,
    pub fiber_size: u64,
    pub main_term: Ratio,
    pub error: Ratio,
    /// (m N_gH - N_B)^2
    pub lhs: u128,
    /// 9 (m-1)^2 p
    pub rhs: u128,
    pub pass: bool,
}

impl CosetBound {
    fn new(m: usize, coset: u64, full: u64, p: u64) -> Self {
        let diff = m as i128 * coset as i128 - full as i128;
        let lhs = (diff * diff) as u128;
        let rhs = 9 * ((m - 1) as u128).pow(2) * p as u128;
        CosetBound {
            m,
            coset_count: coset,
            fiber_size: full,
            main_term: Ratio::new(full as i128, m as i128),
            error: Ratio::new(diff, m as i128),
            lhs,
            rhs,
            pass: lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Nonemptiness {
    pub m: usize,
    pub fiber_size: u64,
    /// The criterion holds; absence of a certificate says nothing.
    pub certified: bool,
    pub all_cosets_meet: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExceptionalGroup {
    pub size: u64,
    pub generator: Option<Character>,
    pub kernel: Subgroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodalConcentration {
    pub exceptional_size: u64,
    pub kernel_index: usize,
    pub points: u64,
    pub expected: u64,
    pub h_star: Elem,
    pub all_in_coset: bool,
    pub pointwise: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodalCosetCheck {
    pub m: u64,
    pub exceptional_overlap: u64,
    pub meets_exceptional_coset: bool,
    pub count: u64,
    pub nodal_total: u64,
    pub main_term: Ratio,
    pub remainder: Ratio,
    pub pass: bool,
}

/// One unit of each norm (first in lexicographic order) plus `extra` random
/// units drawn from a seeded stream.
pub fn unit_sample(alg: &CubicAlgebra, seed: u64, extra: usize) -> Vec<Elem> {
    let alg = alg.reduced();
    let p = alg.p() as u128;
    let mut out = Vec::new();
    let all = alg.elements();
    for n in 1..p {
        if let Some(x) = all.iter().find(|x| alg.norm(x) == n) {
            out.push(*x);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < (p - 1) as usize + extra {
        let x = Elem([rng.gen_range(0..p), rng.gen_range(0..p), rng.gen_range(0..p)]);
        if alg.is_unit(&x) {
            out.push(x);
        }
    }
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(p: u64, kind: SplittingType) -> TorusGroup {
        TorusGroup::enumerate(&CubicAlgebra::standard(p, kind).unwrap(), 101).unwrap()
    }

    #[test]
    fn orders_at_five() {
        assert_eq!(torus(5, SplittingType::Split).order(), 16);
        assert_eq!(torus(5, SplittingType::Mixed).order(), 24);
        assert_eq!(torus(5, SplittingType::Inert).order(), 31);
    }

    #[test]
    fn prime_order_lattice() {
        let t = torus(5, SplittingType::Inert);
        let subs = t.enumerate_subgroups(None);
        assert_eq!(subs.len(), 2);
        assert_eq!(subs[0].order(), 1);
        assert_eq!(subs[1].order(), 31);
    }

    #[test]
    fn exceptional_table() {
        assert_eq!(exceptional_size(SplittingType::Split, 7), 3);
        assert_eq!(exceptional_size(SplittingType::Mixed, 5), 3);
        assert_eq!(exceptional_size(SplittingType::Inert, 5), 1);
        assert_eq!(exceptional_size(SplittingType::Split, 5), 1);
        assert_eq!(exceptional_size(SplittingType::Mixed, 7), 1);
        assert_eq!(exceptional_size(SplittingType::Inert, 7), 3);
    }

    #[test]
    fn split_seven_all_or_nothing() {
        let t = torus(7, SplittingType::Split);
        let exc = t.exceptional_group();
        assert_eq!(t.order() / exc.kernel.order(), 3);
        let gamma = t.algebra().one();
        let s = 3; // 27 = 6 = 3^3 mod 7 so n = 1
        assert!(!counts::is_smooth_fiber(7, s, 1).unwrap());
        let conc = t.nodal_concentration_check(&gamma, s).unwrap();
        assert!(conc.pass, "{conc:?}");
        assert_eq!(conc.points, 4);
        let (_, reps) = t.cosets(&exc.kernel);
        let hs = t.h_star(&gamma, s).unwrap();
        for g in reps {
            let chk = t.nodal_coset_check(&exc.kernel, g, &gamma, s).unwrap();
            assert!(chk.pass);
            assert_eq!(chk.remainder, Ratio::int(0));
            let want = if exc.kernel.contains(t.mul_idx(t.inv_idx(g), hs)) { 4 } else { 0 };
            assert_eq!(chk.count, want);
        }
    }

    #[test]
    fn inert_singletons_at_five() {
        let t = torus(5, SplittingType::Inert);
        let h = t.trivial_subgroup();
        let one = t.algebra().one();
        for g in 0..t.order() {
            let b = t.verify_coset_bound(&h, g, &one, 0).unwrap();
            assert_eq!(b.fiber_size, 6);
            assert_eq!(b.rhs, 9 * 900 * 5);
            assert!(b.pass);
        }
    }
}
