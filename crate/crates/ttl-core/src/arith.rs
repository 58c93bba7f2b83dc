//! Exact modular integer helpers: residues modulo p^k, p-adic valuations,
//! quadratic and cubic residue symbols, small-integer factorization.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("prime {0} is not allowed (need p >= 5)")]
    SmallPrime(u64),
    #[error("precision exponent must be at least 1")]
    ZeroPrecision,
    #[error("p^k = {p}^{k} does not fit the supported range")]
    Overflow { p: u64, k: u32 },
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Trial-division factorization, sorted by prime.
pub fn factorize(mut n: u128) -> Vec<(u128, u32)> {
    let mut out = Vec::new();
    let mut d: u128 = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// p-adic valuation of a nonzero integer.
pub fn vp(mut x: u128, p: u64) -> u32 {
    assert!(x != 0, "valuation of zero");
    let p = p as u128;
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// v_p(m!) by Legendre's formula.
pub fn vp_factorial(m: u64, p: u64) -> u32 {
    let mut v = 0;
    let mut q = m / p;
    while q > 0 {
        v += q as u32;
        q /= p;
    }
    v
}

pub fn checked_pow(p: u64, k: u32) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(p as u128)?;
    }
    Some(acc)
}

/// Residues modulo p^k.  Values are canonical representatives in [0, p^k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Modulus {
    p: u64,
    k: u32,
    m: u128,
}

const LIMIT: u128 = 1u128 << 125;

impl Modulus {
    /// Ring Z/p^k for a prime p >= 5.
    pub fn new(p: u64, k: u32) -> Result<Self, ArithError> {
        if !is_prime(p) {
            return Err(ArithError::NotPrime(p));
        }
        if p < 5 {
            return Err(ArithError::SmallPrime(p));
        }
        Self::any_prime(p, k)
    }

    /// Same as `new` but without the p >= 5 restriction (used by helpers
    /// that work for every odd prime).
    pub fn any_prime(p: u64, k: u32) -> Result<Self, ArithError> {
        if k == 0 {
            return Err(ArithError::ZeroPrecision);
        }
        let m = checked_pow(p, k)
            .filter(|m| *m < LIMIT)
            .ok_or(ArithError::Overflow { p, k })?;
        Ok(Modulus { p, k, m })
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn m(&self) -> u128 {
        self.m
    }

    /// The ring at a different precision (same prime).
    pub fn with_k(&self, k: u32) -> Result<Self, ArithError> {
        Self::any_prime(self.p, k)
    }

    pub fn reduce(&self, x: u128) -> u128 {
        x % self.m
    }

    pub fn from_i128(&self, x: i128) -> u128 {
        let m = self.m as i128;
        (((x % m) + m) % m) as u128
    }

    pub fn from_i64(&self, x: i64) -> u128 {
        self.from_i128(x as i128)
    }

    /// Representative in (-m/2, m/2].
    pub fn centered(&self, x: u128) -> i128 {
        if x > self.m / 2 {
            x as i128 - self.m as i128
        } else {
            x as i128
        }
    }

    pub fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    pub fn neg(&self, a: u128) -> u128 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }

    pub fn mul(&self, a: u128, b: u128) -> u128 {
        if self.m <= u64::MAX as u128 {
            return (a * b) % self.m;
        }
        // double-and-add; m < 2^125 so nothing overflows
        let mut acc = 0u128;
        let mut base = a;
        let mut e = b;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn pow(&self, mut b: u128, mut e: u128) -> u128 {
        let mut acc = 1 % self.m;
        b %= self.m;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    pub fn is_unit(&self, a: u128) -> bool {
        a % self.p as u128 != 0
    }

    /// Inverse of a unit, via the extended Euclidean algorithm.
    pub fn inv(&self, a: u128) -> Option<u128> {
        if !self.is_unit(a) {
            return None;
        }
        let (mut r0, mut r1) = (self.m as i128, (a % self.m) as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        Some(self.from_i128(s0))
    }

    /// Valuation of a residue, capped at k (so zero has valuation k).
    pub fn val(&self, a: u128) -> u32 {
        let a = a % self.m;
        if a == 0 {
            self.k
        } else {
            vp(a, self.p)
        }
    }

    /// Exact division by p^r of a residue divisible by p^r; the result lives
    /// modulo p^(k-r).
    pub fn div_p_pow(&self, a: u128, r: u32) -> Option<u128> {
        let pr = checked_pow(self.p, r)?;
        if a % pr != 0 || r > self.k {
            return None;
        }
        Some(a / pr)
    }

    /// binom(t, m) modulo p^k for a nonnegative integer t.
    pub fn binom(&self, t: u128, m: u64) -> u128 {
        if (m as u128) > t {
            return 0;
        }
        let p = self.p as u128;
        let mut v: i64 = 0;
        let mut num = 1 % self.m;
        let mut den = 1 % self.m;
        for i in 0..m as u128 {
            let mut a = t - i;
            while a % p == 0 {
                a /= p;
                v += 1;
            }
            num = self.mul(num, a % self.m);
            let mut b = i + 1;
            while b % p == 0 {
                b /= p;
                v -= 1;
            }
            den = self.mul(den, b % self.m);
        }
        debug_assert!(v >= 0);
        if v as u64 >= self.k as u64 {
            return 0;
        }
        let pv = self.pow(p, v as u128);
        self.mul(self.mul(num, self.inv(den).expect("unit")), pv)
    }
}

/// Legendre symbol (a/p) in {-1, 0, 1} by Euler's criterion.
pub fn legendre(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let m = Modulus::any_prime(p, 1).expect("prime");
    if m.pow(a as u128, ((p - 1) / 2) as u128) == 1 {
        1
    } else {
        -1
    }
}

/// Square root modulo an odd prime (Tonelli-Shanks).
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if legendre(a, p) != 1 {
        return None;
    }
    let m = Modulus::any_prime(p, 1).expect("prime");
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p).find(|&z| legendre(z, p) == -1).expect("nonresidue");
    let mut c = m.pow(z as u128, q as u128);
    let mut x = m.pow(a as u128, ((q + 1) / 2) as u128);
    let mut t = m.pow(a as u128, q as u128);
    let mut mm = s;
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = m.mul(t2, t2);
            i += 1;
        }
        let b = m.pow(c, 1u128 << (mm - i - 1));
        x = m.mul(x, b);
        c = m.mul(b, b);
        t = m.mul(t, c);
        mm = i;
    }
    Some(x as u64)
}

/// Smallest primitive root modulo p.
pub fn primitive_root(p: u64) -> u64 {
    let m = Modulus::any_prime(p, 1).expect("prime");
    let fs = factorize((p - 1) as u128);
    (2..p)
        .find(|&g| fs.iter().all(|(q, _)| m.pow(g as u128, (p as u128 - 1) / q) != 1))
        .unwrap_or(1)
}

/// Cube class of a nonzero residue: the exponent j in {0,1,2} with
/// a^((p-1)/3) = g^(j(p-1)/3) for the smallest primitive root g.  Always 0
/// when p = 2 mod 3 (the cube map is bijective).
pub fn cube_class(a: u64, p: u64) -> u8 {
    assert!(a % p != 0, "cube class of zero");
    if p % 3 != 1 {
        return 0;
    }
    let m = Modulus::any_prime(p, 1).expect("prime");
    let e = (p as u128 - 1) / 3;
    let zeta = m.pow(primitive_root(p) as u128, e);
    let v = m.pow(a as u128, e);
    if v == 1 {
        0
    } else if v == zeta {
        1
    } else {
        2
    }
}

/// Discrete logarithm in F_p^x to the base of the smallest primitive root.
pub fn dlog(a: u64, p: u64) -> u64 {
    let m = Modulus::any_prime(p, 1).expect("prime");
    let g = primitive_root(p) as u128;
    let mut x = 1u128;
    for e in 0..p - 1 {
        if x == (a % p) as u128 {
            return e;
        }
        x = m.mul(x, g);
    }
    panic!("dlog of zero")
}

/// Exact integer square-root floor.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Order of a unit modulo an element-power test: least divisor d of `group`
/// with `is_one(d)`.
pub fn order_by_descent(group: u128, mut is_one: impl FnMut(u128) -> bool) -> u128 {
    let mut ord = group;
    for (q, e) in factorize(group) {
        for _ in 0..e {
            if ord % q == 0 && is_one(ord / q) {
                ord /= q;
            } else {
                break;
            }
        }
    }
    ord
}

/// Exact rational with positive denominator, serialized as {"num", "den"}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Ratio {
    pub num: i128,
    pub den: i128,
}

impl Ratio {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd_i(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Ratio { num: s * num / g, den: s * den / g }
    }
    pub fn int(n: i128) -> Self {
        Ratio { num: n, den: 1 }
    }
    pub fn sub(self, o: Ratio) -> Ratio {
        Ratio::new(self.num * o.den - o.num * self.den, self.den * o.den)
    }
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd_i(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_normalizes() {
        assert_eq!(Ratio::new(6, -4), Ratio { num: -3, den: 2 });
        assert_eq!(Ratio::new(3, 4).sub(Ratio::int(1)), Ratio::new(-1, 4));
    }

    #[test]
    fn primes_and_factors() {
        assert!(is_prime(5) && is_prime(13) && !is_prime(91));
        assert_eq!(factorize(124), vec![(2, 2), (31, 1)]);
        assert_eq!(vp_factorial(25, 5), 6);
    }

    #[test]
    fn inverse_and_binomial() {
        let m = Modulus::new(5, 3).unwrap();
        assert_eq!(m.mul(m.inv(7).unwrap(), 7), 1);
        assert!(m.inv(10).is_none());
        assert_eq!(m.binom(10, 3), 120 % 125);
        assert_eq!(m.binom(25, 5), 53130 % 125);
        assert_eq!(m.binom(3, 5), 0);
    }

    #[test]
    fn residue_symbols() {
        assert_eq!(legendre(4, 7), 1);
        assert_eq!(legendre(3, 7), -1);
        for p in [5u64, 7, 11, 13, 101] {
            for a in 1..p {
                if let Some(r) = sqrt_mod(a, p) {
                    assert_eq!(r * r % p, a);
                }
            }
        }
        assert_eq!(cube_class(8, 7), 0);
        assert_ne!(cube_class(3, 7), 0);
        assert_eq!(cube_class(3, 5), 0);
    }

    #[test]
    fn wide_modulus_multiplication() {
        let m = Modulus::new(199, 16).unwrap();
        let a = m.m() - 1;
        assert_eq!(m.mul(a, a), 1);
        assert_eq!(m.mul(m.pow(3, 1000), m.pow(3, 24)), m.pow(3, 1024));
    }
}
