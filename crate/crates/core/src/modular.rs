//! Arithmetic in Z/p^N and F_p, dense matrices over Z/p^N, and F_p linear solves.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rootsys::check_prime;

/// The ring Z/p^N.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadicRing {
    pub p: u64,
    pub precision: u32,
    pub modulus: u64,
}

impl PadicRing {
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        check_prime(p)?;
        if precision == 0 {
            return Err(Error::Precision("precision must be at least 1".into()));
        }
        let modulus = checked_pow(p, precision)
            .filter(|m| *m < (1u64 << 62))
            .ok_or_else(|| Error::Precision(format!("p^N = {p}^{precision} overflows")))?;
        Ok(PadicRing { p, precision, modulus })
    }

    #[inline]
    pub fn reduce_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.modulus as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.modulus;
        base %= self.modulus;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// `base^exp` for a possibly negative exponent; `base` must be a unit.
    pub fn pow_signed(&self, base: u64, exp: i64) -> Result<u64> {
        if exp >= 0 {
            Ok(self.pow(base, exp as u64))
        } else {
            Ok(self.pow(self.inv(base)?, exp.unsigned_abs()))
        }
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        let (g, x, _) = ext_gcd(a as i128, self.modulus as i128);
        if g != 1 {
            return Err(Error::Domain(format!("{a} is not a unit mod {}", self.modulus)));
        }
        Ok(x.rem_euclid(self.modulus as i128) as u64)
    }

    pub fn valuation(&self, a: u64) -> u32 {
        if a % self.modulus == 0 {
            return self.precision;
        }
        let mut v = 0;
        let mut x = a;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }

    pub fn from_ratio(&self, r: &Ratio<i64>) -> Result<u64> {
        let den = self.reduce_i64(*r.denom());
        let num = self.reduce_i64(*r.numer());
        Ok(self.mul(num, self.inv(den)?))
    }

    /// `t^k / k!` for `t` divisible by `p`, evaluated without dividing by p.
    pub fn divided_power(&self, t: u64, k: u64) -> Result<u64> {
        if k == 0 {
            return Ok(1 % self.modulus);
        }
        let t = t % self.modulus;
        if t == 0 {
            return Ok(0);
        }
        let v = self.valuation(t) as u64;
        if v == 0 {
            return Err(Error::NotInKernel(format!("parameter {t} is not divisible by p")));
        }
        let unit = t / self.p.pow(v as u32);
        let vf = factorial_valuation(k, self.p);
        let shift = k * v - vf;
        if shift >= self.precision as u64 {
            return Ok(0);
        }
        let mut fact_unit = 1u64;
        for i in 1..=k {
            let mut j = i;
            while j % self.p == 0 {
                j /= self.p;
            }
            fact_unit = self.mul(fact_unit, j % self.modulus);
        }
        let val = self.mul(self.pow(unit, k), self.inv(fact_unit)?);
        Ok(self.mul(val, self.p.pow(shift as u32)))
    }

    pub fn elem(&self, value: i64) -> ModpPowerInt {
        ModpPowerInt {
            value: self.reduce_i64(value),
            ring: *self,
        }
    }
}

/// A residue in Z/p^N together with its ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModpPowerInt {
    pub value: u64,
    pub ring: PadicRing,
}

impl ModpPowerInt {
    pub fn new(value: i64, p: u64, precision: u32) -> Result<Self> {
        Ok(PadicRing::new(p, precision)?.elem(value))
    }

    pub fn valuation(&self) -> u32 {
        self.ring.valuation(self.value)
    }

    pub fn add(self, o: Self) -> Self {
        ModpPowerInt { value: self.ring.add(self.value, o.value), ring: self.ring }
    }

    pub fn mul(self, o: Self) -> Self {
        ModpPowerInt { value: self.ring.mul(self.value, o.value), ring: self.ring }
    }

    pub fn neg(self) -> Self {
        ModpPowerInt { value: self.ring.neg(self.value), ring: self.ring }
    }
}

pub fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

pub fn factorial_valuation(k: u64, p: u64) -> u64 {
    let mut v = 0;
    let mut q = k;
    while q > 0 {
        q /= p;
        v += q;
    }
    v
}

/// p-adic valuation of a nonzero integer.
pub fn int_valuation(x: i64, p: u64) -> u32 {
    assert!(x != 0);
    let mut v = 0;
    let mut y = x.unsigned_abs();
    while y % p == 0 {
        y /= p;
        v += 1;
    }
    v
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Base-p digits, least significant first, padded to `len`.
pub fn digits(mut x: u64, p: u64, len: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(x % p);
        x /= p;
    }
    out
}

/// Binomial coefficient `C(n, k) mod p` by Lucas' theorem.
pub fn binomial_mod_p(mut n: u64, mut k: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while k > 0 {
        let (nd, kd) = (n % p, k % p);
        if kd > nd {
            return 0;
        }
        acc = acc * small_binomial(nd, kd, p) % p;
        n /= p;
        k /= p;
    }
    acc
}

fn small_binomial(n: u64, k: u64, p: u64) -> u64 {
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k {
        num = num * ((n - i) % p) % p;
        den = den * ((i + 1) % p) % p;
    }
    num * inv_mod_p(den, p) % p
}

pub fn inv_mod_p(a: u64, p: u64) -> u64 {
    let (_, x, _) = ext_gcd((a % p) as i128, p as i128);
    x.rem_euclid(p as i128) as u64
}

/// Square matrix over Z/p^N, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZpMatrix {
    pub ring: PadicRing,
    pub dim: usize,
    pub data: Vec<u64>,
}

impl ZpMatrix {
    pub fn zero(ring: PadicRing, dim: usize) -> Self {
        ZpMatrix { ring, dim, data: vec![0; dim * dim] }
    }

    pub fn identity(ring: PadicRing, dim: usize) -> Self {
        let mut m = Self::zero(ring, dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1 % ring.modulus;
        }
        m
    }

    pub fn from_rational(ring: PadicRing, q: &QMatrix) -> Result<Self> {
        let data = q
            .data
            .iter()
            .map(|x| ring.from_ratio(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(ZpMatrix { ring, dim: q.dim, data })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.dim + j]
    }

    pub fn mul(&self, o: &ZpMatrix) -> ZpMatrix {
        let n = self.dim;
        let m = self.ring.modulus as u128;
        let mut out = vec![0u64; n * n];
        let mut acc = vec![0u128; n];
        for i in 0..n {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                let row = &o.data[k * n..(k + 1) * n];
                for (slot, &b) in acc.iter_mut().zip(row) {
                    *slot += a as u128 * b as u128;
                }
            }
            for j in 0..n {
                out[i * n + j] = (acc[j] % m) as u64;
            }
        }
        ZpMatrix { ring: self.ring, dim: n, data: out }
    }

    pub fn add_scaled(&mut self, o: &ZpMatrix, c: u64) {
        if c == 0 {
            return;
        }
        for (a, &b) in self.data.iter_mut().zip(&o.data) {
            *a = self.ring.add(*a, self.ring.mul(b, c));
        }
    }

    pub fn sub(&self, o: &ZpMatrix) -> ZpMatrix {
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(&a, &b)| self.ring.sub(a, b))
            .collect();
        ZpMatrix { ring: self.ring, dim: self.dim, data }
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| self.get(i, j) == if i == j { 1 % self.ring.modulus } else { 0 })
        })
    }

    /// Largest `k` with `self = I mod p^k`, capped at the precision.
    pub fn congruence_level(&self) -> u32 {
        let mut level = self.ring.precision;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = if i == j {
                    self.ring.sub(self.get(i, j), 1)
                } else {
                    self.get(i, j)
                };
                level = level.min(self.ring.valuation(v));
            }
        }
        level
    }

    /// Inverse of a matrix congruent to the identity mod p, via the Neumann series.
    pub fn inverse_unipotent(&self) -> Result<ZpMatrix> {
        if self.congruence_level() == 0 {
            return Err(Error::NotInKernel("matrix is not congruent to I mod p".into()));
        }
        let id = ZpMatrix::identity(self.ring, self.dim);
        let x = id.sub(self);
        // (I - X)^{-1} = I + X + X^2 + ... ; X = 0 mod p, so N terms suffice.
        let mut acc = id.clone();
        let mut pw = id;
        for _ in 1..self.ring.precision {
            pw = pw.mul(&x);
            acc.add_scaled(&pw, 1);
        }
        Ok(acc)
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }
}

/// Square matrix over Q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    pub dim: usize,
    pub data: Vec<Ratio<i64>>,
}

impl QMatrix {
    pub fn zero(dim: usize) -> Self {
        QMatrix { dim, data: vec![Ratio::from_integer(0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Ratio::from_integer(1);
        }
        m
    }

    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zero(dim);
        m.data[i * dim + j] = Ratio::from_integer(1);
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Ratio<i64> {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Ratio<i64>) {
        self.data[i * self.dim + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| *x.numer() == 0)
    }

    pub fn mul(&self, o: &QMatrix) -> QMatrix {
        let n = self.dim;
        let mut out = QMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if *a.numer() == 0 {
                    continue;
                }
                for j in 0..n {
                    let b = o.data[k * n + j];
                    if *b.numer() != 0 {
                        out.data[i * n + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn bracket(&self, o: &QMatrix) -> QMatrix {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn add(&self, o: &QMatrix) -> QMatrix {
        QMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &QMatrix) -> QMatrix {
        QMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: Ratio<i64>) -> QMatrix {
        QMatrix { dim: self.dim, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn transpose(&self) -> QMatrix {
        let n = self.dim;
        let mut out = QMatrix::zero(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }
}

/// Row reduction over F_p: returns (rank, pivot columns) and reduces `m` in place.
pub fn row_reduce_mod_p(m: &mut [Vec<u64>], p: u64) -> (usize, Vec<usize>) {
    let rows = m.len();
    if rows == 0 {
        return (0, vec![]);
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| m[i][c] % p != 0) else {
            continue;
        };
        m.swap(r, piv);
        let inv = inv_mod_p(m[r][c], p);
        for x in m[r].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..cols {
                    let sub = f * m[r][j] % p;
                    m[i][j] = (m[i][j] + p - sub) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (r, pivots)
}

/// Inverse of a square matrix over F_p, if it exists.
pub fn invert_mod_p(m: &[Vec<u64>], p: u64) -> Option<Vec<Vec<u64>>> {
    let n = m.len();
    let mut aug: Vec<Vec<u64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<u64> = row.iter().map(|x| x % p).collect();
            r.extend((0..n).map(|j| u64::from(i == j)));
            r
        })
        .collect();
    let (rank, pivots) = row_reduce_mod_p(&mut aug, p);
    if rank < n || pivots.iter().take(n).any(|&c| c >= n) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ring_basics() {
        let r = PadicRing::new(3, 4).unwrap();
        assert_eq!(r.modulus, 81);
        assert_eq!(r.mul(r.inv(10).unwrap(), 10), 1);
        assert_eq!(r.valuation(18), 2);
        assert_eq!(r.valuation(0), 4);
        assert!(r.inv(6).is_err());
        assert!(PadicRing::new(2, 3).is_err());
        assert!(PadicRing::new(9, 3).is_err());
    }

    #[test]
    fn divided_powers_match_direct() {
        let r = PadicRing::new(3, 6).unwrap();
        // t = 3: t^3/3! = 27/6 = 9/2
        let expect = r.mul(9, r.inv(2).unwrap());
        assert_eq!(r.divided_power(3, 3).unwrap(), expect);
        assert!(r.divided_power(4, 2).is_err());
        assert_eq!(r.divided_power(0, 2).unwrap(), 0);
    }

    #[test]
    fn lucas_small() {
        // (1+y)^6 mod 3 = 1 + 2y^3 + y^6
        let c: Vec<u64> = (0..=6).map(|k| binomial_mod_p(6, k, 3)).collect();
        assert_eq!(c, vec![1, 0, 0, 2, 0, 0, 1]);
    }

    #[test]
    fn inverse_unipotent_roundtrip() {
        let r = PadicRing::new(5, 3).unwrap();
        let mut m = ZpMatrix::identity(r, 3);
        m.data[1] = 5;
        m.data[5] = 25;
        m.data[4] = 6;
        let inv = m.inverse_unipotent().unwrap();
        assert!(m.mul(&inv).is_identity());
    }

    proptest! {
        #[test]
        fn lucas_matches_pascal(n in 0u64..200, k in 0u64..200, pi in 0usize..3) {
            let p = [3u64, 5, 7][pi];
            let mut row = vec![1u64];
            for _ in 0..n {
                let mut next = vec![1u64; row.len() + 1];
                for i in 1..row.len() {
                    next[i] = (row[i - 1] + row[i]) % p;
                }
                row = next;
            }
            let expect = if k <= n { row[k as usize] } else { 0 };
            prop_assert_eq!(binomial_mod_p(n, k, p), expect);
        }

        #[test]
        fn divided_power_integrality(t in 1u64..40, k in 0u64..12) {
            let r = PadicRing::new(3, 8).unwrap();
            let t = 3 * t;
            let lhs = r.divided_power(t, k).unwrap();
            // lhs * k! = t^k
            let lhs_times = (1..=k).fold(lhs, |acc, i| r.mul(acc, i));
            prop_assert_eq!(lhs_times, r.pow(t, k));
        }
    }
}
