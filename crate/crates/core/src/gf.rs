//! Finite fields `F_{p^m}` with exp/log tables.
//!
//! Elements are encoded as integers `Σ d_i p^i` in `[0, p^m)`, where `d_i` is the coefficient
//! of `x^i` modulo the primitive polynomial `modulus`. For `m = 1` the modulus is `x - g`
//! with `g` the least primitive root, so the encoding is the residue itself.

use serde::Serialize;

use crate::base::{is_prime, pow_mod};
use crate::error::{Error, Result};

/// Largest field built with tables.
pub const MAX_FIELD_SIZE: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf {
    p: u32,
    m: u32,
    size: u32,
    /// Low coefficients of the monic modulus, `x^m + Σ modulus[i] x^i`.
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldInfo {
    pub p: u32,
    pub degree: u32,
    /// Monic modulus, constant term first.
    pub modulus: Vec<u32>,
}

/// Splits `q = p^m`.
pub fn prime_power(q: u64) -> Result<(u32, u32)> {
    if q < 2 {
        return Err(Error::InvalidInput(format!("{q} is not a prime power")));
    }
    let p = (2..=q).find(|d| q % d == 0).unwrap();
    let mut m = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        m += 1;
    }
    if r != 1 {
        return Err(Error::InvalidInput(format!("{q} is not a prime power")));
    }
    Ok((p as u32, m))
}

impl Gf {
    pub fn new(p: u32, m: u32) -> Result<Self> {
        if !is_prime(u64::from(p)) || m == 0 {
            return Err(Error::InvalidInput(format!("F_{{{p}^{m}}} is not a field")));
        }
        let size = u64::from(p).checked_pow(m).filter(|&s| s <= MAX_FIELD_SIZE).ok_or_else(|| {
            Error::SizeCap(format!("F_{{{p}^{m}}} exceeds {MAX_FIELD_SIZE} elements"))
        })?;
        let size = size as u32;
        if m == 1 {
            let g = primitive_root(p);
            let mut exp = Vec::with_capacity(size as usize - 1);
            let mut x = 1u32;
            for _ in 0..size - 1 {
                exp.push(x);
                x = (u64::from(x) * u64::from(g) % u64::from(p)) as u32;
            }
            return Ok(Self::with_tables(p, 1, vec![p - g], exp));
        }
        let mut low = vec![0u32; m as usize];
        loop {
            if low[0] != 0 {
                if let Some(exp) = powers_of_x(p, &low, size) {
                    return Ok(Self::with_tables(p, m, low, exp));
                }
            }
            // next candidate in lexicographic order
            let mut i = 0;
            loop {
                low[i] += 1;
                if low[i] < p {
                    break;
                }
                low[i] = 0;
                i += 1;
            }
        }
    }

    /// The field with `q` elements.
    pub fn with_order(q: u64) -> Result<Self> {
        let (p, m) = prime_power(q)?;
        Self::new(p, m)
    }

    fn with_tables(p: u32, m: u32, modulus: Vec<u32>, exp: Vec<u32>) -> Self {
        let size = exp.len() as u32 + 1;
        let mut log = vec![0u32; size as usize];
        for (i, &x) in exp.iter().enumerate() {
            log[x as usize] = i as u32;
        }
        Gf { p, m, size, modulus, exp, log }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn info(&self) -> FieldInfo {
        let mut modulus = self.modulus.clone();
        modulus.push(1);
        FieldInfo { p: self.p, degree: self.m, modulus }
    }

    pub fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(i64::from(self.p)) as u32
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.m == 1 {
            return (a + b) % self.p;
        }
        let (mut a, mut b, mut r, mut w) = (a, b, 0u32, 1u32);
        for _ in 0..self.m {
            r += (a % self.p + b % self.p) % self.p * w;
            a /= self.p;
            b /= self.p;
            w = w.wrapping_mul(self.p);
        }
        r
    }

    pub fn neg(&self, a: u32) -> u32 {
        if self.m == 1 {
            return (self.p - a) % self.p;
        }
        let (mut a, mut r, mut w) = (a, 0u32, 1u32);
        for _ in 0..self.m {
            r += (self.p - a % self.p) % self.p * w;
            a /= self.p;
            w = w.wrapping_mul(self.p);
        }
        r
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] + self.log[b as usize];
        self.exp[(s % (self.size - 1)) as usize]
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let l = self.log[a as usize];
        Some(self.exp[((self.size - 1 - l) % (self.size - 1)) as usize])
    }

    pub fn pow(&self, a: u32, e: u32) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = u64::from(self.log[a as usize]) * u64::from(e) % u64::from(self.size - 1);
        self.exp[l as usize]
    }

    /// Multiplication by an integer.
    pub fn scale_int(&self, a: u32, k: u64) -> u32 {
        self.mul(a, (k % u64::from(self.p)) as u32)
    }

    /// Whether `a` lies in the subfield `F_{p^d}`.
    pub fn in_subfield(&self, a: u32, d: u32) -> bool {
        if a == 0 || d == self.m {
            return true;
        }
        if d == 0 || self.m % d != 0 {
            return false;
        }
        let sub = self.p.pow(d) - 1;
        self.log[a as usize] % ((self.size - 1) / sub) == 0
    }

    /// Table of a field homomorphism `self → big`, sending `x` to a root of the modulus.
    pub fn embed_into(&self, big: &Gf) -> Result<Vec<u32>> {
        if big.p != self.p || big.m % self.m != 0 {
            return Err(Error::InvalidInput(format!(
                "F_{} does not embed in F_{}",
                self.size, big.size
            )));
        }
        let root = (0..big.size)
            .find(|&z| {
                // Horner on x^m + Σ c_i x^i, coefficients in the prime field
                let mut acc = 1u32;
                for &c in self.modulus.iter().rev() {
                    acc = big.add(big.mul(acc, z), c);
                }
                acc == 0
            })
            .ok_or(Error::Domain("modulus has no root in the extension".into()))?;
        let mut powers = vec![1u32];
        for _ in 1..self.m {
            powers.push(big.mul(*powers.last().unwrap(), root));
        }
        Ok((0..self.size)
            .map(|a| {
                let mut a = a;
                let mut r = 0;
                for &w in &powers {
                    r = big.add(r, big.mul(w, a % self.p));
                    a /= self.p;
                }
                r
            })
            .collect())
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.size
    }
}

fn primitive_root(p: u32) -> u32 {
    if p == 2 {
        return 1;
    }
    let n = u64::from(p) - 1;
    let mut factors = Vec::new();
    let mut r = n;
    let mut d = 2;
    while d * d <= r {
        if r % d == 0 {
            factors.push(d);
            while r % d == 0 {
                r /= d;
            }
        }
        d += 1;
    }
    if r > 1 {
        factors.push(r);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&f| pow_mod(u64::from(g), n / f, u64::from(p)) != 1))
        .unwrap()
}

/// `x^i` for `i < size - 1` if `x` generates the unit group modulo `x^m + Σ low_i x^i`.
fn powers_of_x(p: u32, low: &[u32], size: u32) -> Option<Vec<u32>> {
    let m = low.len();
    let mut digits = vec![0u32; m];
    digits[0] = 1;
    let encode = |d: &[u32]| d.iter().rev().fold(0u32, |acc, &c| acc * p + c);
    let mut exp = Vec::with_capacity(size as usize - 1);
    for i in 0..size - 1 {
        if i > 0 && digits[0] == 1 && digits[1..].iter().all(|&c| c == 0) {
            return None;
        }
        exp.push(encode(&digits));
        let top = digits[m - 1];
        for j in (1..m).rev() {
            digits[j] = digits[j - 1];
        }
        digits[0] = 0;
        for j in 0..m {
            digits[j] = (digits[j] + (p - low[j]) * top) % p;
        }
    }
    (digits[0] == 1 && digits[1..].iter().all(|&c| c == 0)).then_some(exp)
}
