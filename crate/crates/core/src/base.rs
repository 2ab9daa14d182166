//! Coefficient rings: truncated models of a complete discrete valuation ring.
//!
//! `EqChar` is `F_p[[π]]/(π^N)`, `MixedChar` is `Z/p^N`. In both the uniformizer
//! is nilpotent of order exactly `N` and the residue field is `F_p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    EqChar,
    MixedChar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BaseRing {
    model: Model,
    p: u64,
    precision: u32,
}

/// An element of a [`BaseRing`].
///
/// `Eq` holds the π-adic digits `c_0, c_1, ...` with trailing zeros trimmed, so
/// zero is the empty vector. `Mixed` holds the residue in `[0, p^N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingElement {
    Eq(Vec<u64>),
    Mixed(u64),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub(crate) fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

impl BaseRing {
    pub fn new(model: Model, p: u64, precision: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        if precision == 0 {
            return Err(Error::InvalidInput("precision must be at least 1".into()));
        }
        if model == Model::MixedChar {
            // keep p^N well inside u64 so that products fit in u128 comfortably
            let bits = (precision as f64) * (p as f64).log2();
            if bits > 62.0 {
                return Err(Error::InvalidInput(format!(
                    "p^N = {p}^{precision} does not fit the 62-bit residue representation"
                )));
            }
        }
        Ok(Self { model, p, precision })
    }

    pub fn eq_char(p: u64, precision: u32) -> Result<Self> {
        Self::new(Model::EqChar, p, precision)
    }

    pub fn mixed_char(p: u64, precision: u32) -> Result<Self> {
        Self::new(Model::MixedChar, p, precision)
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Residue characteristic.
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Working precision `N`.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// The same model at a different precision.
    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        Self::new(self.model, self.p, precision)
    }

    /// `p^N` for `MixedChar`, `p` for `EqChar` (the modulus of one stored digit).
    pub fn modulus(&self) -> u64 {
        match self.model {
            Model::EqChar => self.p,
            Model::MixedChar => self.p.pow(self.precision),
        }
    }

    pub fn zero(&self) -> RingElement {
        match self.model {
            Model::EqChar => RingElement::Eq(Vec::new()),
            Model::MixedChar => RingElement::Mixed(0),
        }
    }

    pub fn one(&self) -> RingElement {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> RingElement {
        match self.model {
            Model::EqChar => self.eq_from_digits(vec![n.rem_euclid(self.p as i64) as u64]),
            Model::MixedChar => RingElement::Mixed(n.rem_euclid(self.modulus() as i64) as u64),
        }
    }

    /// `π^k` (or `p^k`); zero once `k ≥ N`.
    pub fn uniformizer_power(&self, k: u32) -> RingElement {
        if k >= self.precision {
            return self.zero();
        }
        match self.model {
            Model::EqChar => {
                let mut d = vec![0; k as usize + 1];
                d[k as usize] = 1;
                RingElement::Eq(d)
            }
            Model::MixedChar => RingElement::Mixed(self.p.pow(k)),
        }
    }

    /// Build an `EqChar` element from π-adic digits (reduced mod p, truncated at N).
    pub fn eq_from_digits(&self, mut digits: Vec<u64>) -> RingElement {
        debug_assert_eq!(self.model, Model::EqChar);
        digits.truncate(self.precision as usize);
        for d in digits.iter_mut() {
            *d %= self.p;
        }
        while digits.last() == Some(&0) {
            digits.pop();
        }
        RingElement::Eq(digits)
    }

    pub fn mixed_from_residue(&self, r: u64) -> RingElement {
        RingElement::Mixed(r % self.modulus())
    }

    pub fn is_zero(&self, a: &RingElement) -> bool {
        match a {
            RingElement::Eq(d) => d.is_empty(),
            RingElement::Mixed(r) => *r == 0,
        }
    }

    /// π-adic valuation; equals `N` exactly for zero.
    pub fn valuation(&self, a: &RingElement) -> u32 {
        match a {
            RingElement::Eq(d) => d
                .iter()
                .position(|&c| c != 0)
                .map_or(self.precision, |i| i as u32),
            RingElement::Mixed(r) => {
                if *r == 0 {
                    return self.precision;
                }
                let mut v = 0;
                let mut x = *r;
                while x % self.p == 0 {
                    x /= self.p;
                    v += 1;
                }
                v
            }
        }
    }

    pub fn is_unit(&self, a: &RingElement) -> bool {
        self.valuation(a) == 0
    }

    /// Image in the residue field `F_p`.
    pub fn residue(&self, a: &RingElement) -> u64 {
        match a {
            RingElement::Eq(d) => d.first().copied().unwrap_or(0),
            RingElement::Mixed(r) => r % self.p,
        }
    }

    /// Residue of `a / π^v(a)`; zero for `a = 0`.
    pub fn leading_residue(&self, a: &RingElement) -> u64 {
        let v = self.valuation(a);
        match a {
            RingElement::Eq(d) => d.get(v as usize).copied().unwrap_or(0),
            RingElement::Mixed(r) => {
                if *r == 0 {
                    return 0;
                }
                (r / self.p.pow(v)) % self.p
            }
        }
    }

    pub fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        match (a, b) {
            (RingElement::Eq(x), RingElement::Eq(y)) => {
                let n = x.len().max(y.len());
                let digits = (0..n)
                    .map(|i| (x.get(i).unwrap_or(&0) + y.get(i).unwrap_or(&0)) % self.p)
                    .collect();
                self.eq_from_digits(digits)
            }
            (RingElement::Mixed(x), RingElement::Mixed(y)) => {
                RingElement::Mixed(((*x as u128 + *y as u128) % self.modulus() as u128) as u64)
            }
            _ => panic!("ring elements from different models"),
        }
    }

    pub fn neg(&self, a: &RingElement) -> RingElement {
        match a {
            RingElement::Eq(x) => {
                self.eq_from_digits(x.iter().map(|&c| (self.p - c) % self.p).collect())
            }
            RingElement::Mixed(x) => {
                let m = self.modulus();
                RingElement::Mixed((m - x % m) % m)
            }
        }
    }

    pub fn sub(&self, a: &RingElement, b: &RingElement) -> RingElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &RingElement, b: &RingElement) -> RingElement {
        match (a, b) {
            (RingElement::Eq(x), RingElement::Eq(y)) => {
                if x.is_empty() || y.is_empty() {
                    return self.zero();
                }
                let n = self.precision as usize;
                let len = (x.len() + y.len() - 1).min(n);
                let mut out = vec![0u64; len];
                for (i, &xi) in x.iter().enumerate() {
                    if xi == 0 {
                        continue;
                    }
                    for (j, &yj) in y.iter().enumerate() {
                        if i + j >= len {
                            break;
                        }
                        out[i + j] = (out[i + j] + xi * yj) % self.p;
                    }
                }
                self.eq_from_digits(out)
            }
            (RingElement::Mixed(x), RingElement::Mixed(y)) => {
                RingElement::Mixed(mul_mod(*x, *y, self.modulus()))
            }
            _ => panic!("ring elements from different models"),
        }
    }

    pub fn scale_int(&self, a: &RingElement, k: i64) -> RingElement {
        self.mul(a, &self.from_int(k))
    }

    /// Multiply by `π^k`.
    pub fn shift(&self, a: &RingElement, k: u32) -> RingElement {
        match a {
            RingElement::Eq(x) => {
                if x.is_empty() {
                    return self.zero();
                }
                let mut d = vec![0; k as usize];
                d.extend_from_slice(x);
                self.eq_from_digits(d)
            }
            RingElement::Mixed(_) => self.mul(a, &self.uniformizer_power(k)),
        }
    }

    pub fn inverse(&self, a: &RingElement) -> Result<RingElement> {
        if !self.is_unit(a) {
            return Err(Error::Domain("inverse of a non-unit".into()));
        }
        match a {
            RingElement::Eq(x) => {
                let n = self.precision as usize;
                let c0inv = inv_mod(x[0], self.p).expect("unit has invertible constant digit");
                let mut inv = vec![0u64; n];
                inv[0] = c0inv;
                for k in 1..n {
                    let mut s = 0u64;
                    for j in 1..=k.min(x.len() - 1) {
                        s = (s + x[j] * inv[k - j]) % self.p;
                    }
                    inv[k] = (self.p - s) % self.p * c0inv % self.p;
                }
                Ok(self.eq_from_digits(inv))
            }
            RingElement::Mixed(x) => Ok(RingElement::Mixed(
                inv_mod(*x, self.modulus()).expect("unit is invertible"),
            )),
        }
    }

    pub fn pow(&self, a: &RingElement, mut e: u64) -> RingElement {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Re-express an element at a different precision of the same model.
    ///
    /// Lowering truncates. Raising is exact only for `EqChar` digit data, which is
    /// how polynomial inputs are stored; `MixedChar` residues keep their representative.
    pub fn convert(&self, a: &RingElement, from: &BaseRing) -> RingElement {
        debug_assert_eq!(self.model, from.model);
        debug_assert_eq!(self.p, from.p);
        match a {
            RingElement::Eq(x) => self.eq_from_digits(x.clone()),
            RingElement::Mixed(x) => self.mixed_from_residue(*x),
        }
    }
}

impl RingElement {
    /// π-adic digits for `EqChar`; `None` for `MixedChar`.
    pub fn digits(&self) -> Option<&[u64]> {
        match self {
            RingElement::Eq(d) => Some(d),
            RingElement::Mixed(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_wraps_at_precision() {
        let r = BaseRing::mixed_char(3, 2).unwrap();
        let s = r.add(&r.from_int(3), &r.from_int(6));
        assert!(r.is_zero(&s));
        assert_eq!(r.valuation(&s), 2);
        assert_eq!(r.valuation(&r.from_int(3)), 1);
    }

    #[test]
    fn eq_pi_squared_vanishes() {
        let r = BaseRing::eq_char(5, 2).unwrap();
        let pi = r.uniformizer_power(1);
        assert!(r.is_zero(&r.mul(&pi, &pi)));
        assert_eq!(r.valuation(&pi), 1);
    }

    #[test]
    fn unit_inverse() {
        for r in [BaseRing::eq_char(7, 5).unwrap(), BaseRing::mixed_char(7, 5).unwrap()] {
            let u = r.add(&r.from_int(3), &r.uniformizer_power(1));
            let v = r.inverse(&u).unwrap();
            assert_eq!(r.mul(&u, &v), r.one());
            assert!(r.inverse(&r.uniformizer_power(1)).is_err());
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BaseRing::eq_char(4, 3).is_err());
        assert!(BaseRing::eq_char(5, 0).is_err());
        assert!(BaseRing::mixed_char(13, 40).is_err());
    }
}
