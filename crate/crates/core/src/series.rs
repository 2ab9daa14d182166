//! Multivariate power series over a [`BaseRing`], truncated at total t-degree `D`.
//!
//! Every result carries the weaker precision contract of its inputs: arithmetic is
//! exact modulo `(t_1..t_m)^D + (π^N)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::base::{BaseRing, Model, RingElement};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(num_vars: usize) -> Self {
        Monomial(vec![0; num_vars])
    }

    pub fn var(num_vars: usize, i: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All monomials in `num_vars` variables of total degree exactly `d`.
    pub fn all_of_degree(num_vars: usize, d: u32) -> Vec<Monomial> {
        fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if i + 1 == cur.len() {
                cur[i] = left;
                out.push(Monomial(cur.clone()));
                return;
            }
            for e in (0..=left).rev() {
                cur[i] = e;
                rec(i + 1, left - e, cur, out);
            }
        }
        if num_vars == 0 {
            return if d == 0 { vec![Monomial(vec![])] } else { vec![] };
        }
        let mut out = Vec::new();
        rec(0, d, &mut vec![0; num_vars], &mut out);
        out
    }

    /// All monomials of total degree `< d`, graded.
    pub fn all_below(num_vars: usize, d: u32) -> Vec<Monomial> {
        (0..d).flat_map(|k| Monomial::all_of_degree(num_vars, k)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    base: BaseRing,
    num_vars: usize,
    degree_bound: u32,
    terms: BTreeMap<Monomial, RingElement>,
}

impl TruncatedSeries {
    pub fn zero(base: BaseRing, num_vars: usize, degree_bound: u32) -> Self {
        Self {
            base,
            num_vars,
            degree_bound,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(base: BaseRing, num_vars: usize, degree_bound: u32, c: RingElement) -> Self {
        let mut s = Self::zero(base, num_vars, degree_bound);
        s.insert(Monomial::one(num_vars), c);
        s
    }

    pub fn one(base: BaseRing, num_vars: usize, degree_bound: u32) -> Self {
        Self::constant(base, num_vars, degree_bound, base.one())
    }

    pub fn from_int(base: BaseRing, num_vars: usize, degree_bound: u32, n: i64) -> Self {
        Self::constant(base, num_vars, degree_bound, base.from_int(n))
    }

    /// The uniformizer `π` (or `p`) as a constant series.
    pub fn uniformizer(base: BaseRing, num_vars: usize, degree_bound: u32) -> Self {
        Self::constant(base, num_vars, degree_bound, base.uniformizer_power(1))
    }

    pub fn var(base: BaseRing, num_vars: usize, degree_bound: u32, i: usize) -> Self {
        Self::monomial(base, degree_bound, Monomial::var(num_vars, i), base.one())
    }

    pub fn monomial(base: BaseRing, degree_bound: u32, m: Monomial, c: RingElement) -> Self {
        let mut s = Self::zero(base, m.num_vars(), degree_bound);
        s.insert(m, c);
        s
    }

    pub fn from_terms(
        base: BaseRing,
        num_vars: usize,
        degree_bound: u32,
        terms: impl IntoIterator<Item = (Monomial, RingElement)>,
    ) -> Result<Self> {
        let mut s = Self::zero(base, num_vars, degree_bound);
        for (m, c) in terms {
            if m.num_vars() != num_vars {
                return Err(Error::Shape(format!(
                    "monomial has {} exponents, expected {num_vars}",
                    m.num_vars()
                )));
            }
            s.add_term(m, c);
        }
        Ok(s)
    }

    fn insert(&mut self, m: Monomial, c: RingElement) {
        if m.degree() < self.degree_bound && !self.base.is_zero(&c) {
            self.terms.insert(m, c);
        }
    }

    /// Add `c·m` in place, keeping canonical form.
    pub fn add_term(&mut self, m: Monomial, c: RingElement) {
        if m.degree() >= self.degree_bound || self.base.is_zero(&c) {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(old) => {
                let s = self.base.add(old, &c);
                if self.base.is_zero(&s) {
                    self.terms.remove(&m);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn base(&self) -> &BaseRing {
        &self.base
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &RingElement)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> RingElement {
        self.terms.get(m).cloned().unwrap_or_else(|| self.base.zero())
    }

    pub fn constant_term(&self) -> RingElement {
        self.coeff(&Monomial::one(self.num_vars))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest total degree among stored terms (0 for the zero series).
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.num_vars != other.num_vars {
            return Err(Error::Shape(format!(
                "variable count {} vs {}",
                self.num_vars, other.num_vars
            )));
        }
        if self.base != other.base {
            return Err(Error::Shape(format!(
                "base rings differ: {:?} vs {:?}",
                self.base, other.base
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.degree_bound = self.degree_bound.min(other.degree_bound);
        out.terms.retain(|m, _| m.degree() < out.degree_bound);
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let d = self.degree_bound.min(other.degree_bound);
        let mut out = Self::zero(self.base, self.num_vars, d);
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            if da >= d {
                continue;
            }
            for (mb, cb) in &other.terms {
                if da + mb.degree() >= d {
                    continue;
                }
                out.add_term(ma.mul(mb), self.base.mul(ca, cb));
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = self.base.neg(c);
        }
        out
    }

    pub fn scale(&self, c: &RingElement) -> Self {
        let mut out = Self::zero(self.base, self.num_vars, self.degree_bound);
        for (m, a) in &self.terms {
            out.insert(m.clone(), self.base.mul(a, c));
        }
        out
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&self.base.from_int(k))
    }

    /// Multiply by `π^pi_shift · m`.
    pub fn mul_monomial(&self, m: &Monomial, pi_shift: u32) -> Self {
        let mut out = Self::zero(self.base, self.num_vars, self.degree_bound);
        for (a, c) in &self.terms {
            out.insert(a.mul(m), self.base.shift(c, pi_shift));
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.base, self.num_vars, self.degree_bound);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Formal `∂/∂t_j`; the result's degree bound drops by one.
    pub fn partial_derivative(&self, var_index: usize) -> Result<Self> {
        if var_index >= self.num_vars {
            return Err(Error::IndexOutOfRange {
                index: var_index,
                limit: self.num_vars,
            });
        }
        let mut out = Self::zero(
            self.base,
            self.num_vars,
            self.degree_bound.saturating_sub(1),
        );
        for (m, c) in &self.terms {
            let e = m.0[var_index];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[var_index] -= 1;
            out.insert(dm, self.base.scale_int(c, e as i64));
        }
        Ok(out)
    }

    /// The m̂-adic order: min over terms of `|α| + v(c)`, where m̂ = (π, t).
    /// Zero returns the sentinel `D + N`.
    pub fn t_order(&self) -> u32 {
        self.terms
            .iter()
            .map(|(m, c)| m.degree() + self.base.valuation(c))
            .min()
            .unwrap_or(self.order_cap())
    }

    /// Sentinel returned by [`t_order`](Self::t_order) for zero.
    pub fn order_cap(&self) -> u32 {
        self.degree_bound + self.base.precision()
    }

    /// Reduce modulo m̂^cap: drop every contribution of m̂-order `≥ cap`.
    pub fn truncate_order(&self, cap: u32) -> Self {
        let mut out = Self::zero(self.base, self.num_vars, self.degree_bound);
        for (m, c) in &self.terms {
            let d = m.degree();
            if d >= cap {
                continue;
            }
            let keep = cap - d;
            let c = match c {
                RingElement::Eq(digits) => {
                    let mut digits = digits.clone();
                    digits.truncate(keep as usize);
                    self.base.eq_from_digits(digits)
                }
                RingElement::Mixed(r) => {
                    if keep >= self.base.precision() {
                        c.clone()
                    } else {
                        self.base.mixed_from_residue(r % self.base.p().pow(keep))
                    }
                }
            };
            out.insert(m.clone(), c);
        }
        out
    }

    /// Change the degree bound. Lowering truncates; raising is only meaningful for
    /// polynomial data, whose terms are exact.
    pub fn with_degree_bound(&self, degree_bound: u32) -> Self {
        let mut out = Self::zero(self.base, self.num_vars, degree_bound);
        for (m, c) in &self.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    /// Move to another precision of the same model (see [`BaseRing::convert`]).
    pub fn with_base(&self, base: BaseRing) -> Self {
        let mut out = Self::zero(base, self.num_vars, self.degree_bound);
        for (m, c) in &self.terms {
            out.insert(m.clone(), base.convert(c, &self.base));
        }
        out
    }

    /// Composition `a(x_1, ..., x_m)`.
    ///
    /// Every image must lie in the maximal ideal (non-unit constant term).
    pub fn substitute(&self, images: &[TruncatedSeries]) -> Result<Self> {
        self.substitute_impl(images, None)
    }

    /// Composition modulo m̂^order_cap, truncating every intermediate product.
    pub fn substitute_mod_order(&self, images: &[TruncatedSeries], order_cap: u32) -> Result<Self> {
        self.substitute_impl(images, Some(order_cap))
    }

    fn substitute_impl(&self, images: &[TruncatedSeries], cap: Option<u32>) -> Result<Self> {
        if images.len() != self.num_vars {
            return Err(Error::Shape(format!(
                "{} images for {} variables",
                images.len(),
                self.num_vars
            )));
        }
        let Some(first) = images.first() else {
            return Ok(self.clone());
        };
        for x in images {
            if x.base != self.base || x.num_vars != first.num_vars {
                return Err(Error::Shape("images live in different rings".into()));
            }
            if self.base.is_unit(&x.constant_term()) {
                return Err(Error::Domain(
                    "substituted image has a unit constant term".into(),
                ));
            }
        }
        let d = images
            .iter()
            .map(|x| x.degree_bound)
            .min()
            .unwrap()
            .min(self.degree_bound);
        let trunc = |s: Self| match cap {
            Some(c) => s.truncate_order(c),
            None => s,
        };
        let images: Vec<_> = images.iter().map(|x| trunc(x.with_degree_bound(d))).collect();
        let m = first.num_vars;
        // powers[i][e] = x_i^e, grown on demand
        let mut powers: Vec<Vec<Self>> = images
            .iter()
            .map(|_| vec![Self::one(self.base, m, d)])
            .collect();
        let mut out = Self::zero(self.base, m, d);
        for (mono, c) in &self.terms {
            let mut term = Self::constant(self.base, m, d, c.clone());
            for (i, &e) in mono.0.iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = trunc(&powers[i][powers[i].len() - 1] * &images[i]);
                    powers[i].push(next);
                }
                if e > 0 {
                    term = trunc(&term * &powers[i][e as usize]);
                }
                if term.is_zero() {
                    break;
                }
            }
            out = &out + &term;
        }
        Ok(trunc(out))
    }

    /// Reduction modulo π as residue-field coefficients.
    pub fn residue_terms(&self) -> Vec<(Monomial, u64)> {
        self.terms
            .iter()
            .map(|(m, c)| (m.clone(), self.base.residue(c)))
            .filter(|(_, c)| *c != 0)
            .collect()
    }

    pub fn to_literal(&self) -> SeriesLiteral {
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            match c {
                RingElement::Eq(digits) => {
                    for (k, &d) in digits.iter().enumerate() {
                        if d != 0 {
                            terms.push(TermLiteral {
                                c: d,
                                pi: Some(k as u32),
                                exp: m.0.clone(),
                            });
                        }
                    }
                }
                RingElement::Mixed(r) => terms.push(TermLiteral {
                    c: *r,
                    pi: None,
                    exp: m.0.clone(),
                }),
            }
        }
        SeriesLiteral { terms }
    }

    pub fn from_literal(
        base: BaseRing,
        num_vars: usize,
        degree_bound: u32,
        lit: &SeriesLiteral,
    ) -> Result<Self> {
        let mut s = Self::zero(base, num_vars, degree_bound);
        for t in &lit.terms {
            if t.exp.len() != num_vars {
                return Err(Error::InvalidInput(format!(
                    "term exponent {:?} has {} entries, expected {num_vars}",
                    t.exp,
                    t.exp.len()
                )));
            }
            let c = match base.model() {
                Model::EqChar => {
                    if t.c >= base.p() {
                        return Err(Error::InvalidInput(format!(
                            "coefficient {} outside [0, {})",
                            t.c,
                            base.p()
                        )));
                    }
                    let pi = t.pi.unwrap_or(0);
                    let mut digits = vec![0; pi as usize + 1];
                    digits[pi as usize] = t.c;
                    base.eq_from_digits(digits)
                }
                Model::MixedChar => {
                    if t.pi.is_some() {
                        return Err(Error::InvalidInput(
                            "\"pi\" is only allowed for eqchar coefficients".into(),
                        ));
                    }
                    if t.c >= base.modulus() {
                        return Err(Error::InvalidInput(format!(
                            "coefficient {} outside [0, {})",
                            t.c,
                            base.modulus()
                        )));
                    }
                    base.mixed_from_residue(t.c)
                }
            };
            s.add_term(Monomial(t.exp.clone()), c);
        }
        Ok(s)
    }

    /// Render with the given variable names (`t1, t2, ...` when `None`).
    pub fn display_with<'a>(&'a self, names: Option<&'a [String]>) -> impl fmt::Display + 'a {
        SeriesDisplay { s: self, names }
    }
}

struct SeriesDisplay<'a> {
    s: &'a TruncatedSeries,
    names: Option<&'a [String]>,
}

impl fmt::Display for SeriesDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.s;
        if s.is_zero() {
            return write!(f, "0");
        }
        let pi = match s.base.model() {
            Model::EqChar => "pi".to_string(),
            Model::MixedChar => s.base.p().to_string(),
        };
        let mut first = true;
        for (m, c) in &s.terms {
            let coeff = match c {
                RingElement::Mixed(r) => r.to_string(),
                RingElement::Eq(d) => {
                    let parts: Vec<String> = d
                        .iter()
                        .enumerate()
                        .filter(|(_, &x)| x != 0)
                        .map(|(k, &x)| match k {
                            0 => x.to_string(),
                            1 => format!("{x}*{pi}"),
                            _ => format!("{x}*{pi}^{k}"),
                        })
                        .collect();
                    if parts.len() == 1 {
                        parts[0].clone()
                    } else {
                        format!("({})", parts.join(" + "))
                    }
                }
            };
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{coeff}")?;
            for (i, &e) in m.0.iter().enumerate() {
                let name = self
                    .names
                    .and_then(|n| n.get(i).cloned())
                    .unwrap_or_else(|| format!("t{}", i + 1));
                match e {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{e}")?,
                }
            }
        }
        write!(f, " + O(t^{})", s.degree_bound)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(None))
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        self.try_add(rhs).expect("incompatible series")
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        self.try_sub(rhs).expect("incompatible series")
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        self.try_mul(rhs).expect("incompatible series")
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries::neg(self)
    }
}

/// JSON form `{"terms":[{"c":int,"pi":int?,"exp":[int,...]}, ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesLiteral {
    pub terms: Vec<TermLiteral>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermLiteral {
    pub c: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<u32>,
    pub exp: Vec<u32>,
}
