//! Newton polygons of one-variable germs and the `n = 0` comparison of `μ` with
//! the number of geometric points specializing to the origin.
//!
//! For `f = Σ c_j t^j` with first unit coefficient at `j = d`, all `d` roots of the
//! Weierstrass polynomial of `f` have positive valuation, so `dim Φ⁰ = d - 1`. The polygon
//! splits those roots by valuation and carries the tameness test.

use std::fmt;

use serde::Serialize;

use crate::base::{inv_mod, mul_mod, BaseRing, RingElement};
use crate::error::{Error, Result};
use crate::milnor::{milnor_number, Germ};
use crate::series::{Monomial, TruncatedSeries};

/// A nonnegative rational `num/den` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(into = "String")]
pub struct Slope {
    pub num: u32,
    pub den: u32,
}

impl Slope {
    fn new(num: u32, den: u32) -> Self {
        let g = gcd(num, den);
        Slope { num: num / g, den: den / g }
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl From<Slope> for String {
    fn from(s: Slope) -> String {
        s.to_string()
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    /// Valuation of the roots on this segment.
    pub slope: Slope,
    pub length: u32,
    pub start: (u32, u32),
    pub end: (u32, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewtonPolygon {
    /// Multiplicity of the root `t = 0`.
    pub t_factor: u32,
    /// Segments of the lower hull, slopes strictly decreasing.
    pub segments: Vec<Segment>,
    /// Support points `(j, v(c_j))` for `j ≤ d`.
    pub points: Vec<(u32, u32)>,
    /// Index of the first unit coefficient.
    pub weierstrass_degree: u32,
}

impl NewtonPolygon {
    /// Roots of positive (possibly infinite) valuation, with multiplicity.
    pub fn specializing_roots(&self) -> u32 {
        self.t_factor + self.segments.iter().map(|s| s.length).sum::<u32>()
    }
}

fn coefficients(f: &TruncatedSeries) -> Result<Vec<RingElement>> {
    if f.num_vars() != 1 {
        return Err(Error::Shape(format!("expected one variable, got {}", f.num_vars())));
    }
    Ok((0..f.degree_bound()).map(|j| f.coeff(&Monomial(vec![j]))).collect())
}

pub fn newton_polygon(f: &TruncatedSeries) -> Result<NewtonPolygon> {
    let b = *f.base();
    let c = coefficients(f)?;
    if f.is_zero() {
        return Err(Error::InvalidInput("zero series has no Newton polygon".into()));
    }
    let d = c.iter().position(|x| b.is_unit(x)).ok_or_else(|| Error::PrecisionInsufficient {
        pi_precision: b.precision(),
        reason: format!("no unit coefficient below t-degree {}", f.degree_bound()),
    })?;
    if d == 0 {
        return Err(Error::Domain("germ does not pass through the origin".into()));
    }
    let points: Vec<(u32, u32)> = c[..=d]
        .iter()
        .enumerate()
        .filter(|(_, x)| !b.is_zero(x))
        .map(|(j, x)| (j as u32, b.valuation(x)))
        .collect();

    // lower hull by monotone chain, dropping collinear interior points
    let mut hull: Vec<(u32, u32)> = Vec::new();
    for &q in &points {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 as i64 - o.0 as i64) * (q.1 as i64 - o.1 as i64)
                - (a.1 as i64 - o.1 as i64) * (q.0 as i64 - o.0 as i64);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(q);
    }
    let segments = hull
        .windows(2)
        .map(|w| Segment {
            slope: Slope::new(w[0].1 - w[1].1, w[1].0 - w[0].0),
            length: w[1].0 - w[0].0,
            start: w[0],
            end: w[1],
        })
        .collect();
    Ok(NewtonPolygon { t_factor: points[0].0, segments, points, weierstrass_degree: d as u32 })
}

/// Points of the generic geometric fibre specializing to the origin, minus one.
pub fn dim_phi0(f: &TruncatedSeries) -> Result<u64> {
    Ok(u64::from(newton_polygon(f)?.specializing_roots()) - 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentTameness {
    pub slope: Slope,
    pub denominator: u32,
    pub p_coprime: bool,
    pub residual_separable: bool,
    /// Residual polynomial over `F_p`, constant term first.
    pub residual: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TamenessCertificate {
    pub segments: Vec<SegmentTameness>,
    pub tame: bool,
}

pub fn tameness(f: &TruncatedSeries) -> Result<TamenessCertificate> {
    let b = *f.base();
    let poly = newton_polygon(f)?;
    let c = coefficients(f)?;
    let p = b.p();
    let segments: Vec<SegmentTameness> = poly
        .segments
        .iter()
        .map(|s| {
            let (a, h) = (s.slope.den, s.slope.num);
            let residual: Vec<u64> = (0..=s.length / a)
                .map(|k| {
                    let x = &c[(s.start.0 + k * a) as usize];
                    let height = s.start.1 - k * h;
                    if !b.is_zero(x) && b.valuation(x) == height { b.leading_residue(x) } else { 0 }
                })
                .collect();
            SegmentTameness {
                slope: s.slope,
                denominator: a,
                p_coprime: u64::from(a) % p != 0,
                residual_separable: separable(&residual, p),
                residual,
            }
        })
        .collect();
    let tame = segments.iter().all(|s| s.p_coprime && s.residual_separable);
    Ok(TamenessCertificate { segments, tame })
}

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(mut a: Vec<u64>, b: &[u64], p: u64) -> Vec<u64> {
    let lead_inv = inv_mod(*b.last().unwrap(), p).unwrap();
    while a.len() >= b.len() {
        let q = mul_mod(*a.last().unwrap(), lead_inv, p);
        let shift = a.len() - b.len();
        for (i, &bi) in b.iter().enumerate() {
            a[shift + i] = (a[shift + i] + p - mul_mod(q, bi, p)) % p;
        }
        a = trim(a);
    }
    a
}

/// `gcd(r, r') = 1` over `F_p`.
fn separable(r: &[u64], p: u64) -> bool {
    let r = trim(r.to_vec());
    let dr: Vec<u64> = trim(r.iter().enumerate().skip(1).map(|(i, &c)| mul_mod(i as u64 % p, c, p)).collect());
    if dr.is_empty() {
        return r.len() <= 1;
    }
    let (mut x, mut y) = (r, dr);
    while !y.is_empty() {
        let rem = poly_rem(x, &y, p);
        x = y;
        y = rem;
    }
    x.len() == 1
}

/// `V(f)` is regular at the origin, that is `f ∉ (π, t)²`.
pub fn is_regular(f: &TruncatedSeries) -> Result<bool> {
    let b: BaseRing = *f.base();
    let c = coefficients(f)?;
    let c0 = &c[0];
    let linear_pi = !b.is_zero(c0) && b.valuation(c0) == 1;
    let linear_t = c.get(1).is_some_and(|x| b.is_unit(x));
    Ok(linear_pi || linear_t)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeligneMilnorReport {
    pub mu: Option<u64>,
    pub dim_phi0: u64,
    /// Zero on tame germs, unknown otherwise.
    pub swan: Option<u64>,
    pub tame: bool,
    pub regular: bool,
    /// `μ = dim Φ⁰ + Swan`, or `None` when the comparison was skipped.
    pub verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    pub polygon: NewtonPolygon,
    pub tameness: TamenessCertificate,
}

pub fn verify_deligne_milnor_n0(g: &Germ) -> Result<DeligneMilnorReport> {
    if g.n != 0 || g.r != 1 {
        return Err(Error::Shape(format!("expected n = 0 and r = 1, got n = {} and r = {}", g.n, g.r)));
    }
    let f = &g.f[0];
    let polygon = newton_polygon(f)?;
    let cert = tameness(f)?;
    let regular = is_regular(f)?;
    let dim = u64::from(polygon.specializing_roots()) - 1;
    let skipped = if !regular {
        Some("germ is not regular at the origin".to_string())
    } else if !cert.tame {
        let why = if cert.segments.iter().any(|s| !s.p_coprime) {
            "p divides a slope denominator"
        } else {
            "residual polynomial is inseparable"
        };
        Some(format!("not tame: {why}"))
    } else {
        None
    };
    let mu = match (&skipped, milnor_number(g)) {
        (None, r) => Some(r?.mu),
        (Some(_), r) => r.ok().map(|m| m.mu),
    };
    let verified = match skipped {
        None => mu.map(|m| m == dim),
        Some(_) => None,
    };
    Ok(DeligneMilnorReport {
        mu,
        dim_phi0: dim,
        swan: cert.tame.then_some(0),
        tame: cert.tame,
        regular,
        verified,
        skipped,
        polygon,
        tameness: cert,
    })
}
