//! Complete-intersection germs and their Milnor numbers.
//!
//! Germ equations are polynomial data: their coefficients are exact, so the degree
//! bound (and, over EqChar, the π-precision) may be raised when a computation needs
//! more room.

use serde::{Deserialize, Serialize};

use crate::base::{BaseRing, Model};
use crate::error::{Error, Precision, Result};
use crate::koszul::{derived_exterior_power, euler_characteristic, QuotientRing, TwoTermComplex};
use crate::local::{colength, minors, module_colength, BasisElement, LocalIdeal};
use crate::series::{SeriesLiteral, TruncatedSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct Germ {
    pub base: BaseRing,
    pub n: usize,
    pub r: usize,
    pub f: Vec<TruncatedSeries>,
    pub degree_bound: u32,
    pub variables: Vec<String>,
}

impl Germ {
    pub fn new(base: BaseRing, n: usize, f: Vec<TruncatedSeries>, degree_bound: u32) -> Result<Self> {
        let r = f.len();
        if r == 0 {
            return Err(Error::Shape("a germ needs at least one equation".into()));
        }
        if degree_bound == 0 {
            return Err(Error::InvalidInput("degree bound must be at least 1".into()));
        }
        for fi in &f {
            if fi.num_vars() != n + r || *fi.base() != base {
                return Err(Error::Shape(format!(
                    "equations must live in {} variables over {:?}",
                    n + r,
                    base
                )));
            }
        }
        let f = f.into_iter().map(|s| s.with_degree_bound(degree_bound)).collect();
        let variables = (1..=n + r).map(|i| format!("t{i}")).collect();
        Ok(Self {
            base,
            n,
            r,
            f,
            degree_bound,
            variables,
        })
    }

    pub fn hypersurface(base: BaseRing, n: usize, f: TruncatedSeries, degree_bound: u32) -> Result<Self> {
        Self::new(base, n, vec![f], degree_bound)
    }

    pub fn num_vars(&self) -> usize {
        self.n + self.r
    }

    pub fn precision(&self) -> Precision {
        (self.degree_bound, self.base.precision())
    }

    /// Largest total degree among the equations.
    pub fn total_degree(&self) -> u32 {
        self.f.iter().map(TruncatedSeries::total_degree).max().unwrap_or(0)
    }

    /// The same equations at another precision (exact polynomial data).
    pub fn with_precision(&self, degree_bound: u32, pi_precision: u32) -> Result<Self> {
        let base = self.base.with_precision(pi_precision)?;
        let f = self
            .f
            .iter()
            .map(|s| s.with_base(base).with_degree_bound(degree_bound))
            .collect();
        Ok(Self {
            base,
            degree_bound,
            f,
            ..self.clone()
        })
    }

    /// `r × (n+r)` matrix of partials `∂f_i/∂t_j`, kept at the germ's degree bound.
    pub fn jacobian_matrix(&self) -> Vec<Vec<TruncatedSeries>> {
        self.f
            .iter()
            .map(|fi| {
                (0..self.num_vars())
                    .map(|j| {
                        fi.partial_derivative(j)
                            .expect("index in range")
                            .with_degree_bound(self.degree_bound)
                    })
                    .collect()
            })
            .collect()
    }

    /// Reductions modulo π.
    pub fn special_fiber(&self) -> Vec<TruncatedSeries> {
        self.f
            .iter()
            .map(|fi| {
                let mut s = TruncatedSeries::zero(self.base, self.num_vars(), self.degree_bound);
                for (m, c) in fi.residue_terms() {
                    s.add_term(m, self.base.from_int(c as i64));
                }
                s
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GermJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("germ JSON: {e}")))?;
        Self::from_spec(&g)
    }

    pub fn from_spec(g: &GermJson) -> Result<Self> {
        let base = BaseRing::new(g.base.model, g.base.p, g.base.precision)?;
        if g.f.len() != g.r {
            return Err(Error::InvalidInput(format!(
                "r = {} but {} equations given",
                g.r,
                g.f.len()
            )));
        }
        let m = g.n + g.r;
        let f = g
            .f
            .iter()
            .map(|lit| TruncatedSeries::from_literal(base, m, g.degree_bound, lit))
            .collect::<Result<Vec<_>>>()?;
        let mut germ = Self::new(base, g.n, f, g.degree_bound)?;
        if let Some(vars) = &g.variables {
            if vars.len() != m {
                return Err(Error::InvalidInput(format!(
                    "{} variable names for {m} variables",
                    vars.len()
                )));
            }
            germ.variables = vars.clone();
        }
        Ok(germ)
    }

    pub fn to_spec(&self) -> GermJson {
        GermJson {
            base: BaseSpec {
                model: self.base.model(),
                p: self.base.p(),
                precision: self.base.precision(),
            },
            n: self.n,
            r: self.r,
            degree_bound: self.degree_bound,
            variables: Some(self.variables.clone()),
            f: self.f.iter().map(TruncatedSeries::to_literal).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub model: Model,
    pub p: u64,
    pub precision: u32,
}

/// Germ JSON: `{"base":{...}, "n":1, "r":1, "degree_bound":12, "variables":[...], "f":[...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermJson {
    pub base: BaseSpec,
    pub n: usize,
    pub r: usize,
    pub degree_bound: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variables: Option<Vec<String>>,
    pub f: Vec<SeriesLiteral>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Diagnostic {
    /// Some `f_i` has a unit constant term: the origin is not on `X`.
    NotOnFiber,
    /// `(f̄_1..f̄_r)` could not be shown to cut out an `n`-dimensional germ in `k[[t]]`.
    SpecialFiberNotRegularSequence,
    /// No equation involves π: the singular locus contains the whole π-line.
    FiberDegeneracyRisk,
    /// The Jacobian ideal is the unit ideal.
    SmoothGerm,
}

impl Diagnostic {
    pub fn is_fatal(self) -> bool {
        matches!(
            self,
            Diagnostic::NotOnFiber | Diagnostic::SpecialFiberNotRegularSequence
        )
    }
}

/// Deterministic coefficients for the linear forms used by the dimension test.
fn linear_form_coeffs(seed: u64, count: usize, p: u64) -> Vec<u64> {
    let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
    (0..count)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            x % p
        })
        .collect()
}

/// Whether `k[[t]]/(f̄)` has dimension `n`, shown by cutting with `n` linear forms
/// and finding a finite-length quotient.
fn special_fiber_is_ci(g: &Germ) -> bool {
    let m = g.num_vars();
    let d = g.degree_bound.max(2 * g.total_degree()).max(8);
    let Ok(h) = g.with_precision(d, g.base.precision()) else { return false };
    let pi = TruncatedSeries::uniformizer(h.base, m, d);
    for attempt in 0..8u64 {
        let mut gens = h.special_fiber();
        gens.push(pi.clone());
        for i in 0..g.n {
            let cs = if attempt == 0 {
                (0..m).map(|j| u64::from(j == i)).collect()
            } else {
                linear_form_coeffs(attempt * 31 + i as u64, m, g.base.p())
            };
            let mut l = TruncatedSeries::zero(h.base, m, d);
            for (j, c) in cs.into_iter().enumerate() {
                l = &l + &TruncatedSeries::var(h.base, m, d, j).scale_int(c as i64);
            }
            gens.push(l);
        }
        let ideal = LocalIdeal::new(h.base, m, d, gens).expect("same ring");
        if colength(&ideal).is_ok() {
            return true;
        }
    }
    false
}

pub fn validate(g: &Germ) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if g.f.iter().any(|fi| g.base.is_unit(&fi.constant_term())) {
        out.push(Diagnostic::NotOnFiber);
        return out;
    }
    if !special_fiber_is_ci(g) {
        out.push(Diagnostic::SpecialFiberNotRegularSequence);
    }
    if g.base.model() == Model::EqChar
        && g.f.iter().all(|fi| fi.terms().all(|(_, c)| g.base.valuation(c) == 0))
    {
        out.push(Diagnostic::FiberDegeneracyRisk);
    }
    if let Ok(j) = jacobian_ideal(g) {
        if !j.is_proper() {
            out.push(Diagnostic::SmoothGerm);
        }
    }
    out
}

/// `(f_1..f_r) + (r × r minors of ∂f_i/∂t_j)`.
pub fn jacobian_ideal(g: &Germ) -> Result<LocalIdeal> {
    let jm = minors(&g.jacobian_matrix(), g.r)?;
    let mut gens = g.f.clone();
    gens.extend(jm.generators().iter().cloned());
    LocalIdeal::new(g.base, g.num_vars(), g.degree_bound, gens)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MilnorConfig {
    /// Largest degree bound tried by the retry policy.
    pub max_degree_bound: u32,
}

impl Default for MilnorConfig {
    fn default() -> Self {
        Self {
            max_degree_bound: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuComputation {
    pub mu: u64,
    pub certificate: u32,
    pub precision_used: Precision,
    pub basis: Vec<BasisElement>,
}

/// Run `compute` at growing precision: `D` starts at `max(D_germ, 2·deg f, 8)` and
/// doubles on `NotFiniteLength` (together with `N` over EqChar) up to the cap.
fn with_retry<T>(g: &Germ, cfg: MilnorConfig, mut compute: impl FnMut(&Germ) -> Result<T>) -> Result<(T, Germ)> {
    let mut d = g.degree_bound.max(2 * g.total_degree()).max(8);
    let mut n = match g.base.model() {
        Model::EqChar => g.base.precision().max(d),
        Model::MixedChar => g.base.precision(),
    };
    loop {
        let h = g.with_precision(d, n)?;
        match compute(&h) {
            Err(Error::NotFiniteLength { .. }) if 2 * d <= cfg.max_degree_bound => {
                d *= 2;
                if g.base.model() == Model::EqChar {
                    n = n.max(d);
                }
            }
            Err(e) => return Err(e),
            Ok(v) => return Ok((v, h)),
        }
    }
}

pub fn milnor_number_with(g: &Germ, cfg: MilnorConfig) -> Result<MuComputation> {
    let (q, h) = with_retry(g, cfg, |h| colength(&jacobian_ideal(h)?))?;
    Ok(MuComputation {
        mu: q.length,
        certificate: q.certificate,
        precision_used: h.precision(),
        basis: q.basis,
    })
}

/// `μ = len P/((f) + r×r minors)`.
pub fn milnor_number(g: &Germ) -> Result<MuComputation> {
    milnor_number_with(g, MilnorConfig::default())
}

/// Length of `coker(O_X^(n+r) → O_X^r)` given by the Jacobian matrix.
pub fn t1_length_with(g: &Germ, cfg: MilnorConfig) -> Result<u64> {
    let (len, _) = with_retry(g, cfg, |h| {
        let jac = h.jacobian_matrix();
        let mut gens: Vec<Vec<TruncatedSeries>> = (0..h.num_vars())
            .map(|j| (0..h.r).map(|i| jac[i][j].clone()).collect())
            .collect();
        for fi in &h.f {
            for k in 0..h.r {
                let mut v = vec![TruncatedSeries::zero(h.base, h.num_vars(), h.degree_bound); h.r];
                v[k] = fi.clone();
                gens.push(v);
            }
        }
        module_colength(h.base, h.num_vars(), h.degree_bound, h.r, &gens).map(|q| q.length)
    })?;
    Ok(len)
}

pub fn t1_length(g: &Germ) -> Result<u64> {
    t1_length_with(g, MilnorConfig::default())
}

/// `χ(LΛ^(n+1) C_df)` over `O_X = P/(f)`, for hypersurfaces.
pub fn milnor_via_koszul_with(g: &Germ, cfg: MilnorConfig) -> Result<i64> {
    if g.r != 1 {
        return Err(Error::Domain(
            "the Koszul-side Milnor number is implemented for hypersurfaces only".into(),
        ));
    }
    let (chi, _) = with_retry(g, cfg, |h| {
        // the homology layers need twice the colength certificate
        let cert = colength(&jacobian_ideal(h)?)?.certificate;
        let need = 2 * (cert + 3);
        let h = if h.degree_bound < need || (h.base.model() == Model::EqChar && h.base.precision() < need) {
            let n = match h.base.model() {
                Model::EqChar => h.base.precision().max(need),
                Model::MixedChar => h.base.precision(),
            };
            h.with_precision(h.degree_bound.max(need), n)?
        } else {
            h.clone()
        };
        let m = h.num_vars();
        let ring = QuotientRing::new(LocalIdeal::new(h.base, m, h.degree_bound, h.f.clone())?);
        let df = h.jacobian_matrix().remove(0);
        let complex = derived_exterior_power(&TwoTermComplex { ambient: ring, v: df }, m)?;
        euler_characteristic(&complex)
    })?;
    Ok(chi)
}

pub fn milnor_via_koszul(g: &Germ) -> Result<i64> {
    milnor_via_koszul_with(g, MilnorConfig::default())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MilnorReport {
    pub mu: u64,
    pub certificate: u32,
    pub mu_via_koszul: Option<i64>,
    pub t1_length: Option<u64>,
    pub agreement: bool,
    pub precision_used: Precision,
    pub basis: Vec<BasisElement>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn milnor_report(g: &Germ, cfg: MilnorConfig) -> Result<MilnorReport> {
    let diagnostics = validate(g);
    let mu = milnor_number_with(g, cfg)?;
    let koszul = if g.r == 1 {
        Some(milnor_via_koszul_with(g, cfg)?)
    } else {
        None
    };
    let t1 = t1_length_with(g, cfg)?;
    let agreement = koszul.map_or(true, |k| k == mu.mu as i64) && (g.r > 1 || t1 == mu.mu);
    Ok(MilnorReport {
        mu: mu.mu,
        certificate: mu.certificate,
        mu_via_koszul: koszul,
        t1_length: Some(t1),
        agreement,
        precision_used: mu.precision_used,
        basis: mu.basis,
        diagnostics,
    })
}
