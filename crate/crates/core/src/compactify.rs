//! Homogenized perturbation families over finite fields.
//!
//! A germ `f` with special fibre `f̄` in `N = n + r` variables is extended to
//! `a = f̄^{≤λ} + (terms of degree λ+1 and λ+2)` and homogenized to forms `ã` of degree `λ+2`
//! on `P^N` with coordinates `t_0, ..., t_N`. The point `y = (1:0:...:0)` is the germ itself.
//! A family is good when `V(ã)` is smooth of dimension `n` off `y`; this is scanned over
//! `F_{q^e}` for `e ≤ e_max`, which detects bad loci only up to that extension degree.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{FieldInfo, Gf};
use crate::milnor::{milnor_number, Germ};
use crate::series::{Monomial, TruncatedSeries};

/// Polynomial over `F_q` as `(exponents, coefficient)` pairs.
pub type Poly = Vec<(Vec<u32>, u32)>;

/// Largest enumeration in exact modes.
pub const ENUMERATION_CAP: u64 = 30_000_000;

/// Largest number of projective points in one scan.
pub const SCAN_POINT_CAP: u64 = 50_000_000;

const THREADS_VAR: &str = "MILNORKIT_THREADS";

#[derive(Debug, Clone)]
pub struct Template {
    pub field: Arc<Gf>,
    pub n: usize,
    pub r: usize,
    pub lambda: u32,
    /// `f̄` truncated to degree `≤ λ`.
    pub fbar: Vec<Poly>,
    /// Perturbation exponents, degree `λ+1` then `λ+2`.
    pub monomials: Vec<Vec<u32>>,
    germ: Option<Germ>,
    pub mu: Option<u64>,
}

impl Template {
    /// Template of a germ over `F_q`, with `λ = max(3μ, requested, 1)`.
    pub fn from_germ(g: &Germ, q: u64, lambda: Option<u32>) -> Result<Self> {
        let field = Arc::new(Gf::with_order(q)?);
        if u64::from(field.p()) != g.base.p() {
            return Err(Error::InvalidInput(format!(
                "q = {q} is not a power of the residue characteristic {}",
                g.base.p()
            )));
        }
        let mu = milnor_number(g)?.mu;
        let lambda = (3 * mu as u32).max(lambda.unwrap_or(0)).max(1);
        let fbar = g
            .special_fiber()
            .iter()
            .map(|s| {
                s.residue_terms()
                    .into_iter()
                    .filter(|(m, _)| m.degree() <= lambda)
                    .map(|(m, c)| (m.0, c as u32))
                    .collect()
            })
            .collect();
        let mut t = Self::from_fiber(field, g.n, fbar, lambda)?;
        t.germ = Some(g.clone());
        t.mu = Some(mu);
        Ok(t)
    }

    /// Template from special-fibre equations in `n + fbar.len()` variables.
    pub fn from_fiber(field: Arc<Gf>, n: usize, fbar: Vec<Poly>, lambda: u32) -> Result<Self> {
        let r = fbar.len();
        let nv = n + r;
        if r == 0 {
            return Err(Error::Shape("no equations".into()));
        }
        let mut trimmed = Vec::with_capacity(r);
        for poly in fbar {
            let mut out: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
            for (e, c) in poly {
                if e.len() != nv {
                    return Err(Error::Shape(format!("exponent {e:?} for {nv} variables")));
                }
                if c >= field.size() {
                    return Err(Error::InvalidInput(format!("{c} is not an element of F_{}", field.size())));
                }
                if e.iter().sum::<u32>() <= lambda {
                    let v = out.entry(e).or_insert(0);
                    *v = field.add(*v, c);
                }
            }
            trimmed.push(out.into_iter().filter(|&(_, c)| c != 0).collect());
        }
        let monomials = [lambda + 1, lambda + 2]
            .iter()
            .flat_map(|&d| Monomial::all_of_degree(nv, d))
            .map(|m| m.0)
            .collect();
        Ok(Template { field, n, r, lambda, fbar: trimmed, monomials, germ: None, mu: None })
    }

    pub fn num_vars(&self) -> usize {
        self.n + self.r
    }

    pub fn q(&self) -> u64 {
        u64::from(self.field.size())
    }

    /// Dimension of the parameter space of perturbations.
    pub fn dim_t(&self) -> usize {
        self.r * self.monomials.len()
    }

    pub fn family(&self, coefficients: Vec<Vec<u32>>) -> Result<PerturbationFamily<'_>> {
        if coefficients.len() != self.r || coefficients.iter().any(|c| c.len() != self.monomials.len()) {
            return Err(Error::Shape(format!(
                "expected {} × {} perturbation coefficients",
                self.r,
                self.monomials.len()
            )));
        }
        if coefficients.iter().flatten().any(|&c| c >= self.field.size()) {
            return Err(Error::InvalidInput("coefficient outside the field".into()));
        }
        Ok(PerturbationFamily { template: self, coefficients })
    }

    pub fn zero_family(&self) -> PerturbationFamily<'_> {
        PerturbationFamily { template: self, coefficients: vec![vec![0; self.monomials.len()]; self.r] }
    }

    /// Uniform coefficients from substream `index` of `seed`.
    pub fn draw(&self, seed: u64, index: u64) -> PerturbationFamily<'_> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let q = self.field.size();
        let coefficients = (0..self.r)
            .map(|_| (0..self.monomials.len()).map(|_| rng.gen_range(0..q)).collect())
            .collect();
        PerturbationFamily { template: self, coefficients }
    }
}

#[derive(Debug, Clone)]
pub struct PerturbationFamily<'a> {
    pub template: &'a Template,
    /// `coefficients[i][k]` multiplies `monomials[k]` in `a_i`.
    pub coefficients: Vec<Vec<u32>>,
}

impl PerturbationFamily<'_> {
    /// The affine equations `a_i` over `F_q`.
    pub fn affine(&self) -> Vec<Poly> {
        let t = self.template;
        (0..t.r)
            .map(|i| {
                let mut p = t.fbar[i].clone();
                for (m, &c) in t.monomials.iter().zip(&self.coefficients[i]) {
                    if c != 0 {
                        p.push((m.clone(), c));
                    }
                }
                p.sort();
                p
            })
            .collect()
    }

    /// Lift of `a` to the base ring of the template germ, when `q` is prime.
    pub fn lifted_germ(&self) -> Option<Result<Germ>> {
        let t = self.template;
        let g = t.germ.as_ref()?;
        if t.field.degree() != 1 {
            return None;
        }
        let d = g.degree_bound.max(t.lambda + 3);
        let b = g.base;
        let build = || {
            let f = g
                .f
                .iter()
                .zip(&self.coefficients)
                .map(|(fi, cs)| {
                    let mut a = TruncatedSeries::zero(b, t.num_vars(), d);
                    for (m, c) in fi.terms() {
                        if m.degree() <= t.lambda {
                            a.add_term(m.clone(), c.clone());
                        }
                    }
                    for (m, &c) in t.monomials.iter().zip(cs) {
                        a.add_term(Monomial(m.clone()), b.from_int(i64::from(c)));
                    }
                    a
                })
                .collect();
            Germ::new(b, g.n, f, d)
        };
        Some(build())
    }
}

/// A homogeneous polynomial in `t_0, ..., t_N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Form {
    pub terms: Poly,
}

impl Form {
    fn map(&self, emb: &[u32]) -> Form {
        Form { terms: self.terms.iter().map(|(e, c)| (e.clone(), emb[*c as usize])).collect() }
    }

    fn derivative(&self, field: &Gf, j: usize) -> Form {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e[j] > 0)
            .filter_map(|(e, c)| {
                let c = field.scale_int(*c, u64::from(e[j]));
                let mut e = e.clone();
                e[j] -= 1;
                (c != 0).then_some((e, c))
            })
            .collect();
        Form { terms }
    }

    fn eval(&self, field: &Gf, pows: &[Vec<u32>]) -> u32 {
        let mut acc = 0;
        for (e, c) in &self.terms {
            let mut v = *c;
            for (j, &k) in e.iter().enumerate() {
                if k > 0 {
                    v = field.mul(v, pows[j][k as usize]);
                }
            }
            acc = field.add(acc, v);
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomogenizedSystem {
    pub num_vars: usize,
    pub degree: u32,
    pub forms: Vec<Form>,
    /// Terms coming from `f̄`, that is `ḡ_i`.
    pub fiber_part: Vec<Form>,
}

impl HomogenizedSystem {
    /// Forms given directly, of common degree.
    pub fn from_forms(forms: Vec<Form>) -> Result<Self> {
        let first = forms.first().and_then(|f| f.terms.first()).ok_or(Error::Shape("empty system".into()))?;
        let nv = first.0.len() - 1;
        let degree = first.0.iter().sum();
        for f in &forms {
            if f.terms.iter().any(|(e, _)| e.len() != nv + 1 || e.iter().sum::<u32>() != degree) {
                return Err(Error::Shape("forms are not homogeneous of one degree".into()));
            }
        }
        let fiber_part = forms.iter().map(|_| Form { terms: vec![] }).collect();
        Ok(HomogenizedSystem { num_vars: nv, degree, forms, fiber_part })
    }

    /// Setting `t_0 = 1`.
    pub fn dehomogenize(&self) -> Vec<Poly> {
        self.forms
            .iter()
            .map(|f| {
                let mut p: Poly = f.terms.iter().map(|(e, c)| (e[1..].to_vec(), *c)).collect();
                p.sort();
                p
            })
            .collect()
    }

    /// `t_0²` divides every `ḡ_i`, so `ḡ_i` has vanishing first derivatives along `t_0 = 0`.
    pub fn t0_squared_divides_fiber_part(&self) -> bool {
        self.fiber_part.iter().all(|f| f.terms.iter().all(|(e, _)| e[0] >= 2))
    }
}

fn homogeneous(poly: &Poly, degree: u32) -> Form {
    let mut terms: Poly = poly
        .iter()
        .map(|(e, c)| {
            let mut h = vec![degree - e.iter().sum::<u32>()];
            h.extend_from_slice(e);
            (h, *c)
        })
        .collect();
    terms.sort();
    Form { terms }
}

pub fn homogenize(fam: &PerturbationFamily<'_>) -> HomogenizedSystem {
    let t = fam.template;
    let degree = t.lambda + 2;
    HomogenizedSystem {
        num_vars: t.num_vars(),
        degree,
        forms: fam.affine().iter().map(|p| homogeneous(p, degree)).collect(),
        fiber_part: t.fbar.iter().map(|p| homogeneous(p, degree)).collect(),
    }
}

fn rank(field: &Gf, mut rows: Vec<Vec<u32>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else { continue };
        rows.swap(rank, piv);
        let inv = field.inv(rows[rank][col]).unwrap();
        for i in rank + 1..rows.len() {
            if rows[i][col] != 0 {
                let f = field.mul(rows[i][col], inv);
                for k in col..ncols {
                    let v = field.mul(f, rows[rank][k]);
                    rows[i][k] = field.sub(rows[i][k], v);
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BadPoint {
    pub ext_degree: u32,
    /// Coordinates in `F_{q^e}`, first nonzero coordinate equal to 1.
    pub coords: Vec<u32>,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub ext_degree_max: u32,
    pub fields: Vec<FieldInfo>,
    /// Points with minimal field `F_{q^e}`, per `e`.
    pub points_scanned: Vec<u64>,
    pub points_on_variety: Vec<u64>,
    pub bad_points: Vec<BadPoint>,
    pub smooth_away_from_y: bool,
    pub caveat: String,
}

struct Extension {
    e: u32,
    field: Gf,
    embed: Vec<u32>,
}

/// Extension fields `F_{q^e}`, `e ≤ e_max`, with embeddings of `F_q`.
pub struct Scanner {
    base: Arc<Gf>,
    ext: Vec<Extension>,
}

impl Scanner {
    pub fn new(base: Arc<Gf>, ext_degree_max: u32) -> Result<Self> {
        if ext_degree_max == 0 {
            return Err(Error::InvalidInput("extension degree must be positive".into()));
        }
        let ext = (1..=ext_degree_max)
            .map(|e| {
                let field = if e == 1 { (*base).clone() } else { Gf::new(base.p(), base.degree() * e)? };
                let embed = base.embed_into(&field)?;
                Ok(Extension { e, field, embed })
            })
            .collect::<Result<_>>()?;
        Ok(Scanner { base, ext })
    }

    pub fn ext_degree_max(&self) -> u32 {
        self.ext.len() as u32
    }

    pub fn scan(&self, h: &HomogenizedSystem) -> Result<ScanReport> {
        let nv = h.num_vars;
        let r = h.forms.len();
        let mut report = ScanReport {
            ext_degree_max: self.ext_degree_max(),
            fields: self.ext.iter().map(|x| x.field.info()).collect(),
            points_scanned: vec![],
            points_on_variety: vec![],
            bad_points: vec![],
            smooth_away_from_y: true,
            caveat: format!(
                "complete only for points over F_{}^e with e <= {}",
                self.base.size(),
                self.ext_degree_max()
            ),
        };
        for x in &self.ext {
            let qe = u64::from(x.field.size());
            let total = (0..=nv as u32).try_fold(0u64, |acc, k| qe.checked_pow(k).and_then(|v| acc.checked_add(v)));
            if total.is_none_or(|t| t > SCAN_POINT_CAP) {
                return Err(Error::SizeCap(format!("P^{nv}(F_{qe}) has too many points")));
            }
            let f = &x.field;
            let forms: Vec<Form> = h.forms.iter().map(|g| g.map(&x.embed)).collect();
            let partials: Vec<Vec<Form>> =
                forms.iter().map(|g| (0..=nv).map(|j| g.derivative(f, j)).collect()).collect();
            let subdegrees: Vec<u32> =
                (1..x.e).filter(|d| x.e % d == 0).map(|d| d * self.base.degree()).collect();
            let (mut scanned, mut on) = (0u64, 0u64);
            let mut pows = vec![vec![0u32; h.degree as usize + 1]; nv + 1];
            for lead in 0..=nv {
                let free = nv - lead;
                let mut coords = vec![0u32; nv + 1];
                coords[lead] = 1;
                let count = qe.pow(free as u32);
                for idx in 0..count {
                    let mut k = idx;
                    for c in coords[lead + 1..].iter_mut() {
                        *c = (k % qe) as u32;
                        k /= qe;
                    }
                    if lead == 0 && idx == 0 {
                        continue;
                    }
                    if subdegrees.iter().any(|&d| coords.iter().all(|&c| f.in_subfield(c, d))) {
                        continue;
                    }
                    scanned += 1;
                    for (j, &c) in coords.iter().enumerate() {
                        pows[j][0] = 1;
                        for k in 1..pows[j].len() {
                            pows[j][k] = f.mul(pows[j][k - 1], c);
                        }
                    }
                    if forms.iter().any(|g| g.eval(f, &pows) != 0) {
                        continue;
                    }
                    on += 1;
                    let jac: Vec<Vec<u32>> = partials
                        .iter()
                        .map(|row| (0..=nv).filter(|&j| j != lead).map(|j| row[j].eval(f, &pows)).collect())
                        .collect();
                    let rk = rank(f, jac);
                    if rk < r {
                        report.bad_points.push(BadPoint { ext_degree: x.e, coords: coords.clone(), rank: rk });
                    }
                }
            }
            report.points_scanned.push(scanned);
            report.points_on_variety.push(on);
        }
        report.smooth_away_from_y = report.bad_points.is_empty();
        Ok(report)
    }
}

pub fn smoothness_scan(h: &HomogenizedSystem, base: Arc<Gf>, ext_degree_max: u32) -> Result<ScanReport> {
    Scanner::new(base, ext_degree_max)?.scan(h)
}

/// Runs `f` on a pool sized by `MILNORKIT_THREADS`, or the global pool.
fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let threads = std::env::var(THREADS_VAR).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleReport {
    pub q: u64,
    pub lambda: u32,
    pub seed: u64,
    pub samples: usize,
    pub ext_degree_max: u32,
    pub good_found: bool,
    pub first_good_sample: usize,
    pub failures: usize,
    /// `failures/samples`, exact.
    pub failure_rate: String,
    #[serde(skip)]
    pub failure_fraction: f64,
    /// Perturbation coefficients of the first good family.
    pub coefficients: Vec<Vec<u32>>,
    /// Bad points of the first good family; empty up to the scanned extensions.
    pub bad_points: Vec<BadPoint>,
    pub scan: ScanReport,
    pub mu_input: Option<u64>,
    pub mu_good: Option<u64>,
    /// `None` when `q` is not prime or the template has no germ.
    pub mu_preserved: Option<bool>,
}

/// Draws `samples` families, scans each, and reports the first good one.
pub fn sample_good(template: &Template, seed: u64, samples: usize, ext_degree_max: u32) -> Result<SampleReport> {
    let scanner = Scanner::new(template.field.clone(), ext_degree_max)?;
    let outcomes: Vec<Result<ScanReport>> = with_pool(|| {
        (0..samples)
            .into_par_iter()
            .map(|k| scanner.scan(&homogenize(&template.draw(seed, k as u64))))
            .collect()
    });
    let outcomes: Vec<ScanReport> = outcomes.into_iter().collect::<Result<_>>()?;
    let failures = outcomes.iter().filter(|s| !s.smooth_away_from_y).count();
    let first = outcomes
        .iter()
        .position(|s| s.smooth_away_from_y)
        .ok_or(Error::AllSamplesFailed { samples })?;
    let good = template.draw(seed, first as u64);
    let mu_good = match good.lifted_germ() {
        Some(g) => Some(milnor_number(&g?)?.mu),
        None => None,
    };
    let scan = outcomes[first].clone();
    Ok(SampleReport {
        q: template.q(),
        lambda: template.lambda,
        seed,
        samples,
        ext_degree_max,
        good_found: true,
        first_good_sample: first,
        failures,
        failure_rate: format!("{failures}/{samples}"),
        failure_fraction: failures as f64 / samples as f64,
        coefficients: good.coefficients.clone(),
        bad_points: scan.bad_points.clone(),
        scan,
        mu_input: template.mu,
        mu_good,
        mu_preserved: mu_good.zip(template.mu).map(|(a, b)| a == b),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodimCount {
    pub rows: usize,
    pub cols: usize,
    pub q: u64,
    /// `"exact"` or `"sampled"`.
    pub mode: String,
    /// `log_q` of the number of matrices.
    pub log_q_total: u32,
    /// Rank-deficient matrices, in exact mode.
    pub deficient: Option<u64>,
    pub hits: u64,
    pub trials: u64,
    pub fraction: f64,
    pub observed_codim: f64,
    /// 95% Wilson interval for the codimension, in sampled mode.
    pub codim_interval: Option<[f64; 2]>,
    pub theoretical_codim: usize,
}

/// Counts `(n+r) × r` matrices over `F_q` of rank `< r`.
pub fn determinantal_codim_count(n: usize, r: usize, q: u64) -> Result<CodimCount> {
    determinantal_codim_count_with(n, r, q, ENUMERATION_CAP, 200_000, 0)
}

pub fn determinantal_codim_count_with(
    n: usize,
    r: usize,
    q: u64,
    cap: u64,
    samples: u64,
    seed: u64,
) -> Result<CodimCount> {
    let field = Gf::with_order(q)?;
    let (rows, cols) = (n + r, r);
    let cells = (rows * cols) as u32;
    let total = q.checked_pow(cells).filter(|&t| t <= cap);
    let lq = (q as f64).ln();
    let decode = |mut k: u64| -> Vec<Vec<u32>> {
        (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| {
                        let c = (k % q) as u32;
                        k /= q;
                        c
                    })
                    .collect()
            })
            .collect()
    };
    let base = CodimCount {
        rows,
        cols,
        q,
        mode: String::new(),
        log_q_total: cells,
        deficient: None,
        hits: 0,
        trials: 0,
        fraction: 0.0,
        observed_codim: 0.0,
        codim_interval: None,
        theoretical_codim: n + 1,
    };
    if let Some(total) = total {
        let hits = with_pool(|| (0..total).into_par_iter().filter(|&k| rank(&field, decode(k)) < cols).count()) as u64;
        let fraction = hits as f64 / total as f64;
        return Ok(CodimCount {
            mode: "exact".into(),
            deficient: Some(hits),
            hits,
            trials: total,
            fraction,
            observed_codim: -fraction.ln() / lq,
            ..base
        });
    }
    let hits = with_pool(|| {
        (0..samples)
            .into_par_iter()
            .filter(|&k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k);
                let m = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(0..q as u32)).collect()).collect();
                rank(&field, m) < cols
            })
            .count()
    }) as u64;
    let phat = hits as f64 / samples as f64;
    let z = 1.96f64;
    let nn = samples as f64;
    let centre = (phat + z * z / (2.0 * nn)) / (1.0 + z * z / nn);
    let half = z * (phat * (1.0 - phat) / nn + z * z / (4.0 * nn * nn)).sqrt() / (1.0 + z * z / nn);
    let (lo, hi) = ((centre - half).max(0.0), (centre + half).min(1.0));
    Ok(CodimCount {
        mode: "sampled".into(),
        hits,
        trials: samples,
        fraction: phat,
        observed_codim: -phat.ln() / lq,
        codim_interval: Some([-hi.ln() / lq, -lo.ln() / lq]),
        ..base
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncidenceCheck {
    pub z: Vec<u32>,
    pub dim_t: usize,
    /// Parameters `a` with `z ∈ Y(a)` and `Y(a)` singular at `z`.
    pub count: u64,
    /// `q^(dim T - n - r - 1)`.
    pub predicted: f64,
    /// `q^(dim T - r - N r)` times the number of rank-deficient `N × r` matrices.
    pub expected_exact: u64,
    pub t0_squared_divides_fiber_part: bool,
    pub pass: bool,
}

/// Enumerates the fibre over `z` of the singular incidence locus in `T(F_q)`.
pub fn incidence_fiber_dim_check(template: &Template, z: &[u32]) -> Result<IncidenceCheck> {
    let f = &*template.field;
    let nv = template.num_vars();
    let r = template.r;
    let q = template.q();
    if z.len() != nv + 1 || z.iter().any(|&c| c >= f.size()) {
        return Err(Error::Shape(format!("z needs {} coordinates in F_{q}", nv + 1)));
    }
    let lead = z.iter().position(|&c| c != 0).ok_or(Error::InvalidInput("z is zero".into()))?;
    let inv = f.inv(z[lead]).unwrap();
    let z: Vec<u32> = z.iter().map(|&c| f.mul(c, inv)).collect();
    if lead == 0 && z[1..].iter().all(|&c| c == 0) {
        return Err(Error::InvalidInput("z must differ from y".into()));
    }
    let dim_t = template.dim_t();
    let total = q.checked_pow(dim_t as u32).filter(|&t| t <= ENUMERATION_CAP).ok_or_else(|| {
        Error::SizeCap(format!("T(F_{q}) has {q}^{dim_t} points"))
    })?;

    // ã_i(z) and the chart gradient are affine in the coefficients
    let zero = homogenize(&template.zero_family());
    let deg = zero.degree;
    let mut pows = vec![vec![0u32; deg as usize + 1]; nv + 1];
    for (j, &c) in z.iter().enumerate() {
        pows[j][0] = 1;
        for k in 1..=deg as usize {
            pows[j][k] = f.mul(pows[j][k - 1], c);
        }
    }
    let chart: Vec<usize> = (0..=nv).filter(|&j| j != lead).collect();
    let value_and_grad = |form: &Form| -> Vec<u32> {
        let mut v = vec![form.eval(f, &pows)];
        v.extend(chart.iter().map(|&j| form.derivative(f, j).eval(f, &pows)));
        v
    };
    let fixed: Vec<Vec<u32>> = zero.forms.iter().map(|g| value_and_grad(g)).collect();
    let per_monomial: Vec<Vec<u32>> = template
        .monomials
        .iter()
        .map(|m| {
            let mut e = vec![deg - m.iter().sum::<u32>()];
            e.extend_from_slice(m);
            value_and_grad(&Form { terms: vec![(e, 1)] })
        })
        .collect();
    let km = template.monomials.len();
    let count = with_pool(|| {
        (0..total)
            .into_par_iter()
            .filter(|&idx| {
                let mut k = idx;
                let mut jac = Vec::with_capacity(r);
                let mut on = true;
                for i in 0..r {
                    let mut v = fixed[i].clone();
                    for contrib in &per_monomial[..km] {
                        let c = (k % q) as u32;
                        k /= q;
                        if c != 0 {
                            for (x, &y) in v.iter_mut().zip(contrib) {
                                *x = f.add(*x, f.mul(c, y));
                            }
                        }
                    }
                    on &= v[0] == 0;
                    jac.push(v[1..].to_vec());
                }
                on && rank(f, jac) < r
            })
            .count()
    }) as u64;

    let min = determinantal_codim_count_with(nv - r, r, q, ENUMERATION_CAP, 0, 0)?
        .deficient
        .ok_or_else(|| Error::SizeCap("determinantal count too large to enumerate".into()))?;
    let free = (dim_t as u32).checked_sub((r + nv * r) as u32);
    let expected_exact = free.map_or(0, |e| q.pow(e) * min);
    let predicted = (q as f64).powi(dim_t as i32 - nv as i32 - 1);
    Ok(IncidenceCheck {
        z,
        dim_t,
        count,
        predicted,
        expected_exact,
        t0_squared_divides_fiber_part: zero.t0_squared_divides_fiber_part(),
        pass: free.is_some() && count == expected_exact,
    })
}
