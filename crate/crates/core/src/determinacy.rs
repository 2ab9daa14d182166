//! Finite determinacy: a perturbation `g` of `f` by terms of order `≥ 3μ` is carried
//! back onto `f` by a coordinate change tangent to the identity.
//!
//! The coordinate change is built by Newton steps in `R = P/(f)`. Step `i` solves
//! `J_h · ε_i ≡ -h` modulo `(f) + m̂^T` for the current residual `h`, using only
//! coefficient monomials of order `≥ ord(h) - μ`, then replaces `h` by `h(t + ε_i)`.
//! The new residual is quadratic in `ε_i`, so orders double at each step.

use serde::Serialize;

use crate::base::Model;
use crate::error::{Error, Result};
use crate::layer::{ColumnOrder, Layer};
use crate::linalg::Echelon;
use crate::local::quotient_order;
use crate::milnor::{milnor_number, t1_length, Germ};
use crate::series::{Monomial, TruncatedSeries};

/// The jet order `3μ` beyond which perturbations do not change the germ.
pub fn determinacy_bound(mu: u64) -> Result<u64> {
    if mu == 0 {
        return Err(Error::SmoothGerm);
    }
    Ok(3 * mu)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub i: usize,
    /// Order of the residual after this step, `ord α_(i+1)`.
    pub ord_alpha: u32,
    /// Order of the correction `ε_i`.
    pub ord_eps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminacyRun {
    pub mu: u64,
    pub bound: u64,
    /// Order of the initial residual `g - f` modulo `(f)`.
    pub initial_order: u32,
    pub steps: Vec<StepRecord>,
    /// Accumulated coordinate change, `x = t + ε`.
    #[serde(skip)]
    pub epsilon: Vec<TruncatedSeries>,
    pub verified_to: u32,
    pub target_order: u32,
    /// Run outside the lemma's hypothesis (`ord(g - f) < 3μ`).
    pub forced: bool,
}

impl DeterminacyRun {
    /// Whether every step meets the quadratic convergence bounds (capped at the target).
    pub fn ledger_ok(&self) -> bool {
        let mu = self.mu as u32;
        let t = self.target_order;
        self.steps.iter().all(|s| {
            let i = s.i as u32;
            let eps_bound = ((1u32 << i) + 1) * mu;
            let alpha_bound = ((1u32 << (i + 1)) + 2) * mu;
            s.ord_eps >= eps_bound.min(t) && s.ord_alpha >= alpha_bound.min(t)
        })
    }
}

/// Germ with room for layer computations up to `level` (raising `N` over EqChar only).
fn room(f: &Germ, level: u32) -> Result<Germ> {
    let d = f.degree_bound.max(level + 1);
    let n = match f.base.model() {
        Model::EqChar => f.base.precision().max(level + 1),
        Model::MixedChar => {
            if f.base.precision() < level {
                return Err(Error::PrecisionInsufficient {
                    pi_precision: f.base.precision(),
                    reason: format!("layer {level} needs p-adic precision {level}"),
                });
            }
            f.base.precision()
        }
    };
    f.with_precision(d, n)
}

fn f_module_generators(f: &Germ) -> Vec<Vec<TruncatedSeries>> {
    let zero = TruncatedSeries::zero(f.base, f.num_vars(), f.degree_bound);
    let mut out = Vec::new();
    for fi in &f.f {
        for k in 0..f.r {
            let mut v = vec![zero.clone(); f.r];
            v[k] = fi.clone();
            out.push(v);
        }
    }
    out
}

/// Jacobian matrix of a vector of series, `r × m`.
fn jacobian(h: &[TruncatedSeries], degree_bound: u32) -> Vec<Vec<TruncatedSeries>> {
    h.iter()
        .map(|hi| {
            (0..hi.num_vars())
                .map(|j| hi.partial_derivative(j).expect("in range").with_degree_bound(degree_bound))
                .collect()
        })
        .collect()
}

/// Augmented system for `J·ε` modulo `(f)P^r + m̂^level P^r`, with `ε` ranging over
/// coefficient monomials of order `≥ low`.
struct Solver {
    cod: Layer,
    dom: Vec<(usize, u32, Monomial)>,
    ech: Echelon,
}

impl Solver {
    fn new(f: &Germ, jac: &[Vec<TruncatedSeries>], low: u32, level: u32) -> Self {
        let m = f.num_vars();
        let cod = Layer::new(f.base, m, f.r, level, ColumnOrder::LowFirst);
        let mut ech_dom = Vec::new();
        for mono in Monomial::all_below(m, level) {
            let d = mono.degree();
            match f.base.model() {
                Model::EqChar => {
                    for a in low.saturating_sub(d)..(level - d).min(f.base.precision()) {
                        for j in 0..m {
                            ech_dom.push((j, a, mono.clone()));
                        }
                    }
                }
                Model::MixedChar => {
                    let a = low.saturating_sub(d);
                    if a < f.base.precision() {
                        for j in 0..m {
                            ech_dom.push((j, a, mono.clone()));
                        }
                    }
                }
            }
        }
        let split = cod.ncols();
        let mut ech = Echelon::new(cod.ring(), split + ech_dom.len());
        for r in cod.relation_rows() {
            ech.insert(&r);
        }
        cod.insert_generators(&mut ech, &f_module_generators(f), 0);
        for (k, (j, a, mono)) in ech_dom.iter().enumerate() {
            let col: Vec<TruncatedSeries> = jac.iter().map(|row| row[*j].mul_monomial(mono, *a)).collect();
            let mut row = cod.vector(&col);
            row.push((split + k, 1));
            ech.insert(&row);
        }
        Self { cod, dom: ech_dom, ech }
    }

    /// `ε` with `J·ε ≡ -h`, or `None` if `h` is not in the image.
    fn solve(&self, h: &[TruncatedSeries], degree_bound: u32) -> Option<Vec<TruncatedSeries>> {
        let base = *self.cod.base();
        let m = self.cod.num_vars();
        let split = self.cod.ncols();
        let rem = self.ech.reduce(&self.cod.vector(h));
        if rem.iter().any(|&(c, _)| c < split) {
            return None;
        }
        let mut eps = vec![TruncatedSeries::zero(base, m, degree_bound); m];
        for (c, x) in rem {
            let (j, a, mono) = &self.dom[c - split];
            let coeff = base.shift(&base.from_int(x as i64), *a);
            eps[*j].add_term(mono.clone(), coeff);
        }
        Some(eps)
    }

    /// Whether `v ∈ J(coefficients) + (f) + m̂^level`.
    fn contains(&self, v: &[TruncatedSeries]) -> bool {
        let split = self.cod.ncols();
        self.ech.reduce(&self.cod.vector(v)).iter().all(|&(c, _)| c >= split)
    }
}

/// `(m̂^(μ+c) R)^r ⊂ J_f((m̂^c R)^(n+r))`, checked at layer `μ + c + 1` (Nakayama).
pub fn check_star_inclusion_with_mu(g: &Germ, mu: u64, c: u32) -> Result<bool> {
    let top = mu as u32 + c;
    let h = room(g, top + 1)?;
    let jac = jacobian(&h.f, h.degree_bound);
    let solver = Solver::new(&h, &jac, c, top + 1);
    let m = h.num_vars();
    let zero = TruncatedSeries::zero(h.base, m, h.degree_bound);
    for a in 0..=top {
        for mono in Monomial::all_of_degree(m, top - a) {
            let gen = TruncatedSeries::monomial(h.base, h.degree_bound, mono, h.base.uniformizer_power(a));
            if gen.is_zero() {
                continue;
            }
            for k in 0..h.r {
                let mut v = vec![zero.clone(); h.r];
                v[k] = gen.clone();
                if !solver.contains(&v) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

pub fn check_star_inclusion(g: &Germ, c: u32) -> Result<bool> {
    check_star_inclusion_with_mu(g, t1_length(g)?, c)
}

/// Smallest `t_order` over the entries (sentinel for all-zero vectors).
fn vector_order(v: &[TruncatedSeries]) -> u32 {
    v.iter().map(TruncatedSeries::t_order).min().unwrap_or(u32::MAX)
}

/// Newton iteration carrying `g` onto `f` modulo `m̂^target`.
///
/// `target` defaults to `4·3μ`. With `force`, a pair violating the jet bound is
/// still run and the result is marked `forced`.
pub fn newton_coordinate_change(
    f: &Germ,
    g: &[TruncatedSeries],
    target: Option<u32>,
    force: bool,
) -> Result<DeterminacyRun> {
    if g.len() != f.r {
        return Err(Error::Shape(format!("{} perturbed equations for r = {}", g.len(), f.r)));
    }
    let mu = t1_length(f)?;
    let bound = determinacy_bound(mu)?;
    let jet = g
        .iter()
        .zip(&f.f)
        .map(|(gi, fi)| gi.try_sub(&fi.with_degree_bound(gi.degree_bound())).map(|d| d.t_order()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min()
        .unwrap();
    let forced = u64::from(jet) < bound;
    if forced && !force {
        return Err(Error::JetBoundViolated {
            order: jet,
            bound: bound as u32,
        });
    }
    let mut t = target.unwrap_or(4 * bound as u32);
    if f.base.model() == Model::MixedChar {
        t = t.min(f.base.precision());
    }
    let h0 = room(f, t)?;
    let d = h0.degree_bound;
    let m = f.num_vars();
    let fgens = f_module_generators(&h0);
    let mut h: Vec<TruncatedSeries> = g
        .iter()
        .map(|gi| gi.with_base(h0.base).with_degree_bound(d).truncate_order(t))
        .collect();
    let mut phi: Vec<TruncatedSeries> = (0..m).map(|j| TruncatedSeries::var(h0.base, m, d, j)).collect();
    let mut ord = quotient_order(&h, &fgens, t);
    let initial_order = ord;
    let mut steps = Vec::new();
    let max_steps = (64 - (t as u64 / mu.max(1)).leading_zeros()) as usize + 3;
    while ord < t {
        let i = steps.len();
        if i >= max_steps {
            return Err(Error::LinearSolveFailed { step: i });
        }
        let low = (ord as u64).saturating_sub(mu).max(1) as u32;
        let jac = jacobian(&h, d);
        let solver = Solver::new(&h0, &jac, low, t);
        let eps = solver
            .solve(&h, d)
            .ok_or(Error::LinearSolveFailed { step: i })?;
        let ord_eps = vector_order(&eps).min(t);
        let images: Vec<TruncatedSeries> = (0..m)
            .map(|j| &TruncatedSeries::var(h0.base, m, d, j) + &eps[j])
            .collect();
        h = h
            .iter()
            .map(|hi| hi.substitute_mod_order(&images, t))
            .collect::<Result<_>>()?;
        phi = phi
            .iter()
            .map(|x| x.substitute_mod_order(&images, t))
            .collect::<Result<_>>()?;
        let next = quotient_order(&h, &fgens, t);
        steps.push(StepRecord {
            i,
            ord_alpha: next,
            ord_eps,
        });
        if next <= ord {
            return Err(Error::LinearSolveFailed { step: i });
        }
        ord = next;
    }
    let epsilon = phi
        .iter()
        .enumerate()
        .map(|(j, x)| x - &TruncatedSeries::var(h0.base, m, d, j))
        .collect();
    Ok(DeterminacyRun {
        mu,
        bound,
        initial_order,
        steps,
        epsilon,
        verified_to: ord.min(t),
        target_order: t,
        forced,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquisingularCheck {
    pub residual_order: u32,
    pub residual_ok: bool,
    pub mu_f: u64,
    pub mu_g: u64,
    pub mu_ok: bool,
    pub tangent_ok: bool,
    pub ledger_ok: bool,
    pub equisingular: bool,
}

/// Independent re-check of a run: the residual of `g(t + ε)` modulo `(f)`, equality
/// of Milnor numbers, and tangency of the coordinate change.
pub fn verify_equisingular(f: &Germ, g: &[TruncatedSeries], run: &DeterminacyRun) -> Result<EquisingularCheck> {
    let vt = run.verified_to;
    let h0 = room(f, vt)?;
    let d = h0.degree_bound;
    let m = f.num_vars();
    let images: Vec<TruncatedSeries> = (0..m)
        .map(|j| &TruncatedSeries::var(h0.base, m, d, j) + &run.epsilon[j].with_base(h0.base).with_degree_bound(d))
        .collect();
    let moved: Vec<TruncatedSeries> = g
        .iter()
        .map(|gi| gi.with_base(h0.base).with_degree_bound(d).substitute_mod_order(&images, vt))
        .collect::<Result<_>>()?;
    let residual_order = quotient_order(&moved, &f_module_generators(&h0), vt);
    let mu_f = milnor_number(f)?.mu;
    let gg = Germ::new(f.base, f.n, g.to_vec(), f.degree_bound.max(g[0].degree_bound()))?;
    let mu_g = milnor_number(&gg)?.mu;
    let tangent_ok = run.epsilon.iter().all(|e| e.t_order() >= 2);
    let residual_ok = residual_order >= vt;
    let ledger_ok = run.ledger_ok();
    Ok(EquisingularCheck {
        residual_order,
        residual_ok,
        mu_f,
        mu_g,
        mu_ok: mu_f == mu_g,
        tangent_ok,
        ledger_ok,
        equisingular: residual_ok && mu_f == mu_g && tangent_ok && ledger_ok,
    })
}
