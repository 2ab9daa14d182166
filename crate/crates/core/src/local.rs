//! Ideals and finitely presented modules over the truncated local ring, with certified
//! lengths.
//!
//! The length of `M = P^b / N` is computed layer by layer: `L(c) = len(P^b/(N + m̂^c P^b))`.
//! The first `c` with `L(c) = L(c+1)` gives `m̂^c P^b ⊂ N + m̂^(c+1) P^b`, hence
//! `m̂^c P^b ⊂ N` by Nakayama, and then `len(M) = L(c)`. The certificate needs data
//! up to degree `c + 1`, so `c + 1 ≤ min(D, N)`.

use serde::Serialize;

use crate::base::{BaseRing, Model};
use crate::error::{Error, Result};
use crate::layer::{ColumnOrder, Layer};
use crate::linalg::Echelon;
use crate::series::{Monomial, TruncatedSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct LocalIdeal {
    base: BaseRing,
    num_vars: usize,
    degree_bound: u32,
    generators: Vec<TruncatedSeries>,
}

impl LocalIdeal {
    pub fn new(
        base: BaseRing,
        num_vars: usize,
        degree_bound: u32,
        generators: Vec<TruncatedSeries>,
    ) -> Result<Self> {
        for g in &generators {
            if g.num_vars() != num_vars || *g.base() != base {
                return Err(Error::Shape("generator lives in a different ring".into()));
            }
        }
        let generators = generators
            .into_iter()
            .map(|g| g.with_degree_bound(g.degree_bound().min(degree_bound)))
            .collect();
        Ok(Self {
            base,
            num_vars,
            degree_bound,
            generators,
        })
    }

    /// Build from non-empty generators, taking the ambient ring from the first one.
    pub fn from_generators(generators: Vec<TruncatedSeries>) -> Result<Self> {
        let g0 = generators
            .first()
            .ok_or_else(|| Error::Shape("empty generator list".into()))?;
        let d = generators.iter().map(|g| g.degree_bound()).min().unwrap();
        Self::new(*g0.base(), g0.num_vars(), d, generators)
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

    pub fn generators(&self) -> &[TruncatedSeries] {
        &self.generators
    }

    /// Whether every generator lies in the maximal ideal.
    pub fn is_proper(&self) -> bool {
        self.generators
            .iter()
            .all(|g| !self.base.is_unit(&g.constant_term()))
    }

    fn as_module_generators(&self) -> Vec<Vec<TruncatedSeries>> {
        self.generators.iter().map(|g| vec![g.clone()]).collect()
    }
}

/// One residue-field composition factor: `π^pi · t^exp · e_block`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisElement {
    pub block: usize,
    pub pi: u32,
    pub exp: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct FiniteLengthModule {
    /// Generators of the submodule `N ⊂ P^b` presenting `P^b / N`.
    pub presentation: Vec<Vec<TruncatedSeries>>,
    pub basis: Vec<BasisElement>,
    pub length: u64,
    pub certificate: u32,
    layer: Layer,
    echelon: Echelon,
}

impl FiniteLengthModule {
    pub fn blocks(&self) -> usize {
        self.layer.blocks()
    }

    /// Canonical representative of `v` modulo the submodule.
    pub fn normal_form(&self, v: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        if v.len() != self.layer.blocks() {
            return Err(Error::Shape(format!(
                "vector of length {} in a module of rank {}",
                v.len(),
                self.layer.blocks()
            )));
        }
        let d = v.iter().map(|s| s.degree_bound()).min().unwrap_or(0);
        let rem = self.echelon.reduce(&self.layer.vector(v));
        Ok(self.layer.to_series(&rem, d))
    }

    pub fn contains(&self, v: &[TruncatedSeries]) -> Result<bool> {
        Ok(self.normal_form(v)?.iter().all(TruncatedSeries::is_zero))
    }
}

fn precision_error(base: &BaseRing, degree_bound: u32) -> Error {
    Error::NotFiniteLength {
        precision: (degree_bound, base.precision()),
        degree: None,
    }
}

/// Certified length of `P^blocks / (gens)`.
pub fn module_colength(
    base: BaseRing,
    num_vars: usize,
    degree_bound: u32,
    blocks: usize,
    gens: &[Vec<TruncatedSeries>],
) -> Result<FiniteLengthModule> {
    if blocks == 0 {
        return Err(Error::Shape("module of rank 0".into()));
    }
    if gens.iter().any(|g| g.len() != blocks) {
        return Err(Error::Shape("generator of wrong rank".into()));
    }
    if gens.iter().all(|g| g.iter().all(TruncatedSeries::is_zero)) {
        return Err(precision_error(&base, degree_bound));
    }
    let cap = degree_bound.min(base.precision());
    let build = |c: u32| {
        let layer = Layer::new(base, num_vars, blocks, c, ColumnOrder::HighFirst);
        let ech = layer.submodule(gens);
        (layer, ech)
    };
    let mut prev = build(0);
    let mut c = 0;
    while c < cap {
        let next = build(c + 1);
        if prev.1.quotient_length() == next.1.quotient_length() {
            let (layer, echelon) = prev;
            return Ok(finish(gens, layer, echelon, c));
        }
        prev = next;
        c += 1;
    }
    match base.model() {
        Model::MixedChar if base.precision() <= degree_bound => Err(Error::PrecisionInsufficient {
            pi_precision: base.precision(),
            reason: format!("no stabilization layer below p-adic precision {}", base.precision()),
        }),
        _ => Err(precision_error(&base, degree_bound)),
    }
}

fn finish(gens: &[Vec<TruncatedSeries>], layer: Layer, echelon: Echelon, c: u32) -> FiniteLengthModule {
    let mut basis = Vec::new();
    for (i, col) in layer.columns().iter().enumerate() {
        let free = match echelon.pivot(i) {
            Some(piv) => piv.val,
            None => layer.ring().k(),
        };
        for j in 0..free {
            basis.push(BasisElement {
                block: col.block,
                pi: col.pi + j,
                exp: col.mono.0.clone(),
            });
        }
    }
    basis.reverse();
    FiniteLengthModule {
        presentation: gens.to_vec(),
        length: echelon.quotient_length(),
        certificate: c,
        basis,
        layer,
        echelon,
    }
}

/// Certified length of `P / I`.
pub fn colength(ideal: &LocalIdeal) -> Result<FiniteLengthModule> {
    module_colength(
        ideal.base,
        ideal.num_vars,
        ideal.degree_bound,
        1,
        &ideal.as_module_generators(),
    )
}

/// Representative of `a` modulo `I` in the staircase complement.
pub fn normal_form(a: &TruncatedSeries, ideal: &LocalIdeal) -> Result<TruncatedSeries> {
    let q = colength(ideal)?;
    Ok(q.normal_form(std::slice::from_ref(a))?.remove(0))
}

/// Normal form modulo `I + m̂^level`, without a finiteness certificate.
pub fn normal_form_at_level(a: &TruncatedSeries, ideal: &LocalIdeal, level: u32) -> TruncatedSeries {
    let layer = Layer::new(ideal.base, ideal.num_vars, 1, level, ColumnOrder::HighFirst);
    let ech = layer.submodule(&ideal.as_module_generators());
    let rem = ech.reduce(&layer.vector(std::slice::from_ref(a)));
    layer.to_series(&rem, a.degree_bound()).remove(0)
}

/// Largest `c ≤ cap` with `v ∈ (gens) + m̂^c P^b`.
pub fn quotient_order(v: &[TruncatedSeries], gens: &[Vec<TruncatedSeries>], cap: u32) -> u32 {
    let Some(first) = v.first() else { return cap };
    let base = *first.base();
    let m = first.num_vars();
    let blocks = v.len();
    match base.model() {
        Model::EqChar => {
            let layer = Layer::new(base, m, blocks, cap, ColumnOrder::LowFirst);
            let ech = layer.submodule(gens);
            layer.order_of(&ech.reduce(&layer.vector(v)))
        }
        Model::MixedChar => {
            let member = |c: u32| {
                let layer = Layer::new(base, m, blocks, c, ColumnOrder::LowFirst);
                layer.submodule(gens).contains(&layer.vector(v))
            };
            // membership in (gens) + m̂^c is monotone in c
            let (mut lo, mut hi) = (0, cap);
            while lo < hi {
                let mid = (lo + hi + 1) / 2;
                if member(mid) {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            lo
        }
    }
}

/// Determinant by Laplace expansion along the first row.
pub fn determinant(mx: &[Vec<TruncatedSeries>]) -> Result<TruncatedSeries> {
    let n = mx.len();
    if n == 0 || mx.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("determinant of a non-square matrix".into()));
    }
    if n == 1 {
        return Ok(mx[0][0].clone());
    }
    let mut acc = TruncatedSeries::zero(*mx[0][0].base(), mx[0][0].num_vars(), mx[0][0].degree_bound());
    for j in 0..n {
        if mx[0][j].is_zero() {
            continue;
        }
        let sub: Vec<Vec<TruncatedSeries>> = mx[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = mx[0][j].try_mul(&determinant(&sub)?)?;
        acc = if j % 2 == 0 { acc.try_add(&term)? } else { acc.try_sub(&term)? };
    }
    Ok(acc)
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Ideal of all `size × size` minors.
pub fn minors(mx: &[Vec<TruncatedSeries>], size: usize) -> Result<LocalIdeal> {
    let rows = mx.len();
    let cols = mx.first().map_or(0, Vec::len);
    if mx.iter().any(|r| r.len() != cols) {
        return Err(Error::Shape("ragged matrix".into()));
    }
    if size == 0 || size > rows.min(cols) {
        return Err(Error::IndexOutOfRange {
            index: size,
            limit: rows.min(cols),
        });
    }
    let mut gens = Vec::new();
    for rs in subsets(rows, size) {
        for cs in subsets(cols, size) {
            let sub: Vec<Vec<TruncatedSeries>> = rs
                .iter()
                .map(|&i| cs.iter().map(|&j| mx[i][j].clone()).collect())
                .collect();
            gens.push(determinant(&sub)?);
        }
    }
    LocalIdeal::from_generators(gens)
}

/// Monomials spanning the staircase of a module basis (for reports).
pub fn basis_monomials(m: &FiniteLengthModule) -> Vec<Monomial> {
    m.basis.iter().map(|b| Monomial(b.exp.clone())).collect()
}
