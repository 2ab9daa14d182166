//! Koszul complexes over quotients `R = P/J` of the truncated local ring, their duals,
//! and homology lengths.
//!
//! Matrices act on column vectors: a differential `C^i → C^(i+1)` is stored with
//! `rank(i+1)` rows and `rank(i)` columns. The basis of `Λ^k R^r` is the list of
//! `k`-subsets of `0..r` in lexicographic order.

use std::collections::BTreeMap;

use crate::base::BaseRing;
use crate::error::{Error, Result};
use crate::layer::{ColumnOrder, Layer};
use crate::linalg::Echelon;
use crate::local::{colength, normal_form_at_level, subsets, LocalIdeal};
use crate::series::TruncatedSeries;

/// The ambient ring `P/J`, with `J` given by generators (possibly none).
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientRing {
    pub relations: LocalIdeal,
}

impl QuotientRing {
    pub fn new(relations: LocalIdeal) -> Self {
        Self { relations }
    }

    /// `P` itself.
    pub fn free(base: BaseRing, num_vars: usize, degree_bound: u32) -> Self {
        Self::new(LocalIdeal::new(base, num_vars, degree_bound, vec![]).expect("empty ideal"))
    }

    pub fn base(&self) -> BaseRing {
        *self.relations.base()
    }

    pub fn num_vars(&self) -> usize {
        self.relations.num_vars()
    }

    pub fn degree_bound(&self) -> u32 {
        self.relations.degree_bound()
    }

    pub fn zero(&self) -> TruncatedSeries {
        TruncatedSeries::zero(self.base(), self.num_vars(), self.degree_bound())
    }

    /// Whether `a = 0` in `R` at working precision.
    pub fn is_zero(&self, a: &TruncatedSeries) -> bool {
        if a.is_zero() {
            return true;
        }
        if self.relations.generators().is_empty() {
            return false;
        }
        let level = self.degree_bound().min(self.base().precision());
        normal_form_at_level(a, &self.relations, level).is_zero()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<TruncatedSeries>>,
}

impl Matrix {
    pub fn zeros(ring: &QuotientRing, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![vec![ring.zero(); cols]; rows],
        }
    }

    pub fn transpose(&self) -> Self {
        let entries = (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.entries[i][j].clone()).collect())
            .collect();
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn mul(&self, other: &Matrix, zero: &TruncatedSeries) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut entries = vec![vec![zero.clone(); other.cols]; self.rows];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                for k in 0..self.cols {
                    *e = e.try_add(&self.entries[i][k].try_mul(&other.entries[k][j])?)?;
                }
            }
        }
        Ok(Matrix {
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }

    pub fn column(&self, j: usize) -> Vec<TruncatedSeries> {
        self.entries.iter().map(|r| r[j].clone()).collect()
    }
}

/// A bounded complex of finite free `R`-modules in degrees `low ..= high`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeComplex {
    pub ambient: QuotientRing,
    low: i32,
    ranks: Vec<usize>,
    /// `diffs[k]` maps degree `low + k` to `low + k + 1`.
    diffs: Vec<Matrix>,
}

impl FreeComplex {
    pub fn new(ambient: QuotientRing, low: i32, ranks: Vec<usize>, diffs: Vec<Matrix>) -> Result<Self> {
        if ranks.is_empty() || diffs.len() + 1 != ranks.len() {
            return Err(Error::Shape("need one differential between each pair of degrees".into()));
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.cols != ranks[k] || d.rows != ranks[k + 1] {
                return Err(Error::Shape(format!(
                    "differential from degree {} is {}x{}, ranks are {} -> {}",
                    low + k as i32,
                    d.rows,
                    d.cols,
                    ranks[k],
                    ranks[k + 1]
                )));
            }
        }
        Ok(Self {
            ambient,
            low,
            ranks,
            diffs,
        })
    }

    pub fn low(&self) -> i32 {
        self.low
    }

    pub fn high(&self) -> i32 {
        self.low + self.ranks.len() as i32 - 1
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.low..=self.high()
    }

    pub fn rank(&self, degree: i32) -> usize {
        if degree < self.low || degree > self.high() {
            0
        } else {
            self.ranks[(degree - self.low) as usize]
        }
    }

    /// Differential leaving `degree`, if both ends lie in range.
    pub fn differential(&self, degree: i32) -> Option<&Matrix> {
        if degree < self.low || degree >= self.high() {
            None
        } else {
            Some(&self.diffs[(degree - self.low) as usize])
        }
    }

    pub fn differentials(&self) -> &[Matrix] {
        &self.diffs
    }

    /// `C[k]`: degree `i` moves to `i - k`.
    pub fn shift(&self, k: i32) -> Self {
        Self {
            low: self.low - k,
            ..self.clone()
        }
    }

    /// Whether every composite `d ∘ d` vanishes in `R`.
    pub fn check_d_squared(&self) -> Result<bool> {
        let zero = self.ambient.zero();
        for w in self.diffs.windows(2) {
            let dd = w[1].mul(&w[0], &zero)?;
            if !dd.entries.iter().flatten().all(|e| self.ambient.is_zero(e)) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Degreewise dual: transposed differentials, negated degrees.
pub fn dualize(c: &FreeComplex) -> FreeComplex {
    let mut ranks = c.ranks.clone();
    ranks.reverse();
    let diffs = c.diffs.iter().rev().map(Matrix::transpose).collect();
    FreeComplex {
        ambient: c.ambient.clone(),
        low: -c.high(),
        ranks,
        diffs,
    }
}

fn subset_index(sets: &[Vec<usize>]) -> BTreeMap<Vec<usize>, usize> {
    sets.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()
}

fn check_vector(ring: &QuotientRing, u: &[TruncatedSeries]) -> Result<()> {
    if u.is_empty() {
        return Err(Error::Shape("Koszul complex of an empty sequence".into()));
    }
    for x in u {
        if *x.base() != ring.base() || x.num_vars() != ring.num_vars() {
            return Err(Error::Shape("sequence element lives in a different ring".into()));
        }
    }
    Ok(())
}

/// `Kos⁻(u)`: `Λ^k R^r` in degree `-k`, differential `e_I ↦ Σ_j (-1)^(j-1) u_(i_j) e_(I∖i_j)`.
pub fn kos_minus(ring: &QuotientRing, u: &[TruncatedSeries]) -> Result<FreeComplex> {
    check_vector(ring, u)?;
    let r = u.len();
    let mut ranks = Vec::new();
    let mut diffs = Vec::new();
    for k in (0..=r).rev() {
        ranks.push(subsets(r, k).len());
        if k == 0 {
            break;
        }
        let src = subsets(r, k);
        let dst = subsets(r, k - 1);
        let idx = subset_index(&dst);
        let mut m = Matrix::zeros(ring, dst.len(), src.len());
        for (col, set) in src.iter().enumerate() {
            for (j, &i) in set.iter().enumerate() {
                let mut rest = set.clone();
                rest.remove(j);
                let e = if j % 2 == 0 { u[i].clone() } else { u[i].neg() };
                m.entries[idx[&rest]][col] = e;
            }
        }
        diffs.push(m);
    }
    FreeComplex::new(ring.clone(), -(r as i32), ranks, diffs)
}

/// `Kos∧(v)`: `Λ^k R^r` in degree `k`, differential `e_J ↦ v ∧ e_J`.
pub fn kos_wedge(ring: &QuotientRing, v: &[TruncatedSeries]) -> Result<FreeComplex> {
    check_vector(ring, v)?;
    let r = v.len();
    let mut ranks = Vec::new();
    let mut diffs = Vec::new();
    for k in 0..=r {
        ranks.push(subsets(r, k).len());
        if k == r {
            break;
        }
        let src = subsets(r, k);
        let dst = subsets(r, k + 1);
        let idx = subset_index(&dst);
        let mut m = Matrix::zeros(ring, dst.len(), src.len());
        for (col, set) in src.iter().enumerate() {
            for i in (0..r).filter(|i| !set.contains(i)) {
                let before = set.iter().filter(|&&j| j < i).count();
                let mut bigger = set.clone();
                bigger.push(i);
                bigger.sort_unstable();
                let e = if before % 2 == 0 { v[i].clone() } else { v[i].neg() };
                m.entries[idx[&bigger]][col] = e;
            }
        }
        diffs.push(m);
    }
    FreeComplex::new(ring.clone(), 0, ranks, diffs)
}

/// `C_v = [R → R^r]` with `R` in degree `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoTermComplex {
    pub ambient: QuotientRing,
    pub v: Vec<TruncatedSeries>,
}

impl TwoTermComplex {
    pub fn as_complex(&self) -> Result<FreeComplex> {
        let r = self.v.len();
        let m = Matrix {
            rows: r,
            cols: 1,
            entries: self.v.iter().map(|x| vec![x.clone()]).collect(),
        };
        FreeComplex::new(self.ambient.clone(), -1, vec![1, r], vec![m])
    }
}

/// `LΛ^r(C_v) = Kos∧(v)[r]`, in degrees `[-r, 0]`.
pub fn derived_exterior_power(c: &TwoTermComplex, r: usize) -> Result<FreeComplex> {
    if r != c.v.len() {
        return Err(Error::Shape(format!(
            "exterior power {r} of a complex with {} targets",
            c.v.len()
        )));
    }
    Ok(kos_wedge(&c.ambient, &c.v)?.shift(r as i32))
}

/// Length of `H^degree`, estimated on layers `c = c0, c0 + 1, ...`.
///
/// At layer `c` the boundary module is `im(d) + J·C + m̂^c C`, and cycles are
/// approximated by vectors whose image lies in `J + m̂^(2c)`, reduced mod `m̂^c`.
/// The value is accepted once two consecutive layers agree.
fn homology_length(c: &FreeComplex, degree: i32, c0: u32) -> Result<u64> {
    let a = c.rank(degree);
    if a == 0 {
        return Ok(0);
    }
    let ring = &c.ambient;
    let base = ring.base();
    let m = ring.num_vars();
    let d = ring.degree_bound();
    let cap = d.min(base.precision());
    let relations = ring.relations.generators();

    let unit = |k: usize, n: usize| -> Vec<TruncatedSeries> {
        (0..n)
            .map(|i| if i == k { TruncatedSeries::one(base, m, d) } else { ring.zero() })
            .collect()
    };
    let rel_vectors = |n: usize| -> Vec<Vec<TruncatedSeries>> {
        let mut out = Vec::new();
        for j in relations {
            for k in 0..n {
                let mut v = vec![ring.zero(); n];
                v[k] = j.clone();
                out.push(v);
            }
        }
        out
    };

    let mut boundary = rel_vectors(a);
    if let Some(prev) = c.differential(degree - 1) {
        boundary.extend((0..prev.cols).map(|j| prev.column(j)));
    }
    let next = c.differential(degree).filter(|m| m.rows > 0);

    let estimate = |lvl: u32| -> u64 {
        let layer = Layer::new(base, m, a, lvl, ColumnOrder::HighFirst);
        let im = layer.submodule(&boundary);
        let Some(b) = next else {
            return im.quotient_length();
        };
        let big = cap;
        let cod = Layer::new(base, m, b.rows, big, ColumnOrder::HighFirst);
        let dom = Layer::new(base, m, a, big, ColumnOrder::HighFirst);
        let split = cod.ncols();
        let mut aug = Echelon::new(cod.ring(), split + dom.ncols());
        for r in cod.relation_rows() {
            aug.insert(&r);
        }
        for r in dom.relation_rows() {
            let r: Vec<_> = r.into_iter().map(|(i, x)| (i + split, x)).collect();
            aug.insert(&r);
        }
        cod.insert_generators(&mut aug, &rel_vectors(b.rows), 0);
        for k in 0..a {
            let image = b.column(k);
            let e = unit(k, a);
            for (s, mono) in dom.multipliers() {
                let mut row = cod.row(&image, s, &mono);
                row.extend(dom.row(&e, s, &mono).into_iter().map(|(i, x)| (i + split, x)));
                aug.insert(&row);
            }
        }
        let mut ker = im.clone();
        for r in aug.rows_from(split) {
            let v = dom.to_series(&r, d);
            ker.insert(&layer.vector(&v));
        }
        im.quotient_length() - ker.quotient_length()
    };

    let mut lvl = c0.max(1);
    if 2 * (lvl + 1) > cap {
        return Err(Error::NotFiniteLength {
            precision: (d, base.precision()),
            degree: Some(degree),
        });
    }
    let mut prev = estimate(lvl);
    while 2 * (lvl + 1) <= cap {
        let cur = estimate(lvl + 1);
        if cur == prev {
            return Ok(cur);
        }
        prev = cur;
        lvl += 1;
    }
    Err(Error::NotFiniteLength {
        precision: (d, base.precision()),
        degree: Some(degree),
    })
}

/// Starting layer: one past the colength certificate of `J` plus all matrix entries,
/// and past the largest entry order (lower layers cannot see the differentials).
fn start_layer(c: &FreeComplex) -> u32 {
    let mut gens: Vec<TruncatedSeries> = c.ambient.relations.generators().to_vec();
    for m in &c.diffs {
        gens.extend(m.entries.iter().flatten().filter(|e| !e.is_zero()).cloned());
    }
    if gens.is_empty() {
        return 1;
    }
    let entry_order = gens.iter().map(|g| g.t_order()).max().unwrap_or(0) + 1;
    let ring = &c.ambient;
    LocalIdeal::new(ring.base(), ring.num_vars(), ring.degree_bound(), gens)
        .ok()
        .and_then(|i| colength(&i).ok())
        .map_or(1, |q| q.certificate + 1)
        .max(entry_order)
}

/// Length of every cohomology module, keyed by degree.
pub fn homology_lengths(c: &FreeComplex) -> Result<BTreeMap<i32, u64>> {
    let c0 = start_layer(c);
    c.degrees()
        .map(|i| homology_length(c, i, c0).map(|l| (i, l)))
        .collect()
}

/// `Σ (-1)^i len H^i`.
pub fn euler_characteristic(c: &FreeComplex) -> Result<i64> {
    Ok(homology_lengths(c)?
        .into_iter()
        .map(|(i, l)| if i % 2 == 0 { l as i64 } else { -(l as i64) })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn koszul_shapes() {
        let b = BaseRing::eq_char(5, 6).unwrap();
        let ring = QuotientRing::free(b, 3, 6);
        let u: Vec<_> = (0..3).map(|i| TruncatedSeries::var(b, 3, 6, i)).collect();
        let k = kos_minus(&ring, &u).unwrap();
        assert_eq!((k.low(), k.high()), (-3, 0));
        assert_eq!((-3..=0).map(|i| k.rank(i)).collect::<Vec<_>>(), vec![1, 3, 3, 1]);
        assert!(k.check_d_squared().unwrap());
        let w = kos_wedge(&ring, &u).unwrap();
        assert_eq!((w.low(), w.high()), (0, 3));
        assert!(w.check_d_squared().unwrap());
    }
}
