//! Finite layers `P^b / m̂^c P^b` of a free module over `P = A[[t]]`, where `m̂ = (π, t)`.
//!
//! Over EqChar the uniformizer is treated as one more variable, so a layer is an
//! `F_p`-vector space with basis `π^a t^α e_i`, `a + |α| < c`. Over MixedChar the
//! layer is a module over `Z/p^K`, `K = min(c, N)`, with basis `t^α e_i`, `|α| < c`,
//! and the column at `t^α` carries the torsion relation `p^(c-|α|) = 0`.

use std::cmp::Reverse;
use std::collections::HashMap;

use crate::base::{BaseRing, Model, RingElement};
use crate::linalg::{ChainRing, Echelon, SparseRow};
use crate::series::{Monomial, TruncatedSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnOrder {
    /// Highest m̂-order first: reduction eliminates high terms, leaving a staircase
    /// of low monomials.
    HighFirst,
    /// Lowest m̂-order first: the leading column of a remainder is its order.
    LowFirst,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LayerColumn {
    pub block: usize,
    pub pi: u32,
    pub mono: Monomial,
}

impl LayerColumn {
    pub fn grade(&self) -> u32 {
        self.pi + self.mono.degree()
    }
}

#[derive(Debug, Clone)]
pub struct Layer {
    base: BaseRing,
    num_vars: usize,
    blocks: usize,
    level: u32,
    ring: ChainRing,
    cols: Vec<LayerColumn>,
    index: HashMap<LayerColumn, usize>,
}

impl Layer {
    pub fn new(
        base: BaseRing,
        num_vars: usize,
        blocks: usize,
        level: u32,
        order: ColumnOrder,
    ) -> Self {
        let n = base.precision();
        let mut cols = Vec::new();
        for mono in Monomial::all_below(num_vars, level) {
            let d = mono.degree();
            let pis = match base.model() {
                Model::EqChar => (level - d).min(n),
                Model::MixedChar => 1,
            };
            for pi in 0..pis {
                for block in 0..blocks {
                    cols.push(LayerColumn {
                        block,
                        pi,
                        mono: mono.clone(),
                    });
                }
            }
        }
        match order {
            ColumnOrder::HighFirst => cols.sort_by(|a, b| {
                (Reverse(a.grade()), Reverse(a.pi), Reverse(&a.mono), a.block).cmp(&(
                    Reverse(b.grade()),
                    Reverse(b.pi),
                    Reverse(&b.mono),
                    b.block,
                ))
            }),
            ColumnOrder::LowFirst => cols.sort_by(|a, b| {
                (a.grade(), a.pi, &a.mono, a.block).cmp(&(b.grade(), b.pi, &b.mono, b.block))
            }),
        }
        let index = cols
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        let k = match base.model() {
            Model::EqChar => 1,
            Model::MixedChar => level.min(n).max(1),
        };
        Self {
            base,
            num_vars,
            blocks,
            level,
            ring: ChainRing::new(base.p(), k),
            cols,
            index,
        }
    }

    pub fn base(&self) -> &BaseRing {
        &self.base
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn ring(&self) -> ChainRing {
        self.ring
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn columns(&self) -> &[LayerColumn] {
        &self.cols
    }

    /// Torsion exponent of a column: its entries live in `Z/p^cap`.
    pub fn column_cap(&self, col: usize) -> u32 {
        match self.base.model() {
            Model::EqChar => 1,
            Model::MixedChar => (self.level - self.cols[col].mono.degree()).min(self.ring.k()),
        }
    }

    /// Relations `p^cap e_col = 0` for columns whose cap is below `K`.
    pub fn relation_rows(&self) -> Vec<SparseRow> {
        (0..self.ncols())
            .filter(|&c| self.column_cap(c) < self.ring.k())
            .map(|c| vec![(c, self.ring.p_pow(self.column_cap(c)))])
            .collect()
    }

    /// Multipliers `π^a t^β` spanning `P/m̂^c` as a module over the chain ring.
    pub fn multipliers(&self) -> Vec<(u32, Monomial)> {
        let n = self.base.precision();
        let mut out = Vec::new();
        for mono in Monomial::all_below(self.num_vars, self.level) {
            match self.base.model() {
                Model::EqChar => {
                    for a in 0..(self.level - mono.degree()).min(n) {
                        out.push((a, mono.clone()));
                    }
                }
                Model::MixedChar => out.push((0, mono)),
            }
        }
        out
    }

    /// Coordinates of `π^pi_shift · m · v`, with `v` a vector of `blocks` series.
    pub fn row(&self, v: &[TruncatedSeries], pi_shift: u32, m: &Monomial) -> SparseRow {
        debug_assert_eq!(v.len(), self.blocks);
        let mut out = Vec::new();
        let md = m.degree();
        for (block, s) in v.iter().enumerate() {
            for (alpha, c) in s.terms() {
                let d = alpha.degree() + md;
                if d + pi_shift >= self.level {
                    continue;
                }
                let mono = alpha.mul(m);
                match c {
                    RingElement::Eq(digits) => {
                        for (k, &x) in digits.iter().enumerate() {
                            if x == 0 {
                                continue;
                            }
                            let key = LayerColumn {
                                block,
                                pi: pi_shift + k as u32,
                                mono: mono.clone(),
                            };
                            if let Some(&i) = self.index.get(&key) {
                                out.push((i, x));
                            }
                        }
                    }
                    RingElement::Mixed(r) => {
                        let x = r % self.ring.modulus();
                        if x != 0 {
                            let key = LayerColumn { block, pi: 0, mono };
                            out.push((self.index[&key], x));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn vector(&self, v: &[TruncatedSeries]) -> SparseRow {
        self.row(v, 0, &Monomial::one(self.num_vars))
    }

    /// Echelon form of the image of the submodule generated by `gens` (plus torsion
    /// relations) in this layer.
    pub fn submodule(&self, gens: &[Vec<TruncatedSeries>]) -> Echelon {
        let mut ech = Echelon::new(self.ring, self.ncols());
        for r in self.relation_rows() {
            ech.insert(&r);
        }
        self.insert_generators(&mut ech, gens, 0);
        ech
    }

    /// Insert all multiplier rows of `gens`, with columns offset by `offset`.
    pub fn insert_generators(&self, ech: &mut Echelon, gens: &[Vec<TruncatedSeries>], offset: usize) {
        let mults = self.multipliers();
        for g in gens {
            let ord = g.iter().map(TruncatedSeries::t_order).min().unwrap_or(0);
            for (a, m) in &mults {
                if ord + a + m.degree() >= self.level {
                    continue;
                }
                let mut row = self.row(g, *a, m);
                if offset > 0 {
                    for e in &mut row {
                        e.0 += offset;
                    }
                }
                ech.insert(&row);
            }
        }
    }

    /// Series vector from layer coordinates, with the given degree bound.
    pub fn to_series(&self, row: &[(usize, u64)], degree_bound: u32) -> Vec<TruncatedSeries> {
        let mut out = vec![TruncatedSeries::zero(self.base, self.num_vars, degree_bound); self.blocks];
        for &(i, x) in row {
            let col = &self.cols[i];
            let c = match self.base.model() {
                Model::EqChar => {
                    let mut d = vec![0; col.pi as usize + 1];
                    d[col.pi as usize] = x;
                    self.base.eq_from_digits(d)
                }
                Model::MixedChar => self.base.mixed_from_residue(x),
            };
            out[col.block].add_term(col.mono.clone(), c);
        }
        out
    }

    /// m̂-order of a layer vector (`level` if zero).
    pub fn order_of(&self, row: &[(usize, u64)]) -> u32 {
        row.iter()
            .filter(|&&(_, x)| x != 0)
            .map(|&(i, x)| self.cols[i].grade() + self.ring.valuation(x))
            .min()
            .unwrap_or(self.level)
            .min(self.level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_counts() {
        let b = BaseRing::eq_char(5, 10).unwrap();
        // π^a t^α with a + |α| < 3 in one variable: 1 + 2 + 3
        assert_eq!(Layer::new(b, 1, 1, 3, ColumnOrder::HighFirst).ncols(), 6);
        let m = BaseRing::mixed_char(3, 4).unwrap();
        let l = Layer::new(m, 1, 1, 3, ColumnOrder::HighFirst);
        assert_eq!(l.ncols(), 3);
        // P/m̂^3 over Z/81 in one variable: Z/27 + Z/9 + Z/3
        assert_eq!(l.submodule(&[]).quotient_length(), 6);
    }

    #[test]
    fn high_first_puts_constants_last() {
        let b = BaseRing::eq_char(5, 10).unwrap();
        let l = Layer::new(b, 2, 1, 3, ColumnOrder::HighFirst);
        let last = l.columns().last().unwrap();
        assert_eq!(last.grade(), 0);
        assert_eq!(l.columns()[0].grade(), 2);
        assert_eq!(l.columns()[0].pi, 2);
    }
}
