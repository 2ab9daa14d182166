//! Row echelon forms over the chain ring `Z/p^K` (a field when `K = 1`).
//!
//! The echelon is kept in Howell form: for every pivot row with leading entry `p^v`,
//! the row `p^(K-v)·row` (whose pivot vanishes) is reduced into the structure as well.
//! This makes membership decidable by reduction and lets kernels be read off an
//! augmented system.

use crate::base::{inv_mod, mul_mod};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainRing {
    p: u64,
    k: u32,
    modulus: u64,
}

impl ChainRing {
    pub fn new(p: u64, k: u32) -> Self {
        assert!(k >= 1, "chain ring needs K >= 1");
        let modulus = p.checked_pow(k).expect("p^K overflows u64");
        Self { p, k, modulus }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn from_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.modulus as i128) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.modulus as u128) as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.modulus - (b - a)
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.modulus)
    }

    /// `p`-adic valuation; `K` for zero.
    pub fn valuation(&self, mut a: u64) -> u32 {
        if a == 0 {
            return self.k;
        }
        let mut v = 0;
        while a % self.p == 0 {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// `p^e`, which is zero once `e >= K`.
    pub fn p_pow(&self, e: u32) -> u64 {
        if e >= self.k {
            0
        } else {
            self.p.pow(e)
        }
    }

    pub fn unit_inverse(&self, u: u64) -> u64 {
        inv_mod(u, self.modulus).expect("not a unit")
    }
}

pub type SparseRow = Vec<(usize, u64)>;

#[derive(Debug, Clone)]
pub struct PivotRow {
    /// Valuation of the leading entry, which is stored as exactly `p^val`.
    pub val: u32,
    /// Sorted by column; the first entry is the pivot.
    pub entries: SparseRow,
}

#[derive(Debug, Clone)]
pub struct Echelon {
    ring: ChainRing,
    ncols: usize,
    pivots: Vec<Option<PivotRow>>,
    acc: Vec<u64>,
    rank: usize,
}

impl Echelon {
    pub fn new(ring: ChainRing, ncols: usize) -> Self {
        Self {
            ring,
            ncols,
            pivots: vec![None; ncols],
            acc: vec![0; ncols],
            rank: 0,
        }
    }

    pub fn ring(&self) -> &ChainRing {
        &self.ring
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn num_pivots(&self) -> usize {
        self.rank
    }

    pub fn pivots(&self) -> impl Iterator<Item = (usize, &PivotRow)> {
        self.pivots
            .iter()
            .enumerate()
            .filter_map(|(c, r)| r.as_ref().map(|r| (c, r)))
    }

    pub fn pivot(&self, col: usize) -> Option<&PivotRow> {
        self.pivots[col].as_ref()
    }

    /// Add a row (any entry order, duplicates summed) to the row space.
    pub fn insert(&mut self, row: &[(usize, u64)]) {
        let mut queue: Vec<SparseRow> = vec![row.to_vec()];
        while let Some(r) = queue.pop() {
            self.insert_one(r, &mut queue);
        }
    }

    fn insert_one(&mut self, row: SparseRow, queue: &mut Vec<SparseRow>) {
        let ring = self.ring;
        let mut start = usize::MAX;
        for &(c, x) in &row {
            let x = x % ring.modulus;
            if x != 0 {
                self.acc[c] = ring.add(self.acc[c], x);
                start = start.min(c);
            }
        }
        if start == usize::MAX {
            return;
        }
        let mut col = start;
        while col < self.ncols {
            let a = self.acc[col];
            if a == 0 {
                col += 1;
                continue;
            }
            let v = ring.valuation(a);
            match &self.pivots[col] {
                Some(piv) if v >= piv.val => {
                    let q = a / ring.p_pow(piv.val);
                    for &(j, e) in &piv.entries {
                        self.acc[j] = ring.sub(self.acc[j], ring.mul(q, e));
                    }
                    col += 1;
                }
                _ => {
                    let new = self.gather_normalized(col, v);
                    if let Some(closure) = self.closure(&new) {
                        queue.push(closure);
                    }
                    if let Some(old) = self.pivots[col].replace(new) {
                        queue.push(old.entries);
                    } else {
                        self.rank += 1;
                    }
                    return;
                }
            }
        }
    }

    /// Drain the accumulator from `col` on into a row whose lead is `p^v`.
    fn gather_normalized(&mut self, col: usize, v: u32) -> PivotRow {
        let ring = self.ring;
        let unit = self.acc[col] / ring.p_pow(v);
        let inv = ring.unit_inverse(unit % ring.modulus);
        let mut entries = Vec::new();
        for j in col..self.ncols {
            let x = std::mem::take(&mut self.acc[j]);
            if x != 0 {
                entries.push((j, ring.mul(x, inv)));
            }
        }
        entries[0].1 = ring.p_pow(v);
        PivotRow { val: v, entries }
    }

    fn closure(&self, row: &PivotRow) -> Option<SparseRow> {
        if row.val == 0 {
            return None;
        }
        let m = self.ring.p_pow(self.ring.k - row.val);
        let out: SparseRow = row.entries[1..]
            .iter()
            .map(|&(j, e)| (j, self.ring.mul(e, m)))
            .filter(|&(_, e)| e != 0)
            .collect();
        (!out.is_empty()).then_some(out)
    }

    /// Canonical remainder of `row` modulo the row space.
    pub fn reduce(&self, row: &[(usize, u64)]) -> SparseRow {
        let ring = self.ring;
        let mut acc = vec![0u64; self.ncols];
        let mut start = usize::MAX;
        for &(c, x) in row {
            let x = x % ring.modulus;
            if x != 0 {
                acc[c] = ring.add(acc[c], x);
                start = start.min(c);
            }
        }
        let mut out = Vec::new();
        if start == usize::MAX {
            return out;
        }
        for col in start..self.ncols {
            let a = acc[col];
            if a == 0 {
                continue;
            }
            if let Some(piv) = &self.pivots[col] {
                let q = a / ring.p_pow(piv.val);
                if q != 0 {
                    for &(j, e) in &piv.entries {
                        acc[j] = ring.sub(acc[j], ring.mul(q, e));
                    }
                }
            }
            if acc[col] != 0 {
                out.push((col, acc[col]));
            }
        }
        out
    }

    pub fn contains(&self, row: &[(usize, u64)]) -> bool {
        self.reduce(row).is_empty()
    }

    /// Length of `(Z/p^K)^ncols / rowspace` as a `Z/p^K`-module.
    pub fn quotient_length(&self) -> u64 {
        let free = (self.ncols - self.rank) as u64 * self.ring.k as u64;
        free + self.pivots().map(|(_, r)| r.val as u64).sum::<u64>()
    }

    /// Rows whose pivot lies at or after `split`, shifted left by `split`.
    ///
    /// For an augmented system `[A x | x]` these generate `{x : A x = 0}`.
    pub fn rows_from(&self, split: usize) -> Vec<SparseRow> {
        self.pivots[split..]
            .iter()
            .flatten()
            .map(|r| r.entries.iter().map(|&(j, e)| (j - split, e)).collect())
            .collect()
    }
}
