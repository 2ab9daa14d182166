#![allow(dead_code)]

use milnorkit::base::BaseRing;
use milnorkit::series::{Monomial, TruncatedSeries};

/// Polynomial from `(coefficient, π-power, exponents)` triples.
pub fn poly(b: BaseRing, n: usize, d: u32, terms: &[(i64, u32, &[u32])]) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(b, n, d);
    for &(c, k, e) in terms {
        assert_eq!(e.len(), n);
        let coeff = b.mul(&b.from_int(c), &b.uniformizer_power(k));
        s.add_term(Monomial(e.to_vec()), coeff);
    }
    s
}

pub fn eq(p: u64, n: u32) -> BaseRing {
    BaseRing::eq_char(p, n).unwrap()
}

pub fn mixed(p: u64, n: u32) -> BaseRing {
    BaseRing::mixed_char(p, n).unwrap()
}
