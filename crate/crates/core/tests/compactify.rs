mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use common::{eq, poly};
use milnorkit::compactify::{
    determinantal_codim_count, determinantal_codim_count_with, homogenize, incidence_fiber_dim_check,
    sample_good, smoothness_scan, Form, HomogenizedSystem, Poly, Template,
};
use milnorkit::gf::{prime_power, Gf};
use milnorkit::milnor::Germ;
use proptest::prelude::*;

/// Schoolbook product of encoded elements modulo the field's modulus.
fn slow_mul(f: &Gf, a: u32, b: u32) -> u32 {
    let info = f.info();
    let (p, m) = (info.p, info.degree as usize);
    let digits = |mut x: u32| -> Vec<u32> {
        (0..m)
            .map(|_| {
                let d = x % p;
                x /= p;
                d
            })
            .collect()
    };
    let (da, db) = (digits(a), digits(b));
    let mut prod = vec![0u32; 2 * m];
    for i in 0..m {
        for j in 0..m {
            prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
        }
    }
    for k in (m..2 * m).rev() {
        let top = prod[k];
        prod[k] = 0;
        for i in 0..m {
            prod[k - m + i] = (prod[k - m + i] + (p - info.modulus[i]) * top) % p;
        }
    }
    if m == 1 {
        return (a * b) % p;
    }
    prod[..m].iter().rev().fold(0, |acc, &d| acc * p + d)
}

#[test]
fn field_tables_match_polynomial_arithmetic() {
    for q in [2u64, 4, 7, 8, 9, 25, 27] {
        let f = Gf::with_order(q).unwrap();
        assert_eq!(u64::from(f.size()), q);
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.mul(a, b), slow_mul(&f, a, b), "q = {q}: {a}·{b}");
                assert_eq!(f.sub(f.add(a, b), b), a);
            }
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
    }
    assert!(prime_power(12).is_err());
    assert_eq!(prime_power(49).unwrap(), (7, 2));
}

#[test]
fn subfields_and_embeddings() {
    for (p, k, e) in [(2u32, 1u32, 3u32), (3, 1, 2), (2, 2, 2), (5, 1, 3), (3, 2, 2)] {
        let small = Gf::new(p, k).unwrap();
        let big = Gf::new(p, k * e).unwrap();
        let emb = small.embed_into(&big).unwrap();
        let qk = p.pow(k);
        for a in small.elements() {
            // x^(p^k) = x characterizes the subfield
            assert_eq!(big.pow(emb[a as usize], qk), emb[a as usize]);
            assert!(big.in_subfield(emb[a as usize], k));
            for b in small.elements() {
                assert_eq!(emb[small.add(a, b) as usize], big.add(emb[a as usize], emb[b as usize]));
                assert_eq!(emb[small.mul(a, b) as usize], big.mul(emb[a as usize], emb[b as usize]));
            }
        }
        let mut image = emb.clone();
        image.sort();
        image.dedup();
        assert_eq!(image.len(), qk as usize);
        let inside = big.elements().filter(|&x| big.in_subfield(x, k)).count();
        assert_eq!(inside, qk as usize);
    }
}

fn t_squared(q: u64, lambda: u32) -> Template {
    Template::from_fiber(Arc::new(Gf::with_order(q).unwrap()), 0, vec![vec![(vec![2], 1)]], lambda).unwrap()
}

fn node_germ(p: u64) -> Germ {
    let b = eq(p, 12);
    Germ::hypersurface(b, 0, poly(b, 1, 12, &[(1, 0, &[2]), (-1, 1, &[0])]), 12).unwrap()
}

fn cusp_germ() -> Germ {
    let b = eq(7, 12);
    Germ::hypersurface(b, 1, poly(b, 2, 12, &[(1, 0, &[0, 2]), (-1, 0, &[3, 0]), (-1, 1, &[0, 0])]), 12).unwrap()
}

#[test]
fn homogenize_examples() {
    let t = t_squared(5, 3);
    let h = homogenize(&t.zero_family());
    assert_eq!(h.forms[0].terms, vec![(vec![3, 2], 1)]);
    assert!(h.t0_squared_divides_fiber_part());

    // monomials are t^4 then t^5
    let fam = t.family(vec![vec![2, 3]]).unwrap();
    let h = homogenize(&fam);
    assert_eq!(h.forms[0].terms, vec![(vec![0, 5], 3), (vec![1, 4], 2), (vec![3, 2], 1)]);

    let from_germ = Template::from_germ(&node_germ(5), 5, Some(3)).unwrap();
    assert_eq!(from_germ.fbar, t.fbar);
    assert_eq!(from_germ.lambda, 3);
    assert_eq!(Template::from_germ(&node_germ(5), 5, None).unwrap().lambda, 3);
    assert_eq!(Template::from_germ(&cusp_germ(), 7, Some(2)).unwrap().lambda, 6);
    assert!(Template::from_germ(&node_germ(5), 7, None).is_err());
}

fn truncate(p: &Poly, lambda: u32) -> Poly {
    p.iter().filter(|(e, _)| e.iter().sum::<u32>() <= lambda).cloned().collect()
}

fn disc_vanishes(p: i64, c1: i64, c2: i64) -> bool {
    (-4 * c1 * c1 * c1 - 27 * c2 * c2).rem_euclid(p) == 0
}

#[test]
fn scan_of_the_t_squared_family() {
    let t = t_squared(5, 3);
    let good = homogenize(&t.family(vec![vec![1, 1]]).unwrap());
    let rep = smoothness_scan(&good, t.field.clone(), 2).unwrap();
    assert!(rep.smooth_away_from_y, "{rep:?}");
    assert_eq!(rep.points_scanned, vec![5, 20]);

    let zero = homogenize(&t.zero_family());
    let rep = smoothness_scan(&zero, t.field.clone(), 2).unwrap();
    assert_eq!(rep.bad_points.len(), 1);
    assert_eq!(rep.bad_points[0].coords, vec![0, 1]);

    // t0³ + c1 t0 + c2 has a repeated root iff its discriminant vanishes
    for p in [5u64, 7, 11] {
        let t = t_squared(p, 3);
        for c1 in 0..p as u32 {
            for c2 in 0..p as u32 {
                let h = homogenize(&t.family(vec![vec![c1, c2]]).unwrap());
                let rep = smoothness_scan(&h, t.field.clone(), 1).unwrap();
                assert_eq!(!rep.smooth_away_from_y, disc_vanishes(p as i64, c1.into(), c2.into()), "p = {p}: {c1}, {c2}");
            }
        }
    }
}

#[test]
fn conics() {
    for q in [5u64, 7, 9] {
        let f = Arc::new(Gf::with_order(q).unwrap());
        let smooth = HomogenizedSystem::from_forms(vec![Form {
            terms: vec![(vec![2, 0, 0], 1), (vec![0, 2, 0], 1), (vec![0, 0, 2], 1)],
        }])
        .unwrap();
        let rep = smoothness_scan(&smooth, f.clone(), 2).unwrap();
        assert!(rep.smooth_away_from_y);
        // a smooth conic has q^e + 1 points over F_{q^e}
        assert_eq!(rep.points_on_variety, vec![q + 1, q * q - q]);

        let lines = HomogenizedSystem::from_forms(vec![Form { terms: vec![(vec![0, 1, 1], 1)] }]).unwrap();
        let rep = smoothness_scan(&lines, f, 1).unwrap();
        let bad: Vec<_> = rep.bad_points.iter().map(|b| b.coords.clone()).collect();
        // the singular point (1:0:0) is y itself
        assert!(bad.is_empty());
    }
    let f = Arc::new(Gf::with_order(5).unwrap());
    let cross = HomogenizedSystem::from_forms(vec![Form { terms: vec![(vec![1, 1, 0], 1)] }]).unwrap();
    let rep = smoothness_scan(&cross, f, 1).unwrap();
    assert_eq!(rep.bad_points.iter().map(|b| b.coords.clone()).collect::<Vec<_>>(), vec![vec![0, 0, 1]]);
}

#[test]
fn sampling_finds_good_families() {
    let t = Template::from_germ(&node_germ(7), 7, Some(3)).unwrap();
    let rep = sample_good(&t, 42, 50, 2).unwrap();
    assert!(rep.good_found);
    assert!(rep.bad_points.is_empty());
    assert_eq!(rep.mu_preserved, Some(true));
    assert_eq!(sample_good(&t, 42, 50, 2).unwrap(), rep);

    // the reported family reproduces from its index
    let again = t.draw(42, rep.first_good_sample as u64);
    assert_eq!(again.coefficients, rep.coefficients);

    let cusp = Template::from_germ(&cusp_germ(), 7, None).unwrap();
    let rep = sample_good(&cusp, 1, 6, 1).unwrap();
    assert_eq!((rep.mu_input, rep.mu_preserved), (Some(2), Some(true)));
}

#[test]
fn failure_fraction_decreases_with_q() {
    let mut fractions = Vec::new();
    for p in [5u64, 7, 11, 13] {
        let t = Template::from_germ(&node_germ(p), p, Some(3)).unwrap();
        let rep = sample_good(&t, 9, 400, 1).unwrap();
        // the bad locus is a discriminant curve: about q of q² parameters
        assert!(rep.failure_fraction * (p as f64) < 3.0, "q = {p}: {}", rep.failure_fraction);
        fractions.push(rep.failure_fraction);
    }
    assert!(fractions[2] <= fractions[0] + 0.05, "{fractions:?}");
}

#[test]
fn mu_is_preserved_by_good_families() {
    for seed in 0..6 {
        let t = Template::from_germ(&node_germ(5), 5, None).unwrap();
        assert_eq!(sample_good(&t, seed, 10, 1).unwrap().mu_preserved, Some(true));
    }
}

fn deficient_oracle(m: u32, r: u32, q: u64) -> u64 {
    let total = q.pow(m * r);
    let full: u64 = (0..r).map(|i| q.pow(m) - q.pow(i)).product();
    total - full
}

#[test]
fn determinantal_counts() {
    let c = determinantal_codim_count(1, 1, 5).unwrap();
    assert_eq!(c.deficient, Some(1));
    assert!((c.observed_codim - 2.0).abs() < 1e-12);

    let c = determinantal_codim_count(1, 2, 2).unwrap();
    assert_eq!(c.deficient, Some(22));
    assert!((c.observed_codim - (64f64 / 22.0).log2()).abs() < 1e-12);
    assert_eq!(c.theoretical_codim, 2);

    let c = determinantal_codim_count(0, 2, 3).unwrap();
    assert_eq!(c.deficient, Some(33));
    assert!((c.observed_codim - (81f64 / 33.0).ln() / 3f64.ln()).abs() < 1e-12);
    assert!((c.observed_codim - 0.82).abs() < 0.01);

    for (n, r, q) in [(0usize, 1usize, 7u64), (1, 1, 3), (2, 1, 3), (0, 2, 4), (1, 2, 3), (0, 3, 2), (2, 2, 2)] {
        let c = determinantal_codim_count(n, r, q).unwrap();
        assert_eq!(c.deficient, Some(deficient_oracle((n + r) as u32, r as u32, q)), "{n} {r} {q}");
    }

    let s = determinantal_codim_count_with(1, 2, 3, 10, 20_000, 1).unwrap();
    assert_eq!(s.mode, "sampled");
    let exact = -((deficient_oracle(3, 2, 3) as f64) / 729.0).ln() / 3f64.ln();
    let [lo, hi] = s.codim_interval.unwrap();
    assert!(lo <= exact && exact <= hi, "{lo} {exact} {hi}");
}

#[test]
fn incidence_fibres() {
    let t = t_squared(3, 1);
    let c = incidence_fiber_dim_check(&t, &[0, 1]).unwrap();
    assert_eq!((c.count, c.expected_exact), (1, 1));
    assert_eq!(c.predicted, 1.0);
    assert!(c.pass && c.t0_squared_divides_fiber_part);
    assert!(incidence_fiber_dim_check(&t, &[2, 0]).is_err());
    assert!(incidence_fiber_dim_check(&t, &[1, 2]).unwrap().pass);

    let f = Arc::new(Gf::with_order(3).unwrap());
    let fbar = vec![vec![(vec![2, 0], 1), (vec![0, 2], 2), (vec![1, 1], 1)]];
    let t = Template::from_fiber(f, 1, fbar, 2).unwrap();
    for z in [[0, 1, 0], [1, 1, 1], [0, 1, 2], [1, 0, 1], [2, 2, 0]] {
        let c = incidence_fiber_dim_check(&t, &z).unwrap();
        assert!(c.pass, "{z:?}: {c:?}");
        assert_eq!(c.expected_exact, 3u64.pow(9 - 3));
    }

    let t = t_squared(4, 1);
    for z in [[0, 1], [1, 1], [1, 3]] {
        assert!(incidence_fiber_dim_check(&t, &z).unwrap().pass);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn homogenize_round_trip(
        terms in prop::collection::vec((prop::collection::vec(0u32..4, 2), 1u32..7), 0..6),
        lambda in 1u32..4,
        seed in 0u64..1000,
    ) {
        let f = Arc::new(Gf::with_order(7).unwrap());
        let fbar: Vec<Poly> = vec![terms];
        let t = Template::from_fiber(f, 1, fbar.clone(), lambda).unwrap();
        let fam = t.draw(seed, 0);
        let h = homogenize(&fam);
        for form in &h.forms {
            prop_assert!(form.terms.iter().all(|(e, _)| e.iter().sum::<u32>() == lambda + 2));
        }
        let mut merged: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
        for (e, c) in truncate(&fbar[0], lambda) {
            let v = merged.entry(e).or_insert(0);
            *v = (*v + c) % 7;
        }
        let expect: Poly = merged.into_iter().filter(|&(_, c)| c != 0).collect();
        prop_assert_eq!(&t.fbar[0], &expect);
        prop_assert_eq!(truncate(&h.dehomogenize()[0], lambda), expect);
        prop_assert!(h.t0_squared_divides_fiber_part());
    }
}
