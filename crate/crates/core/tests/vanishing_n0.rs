mod common;

use common::{eq, mixed, poly};
use milnorkit::base::BaseRing;
use milnorkit::milnor::Germ;
use milnorkit::newton::{dim_phi0, is_regular, newton_polygon, tameness, verify_deligne_milnor_n0};
use milnorkit::series::{Monomial, TruncatedSeries};
use proptest::prelude::*;

fn t_minus_pi(a: u32, p: u64) -> TruncatedSeries {
    let b = eq(p, 12);
    poly(b, 1, 12, &[(1, 0, &[a]), (-1, 1, &[0])])
}

fn slopes(f: &TruncatedSeries) -> Vec<(String, u32)> {
    newton_polygon(f).unwrap().segments.iter().map(|s| (s.slope.to_string(), s.length)).collect()
}

#[test]
fn polygon_examples() {
    assert_eq!(slopes(&t_minus_pi(2, 5)), vec![("1/2".to_string(), 2)]);
    assert_eq!(slopes(&t_minus_pi(1, 5)), vec![("1/1".to_string(), 1)]);

    let b = eq(5, 8);
    let f = poly(b, 1, 8, &[(1, 0, &[3]), (-1, 1, &[1])]);
    let np = newton_polygon(&f).unwrap();
    assert_eq!(np.t_factor, 1);
    assert_eq!(np.points, vec![(1, 1), (3, 0)]);
    assert_eq!(slopes(&f), vec![("1/2".to_string(), 2)]);
    assert_eq!(dim_phi0(&f).unwrap(), 2);
    assert!(!is_regular(&f).unwrap());
}

#[test]
fn dim_phi0_examples() {
    for a in 1..=7 {
        assert_eq!(dim_phi0(&t_minus_pi(a, 11)).unwrap(), u64::from(a - 1));
    }
    // (t² − π)(t − π) = t³ − πt² − πt + π²
    let b = eq(5, 8);
    let f = poly(b, 1, 8, &[(1, 0, &[3]), (-1, 1, &[2]), (-1, 1, &[1]), (1, 2, &[0])]);
    assert_eq!(slopes(&f), vec![("1/1".to_string(), 1), ("1/2".to_string(), 2)]);
    assert_eq!(dim_phi0(&f).unwrap(), 2);
    assert!(!is_regular(&f).unwrap());
}

#[test]
fn tameness_examples() {
    assert!(tameness(&t_minus_pi(4, 5)).unwrap().tame);
    let wild = tameness(&t_minus_pi(5, 5)).unwrap();
    assert!(!wild.tame);
    assert!(!wild.segments[0].p_coprime);
    assert!(tameness(&t_minus_pi(1, 5)).unwrap().tame);

    // (t − π)² has residual (y − 1)²
    let b = eq(5, 8);
    let sq = poly(b, 1, 8, &[(1, 0, &[2]), (-2, 1, &[1]), (1, 2, &[0])]);
    let cert = tameness(&sq).unwrap();
    assert!(cert.segments[0].p_coprime);
    assert!(!cert.segments[0].residual_separable);
    assert!(!cert.tame);
}

#[test]
fn deligne_milnor_examples() {
    let b = eq(5, 12);
    let g = Germ::hypersurface(b, 0, t_minus_pi(4, 5), 12).unwrap();
    let rep = verify_deligne_milnor_n0(&g).unwrap();
    assert_eq!((rep.mu, rep.dim_phi0, rep.swan, rep.verified), (Some(3), 3, Some(0), Some(true)));
    let json = serde_json::to_value(&rep).unwrap();
    let expected = serde_json::json!({"mu": 3, "dim_phi0": 3, "swan": 0, "tame": true, "verified": true});
    for (k, v) in expected.as_object().unwrap() {
        assert_eq!(&json[k], v, "{k}");
    }

    let g = Germ::hypersurface(eq(7, 12), 0, t_minus_pi(2, 7), 12).unwrap();
    let rep = verify_deligne_milnor_n0(&g).unwrap();
    assert_eq!((rep.mu, rep.dim_phi0, rep.verified), (Some(1), 1, Some(true)));

    // smooth: μ = 0 = dim Φ⁰
    let g = Germ::hypersurface(b, 0, t_minus_pi(1, 5), 12).unwrap();
    let rep = verify_deligne_milnor_n0(&g).unwrap();
    assert_eq!((rep.mu, rep.dim_phi0, rep.verified), (Some(0), 0, Some(true)));

    let mb = mixed(5, 10);
    let g = Germ::hypersurface(mb, 0, poly(mb, 1, 10, &[(1, 0, &[2]), (-5, 0, &[0])]), 10).unwrap();
    assert_eq!(verify_deligne_milnor_n0(&g).unwrap().verified, Some(true));
}

#[test]
fn excluded_germs_are_skipped() {
    let b = eq(5, 12);
    let wild = Germ::hypersurface(b, 0, t_minus_pi(5, 5), 12).unwrap();
    let rep = verify_deligne_milnor_n0(&wild).unwrap();
    assert_eq!((rep.tame, rep.swan, rep.verified), (false, None, None));
    assert!(rep.skipped.unwrap().contains("tame"));

    let f = poly(b, 1, 12, &[(1, 0, &[3]), (-1, 1, &[2]), (-1, 1, &[1]), (1, 2, &[0])]);
    let rep = verify_deligne_milnor_n0(&Germ::hypersurface(b, 0, f, 12).unwrap()).unwrap();
    assert!(!rep.regular);
    assert_eq!(rep.verified, None);
}

/// `min` over chords of the support through column `j`, as a fraction.
fn hull_oracle(points: &[(u32, u32)], j: u32) -> (i64, i64) {
    let mut best: Option<(i64, i64)> = None;
    for &(i, vi) in points.iter().filter(|q| q.0 <= j) {
        for &(k, vk) in points.iter().filter(|q| q.0 >= j) {
            let cand = if i == k {
                (i64::from(vi), 1)
            } else {
                let (den, num) = (i64::from(k - i), i64::from(vi) * i64::from(k - j) + i64::from(vk) * i64::from(j - i));
                (num, den)
            };
            if best.is_none_or(|b| cand.0 * b.1 < b.0 * cand.1) {
                best = Some(cand);
            }
        }
    }
    best.unwrap()
}

fn series_from(b: BaseRing, d: u32, coeffs: &[(i64, u32)]) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(b, 1, d);
    for (j, &(c, k)) in coeffs.iter().enumerate() {
        s.add_term(Monomial(vec![j as u32]), b.mul(&b.from_int(c), &b.uniformizer_power(k)));
    }
    s
}

/// `Π (t − a_i π^k_i)` times `1 + t`.
fn product_of_roots(b: BaseRing, d: u32, roots: &[(i64, u32)]) -> TruncatedSeries {
    let mut f = poly(b, 1, d, &[(1, 0, &[0]), (1, 0, &[1])]);
    for &(a, k) in roots {
        f = &f * &poly(b, 1, d, &[(1, 0, &[1]), (-a, k, &[0])]);
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polygon_is_the_lower_hull(coeffs in prop::collection::vec((0i64..5, 0u32..5), 2..8), lead in 1i64..5) {
        let b = eq(5, 6);
        let mut cs = coeffs.clone();
        cs[0].1 = cs[0].1.max(1);
        for c in cs.iter_mut().skip(1) {
            c.1 = c.1.max(1);
        }
        cs.push((lead, 0));
        prop_assume!(cs[..cs.len() - 1].iter().any(|c| c.0 != 0));
        let f = series_from(b, 10, &cs);
        let np = newton_polygon(&f).unwrap();
        let d = cs.len() as u32 - 1;
        prop_assert_eq!(np.weierstrass_degree, d);
        prop_assert_eq!(np.specializing_roots(), d);
        for w in np.segments.windows(2) {
            let (s, t) = (w[0].slope, w[1].slope);
            prop_assert!(u64::from(s.num) * u64::from(t.den) > u64::from(t.num) * u64::from(s.den));
        }
        for seg in &np.segments {
            let (j0, v0) = (i64::from(seg.start.0), i64::from(seg.start.1));
            for j in seg.start.0..=seg.end.0 {
                let (num, den) = hull_oracle(&np.points, j);
                // hull value at j: v0 − slope·(j − j0)
                let lhs = (v0 * i64::from(seg.slope.den) - i64::from(seg.slope.num) * (i64::from(j) - j0)) * den;
                prop_assert_eq!(lhs, num * i64::from(seg.slope.den), "j = {}", j);
            }
        }
    }

    #[test]
    fn segment_lengths_count_roots_by_valuation(roots in prop::collection::vec((1i64..7, 1u32..4), 1..5)) {
        let b = eq(7, 14);
        let f = product_of_roots(b, 14, &roots);
        let np = newton_polygon(&f).unwrap();
        prop_assert_eq!(np.t_factor, 0);
        let mut expect: Vec<(String, u32)> = Vec::new();
        for k in (1u32..4).rev() {
            let m = roots.iter().filter(|r| r.1 == k).count() as u32;
            if m > 0 {
                expect.push((format!("{k}/1"), m));
            }
        }
        prop_assert_eq!(slopes(&f), expect);
        prop_assert_eq!(dim_phi0(&f).unwrap(), roots.len() as u64 - 1);

        // distinct leading coefficients on each slope ⇔ separable residuals
        let distinct = (1u32..4).all(|k| {
            let mut a: Vec<i64> = roots.iter().filter(|r| r.1 == k).map(|r| r.0).collect();
            let n = a.len();
            a.sort();
            a.dedup();
            a.len() == n
        });
        prop_assert_eq!(tameness(&f).unwrap().tame, distinct);
    }

    #[test]
    fn mu_equals_dim_phi0_on_tame_regular_germs(
        p in prop::sample::select(vec![5u64, 7]),
        d in 1u32..7,
        u0 in 1i64..5,
        middle in prop::collection::vec((0i64..5, 1u32..3), 6),
        tail in prop::collection::vec(0i64..5, 3),
    ) {
        prop_assume!(u64::from(d) % p != 0);
        let b = eq(p, 16);
        let mut f = TruncatedSeries::zero(b, 1, 16);
        f.add_term(Monomial(vec![0]), b.mul(&b.from_int(u0), &b.uniformizer_power(1)));
        for j in 1..d {
            let (c, k) = middle[j as usize - 1];
            f.add_term(Monomial(vec![j]), b.mul(&b.from_int(c), &b.uniformizer_power(k)));
        }
        f.add_term(Monomial(vec![d]), b.one());
        for (i, &c) in tail.iter().enumerate() {
            f.add_term(Monomial(vec![d + 1 + i as u32]), b.from_int(c));
        }
        let g = Germ::hypersurface(b, 0, f, 16).unwrap();
        let rep = verify_deligne_milnor_n0(&g).unwrap();
        prop_assert!(rep.regular && rep.tame);
        prop_assert_eq!(rep.dim_phi0, u64::from(d - 1));
        prop_assert_eq!(rep.verified, Some(true), "{:?}", rep);
    }
}
