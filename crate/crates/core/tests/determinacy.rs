mod common;

use common::{eq, poly};
use milnorkit::determinacy::{
    check_star_inclusion, check_star_inclusion_with_mu, determinacy_bound, newton_coordinate_change,
    verify_equisingular,
};
use milnorkit::error::Error;
use milnorkit::local::{quotient_order, normal_form_at_level, LocalIdeal};
use milnorkit::milnor::{milnor_number, Germ};
use milnorkit::series::{Monomial, TruncatedSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn node(a: u32, p: u64, d: u32) -> Germ {
    let b = eq(p, d);
    Germ::hypersurface(b, 0, poly(b, 1, d, &[(1, 0, &[a]), (-1, 1, &[0])]), d).unwrap()
}

fn cusp() -> Germ {
    let b = eq(7, 12);
    Germ::hypersurface(b, 1, poly(b, 2, 12, &[(1, 0, &[0, 2]), (-1, 0, &[3, 0]), (-1, 1, &[0, 0])]), 12).unwrap()
}

#[test]
fn bounds() {
    assert_eq!(determinacy_bound(1).unwrap(), 3);
    assert_eq!(determinacy_bound(2).unwrap(), 6);
    assert!(matches!(determinacy_bound(0), Err(Error::SmoothGerm)));
}

#[test]
fn star_inclusions() {
    let f = node(2, 5, 12);
    assert!(check_star_inclusion(&f, 0).unwrap());
    assert!(check_star_inclusion(&f, 3).unwrap());
    assert!(check_star_inclusion(&cusp(), 1).unwrap());

    let b = eq(5, 8);
    let smooth = Germ::hypersurface(b, 0, poly(b, 1, 8, &[(1, 0, &[1]), (-1, 1, &[0])]), 8).unwrap();
    for c in 0..4 {
        assert!(check_star_inclusion(&smooth, c).unwrap());
    }

    // t² is not isolated: the π-line is never in the image of 2t
    let flat = Germ::hypersurface(b, 0, poly(b, 1, 8, &[(1, 0, &[2])]), 8).unwrap();
    for mu in 1..4 {
        assert!(!check_star_inclusion_with_mu(&flat, mu, 3).unwrap());
    }
}

#[test]
fn quintic_perturbation() {
    let f = node(2, 5, 24);
    let b = f.base;
    let g = vec![&f.f[0] + &poly(b, 1, 24, &[(1, 0, &[5])])];
    let run = newton_coordinate_change(&f, &g, Some(20), false).unwrap();
    assert_eq!(run.mu, 1);
    assert_eq!(run.bound, 3);
    assert!(!run.forced);
    assert_eq!(run.verified_to, 20);
    assert!(run.ledger_ok(), "{:?}", run.steps);
    assert!(run.steps.len() <= 5);
    assert!(run.steps[0].ord_eps >= 2);

    // g(t + ε) ≡ 0 modulo (t² − π) to order 20, by an independent reduction
    let x = &TruncatedSeries::var(b, 1, 24, 0) + &run.epsilon[0].with_degree_bound(24);
    let moved = g[0].substitute(&[x]).unwrap().truncate_order(20);
    let ideal = LocalIdeal::new(b, 1, 24, vec![f.f[0].clone()]).unwrap();
    assert!(normal_form_at_level(&moved, &ideal, 20).is_zero());

    let check = verify_equisingular(&f, &g, &run).unwrap();
    assert!(check.equisingular, "{check:?}");
    assert_eq!(check.mu_g, 1);
}

#[test]
fn identity_case() {
    let f = node(2, 5, 16);
    let run = newton_coordinate_change(&f, &f.f, None, false).unwrap();
    assert!(run.steps.is_empty());
    assert!(run.epsilon.iter().all(TruncatedSeries::is_zero));
    assert_eq!(run.verified_to, 12);
    assert!(verify_equisingular(&f, &f.f, &run).unwrap().equisingular);
}

#[test]
fn jet_bound_violation() {
    let f = node(2, 5, 16);
    let b = f.base;
    let g = vec![&f.f[0] + &poly(b, 1, 16, &[(1, 0, &[2])])];
    assert!(matches!(
        newton_coordinate_change(&f, &g, None, false),
        Err(Error::JetBoundViolated { order: 2, bound: 3 })
    ));
}

#[test]
fn forced_run_is_marked() {
    // π·t has order 2 < 3μ but lies in m̂³ modulo t² − π
    let f = node(2, 5, 16);
    let b = f.base;
    let g = vec![&f.f[0] + &poly(b, 1, 16, &[(1, 1, &[1])])];
    assert!(newton_coordinate_change(&f, &g, None, false).is_err());
    let run = newton_coordinate_change(&f, &g, None, true).unwrap();
    assert!(run.forced);
    assert_eq!(run.verified_to, 12);
}

#[test]
fn cusp_perturbation() {
    let f = cusp();
    let b = f.base;
    let g = vec![&f.f[0] + &poly(b, 2, 12, &[(1, 0, &[6, 0]), (3, 0, &[2, 4]), (2, 1, &[0, 5])])];
    let run = newton_coordinate_change(&f, &g, Some(14), false).unwrap();
    assert_eq!(run.mu, 2);
    assert!(run.ledger_ok(), "{:?}", run.steps);
    assert!(verify_equisingular(&f, &g, &run).unwrap().equisingular);
}

/// Random terms of m̂-order at least `low` and total t-degree below `d`.
fn perturbation(rng: &mut ChaCha8Rng, f: &Germ, low: u32, d: u32) -> TruncatedSeries {
    let b = f.base;
    let m = f.num_vars();
    let mut s = TruncatedSeries::zero(b, m, d);
    for _ in 0..rng.gen_range(1..4) {
        let a = rng.gen_range(0..3u32);
        let deg = rng.gen_range(low.saturating_sub(a)..low + 3).max(1);
        let mut e = vec![0u32; m];
        for _ in 0..deg {
            e[rng.gen_range(0..m)] += 1;
        }
        let c = b.mul(&b.from_int(rng.gen_range(1..b.p() as i64)), &b.uniformizer_power(a));
        s.add_term(Monomial(e), c);
    }
    s
}

#[test]
fn mu_is_invariant_under_high_order_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for f in [node(2, 5, 16), node(3, 5, 20), cusp()] {
        let mu = milnor_number(&f).unwrap().mu;
        let d = f.degree_bound;
        for _ in 0..20 {
            let h = perturbation(&mut rng, &f, 3 * mu as u32, d);
            let g = Germ::hypersurface(f.base, f.n, &f.f[0] + &h, d).unwrap();
            assert_eq!(milnor_number(&g).unwrap().mu, mu, "f + {h}");
        }
    }
}

#[test]
fn newton_ledger_on_random_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for f in [node(2, 5, 16), node(3, 7, 20)] {
        let mu = milnor_number(&f).unwrap().mu as u32;
        for _ in 0..6 {
            let h = perturbation(&mut rng, &f, 3 * mu, f.degree_bound);
            let g = vec![&f.f[0] + &h];
            let run = newton_coordinate_change(&f, &g, None, false).unwrap();
            assert!(run.ledger_ok(), "{:?}", run.steps);
            assert_eq!(run.verified_to, 12 * mu);
            let t = 12 * mu + 1;
            let wide = *run.epsilon[0].base();
            let fgens = vec![vec![f.f[0].with_base(wide).with_degree_bound(t)]];
            let x = &TruncatedSeries::var(wide, 1, t, 0) + &run.epsilon[0].with_degree_bound(t);
            let moved = g[0].with_base(wide).with_degree_bound(t).substitute(&[x]).unwrap();
            assert!(quotient_order(&[moved], &fgens, 12 * mu) >= 12 * mu);
        }
    }
}
