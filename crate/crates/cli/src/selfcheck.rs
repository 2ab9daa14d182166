//! Built-in corpus of germs with known invariants.

use milnorkit::base::BaseRing;
use milnorkit::compactify::{
    determinantal_codim_count, homogenize, incidence_fiber_dim_check, sample_good, smoothness_scan, Template,
};
use milnorkit::determinacy::{newton_coordinate_change, verify_equisingular};
use milnorkit::error::Result;
use milnorkit::gf::Gf;
use milnorkit::koszul::{dualize, homology_lengths, kos_minus, kos_wedge, FreeComplex, QuotientRing};
use milnorkit::local::LocalIdeal;
use milnorkit::milnor::{milnor_number, milnor_report, Germ, MilnorConfig};
use milnorkit::newton::{dim_phi0, verify_deligne_milnor_n0};
use milnorkit::series::{Monomial, TruncatedSeries};
use serde_json::{json, Value};
use std::sync::Arc;

use crate::run::Outcome;

/// `Σ c π^k t^e` over `b`.
fn poly(b: BaseRing, nv: usize, d: u32, terms: &[(i64, u32, &[u32])]) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(b, nv, d);
    for &(c, k, e) in terms {
        s.add_term(Monomial(e.to_vec()), b.mul(&b.from_int(c), &b.uniformizer_power(k)));
    }
    s
}

fn node(b: BaseRing, a: u32, d: u32) -> Result<Germ> {
    Germ::hypersurface(b, 0, poly(b, 1, d, &[(1, 0, &[a]), (-1, 1, &[0])]), d)
}

fn cusp() -> Result<Germ> {
    let b = BaseRing::eq_char(7, 12)?;
    Germ::hypersurface(b, 1, poly(b, 2, 12, &[(1, 0, &[0, 2]), (-1, 0, &[3, 0]), (-1, 1, &[0, 0])]), 12)
}

type Check = (&'static str, Box<dyn Fn() -> Result<(String, String)>>);

fn checks() -> Vec<Check> {
    vec![
        ("mixed t^3 - 7 over Z/7^8", Box::new(|| {
            let b = BaseRing::mixed_char(7, 8)?;
            let g = Germ::hypersurface(b, 0, poly(b, 1, 8, &[(1, 0, &[3]), (-7, 0, &[0])]), 8)?;
            Ok(("2".into(), milnor_number(&g)?.mu.to_string()))
        })),
        ("cusp: mu = t1 = koszul", Box::new(|| {
            let r = milnor_report(&cusp()?, MilnorConfig::default())?;
            Ok(("2 2 2 true".into(), format!("{} {:?} {:?} {}", r.mu, r.t1_length.unwrap_or(0), r.mu_via_koszul.unwrap_or(0), r.agreement)))
        })),
        ("y^2 - x^3 - pi x", Box::new(|| {
            let b = BaseRing::eq_char(5, 8)?;
            let g = Germ::hypersurface(b, 1, poly(b, 2, 8, &[(1, 0, &[0, 2]), (-1, 0, &[3, 0]), (-1, 1, &[1, 0])]), 8)?;
            Ok(("3".into(), milnor_number(&g)?.mu.to_string()))
        })),
        ("koszul duality on (t1, t2 + pi)", Box::new(|| {
            let b = BaseRing::eq_char(5, 6)?;
            let ring = QuotientRing::free(b, 2, 6);
            let u = vec![poly(b, 2, 6, &[(1, 0, &[1, 0])]), poly(b, 2, 6, &[(1, 0, &[0, 1]), (1, 1, &[0, 0])])];
            let km = kos_minus(&ring, &u)?;
            Ok(("true".into(), (dualize(&km) == kos_wedge(&ring, &u)?).to_string()))
        })),
        ("koszul duality detects a flipped sign", Box::new(|| {
            let b = BaseRing::eq_char(5, 6)?;
            let ring = QuotientRing::free(b, 2, 6);
            let u = vec![poly(b, 2, 6, &[(1, 0, &[1, 0])]), poly(b, 2, 6, &[(1, 0, &[0, 1])])];
            let kw = kos_wedge(&ring, &u)?;
            let mut diffs = kw.differentials().to_vec();
            diffs[0].entries[0][0] = diffs[0].entries[0][0].neg();
            let ranks = kw.degrees().map(|d| kw.rank(d)).collect();
            let corrupted = FreeComplex::new(ring.clone(), kw.low(), ranks, diffs)?;
            Ok(("false".into(), (dualize(&kos_minus(&ring, &u)?) == corrupted).to_string()))
        })),
        ("Kos(t1, t2) over P/(pi) is acyclic", Box::new(|| {
            let b = BaseRing::eq_char(5, 12)?;
            let ring = QuotientRing::new(LocalIdeal::new(b, 2, 12, vec![TruncatedSeries::uniformizer(b, 2, 12)])?);
            let u = vec![TruncatedSeries::var(b, 2, 12, 0), TruncatedSeries::var(b, 2, 12, 1)];
            Ok(("{-2: 0, -1: 0, 0: 1}".into(), format!("{:?}", homology_lengths(&kos_minus(&ring, &u)?)?)))
        })),
        ("t^2 - pi + t^5 is carried back to t^2 - pi", Box::new(|| {
            let b = BaseRing::eq_char(5, 24)?;
            let f = node(b, 2, 24)?;
            let g = vec![&f.f[0] + &poly(b, 1, 24, &[(1, 0, &[5])])];
            let run = newton_coordinate_change(&f, &g, Some(20), false)?;
            let check = verify_equisingular(&f, &g, &run)?;
            Ok(("20 true true".into(), format!("{} {} {}", run.verified_to, run.ledger_ok(), check.equisingular)))
        })),
        ("dm0: t^4 - pi, p = 5", Box::new(|| {
            let r = verify_deligne_milnor_n0(&node(BaseRing::eq_char(5, 12)?, 4, 12)?)?;
            Ok(("Some(3) 3 Some(true)".into(), format!("{:?} {} {:?}", r.mu, r.dim_phi0, r.verified)))
        })),
        ("dm0: t^5 - pi, p = 5 is excluded", Box::new(|| {
            let r = verify_deligne_milnor_n0(&node(BaseRing::eq_char(5, 12)?, 5, 12)?)?;
            Ok(("false None".into(), format!("{} {:?}", r.tame, r.verified)))
        })),
        ("dim Phi0 of (t^2 - pi)(t - pi)", Box::new(|| {
            let b = BaseRing::eq_char(5, 8)?;
            Ok(("2".into(), dim_phi0(&poly(b, 1, 8, &[(1, 0, &[3]), (-1, 1, &[2]), (-1, 1, &[1]), (1, 2, &[0])]))?.to_string()))
        })),
        ("t^2 template over F_5: scan", Box::new(|| {
            let t = Template::from_fiber(Arc::new(Gf::new(5, 1)?), 0, vec![vec![(vec![2], 1)]], 3)?;
            let good = smoothness_scan(&homogenize(&t.family(vec![vec![1, 1]])?), t.field.clone(), 2)?;
            let zero = smoothness_scan(&homogenize(&t.zero_family()), t.field.clone(), 2)?;
            Ok(("0 1".into(), format!("{} {}", good.bad_points.len(), zero.bad_points.len())))
        })),
        ("t^2 - pi: sampler over F_7, seed 42", Box::new(|| {
            let t = Template::from_germ(&node(BaseRing::eq_char(7, 12)?, 2, 12)?, 7, Some(3))?;
            let r = sample_good(&t, 42, 50, 2)?;
            Ok(("true Some(true)".into(), format!("{} {:?}", r.good_found, r.mu_preserved)))
        })),
        ("singular 2x2 matrices over F_3", Box::new(|| {
            Ok(("Some(33)".into(), format!("{:?}", determinantal_codim_count(0, 2, 3)?.deficient)))
        })),
        ("incidence fibre at (0:1), q = 3, lambda = 1", Box::new(|| {
            let t = Template::from_fiber(Arc::new(Gf::new(3, 1)?), 0, vec![vec![(vec![2], 1)]], 1)?;
            let c = incidence_fiber_dim_check(&t, &[0, 1])?;
            Ok(("1 true".into(), format!("{} {}", c.count, c.pass)))
        })),
    ]
}

pub fn run() -> Outcome {
    let mut rows = Vec::new();
    // the node family t^a - pi through both pipelines
    let mut family = Vec::new();
    for a in 2..=8u32 {
        let got = BaseRing::eq_char(11, 16)
            .and_then(|b| node(b, a, 16))
            .and_then(|g| Ok((milnor_number(&g)?.mu, verify_deligne_milnor_n0(&g)?.dim_phi0)));
        let pass = matches!(got, Ok((mu, d)) if mu == u64::from(a - 1) && d == u64::from(a - 1));
        family.push(match &got {
            Ok((mu, d)) => json!({"a": a, "mu": mu, "dim_phi0": d}),
            Err(e) => json!({"a": a, "error": e.to_string()}),
        });
        rows.push(json!({
            "name": format!("t^{a} - pi, p = 11: mu = dim Phi0 = {}", a - 1),
            "expected": format!("{} {}", a - 1, a - 1),
            "got": got.as_ref().map_or_else(|e| e.to_string(), |(m, d)| format!("{m} {d}")),
            "pass": pass,
        }));
    }
    for (name, check) in checks() {
        let (expected, got, pass) = match check() {
            Ok((e, g)) => {
                let pass = e == g;
                (e, g, pass)
            }
            Err(e) => (String::new(), format!("error: {e}"), false),
        };
        rows.push(json!({"name": name, "expected": expected, "got": got, "pass": pass}));
    }
    let failed = rows.iter().filter(|r| r["pass"] == Value::Bool(false)).count();
    for r in &rows {
        eprintln!("{}  {}", if r["pass"] == Value::Bool(true) { "PASS" } else { "FAIL" }, r["name"].as_str().unwrap_or(""));
    }
    Outcome {
        verified: failed == 0,
        summary: format!("{} of {} checks passed", rows.len() - failed, rows.len()),
        result: json!({"checks": rows, "failed": failed, "node_family": family}),
        precision: None,
        provenance: json!({"checks": "library operations per check name"}),
    }
}
