use milnorkit::base::{BaseRing, Model};
use milnorkit::series::{Monomial, TruncatedSeries};
use proptest::prelude::*;

const D: u32 = 5;
const N: u32 = 4;

fn base(model: Model) -> BaseRing {
    match model {
        Model::EqChar => BaseRing::eq_char(3, N).unwrap(),
        Model::MixedChar => BaseRing::mixed_char(2, N).unwrap(),
    }
}

fn model() -> impl Strategy<Value = Model> {
    prop_oneof![Just(Model::EqChar), Just(Model::MixedChar)]
}

type Terms = Vec<(i64, u32, Vec<u32>)>;

fn terms() -> impl Strategy<Value = Terms> {
    prop::collection::vec((-4i64..5, 0u32..3, prop::collection::vec(0u32..3, 2)), 0..6)
}

fn series(b: BaseRing, ts: &Terms) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(b, 2, D);
    for (c, k, e) in ts {
        s.add_term(Monomial(e.clone()), b.mul(&b.from_int(*c), &b.uniformizer_power(*k)));
    }
    s
}

/// Same as [`series`] but forced into the maximal ideal.
fn in_max(b: BaseRing, ts: &Terms) -> TruncatedSeries {
    let s = series(b, ts);
    let c = TruncatedSeries::constant(b, 2, D, s.constant_term());
    let pi = TruncatedSeries::uniformizer(b, 2, D);
    &(&s - &c) + &(&c * &pi)
}

proptest! {
    #[test]
    fn ring_axioms(m in model(), a in terms(), b in terms(), c in terms()) {
        let r = base(m);
        let (a, b, c) = (series(r, &a), series(r, &b), series(r, &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        let one = TruncatedSeries::one(r, 2, D);
        prop_assert_eq!(&a * &one, a.clone());
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn derivative_is_a_derivation(m in model(), a in terms(), b in terms(), j in 0usize..2) {
        let r = base(m);
        let (a, b) = (series(r, &a), series(r, &b));
        let lhs = (&a * &b).partial_derivative(j).unwrap();
        let rhs = &(&a * &b.partial_derivative(j).unwrap()) + &(&b * &a.partial_derivative(j).unwrap());
        prop_assert_eq!(lhs.degree_bound(), D - 1);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn substitution_is_functorial(m in model(), a in terms(), x0 in terms(), x1 in terms(), y0 in terms(), y1 in terms()) {
        let r = base(m);
        let a = series(r, &a);
        let x = vec![in_max(r, &x0), in_max(r, &x1)];
        let y = vec![in_max(r, &y0), in_max(r, &y1)];
        let lhs = a.substitute(&x).unwrap().substitute(&y).unwrap();
        let xy: Vec<_> = x.iter().map(|xi| xi.substitute(&y).unwrap()).collect();
        prop_assert_eq!(lhs, a.substitute(&xy).unwrap());
    }

    #[test]
    fn identity_substitution(m in model(), a in terms()) {
        let r = base(m);
        let a = series(r, &a);
        let id = vec![TruncatedSeries::var(r, 2, D, 0), TruncatedSeries::var(r, 2, D, 1)];
        prop_assert_eq!(a.substitute(&id).unwrap(), a);
    }

    #[test]
    fn truncated_substitution_agrees_below_cap(m in model(), a in terms(), x0 in terms(), x1 in terms(), cap in 1u32..6) {
        let r = base(m);
        let a = series(r, &a);
        let x = vec![in_max(r, &x0), in_max(r, &x1)];
        let full = a.substitute(&x).unwrap().truncate_order(cap);
        prop_assert_eq!(a.substitute_mod_order(&x, cap).unwrap(), full);
    }

    #[test]
    fn order_is_superadditive(m in model(), a in terms(), b in terms()) {
        let r = base(m);
        let (a, b) = (series(r, &a), series(r, &b));
        let (oa, ob, oab) = (a.t_order(), b.t_order(), (&a * &b).t_order());
        if a.is_zero() || b.is_zero() {
            prop_assert!((&a * &b).is_zero());
        } else {
            // the zero sentinel D + N caps every order
            prop_assert!(oab >= (oa + ob).min(D + N));
            // the associated graded ring of F_p[[π, t]] is a domain
            if m == Model::EqChar && oa + ob < D.min(N) {
                prop_assert_eq!(oab, oa + ob);
            }
        }
    }
}

#[test]
fn order_examples() {
    let b = BaseRing::eq_char(5, 6).unwrap();
    let t = TruncatedSeries::var(b, 1, 8, 0);
    let pi = TruncatedSeries::uniformizer(b, 1, 8);
    assert_eq!(TruncatedSeries::zero(b, 1, 8).t_order(), 14);
    assert_eq!((&pi * &t.pow(2)).t_order(), 3);
    assert_eq!(t.pow(5).t_order(), 5);
}
