mod common;

use common::cases::*;
use common::levi_civita;
use deltaform::{
    collapse_integrate, d_singular, delta, dualize3, gauge_reduce, string_current,
    surface_current, weak_equal, Chain, Expr, Parity, QuadratureSpec, RegularForm,
};
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn pair(j: &deltaform::SingularForm, c: &Chain) -> f64 {
    collapse_integrate(j, c, &spec()).unwrap().value
}

#[test]
fn delta_is_invariant_under_increasing_reparametrization() {
    let mut r = rng(11);
    for _ in 0..4 {
        let phi = surface_level(&mut r);
        let segments: Vec<Chain> = (0..10).map(|_| vertical_segment(&mut r)).collect();
        let sheets: Vec<Chain> = (0..10).map(|_| crossing_3chain(&mut r)).collect();
        let l = twisted_form(&mut r, 2);
        for (name, f) in reparametrizations(&phi) {
            let a = delta(&phi).unwrap();
            let b = delta(&f).unwrap();
            assert!(weak_equal(&a, &b, &segments, 1e-6, &spec()).unwrap(), "{name}");
            for s in &segments {
                assert!((pair(&a, s) - 1.0).abs() < 1e-9);
            }
            let ja = surface_current(&l, &phi).unwrap();
            let jb = surface_current(&l, &f).unwrap();
            assert!(weak_equal(&ja, &jb, &sheets, 1e-6, &spec()).unwrap(), "{name}");
        }
    }
}

#[test]
fn weak_equality_separates_disjoint_supports() {
    let seg = vec![Chain::parse(1, ["0.5", "0", "0", "u1 - 0.5"], 1.0).unwrap()];
    let a = delta(&z()).unwrap();
    let b = delta(&z().sub(&Expr::one())).unwrap();
    assert!(!weak_equal(&a, &b, &seg, 1e-6, &spec()).unwrap());
    assert!(weak_equal(&a, &a, &seg, 1e-12, &spec()).unwrap());
    let sq = vec![Chain::parse(2, ["0.5", "u1", "u2", "0"], 1.0).unwrap()];
    assert!(weak_equal(&a, &b, &sq, 1e-6, &spec()).is_err());
}

#[test]
fn delta_forms_are_closed() {
    let mut r = rng(12);
    for _ in 0..20 {
        let phi = surface_level(&mut r);
        let dd = d_singular(&delta(&phi).unwrap()).unwrap();
        let j = delta(&phi).unwrap();
        for _ in 0..10 {
            let c = crossing_2chain(&mut r);
            assert!(pair(&dd, &c).abs() < 1e-8);
            // Stokes on the 2-chain: the signed crossings of its boundary cancel.
            let around: f64 = c.boundary().unwrap().iter().map(|e| pair(&j, e)).sum();
            assert!(around.abs() < 1e-8, "{around}");
        }
    }
}

#[test]
fn currents_are_tangential() {
    let mut r = rng(13);
    for _ in 0..5 {
        let phi = surface_level(&mut r);
        let l = twisted_form(&mut r, 2);
        let js = surface_current(&l, &phi).unwrap();
        let dphi = RegularForm::differential(&phi);
        let along = js.wedge_regular(&dphi).unwrap();

        let (p, q) = string_levels(&mut r);
        let k = twisted_form(&mut r, 1);
        let jt = string_current(&k, &p, &q).unwrap();
        let by_phi = jt.wedge_regular(&RegularForm::differential(&p)).unwrap();
        let by_psi = jt.wedge_regular(&RegularForm::differential(&q)).unwrap();
        for _ in 0..3 {
            let c = test_4chain(&mut r);
            for form in [&along, &by_phi, &by_psi] {
                assert!(pair(form, &c).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn transversality_is_enforced() {
    let k = RegularForm::monomial(&[2], Expr::one(), Parity::Twisted).unwrap();
    assert!(string_current(&k, &x(), &x()).is_err());
    let untwisted = RegularForm::monomial(&[1, 2], Expr::one(), Parity::Untwisted).unwrap();
    assert!(surface_current(&untwisted, &z()).is_err());
    assert!(delta(&x()).unwrap().wedge(&delta(&x()).unwrap()).is_err());
}

#[test]
fn gauge_reduction_preserves_pairings() {
    let mut r = rng(14);
    let phi = z().sub(&x().scale(0.2)).sub(&t().scale(0.1));
    for _ in 0..3 {
        let l = twisted_form(&mut r, 2);
        let reduced = gauge_reduce(&l, &phi).unwrap();
        let again = gauge_reduce(&reduced, &phi).unwrap();
        for (a, b) in reduced.coefficients().iter().zip(again.coefficients()) {
            assert!(a.agrees_with(b, &deltaform::Region::cube(1.0).halton(20), 1e-12));
        }
        let chains: Vec<Chain> = (0..10).map(|_| crossing_3chain(&mut r)).collect();
        let a = surface_current(&l, &phi).unwrap();
        let b = surface_current(&reduced, &phi).unwrap();
        assert!(weak_equal(&a, &b, &chains, 1e-6, &spec()).unwrap());
    }
}

fn twisted_poly_2form() -> impl Strategy<Value = RegularForm> {
    common::form_with(2, common::poly().boxed())
        .prop_map(|f| f.with_parity(Parity::Twisted))
}

proptest! {
    #![proptest_config(common::config(50))]

    #[test]
    fn d_squared_vanishes_on_singular_forms(k in common::poly(), phi in common::poly()) {
        let d = delta(&phi);
        prop_assume!(d.is_ok());
        let j = deltaform::SingularForm::from_regular(RegularForm::scalar(k, Parity::Twisted))
            .wedge(&d.unwrap())
            .unwrap();
        let dd = d_singular(&d_singular(&j).unwrap()).unwrap();
        prop_assert!(dd.is_symbolically_zero());
    }

    #[test]
    fn dual_components_match_contracted_l(l in twisted_poly_2form(), a in -0.3f64..0.3, b in -0.3f64..0.3) {
        let phi = z().sub(&x().scale(a)).sub(&x().mul(&y()).scale(b));
        let j = surface_current(&l, &phi).unwrap();
        let dual = dualize3(&j.pattern()).unwrap();
        let grad = phi.gradient(4);
        for p in common::sample_points().into_iter().take(4) {
            for (i, di) in dual.iter().enumerate() {
                // L^{ij} φ_{,j} with L^{ij} = ½ ε^{ijkl} L_{kl}
                let mut expected = 0.0;
                for jj in 0..4 {
                    let mut lij = 0.0;
                    for k in 0..4 {
                        for m in 0..4 {
                            let e = levi_civita([i, jj, k, m]);
                            if e != 0.0 {
                                lij += 0.5 * e * l.component(&[k, m]).eval(&p).unwrap();
                            }
                        }
                    }
                    expected += lij * grad[jj].eval(&p).unwrap();
                }
                let got = di.eval(&p).unwrap();
                prop_assert!((got - expected).abs() <= 1e-10 * (1.0 + expected.abs()));
            }
        }
    }
}
