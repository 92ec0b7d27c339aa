#![allow(dead_code)]

pub mod cases;

use deltaform::{Expr, Parity, RegularForm};
use proptest::prelude::*;

/// One monomial `c · t^a x^b y^c z^d` with small integer data.
pub fn monomial() -> impl Strategy<Value = (i32, [u8; 4])> {
    (-3i32..=3, prop::array::uniform4(0u8..=2))
}

pub fn build_poly(terms: &[(i32, [u8; 4])]) -> Expr {
    Expr::sum_of(terms.iter().map(|(c, pows)| {
        Expr::product_of(
            std::iter::once(Expr::constant(*c as f64))
                .chain((0..4).map(|i| Expr::var(i).powi(pows[i] as i32))),
        )
    }))
}

/// Polynomial with integer coefficients in `t, x, y, z`.
pub fn poly() -> impl Strategy<Value = Expr> {
    prop::collection::vec(monomial(), 1..4).prop_map(|t| build_poly(&t))
}

/// Polynomial plus one transcendental term.
pub fn smooth_field() -> impl Strategy<Value = Expr> {
    (poly(), 0usize..4, 0usize..3, -1.0f64..1.0).prop_map(|(p, v, f, a)| {
        let arg = Expr::var(v).scale(a);
        let g = match f {
            0 => arg.sin(),
            1 => arg.cos(),
            _ => arg.exp(),
        };
        p.add(&g)
    })
}

pub fn parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Untwisted), Just(Parity::Twisted)]
}

pub fn form_with(degree: usize, field: BoxedStrategy<Expr>) -> BoxedStrategy<RegularForm> {
    let n = deltaform::exterior::basis(degree).len();
    (prop::collection::vec(field, n), parity())
        .prop_map(move |(c, p)| RegularForm::from_coefficients(degree, p, c).unwrap())
        .boxed()
}

pub fn poly_form(degree: usize) -> BoxedStrategy<RegularForm> {
    form_with(degree, poly().boxed())
}

pub fn smooth_form(degree: usize) -> BoxedStrategy<RegularForm> {
    form_with(degree, smooth_field().boxed())
}

pub fn sample_points() -> Vec<[f64; 4]> {
    deltaform::Region::cube(0.9).halton(12)
}

/// Largest coefficient difference over the sample points, relative to the
/// size of the values.
pub fn form_gap(a: &RegularForm, b: &RegularForm) -> f64 {
    assert_eq!(a.degree(), b.degree());
    let mut gap: f64 = 0.0;
    for p in sample_points() {
        let va = a.evaluate(&p).unwrap();
        let vb = b.evaluate(&p).unwrap();
        for (x, y) in va.iter().zip(&vb) {
            gap = gap.max((x - y).abs() / (1.0 + x.abs().max(y.abs())));
        }
    }
    gap
}

/// Sign of a permutation of distinct indices, zero on repeats.
pub fn levi_civita(idx: [usize; 4]) -> f64 {
    let mut sign = 1.0;
    for i in 0..4 {
        for j in i + 1..4 {
            if idx[i] == idx[j] {
                return 0.0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}
