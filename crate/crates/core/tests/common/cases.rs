//! Seeded random inputs shared by the integration and acceptance tests.

use deltaform::conservation::{random_distortion, spatial_box};
use deltaform::{Chain, Expr, Parity, Region, RegularForm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn t() -> Expr {
    Expr::var(0)
}
pub fn x() -> Expr {
    Expr::var(1)
}
pub fn y() -> Expr {
    Expr::var(2)
}
pub fn z() -> Expr {
    Expr::var(3)
}

fn c(v: f64) -> Expr {
    Expr::constant(v)
}

/// Region used by the spatial test boxes.
pub fn unit_domain() -> Region {
    Region::new([0.0, -1.0, -1.0, -1.0], [1.0, 1.0, 1.0, 1.0])
}

/// Random polynomial of total degree at most 2 with coefficients in `[-1, 1]`.
pub fn small_poly(rng: &mut ChaCha8Rng) -> Expr {
    let vars = [t(), x(), y(), z()];
    let mut terms = vec![c(rng.gen_range(-1.0..1.0))];
    for v in &vars {
        terms.push(v.scale(rng.gen_range(-1.0..1.0)));
    }
    for _ in 0..2 {
        let a = &vars[rng.gen_range(0..4)];
        let b = &vars[rng.gen_range(0..4)];
        terms.push(a.mul(b).scale(rng.gen_range(-0.5..0.5)));
    }
    Expr::sum_of(terms)
}

pub fn twisted_form(rng: &mut ChaCha8Rng, degree: usize) -> RegularForm {
    let n = deltaform::exterior::basis(degree).len();
    let coeffs = (0..n).map(|_| small_poly(rng)).collect();
    RegularForm::from_coefficients(degree, Parity::Twisted, coeffs).unwrap()
}

/// A tilted, mildly curved sheet `z = h(t, x, y)` with `|h| < 0.7`.
pub fn surface_level(rng: &mut ChaCha8Rng) -> Expr {
    let mut g = || rng.gen_range(-0.2..0.2);
    let h = Expr::sum_of([
        x().scale(g()),
        y().scale(g()),
        t().scale(g()),
        x().mul(&y()).scale(0.5 * g()),
    ]);
    z().sub(&h)
}

/// A string running along `y`, displaced by less than 0.5 in `x` and `z`.
pub fn string_levels(rng: &mut ChaCha8Rng) -> (Expr, Expr) {
    let mut g = || rng.gen_range(-0.15..0.15);
    let phi = x().sub(&Expr::sum_of([y().scale(g()), t().scale(g()), y().mul(&y()).scale(g())]));
    let psi = z().sub(&Expr::sum_of([y().scale(g()), t().scale(g()), x().scale(g())]));
    (phi, psi)
}

/// Level sets of a worldline staying within 0.5 of the origin.
pub fn point_levels(rng: &mut ChaCha8Rng) -> [Expr; 3] {
    let mut g = || rng.gen_range(-0.15..0.15);
    [
        x().sub(&Expr::sum_of([c(g()), t().scale(g()), t().mul(&t()).scale(g()), y().scale(g())])),
        y().sub(&Expr::sum_of([c(g()), t().scale(g()), z().scale(g())])),
        z().sub(&Expr::sum_of([c(g()), t().scale(g()), x().scale(g())])),
    ]
}

/// Spatial box of [`unit_domain`] at a random time, randomly distorted.
pub fn crossing_3chain(rng: &mut ChaCha8Rng) -> Chain {
    let domain = unit_domain();
    let time = rng.gen_range(0.1..0.9);
    let base = spatial_box(&domain, time).unwrap();
    base.compose(&random_distortion(&domain, rng).unwrap()).unwrap()
}

/// Segment from `z = -1` to `z = 1` at a random `(t, x, y)`, slightly tilted.
pub fn vertical_segment(rng: &mut ChaCha8Rng) -> Chain {
    let mut g = |a: f64| rng.gen_range(-a..a);
    let (t0, x0, y0) = (0.5 + g(0.4), g(0.8), g(0.8));
    let (dx, dy) = (g(0.1), g(0.1));
    let u = Expr::var(0);
    Chain::new(
        1,
        [
            c(t0),
            c(x0).add(&u.scale(dx)),
            c(y0).add(&u.scale(dy)),
            u.scale(2.0).sub(&c(1.0)),
        ],
        1.0,
    )
    .unwrap()
}

/// A 2-chain bent through `z`, spanning `x, z ∈ [-1, 1]`.
pub fn crossing_2chain(rng: &mut ChaCha8Rng) -> Chain {
    let mut g = |a: f64| rng.gen_range(-a..a);
    let (t0, y0, bend) = (0.5 + g(0.4), g(0.5), g(0.2));
    let u = Expr::var(0);
    let v = Expr::var(1);
    let xs = u.scale(2.0).sub(&c(1.0));
    let zs = v.scale(2.0).sub(&c(1.0));
    Chain::new(
        2,
        [c(t0), xs.clone(), c(y0).add(&xs.mul(&zs).scale(bend)), zs],
        1.0,
    )
    .unwrap()
}

/// A distorted 4-box of [`unit_domain`].
pub fn test_4chain(rng: &mut ChaCha8Rng) -> Chain {
    let domain = unit_domain();
    let base = deltaform::conservation::domain_box(&domain).unwrap();
    base.compose(&random_distortion(&domain, rng).unwrap()).unwrap()
}

/// `f ∘ φ` for the three increasing reparametrizations fixing zero.
pub fn reparametrizations(phi: &Expr) -> [(&'static str, Expr); 3] {
    [
        ("2s", phi.scale(2.0)),
        ("s+s^3", phi.add(&phi.powi(3))),
        ("e^s-1", phi.exp().sub(&Expr::one())),
    ]
}
