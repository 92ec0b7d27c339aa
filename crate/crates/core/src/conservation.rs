//! Charge-conservation residuals and physical densities.
//!
//! Residuals are weak: `dJ` is paired with a family of test 4-chains and
//! the largest absolute pairing is reported. The standard family is the
//! domain box plus five seeded smooth distortions of it.
//!
//! Densities live in adapted coordinates. For a surface the chart is
//! `(t, y¹, y², φ)` and a gauge-reduced `L` is
//!
//! ```text
//! L = -i² dt∧dy¹ + i¹ dt∧dy² + σ dy¹∧dy²
//! ```
//!
//! so that `dL∧dφ = 0` reads `∂i¹/∂y¹ + ∂i²/∂y² = ∂σ/∂t`. For a string the
//! chart is `(t, φ, ψ, s)` and `K = j dt + σ ds`, for which `dK = 0` reads
//! `∂σ/∂t = ∂j/∂s`. With these signs a static sheet or string with positive
//! `σ` carries positive charge.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chains::{collapse_integrate, integrate_regular, Chain, QuadratureSpec};
use crate::error::{Error, Result};
use crate::exterior::{Parity, Region, RegularForm, SmoothMap, DIM};
use crate::expr::Expr;
use crate::singular::{d_singular, point_current, SingularForm};

/// Number of chains in [`standard_test_family`].
pub const FAMILY_SIZE: usize = 6;
const DISTORTION: f64 = 0.015;

/// The domain as a positively oriented 4-chain.
pub fn domain_box(domain: &Region) -> Result<Chain> {
    check_domain(domain)?;
    Chain::axis_box(domain.lo, domain.hi, 1.0)
}

fn check_domain(domain: &Region) -> Result<()> {
    if (0..DIM).any(|i| !(domain.hi[i] > domain.lo[i])) {
        return Err(Error::InvalidChain(format!(
            "domain {:?}..{:?} must have positive extent on every axis",
            domain.lo, domain.hi
        )));
    }
    Ok(())
}

fn normalised(domain: &Region, i: usize) -> (Expr, f64) {
    let c = 0.5 * (domain.lo[i] + domain.hi[i]);
    let h = 0.5 * (domain.hi[i] - domain.lo[i]);
    (Expr::var(i).sub(&Expr::constant(c)).scale(1.0 / h), h)
}

/// Near-identity quadratic map of the domain drawn from `rng`.
pub fn random_distortion(domain: &Region, rng: &mut ChaCha8Rng) -> Result<SmoothMap> {
    let xi: Vec<(Expr, f64)> = (0..DIM).map(|i| normalised(domain, i)).collect();
    let scale = DISTORTION * xi.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let components = std::array::from_fn(|i| {
        let mut terms = vec![Expr::var(i)];
        for j in 0..DIM {
            for k in j..DIM {
                let c: f64 = rng.gen_range(-1.0..1.0);
                terms.push(xi[j].0.mul(&xi[k].0).scale(scale * c));
            }
        }
        Expr::sum_of(terms)
    });
    SmoothMap::new(components, domain)
}

/// Domain box followed by five seeded distortions of it.
pub fn standard_test_family(domain: &Region, seed: u64) -> Result<Vec<Chain>> {
    let base = domain_box(domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut family = vec![base.clone()];
    for _ in 1..FAMILY_SIZE {
        family.push(base.compose(&random_distortion(domain, &mut rng)?)?);
    }
    Ok(family)
}

/// Like [`standard_test_family`] but every distortion acts on each axis
/// separately, so faces stay axis-aligned. Used where a bulk current jumps
/// across a coordinate plane and must not be cut by a face.
pub fn aligned_test_family(domain: &Region, seed: u64) -> Result<Vec<Chain>> {
    let base = domain_box(domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut family = vec![base.clone()];
    for _ in 1..FAMILY_SIZE {
        let components = std::array::from_fn(|i| {
            let (xi, h) = normalised(domain, i);
            let a: f64 = rng.gen_range(-0.2..0.2);
            Expr::var(i).add(&xi.powi(2).sub(&Expr::one()).scale(a * h * 0.5))
        });
        family.push(base.compose(&SmoothMap::new(components, domain)?)?);
    }
    Ok(family)
}

/// Spatial box of the domain at time `t`, oriented by `dx∧dy∧dz`.
pub fn spatial_box(domain: &Region, t: f64) -> Result<Chain> {
    let mut lo = domain.lo;
    let mut hi = domain.hi;
    lo[0] = t;
    hi[0] = t;
    Chain::axis_box(lo, hi, 1.0)
}

/// The plane `x^axis = at` of the domain, swept over the domain's time
/// interval and oriented so that current in the `+axis` direction counts
/// positive.
pub fn flux_chain(domain: &Region, axis: usize, at: f64) -> Result<Chain> {
    if !(1..DIM).contains(&axis) {
        return Err(Error::InvalidChain(format!("flux axis must be spatial, got {axis}")));
    }
    let mut lo = domain.lo;
    let mut hi = domain.hi;
    lo[axis] = at;
    hi[axis] = at;
    let orientation = if axis == 2 { 1.0 } else { -1.0 };
    Chain::axis_box(lo, hi, orientation)
}

/// `max_C |∫_C dJ|` over the test chains.
pub fn current_residual(j: &SingularForm, test4: &[Chain], spec: &QuadratureSpec) -> Result<f64> {
    check_test_chains(test4)?;
    let dj = d_singular(j)?;
    let mut worst = 0.0f64;
    for c in test4 {
        worst = worst.max(collapse_integrate(&dj, c, spec)?.value.abs());
    }
    Ok(worst)
}

fn check_test_chains(test4: &[Chain]) -> Result<()> {
    if let Some(c) = test4.iter().find(|c| c.dim() != DIM) {
        return Err(Error::DegreeMismatch {
            expected: DIM,
            found: c.dim(),
        });
    }
    Ok(())
}

/// `max_C |∫_C dJ_s + ∫_∂C J_b|`: a singular current exchanging charge with
/// a bulk current. The bulk part is paired through the boundary, so bulk
/// currents that jump across the singular support are handled weakly.
pub fn mixed_residual(
    singular: &SingularForm,
    bulk: &RegularForm,
    test4: &[Chain],
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_test_chains(test4)?;
    if singular.degree() != 3 || bulk.degree() != 3 {
        return Err(Error::DegreeMismatch {
            expected: 3,
            found: if singular.degree() != 3 { singular.degree() } else { bulk.degree() },
        });
    }
    if bulk.parity() != singular.parity() {
        return Err(Error::Parity(
            "bulk and singular currents must have the same parity".into(),
        ));
    }
    let dj = d_singular(singular)?;
    let mut worst = 0.0f64;
    for c in test4 {
        let inner = collapse_integrate(&dj, c, spec)?.value;
        let faces = c.boundary()?;
        let flux = faces
            .par_iter()
            .map(|f| integrate_regular(bulk, f, spec))
            .collect::<Result<Vec<f64>>>()?;
        worst = worst.max((inner + flux.iter().sum::<f64>()).abs());
    }
    Ok(worst)
}

/// The twisted 3-form of a bulk charge density and current,
/// `ρ dx∧dy∧dz − jˣ dt∧dy∧dz + jʸ dt∧dx∧dz − jᶻ dt∧dx∧dy`,
/// whose exterior derivative is `(∂ρ/∂t + ∇·j) dt∧dx∧dy∧dz`.
pub fn bulk_current(rho: &Expr, j: &[Expr; 3]) -> RegularForm {
    let terms = [
        (vec![1, 2, 3], rho.clone()),
        (vec![0, 2, 3], j[0].neg()),
        (vec![0, 1, 3], j[1].clone()),
        (vec![0, 1, 2], j[2].neg()),
    ];
    let mut form = RegularForm::zero(3, Parity::Twisted).expect("degree 3");
    for (idx, c) in terms {
        let term = RegularForm::monomial(&idx, c, Parity::Twisted).expect("valid monomial");
        form = form.add(&term).expect("same degree and parity");
    }
    form
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesReport {
    /// `∫_M dJ`
    pub lhs: f64,
    /// `∫_∂M J`
    pub rhs: f64,
    pub gap: f64,
}

/// Both sides of Stokes' theorem for `J` on a 4-chain with the given faces.
/// The face orientations are first validated on a smooth 3-form.
pub fn stokes_check(
    j: &SingularForm,
    m4: &Chain,
    faces: &[Chain],
    spec: &QuadratureSpec,
) -> Result<StokesReport> {
    check_test_chains(std::slice::from_ref(m4))?;
    if let Some(f) = faces.iter().find(|f| f.dim() != 3) {
        return Err(Error::DegreeMismatch {
            expected: 3,
            found: f.dim(),
        });
    }
    let probe = smooth_probe();
    let inside = integrate_regular(&probe.exterior_derivative()?, m4, spec)?;
    let outside: f64 = faces
        .iter()
        .map(|f| integrate_regular(&probe, f, spec))
        .sum::<Result<f64>>()?;
    if (inside - outside).abs() > 1e-8 * (1.0 + inside.abs()) {
        return Err(Error::Orientation(format!(
            "faces do not bound the chain: smooth probe gives {inside} inside, {outside} on the faces"
        )));
    }
    let lhs = collapse_integrate(&d_singular(j)?, m4, spec)?.value;
    let rhs: f64 = faces
        .iter()
        .map(|f| collapse_integrate(j, f, spec).map(|r| r.value))
        .sum::<Result<f64>>()?;
    Ok(StokesReport {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

/// A 3-form whose derivative is nowhere small: every face of a box sees it.
fn smooth_probe() -> RegularForm {
    let rho = Expr::one().add(&Expr::var(1).mul(&Expr::var(0)));
    let j = [
        Expr::var(1).scale(0.7),
        Expr::var(2).mul(&Expr::var(2)).scale(0.3),
        Expr::var(3).scale(1.1).add(&Expr::var(0)),
    ];
    bulk_current(&rho, &j)
}

/// Surface densities as fields of the adapted coordinates `(t, y¹, y²)`.
#[derive(Debug, Clone)]
pub struct SurfaceDensities {
    pub sigma: Expr,
    pub i1: Expr,
    pub i2: Expr,
}

/// String densities as fields of the adapted coordinates `(t, s)`, where
/// `s` is variable 3 of the chart `(t, φ, ψ, s)`.
#[derive(Debug, Clone)]
pub struct StringDensities {
    pub sigma: Expr,
    pub j: Expr,
}

#[derive(Debug, Clone)]
pub struct PointDensities {
    pub q: Expr,
    pub worldline: [Expr; 3],
    /// `q r₀'(t)`
    pub current: [Expr; 3],
}

#[derive(Debug, Clone)]
pub enum DensityBundle {
    Surface(SurfaceDensities),
    String(StringDensities),
    Point(PointDensities),
}

const SURFACE_NORMAL: u8 = 0b1000;
const STRING_NORMALS: u8 = 0b0110;

fn require_reduced(form: &RegularForm, normals: u8, names: &str) -> Result<()> {
    if form
        .terms()
        .any(|(mask, c)| mask & normals != 0 && !c.is_zero())
    {
        return Err(Error::NotReduced(names.into()));
    }
    Ok(())
}

fn require_twisted(form: &RegularForm, degree: usize) -> Result<()> {
    if form.degree() != degree {
        return Err(Error::DegreeMismatch {
            expected: degree,
            found: form.degree(),
        });
    }
    if form.parity() != Parity::Twisted {
        return Err(Error::Parity("densities come from twisted forms".into()));
    }
    Ok(())
}

/// `(σ, i¹, i²)` from a gauge-reduced twisted 2-form in the surface chart.
pub fn extract_surface_densities(l: &RegularForm) -> Result<SurfaceDensities> {
    require_twisted(l, 2)?;
    require_reduced(l, SURFACE_NORMAL, "phi")?;
    Ok(SurfaceDensities {
        sigma: l.component(&[1, 2]),
        i1: l.component(&[0, 2]),
        i2: l.component(&[0, 1]).neg(),
    })
}

pub fn assemble_surface(d: &SurfaceDensities) -> RegularForm {
    let parts = [
        (vec![0, 1], d.i2.neg()),
        (vec![0, 2], d.i1.clone()),
        (vec![1, 2], d.sigma.clone()),
    ];
    let mut l = RegularForm::zero(2, Parity::Twisted).expect("degree 2");
    for (idx, c) in parts {
        l = l
            .add(&RegularForm::monomial(&idx, c, Parity::Twisted).expect("valid monomial"))
            .expect("same degree and parity");
    }
    l
}

/// `(σ, j)` from a reduced twisted 1-form in the string chart.
pub fn extract_string_densities(k: &RegularForm) -> Result<StringDensities> {
    require_twisted(k, 1)?;
    require_reduced(k, STRING_NORMALS, "phi, dpsi")?;
    Ok(StringDensities {
        sigma: k.component(&[3]),
        j: k.component(&[0]),
    })
}

pub fn assemble_string(d: &StringDensities) -> RegularForm {
    RegularForm::monomial(&[0], d.j.clone(), Parity::Twisted)
        .and_then(|a| a.add(&RegularForm::monomial(&[3], d.sigma.clone(), Parity::Twisted)?))
        .expect("degree 1 twisted")
}

/// Charge and current of a point charge moving on `r₀(t)`.
pub fn point_densities(q: &Expr, worldline: &[Expr; 3]) -> PointDensities {
    PointDensities {
        q: q.clone(),
        worldline: worldline.clone(),
        current: std::array::from_fn(|a| q.mul(&worldline[a].diff(0))),
    }
}

/// `q D(x − x₀(t)) ∧ D(y − y₀(t)) ∧ D(z − z₀(t))`.
pub fn point_current_on(q: &Expr, worldline: &[Expr; 3]) -> Result<SingularForm> {
    for (a, w) in worldline.iter().enumerate() {
        if (1..DIM).any(|v| w.depends_on(v)) {
            return Err(Error::config(
                format!("worldline[{a}]"),
                "worldline components may depend on t only",
            ));
        }
    }
    let fields: Vec<Expr> = (0..3).map(|a| Expr::var(a + 1).sub(&worldline[a])).collect();
    point_current(
        &RegularForm::scalar(q.clone(), Parity::Twisted),
        &fields[0],
        &fields[1],
        &fields[2],
    )
}

fn max_over(grid: &[[f64; 4]], f: &Expr) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in grid {
        let v = f.eval(p).map_err(|e| Error::Domain {
            point: p.to_vec(),
            source: e,
        })?;
        worst = worst.max(v.abs());
    }
    Ok(worst)
}

/// `max |∂i¹/∂y¹ + ∂i²/∂y² − ∂σ/∂t|` over the grid (points in `(t, y¹, y², φ)`).
pub fn surface_law_residual(d: &SurfaceDensities, grid: &[[f64; 4]]) -> Result<f64> {
    let law = d.i1.diff(1).add(&d.i2.diff(2)).sub(&d.sigma.diff(0));
    max_over(grid, &law)
}

/// `max |∂σ/∂t − ∂j/∂s|` over the grid (points in `(t, φ, ψ, s)`).
pub fn string_law_residual(d: &StringDensities, grid: &[[f64; 4]]) -> Result<f64> {
    let law = d.sigma.diff(0).sub(&d.j.diff(3));
    max_over(grid, &law)
}

/// `max |∂q/∂t|`: a point charge cannot change.
pub fn point_law_residual(d: &PointDensities, grid: &[[f64; 4]]) -> Result<f64> {
    max_over(grid, &d.q.diff(0))
}

/// One line of a residual report.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualRow {
    pub scenario: String,
    pub law: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualRow {
    pub const CSV_HEADER: &'static str = "scenario,law,residual,tolerance,status";

    pub fn new(scenario: &str, law: &str, residual: f64, tolerance: f64) -> ResidualRow {
        ResidualRow {
            scenario: scenario.into(),
            law: law.into(),
            residual,
            tolerance,
            pass: residual < tolerance,
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{:.12e},{:.3e},{}",
            self.scenario,
            self.law,
            self.residual,
            self.tolerance,
            if self.pass { "pass" } else { "fail" }
        )
    }
}
