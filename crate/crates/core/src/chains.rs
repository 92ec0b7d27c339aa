//! Parametrised chains and integration of singular forms over them.
//!
//! A `k`-chain is a smooth map from the unit cube `[0,1]^k` into spacetime
//! together with an orientation sign. Two integrators are provided:
//!
//! * [`collapse_integrate`] integrates the delta factors away by solving
//!   `Φ = 0` on the chain and quadratures the remaining smooth integrand;
//! * [`mollified_integrate`] replaces every delta by a narrow Gaussian and
//!   extrapolates a ladder of widths to zero. It shares no root finding with
//!   the collapse path and serves as its reference.

use nalgebra::{DMatrix, Matrix4};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::{RegularForm, SmoothMap, DIM};
use crate::expr::Expr;
use crate::levelset::{largest_minor, transversality, TransversalityReport};
use crate::parse::parse_expr;
use crate::quadrature::UnitRule;
use crate::singular::SingularForm;

/// Smallest axis-selection determinant accepted by the collapse.
pub const COLLAPSE_THRESHOLD: f64 = 1e-10;
const SCAN_INTERVALS: usize = 64;
const NEWTON_ITERATIONS: usize = 50;
const ROOT_TOL: f64 = 1e-12;
/// Cells farther than this many widths from any one zero set are skipped.
const MOLLIFIER_CUTOFF: f64 = 8.0;
const MOLLIFIER_CELL_ORDER: usize = 8;
const MOLLIFIER_MAX_DEPTH: usize = 30;
/// Relative size of ladder steps treated as quadrature noise rather than
/// divergence.
const LADDER_NOISE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss–Legendre points per axis.
    pub order: usize,
    /// Widest mollifier in the oracle ladder.
    pub epsilon: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 16,
            epsilon: 1e-2,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::InvalidQuadrature(format!(
                "order must be at least 2, got {}",
                self.order
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidQuadrature(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Chain {
    dim: usize,
    map: [Expr; 4],
    /// `jacobian[a][i] = ∂x^i/∂u_a`
    jacobian: Vec<[Expr; 4]>,
    orientation: f64,
}

impl Chain {
    /// `map` is written in the parameters `u1..uk` (variables `0..k`).
    pub fn new(dim: usize, map: [Expr; 4], orientation: f64) -> Result<Chain> {
        if dim > DIM {
            return Err(Error::InvalidChain(format!("dimension {dim} exceeds 4")));
        }
        if orientation != 1.0 && orientation != -1.0 {
            return Err(Error::InvalidChain(format!(
                "orientation must be +1 or -1, got {orientation}"
            )));
        }
        for (i, c) in map.iter().enumerate() {
            if (dim..DIM).any(|v| c.depends_on(v)) {
                return Err(Error::InvalidChain(format!(
                    "component {i} = {c} uses a parameter beyond u{dim}"
                )));
            }
        }
        let jacobian = (0..dim)
            .map(|a| std::array::from_fn(|i| map[i].diff(a)))
            .collect();
        let chain = Chain {
            dim,
            map,
            jacobian,
            orientation,
        };
        if dim > 0 {
            let n = 3usize;
            for idx in 0..n.pow(dim as u32) {
                let u: Vec<f64> = (0..dim)
                    .map(|a| ((idx / n.pow(a as u32)) % n) as f64 / (n - 1) as f64)
                    .collect();
                let jac = chain.jacobian(&u)?;
                let rows = DMatrix::from_fn(dim, DIM, |a, i| jac[(i, a)]);
                if largest_minor(&rows) < 1e-12 {
                    return Err(Error::InvalidChain(format!(
                        "parametrisation is degenerate at u = {u:?}"
                    )));
                }
            }
        }
        Ok(chain)
    }

    pub fn parse(dim: usize, map: [&str; 4], orientation: f64) -> Result<Chain> {
        let mut exprs = Vec::with_capacity(DIM);
        for (i, s) in map.iter().enumerate() {
            exprs.push(parse_expr(s).map_err(|source| Error::Parse {
                field: format!("chain component {i}"),
                source,
            })?);
        }
        let map: [Expr; 4] = exprs.try_into().expect("four components");
        Chain::new(dim, map, orientation)
    }

    /// Axis-aligned box: every axis with `lo < hi` becomes a parameter, in
    /// increasing axis order; axes with `lo == hi` are held fixed.
    pub fn axis_box(lo: [f64; 4], hi: [f64; 4], orientation: f64) -> Result<Chain> {
        let mut map: [Expr; 4] = std::array::from_fn(|_| Expr::zero());
        let mut dim = 0;
        for i in 0..DIM {
            if !(lo[i].is_finite() && hi[i].is_finite()) || hi[i] < lo[i] {
                return Err(Error::InvalidChain(format!(
                    "axis {i}: bounds [{}, {}] are not ordered",
                    lo[i], hi[i]
                )));
            }
            map[i] = if hi[i] > lo[i] {
                let e = Expr::constant(lo[i]).add(&Expr::var(dim).scale(hi[i] - lo[i]));
                dim += 1;
                e
            } else {
                Expr::constant(lo[i])
            };
        }
        Chain::new(dim, map, orientation)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn map(&self) -> &[Expr; 4] {
        &self.map
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn reversed(&self) -> Chain {
        Chain {
            orientation: -self.orientation,
            ..self.clone()
        }
    }

    pub fn point(&self, u: &[f64]) -> Result<[f64; 4]> {
        let mut x = [0.0; 4];
        for (xi, c) in x.iter_mut().zip(&self.map) {
            *xi = c.eval(u).map_err(|e| Error::domain(u, e))?;
        }
        Ok(x)
    }

    /// 4×4 matrix whose first `dim` columns are `∂x/∂u_a`.
    pub fn jacobian(&self, u: &[f64]) -> Result<Matrix4<f64>> {
        let mut m = Matrix4::zeros();
        for (a, col) in self.jacobian.iter().enumerate() {
            for i in 0..DIM {
                m[(i, a)] = col[i].eval(u).map_err(|e| Error::domain(u, e))?;
            }
        }
        Ok(m)
    }

    /// Faces with induced orientation; `∂∂C` cancels face by face.
    pub fn boundary(&self) -> Result<Vec<Chain>> {
        if self.dim == 0 {
            return Err(Error::InvalidChain("a 0-chain has no boundary".into()));
        }
        let mut faces = Vec::with_capacity(2 * self.dim);
        for a in 0..self.dim {
            let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
            for (value, face_sign) in [(0.0, -sign), (1.0, sign)] {
                let subst: Vec<Expr> = (0..DIM)
                    .map(|v| match v.cmp(&a) {
                        std::cmp::Ordering::Less => Expr::var(v),
                        std::cmp::Ordering::Equal => Expr::constant(value),
                        std::cmp::Ordering::Greater => Expr::var(v - 1),
                    })
                    .collect();
                let map = std::array::from_fn(|i| self.map[i].substitute(&subst));
                faces.push(Chain::new(self.dim - 1, map, self.orientation * face_sign)?);
            }
        }
        Ok(faces)
    }

    /// The chain `m ∘ C`.
    pub fn compose(&self, m: &SmoothMap) -> Result<Chain> {
        let map = std::array::from_fn(|i| m.components()[i].substitute(&self.map));
        Chain::new(self.dim, map, self.orientation)
    }
}

/// Outcome of [`collapse_integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseResult {
    pub value: f64,
    /// Roots found at each transverse quadrature node.
    pub roots_per_node: Vec<usize>,
    /// Smallest `|det ∂Φ/∂w|` met at a root.
    pub min_condition: f64,
}

struct Sample {
    g: f64,
    phi: [f64; 4],
    /// `dphi[a][j] = ∂Φ_a/∂u_j`
    dphi: [[f64; 4]; 4],
}

/// The pulled-back top coefficient of `R ∧ dφ₁ ∧ … ∧ dφ_m` on a chain.
struct Integrand<'a> {
    chain: &'a Chain,
    terms: Vec<(Vec<usize>, &'a Expr)>,
    phis: Vec<&'a Expr>,
    grads: Vec<&'a [Expr; 4]>,
}

impl<'a> Integrand<'a> {
    fn new(form: &'a SingularForm, chain: &'a Chain) -> Integrand<'a> {
        Integrand {
            chain,
            terms: form
                .regular()
                .terms()
                .filter(|(_, c)| !c.is_zero())
                .map(|(mask, c)| (crate::exterior::mask_indices(mask), c))
                .collect(),
            phis: form.deltas().iter().map(|d| d.phi()).collect(),
            grads: form.deltas().iter().map(|d| d.gradient()).collect(),
        }
    }

    fn m(&self) -> usize {
        self.phis.len()
    }

    fn constraint(&self, u: &[f64]) -> Result<(Sample, [f64; 4], Matrix4<f64>)> {
        let x = self.chain.point(u)?;
        let jac = self.chain.jacobian(u)?;
        let k = self.chain.dim;
        let mut s = Sample {
            g: 0.0,
            phi: [0.0; 4],
            dphi: [[0.0; 4]; 4],
        };
        for (a, (phi, grad)) in self.phis.iter().zip(&self.grads).enumerate() {
            s.phi[a] = phi.eval(&x).map_err(|e| Error::domain(&x, e))?;
            let mut g = [0.0; 4];
            for i in 0..DIM {
                g[i] = grad[i].eval(&x).map_err(|e| Error::domain(&x, e))?;
            }
            for j in 0..k {
                s.dphi[a][j] = (0..DIM).map(|i| g[i] * jac[(i, j)]).sum();
            }
        }
        Ok((s, x, jac))
    }

    fn sample(&self, u: &[f64]) -> Result<Sample> {
        let (mut s, x, jac) = self.constraint(u)?;
        let k = self.chain.dim;
        let m = self.m();
        let mut g = 0.0;
        for (indices, coef) in &self.terms {
            let r = coef.eval(&x).map_err(|e| Error::domain(&x, e))?;
            if r == 0.0 {
                continue;
            }
            let mut mat = Matrix4::identity();
            for (row, &i) in indices.iter().enumerate() {
                for j in 0..k {
                    mat[(row, j)] = jac[(i, j)];
                }
            }
            for a in 0..m {
                for j in 0..k {
                    mat[(indices.len() + a, j)] = s.dphi[a][j];
                }
            }
            g += r * mat.determinant();
        }
        s.g = g;
        Ok(s)
    }
}

fn subset_det(dphi: &[[f64; 4]; 4], m: usize, axes: &[usize]) -> f64 {
    let mut mat = Matrix4::identity();
    for a in 0..m {
        for (c, &j) in axes.iter().enumerate() {
            mat[(a, c)] = dphi[a][j];
        }
    }
    mat.determinant()
}

/// Parameter axes `W` (|W| = m) maximising `|det ∂Φ/∂u_W|` at the cube centre.
fn best_axes(integrand: &Integrand, k: usize) -> Result<(Vec<usize>, f64)> {
    let m = integrand.m();
    let center = vec![0.5; k];
    let (s, _, _) = integrand.constraint(&center)?;
    let mut best = (Vec::new(), -1.0);
    for mask in 0u32..(1 << k) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let axes: Vec<usize> = (0..k).filter(|j| mask & (1 << j) != 0).collect();
        let d = subset_det(&s.dphi, m, &axes).abs();
        if d > best.1 {
            best = (axes, d);
        }
    }
    Ok(best)
}

fn assemble(k: usize, outer: &[usize], v: &[f64], inner: &[usize], w: &[f64]) -> Vec<f64> {
    let mut u = vec![0.0; k];
    for (&j, &x) in outer.iter().zip(v) {
        u[j] = x;
    }
    for (&j, &x) in inner.iter().zip(w) {
        u[j] = x;
    }
    u
}

/// Integral of a smooth `k`-form over a `k`-chain.
pub fn integrate_regular(form: &RegularForm, chain: &Chain, spec: &QuadratureSpec) -> Result<f64> {
    integrate_smooth(&SingularForm::from_regular(form.clone()), chain, spec)
}

fn integrate_smooth(form: &SingularForm, chain: &Chain, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    check_degree(form, chain)?;
    let integrand = Integrand::new(form, chain);
    let rule = UnitRule::new(spec.order)?;
    let nodes = rule.tensor_unit(chain.dim);
    let parts = nodes
        .par_iter()
        .map(|(u, w)| integrand.sample(u).map(|s| w * s.g))
        .collect::<Result<Vec<f64>>>()?;
    Ok(chain.orientation * parts.iter().sum::<f64>())
}

fn check_degree(form: &SingularForm, chain: &Chain) -> Result<()> {
    if form.degree() != chain.dim {
        return Err(Error::DegreeMismatch {
            expected: chain.dim,
            found: form.degree(),
        });
    }
    Ok(())
}

/// True when some `Φ_a` keeps a strict sign on a grid over the chain.
fn misses_chain(integrand: &Integrand, k: usize) -> Result<bool> {
    let n = 9usize;
    let m = integrand.m();
    let mut pos = vec![true; m];
    let mut neg = vec![true; m];
    for idx in 0..n.pow(k as u32) {
        let u: Vec<f64> = (0..k)
            .map(|a| ((idx / n.pow(a as u32)) % n) as f64 / (n - 1) as f64)
            .collect();
        let (s, _, _) = integrand.constraint(&u)?;
        for a in 0..m {
            pos[a] &= s.phi[a] > 0.0;
            neg[a] &= s.phi[a] < 0.0;
        }
    }
    Ok((0..m).any(|a| pos[a] || neg[a]))
}

struct Slice<'a> {
    integrand: &'a Integrand<'a>,
    k: usize,
    outer: &'a [usize],
    inner: &'a [usize],
    v: &'a [f64],
}

impl Slice<'_> {
    fn u(&self, w: &[f64]) -> Vec<f64> {
        assemble(self.k, self.outer, self.v, self.inner, w)
    }

    fn phi(&self, w: &[f64]) -> Result<([f64; 4], [[f64; 4]; 4])> {
        let (s, _, _) = self.integrand.constraint(&self.u(w))?;
        let mut d = [[0.0; 4]; 4];
        for a in 0..self.inner.len() {
            for (c, &j) in self.inner.iter().enumerate() {
                d[a][c] = s.dphi[a][j];
            }
        }
        Ok((s.phi, d))
    }

    fn failure(&self, msg: impl Into<String>) -> Error {
        Error::RootFailure {
            node: self.v.to_vec(),
            msg: msg.into(),
        }
    }

    fn roots(&self) -> Result<Vec<Vec<f64>>> {
        if self.inner.len() == 1 {
            self.roots_1d()
        } else {
            self.roots_nd()
        }
    }

    fn roots_1d(&self) -> Result<Vec<Vec<f64>>> {
        let f = |w: f64| -> Result<(f64, f64)> {
            let (p, d) = self.phi(&[w])?;
            Ok((p[0], d[0][0]))
        };
        let mut roots: Vec<f64> = Vec::new();
        let push = |r: f64, roots: &mut Vec<f64>| {
            if roots.last().is_none_or(|&l| (r - l).abs() > 1e-12) {
                roots.push(r);
            }
        };
        let h = 1.0 / SCAN_INTERVALS as f64;
        let mut a = 0.0;
        let (mut fa, _) = f(a)?;
        for i in 1..=SCAN_INTERVALS {
            let b = i as f64 * h;
            let (fb, _) = f(b)?;
            if fa == 0.0 {
                push(a, &mut roots);
            } else if fa * fb < 0.0 {
                push(self.bracketed(&f, a, b, fa)?, &mut roots);
            }
            if i == SCAN_INTERVALS && fb == 0.0 {
                push(b, &mut roots);
            }
            a = b;
            fa = fb;
        }
        Ok(roots.into_iter().map(|r| vec![r]).collect())
    }

    fn bracketed(
        &self,
        f: &dyn Fn(f64) -> Result<(f64, f64)>,
        mut a: f64,
        mut b: f64,
        fa: f64,
    ) -> Result<f64> {
        let sa = fa.signum();
        let mut x = 0.5 * (a + b);
        for _ in 0..200 {
            let (fx, dfx) = f(x)?;
            if fx.abs() < ROOT_TOL || b - a < 1e-15 {
                return Ok(x);
            }
            if fx.signum() == sa {
                a = x;
            } else {
                b = x;
            }
            let newton = x - fx / dfx;
            x = if dfx != 0.0 && newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
        }
        Err(self.failure("bracketed solve did not converge"))
    }

    fn roots_nd(&self) -> Result<Vec<Vec<f64>>> {
        let m = self.inner.len();
        let per_axis: usize = match m {
            2 => 8,
            3 => 6,
            _ => 4,
        };
        let norm = |p: &[f64; 4]| p[..m].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut roots: Vec<Vec<f64>> = Vec::new();
        let mut stalled = false;
        for idx in 0..per_axis.pow(m as u32) {
            let mut w: Vec<f64> = (0..m)
                .map(|a| (((idx / per_axis.pow(a as u32)) % per_axis) as f64 + 0.5) / per_axis as f64)
                .collect();
            let mut converged = false;
            let mut best = f64::INFINITY;
            for _ in 0..NEWTON_ITERATIONS {
                let (p, d) = match self.phi(&w) {
                    Ok(v) => v,
                    Err(_) => break,
                };
                let r = norm(&p);
                best = best.min(r);
                if r < ROOT_TOL {
                    converged = true;
                    break;
                }
                let jac = DMatrix::from_fn(m, m, |a, c| d[a][c]);
                let rhs = nalgebra::DVector::from_fn(m, |a, _| p[a]);
                let Some(step) = jac.lu().solve(&rhs) else { break };
                let mut t = 1.0;
                let mut moved = false;
                for _ in 0..12 {
                    let trial: Vec<f64> = (0..m).map(|a| w[a] - t * step[a]).collect();
                    if let Ok((q, _)) = self.phi(&trial) {
                        if norm(&q) < r {
                            w = trial;
                            moved = true;
                            break;
                        }
                    }
                    t *= 0.5;
                }
                if !moved {
                    converged = r < 1e3 * ROOT_TOL;
                    break;
                }
            }
            let inside = w.iter().all(|&c| (-1e-9..=1.0 + 1e-9).contains(&c));
            if converged {
                if inside {
                    let w: Vec<f64> = w.iter().map(|c| c.clamp(0.0, 1.0)).collect();
                    let dup = roots
                        .iter()
                        .any(|r| r.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-7));
                    if !dup {
                        roots.push(w);
                    }
                }
            } else if inside && best < 1e-6 {
                stalled = true;
            }
        }
        if stalled && roots.is_empty() {
            return Err(self.failure("Newton iteration stalled near a root"));
        }
        Ok(roots)
    }
}

/// Integrates `R ∧ D(φ₁) ∧ … ∧ D(φ_m)` over a chain by collapsing the deltas
/// onto the joint zero set inside the chain.
pub fn collapse_integrate(
    form: &SingularForm,
    chain: &Chain,
    spec: &QuadratureSpec,
) -> Result<CollapseResult> {
    spec.validate()?;
    check_degree(form, chain)?;
    let integrand = Integrand::new(form, chain);
    let k = chain.dim;
    let m = integrand.m();
    if m == 0 {
        return Ok(CollapseResult {
            value: integrate_smooth(form, chain, spec)?,
            roots_per_node: Vec::new(),
            min_condition: f64::INFINITY,
        });
    }
    let empty = CollapseResult {
        value: 0.0,
        roots_per_node: Vec::new(),
        min_condition: f64::INFINITY,
    };
    if integrand.terms.is_empty() {
        return Ok(empty);
    }
    let (inner, cond) = best_axes(&integrand, k)?;
    if cond < COLLAPSE_THRESHOLD {
        if misses_chain(&integrand, k)? {
            return Ok(empty);
        }
        return Err(Error::CollapseSingular(cond));
    }
    let outer: Vec<usize> = (0..k).filter(|j| !inner.contains(j)).collect();
    let rule = UnitRule::new(spec.order)?;
    let nodes = rule.tensor_unit(outer.len());
    let per_node = nodes
        .par_iter()
        .map(|(v, weight)| -> Result<(f64, usize, f64)> {
            let slice = Slice {
                integrand: &integrand,
                k,
                outer: &outer,
                inner: &inner,
                v,
            };
            let mut sum = 0.0;
            let mut min_cond = f64::INFINITY;
            let roots = slice.roots()?;
            for w in &roots {
                let s = integrand.sample(&slice.u(w))?;
                let det = subset_det(&s.dphi, m, &inner).abs();
                if det == 0.0 {
                    return Err(slice.failure("zero Jacobian at a root"));
                }
                min_cond = min_cond.min(det);
                sum += s.g / det;
            }
            Ok((weight * sum, roots.len(), min_cond))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CollapseResult {
        value: chain.orientation * per_node.iter().map(|p| p.0).sum::<f64>(),
        roots_per_node: per_node.iter().map(|p| p.1).collect(),
        min_condition: per_node.iter().map(|p| p.2).fold(f64::INFINITY, f64::min),
    })
}

fn gaussian(s: f64, eps: f64) -> f64 {
    (-0.5 * (s / eps).powi(2)).exp() / (eps * (2.0 * std::f64::consts::PI).sqrt())
}

struct Mollified<'a> {
    slice: Slice<'a>,
    eps: f64,
    rule: &'a UnitRule,
}

impl Mollified<'_> {
    fn value(&self, w: &[f64]) -> Result<f64> {
        let s = self.slice.integrand.sample(&self.slice.u(w))?;
        let m = self.slice.inner.len();
        Ok(s.g * (0..m).map(|a| gaussian(s.phi[a], self.eps)).product::<f64>())
    }

    fn cell(&self, lo: &[f64], hi: &[f64], depth: usize) -> Result<f64> {
        let m = lo.len();
        let center: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let (p, d) = self.slice.phi(&center)?;
        let mut resolved = true;
        for a in 0..m {
            let reach: f64 = (0..m).map(|c| d[a][c].abs() * 0.5 * (hi[c] - lo[c])).sum();
            if p[a].abs() - 1.25 * reach > MOLLIFIER_CUTOFF * self.eps {
                return Ok(0.0);
            }
            resolved &= reach <= 2.0 * self.eps;
        }
        if resolved || depth >= MOLLIFIER_MAX_DEPTH {
            let mut total = 0.0;
            for (w, weight) in self.rule.tensor(lo, hi) {
                total += weight * self.value(&w)?;
            }
            return Ok(total);
        }
        let mut total = 0.0;
        for child in 0..(1usize << m) {
            let mut clo = lo.to_vec();
            let mut chi = hi.to_vec();
            for c in 0..m {
                if child & (1 << c) != 0 {
                    clo[c] = center[c];
                } else {
                    chi[c] = center[c];
                }
            }
            total += self.cell(&clo, &chi, depth + 1)?;
        }
        Ok(total)
    }
}

fn mollified_at(
    integrand: &Integrand,
    chain: &Chain,
    spec: &QuadratureSpec,
    inner: &[usize],
    eps: f64,
) -> Result<f64> {
    let k = chain.dim;
    let m = inner.len();
    let outer: Vec<usize> = (0..k).filter(|j| !inner.contains(j)).collect();
    let outer_rule = UnitRule::new(spec.order)?;
    let cell_rule = UnitRule::new(MOLLIFIER_CELL_ORDER)?;
    let nodes = outer_rule.tensor_unit(outer.len());
    let parts = nodes
        .par_iter()
        .map(|(v, weight)| {
            let mol = Mollified {
                slice: Slice {
                    integrand,
                    k,
                    outer: &outer,
                    inner,
                    v,
                },
                eps,
                rule: &cell_rule,
            };
            mol.cell(&vec![0.0; m], &vec![1.0; m], 0).map(|x| weight * x)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(chain.orientation * parts.iter().sum::<f64>())
}

/// Mollified integrals at widths `ε`, `ε/2`, `ε/4`.
pub fn mollified_ladder(form: &SingularForm, chain: &Chain, spec: &QuadratureSpec) -> Result<[f64; 3]> {
    spec.validate()?;
    check_degree(form, chain)?;
    let integrand = Integrand::new(form, chain);
    if integrand.m() == 0 {
        let v = integrate_smooth(form, chain, spec)?;
        return Ok([v; 3]);
    }
    let (inner, _) = best_axes(&integrand, chain.dim)?;
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        let eps = spec.epsilon / f64::powi(2.0, i as i32);
        *o = mollified_at(&integrand, chain, spec, &inner, eps)?;
    }
    Ok(out)
}

/// Richardson extrapolation of [`mollified_ladder`] to zero width.
pub fn mollified_integrate(form: &SingularForm, chain: &Chain, spec: &QuadratureSpec) -> Result<f64> {
    let ladder = mollified_ladder(form, chain, spec)?;
    let [i1, i2, i4] = ladder;
    let d1 = (i1 - i2).abs();
    let d2 = (i2 - i4).abs();
    if d2 > d1 && d2 > LADDER_NOISE * i4.abs().max(1.0) {
        return Err(Error::OracleDivergence(ladder));
    }
    Ok((64.0 * i4 - 20.0 * i2 + i1) / 45.0)
}

/// `∫_M J` for a 3-form current over a 3-chain.
pub fn total_charge(form: &SingularForm, chain: &Chain, spec: &QuadratureSpec) -> Result<f64> {
    if form.degree() != 3 || chain.dim != 3 {
        return Err(Error::DegreeMismatch {
            expected: 3,
            found: if form.degree() != 3 { form.degree() } else { chain.dim },
        });
    }
    Ok(collapse_integrate(form, chain, spec)?.value)
}

/// Transversality of `fields` sampled over the image of a chain.
pub fn transversality_check(
    fields: &[Expr],
    chain: &Chain,
    check_time_axis: bool,
) -> Result<TransversalityReport> {
    if fields.is_empty() || fields.len() > 3 {
        return Err(Error::Transversality(format!(
            "expected 1 to 3 level sets, got {}",
            fields.len()
        )));
    }
    let params = crate::exterior::Region::new([0.0; 4], [1.0; 4]).halton(256);
    let probes = params
        .iter()
        .map(|p| chain.point(&p[..chain.dim]))
        .collect::<Result<Vec<_>>>()?;
    transversality(fields, &probes, check_time_axis)
}
