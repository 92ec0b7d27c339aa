//! Smooth differential forms on four-dimensional spacetime.
//!
//! A [`RegularForm`] of degree `k` stores one coefficient per strictly
//! increasing multi-index `i1 < ... < ik`, so `a = Σ a_I dx^I` with no
//! combinatorial prefactor. The fully antisymmetric tensor component
//! `a_{i1..ik}` for an arbitrary index order follows by antisymmetry
//! ([`RegularForm::component`]); with this convention
//! `a = (1/k!) a_{i1..ik} dx^{i1}∧...∧dx^{ik}`.
//!
//! Twisted forms carry a [`Parity`] flag. Under pullback by a map with
//! negative Jacobian determinant a twisted form picks up an extra sign.

use std::fmt;

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::expr::{var_name, Expr};

/// Coefficient fields are plain expressions over `t, x, y, z`.
pub type ScalarField = Expr;

pub const DIM: usize = 4;

/// Normalization of [`dualize3`]: `J^i = (1/3!) ε^{ijkl} J_{jkl}`, so that
/// `J = ρ dx¹∧dx²∧dx³` has `J⁰ = ρ`.
pub const DUAL_NORMALIZATION: f64 = 1.0 / 6.0;

const BASIS: [&[u8]; 5] = [
    &[0b0000],
    &[0b0001, 0b0010, 0b0100, 0b1000],
    &[0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100],
    &[0b0111, 0b1011, 0b1101, 0b1110],
    &[0b1111],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Untwisted,
    Twisted,
}

impl Parity {
    pub fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Untwisted
        } else {
            Parity::Twisted
        }
    }
}

/// Canonical basis masks of degree `k`, in lexicographic multi-index order.
pub fn basis(k: usize) -> &'static [u8] {
    BASIS[k]
}

pub fn mask_indices(mask: u8) -> Vec<usize> {
    (0..DIM).filter(|i| mask & (1 << i) != 0).collect()
}

fn basis_position(mask: u8) -> usize {
    let k = mask.count_ones() as usize;
    BASIS[k].iter().position(|&m| m == mask).expect("valid mask")
}

/// Sign of `dx^A ∧ dx^B` relative to `dx^{A∪B}`, or 0 when they overlap.
pub fn wedge_sign(a: u8, b: u8) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    let mut swaps = 0;
    for i in 0..DIM {
        if a & (1 << i) != 0 {
            // elements of b below i must move past i
            swaps += (b & ((1 << i) - 1)).count_ones();
        }
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of the permutation sorting `indices`, or 0 on a repeated index.
pub fn permutation_sign(indices: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..indices.len() {
        for j in i + 1..indices.len() {
            match indices[i].cmp(&indices[j]) {
                std::cmp::Ordering::Equal => return 0.0,
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    sign
}

/// The permutation symbol with `ε^{0123} = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LeviCivita;

impl LeviCivita {
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        permutation_sign(&[i, j, k, l])
    }

    /// The 24 nonzero entries.
    pub fn entries(&self) -> Vec<([usize; 4], f64)> {
        let mut out = Vec::with_capacity(24);
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        let s = self.get(i, j, k, l);
                        if s != 0.0 {
                            out.push(([i, j, k, l], s));
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct RegularForm {
    degree: usize,
    parity: Parity,
    coeffs: Vec<Expr>,
}

impl RegularForm {
    pub fn zero(degree: usize, parity: Parity) -> Result<RegularForm> {
        if degree > DIM {
            return Err(Error::DegreeOverflow(degree));
        }
        Ok(RegularForm {
            degree,
            parity,
            coeffs: vec![Expr::zero(); BASIS[degree].len()],
        })
    }

    pub fn scalar(f: Expr, parity: Parity) -> RegularForm {
        RegularForm {
            degree: 0,
            parity,
            coeffs: vec![f],
        }
    }

    pub fn one() -> RegularForm {
        RegularForm::scalar(Expr::one(), Parity::Untwisted)
    }

    /// `coef dx^{i1}∧...∧dx^{ik}` for any index order.
    pub fn monomial(indices: &[usize], coef: Expr, parity: Parity) -> Result<RegularForm> {
        let mut form = RegularForm::zero(indices.len(), parity)?;
        if indices.iter().any(|&i| i >= DIM) {
            return Err(Error::DegreeOverflow(indices.len()));
        }
        let sign = permutation_sign(indices);
        if sign != 0.0 {
            let mask = indices.iter().fold(0u8, |m, &i| m | (1 << i));
            form.coeffs[basis_position(mask)] = coef.scale(sign);
        }
        Ok(form)
    }

    pub fn from_terms<'a, I>(degree: usize, parity: Parity, terms: I) -> Result<RegularForm>
    where
        I: IntoIterator<Item = (&'a [usize], Expr)>,
    {
        let mut acc = RegularForm::zero(degree, parity)?;
        for (idx, coef) in terms {
            if idx.len() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    found: idx.len(),
                });
            }
            acc = acc.add(&RegularForm::monomial(idx, coef, parity)?)?;
        }
        Ok(acc)
    }

    /// Builds a form from coefficients in canonical basis order.
    pub fn from_coefficients(degree: usize, parity: Parity, coeffs: Vec<Expr>) -> Result<RegularForm> {
        if degree > DIM {
            return Err(Error::DegreeOverflow(degree));
        }
        if coeffs.len() != BASIS[degree].len() {
            return Err(Error::DegreeMismatch {
                expected: BASIS[degree].len(),
                found: coeffs.len(),
            });
        }
        Ok(RegularForm {
            degree,
            parity,
            coeffs,
        })
    }

    /// `df` of a scalar, as an untwisted 1-form.
    pub fn differential(f: &Expr) -> RegularForm {
        RegularForm {
            degree: 1,
            parity: Parity::Untwisted,
            coeffs: f.gradient(DIM),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn with_parity(mut self, parity: Parity) -> RegularForm {
        self.parity = parity;
        self
    }

    pub fn coefficients(&self) -> &[Expr] {
        &self.coeffs
    }

    /// `(mask, coefficient)` pairs in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (u8, &Expr)> {
        BASIS[self.degree].iter().copied().zip(self.coeffs.iter())
    }

    /// Fully antisymmetric tensor component for an arbitrary index order.
    pub fn component(&self, indices: &[usize]) -> Expr {
        assert_eq!(indices.len(), self.degree, "component index count");
        let sign = permutation_sign(indices);
        if sign == 0.0 {
            return Expr::zero();
        }
        let mask = indices.iter().fold(0u8, |m, &i| m | (1 << i));
        self.coeffs[basis_position(mask)].scale(sign)
    }

    /// Coefficient of the basis element `mask`.
    pub fn coefficient(&self, mask: u8) -> &Expr {
        &self.coeffs[basis_position(mask)]
    }

    pub fn is_symbolically_zero(&self) -> bool {
        self.coeffs.iter().all(Expr::is_zero)
    }

    pub fn add(&self, other: &RegularForm) -> Result<RegularForm> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        if self.parity != other.parity {
            return Err(Error::Parity(
                "cannot add twisted and untwisted forms".into(),
            ));
        }
        Ok(RegularForm {
            degree: self.degree,
            parity: self.parity,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &RegularForm) -> Result<RegularForm> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> RegularForm {
        self.multiply(&Expr::constant(c))
    }

    /// Multiplies every coefficient by the scalar field `f`.
    pub fn multiply(&self, f: &Expr) -> RegularForm {
        RegularForm {
            degree: self.degree,
            parity: self.parity,
            coeffs: self.coeffs.iter().map(|c| c.mul(f)).collect(),
        }
    }

    pub fn wedge(&self, other: &RegularForm) -> Result<RegularForm> {
        let degree = self.degree + other.degree;
        let mut out = RegularForm::zero(degree, self.parity.combine(other.parity))?;
        for (ma, ca) in self.terms() {
            if ca.is_zero() {
                continue;
            }
            for (mb, cb) in other.terms() {
                let s = wedge_sign(ma, mb);
                if s == 0.0 || cb.is_zero() {
                    continue;
                }
                let slot = basis_position(ma | mb);
                out.coeffs[slot] = out.coeffs[slot].add(&ca.mul(cb).scale(s));
            }
        }
        Ok(out)
    }

    pub fn exterior_derivative(&self) -> Result<RegularForm> {
        let mut out = RegularForm::zero(self.degree + 1, self.parity)?;
        for (m, c) in self.terms() {
            for i in 0..DIM {
                let bit = 1u8 << i;
                if m & bit != 0 {
                    continue;
                }
                let dc = c.diff(i);
                if dc.is_zero() {
                    continue;
                }
                let slot = basis_position(m | bit);
                out.coeffs[slot] = out.coeffs[slot].add(&dc.scale(wedge_sign(bit, m)));
            }
        }
        Ok(out)
    }

    /// Pullback along `map`; twisted forms pick up the map's orientation sign.
    pub fn pullback(&self, map: &SmoothMap) -> RegularForm {
        let pulled_dx: Vec<RegularForm> = (0..DIM)
            .map(|i| RegularForm {
                degree: 1,
                parity: Parity::Untwisted,
                coeffs: map.jacobian[i].to_vec(),
            })
            .collect();
        let mut out = RegularForm::zero(self.degree, Parity::Untwisted).expect("degree <= 4");
        for (m, c) in self.terms() {
            if c.is_zero() {
                continue;
            }
            let mut term = RegularForm::scalar(c.substitute(&map.components), Parity::Untwisted);
            for i in mask_indices(m) {
                term = term.wedge(&pulled_dx[i]).expect("degree <= 4");
            }
            out = out.add(&term).expect("same degree");
        }
        if self.parity == Parity::Twisted && map.orientation < 0.0 {
            out = out.scale(-1.0);
        }
        out.parity = self.parity;
        out
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.coeffs
            .iter()
            .map(|c| c.eval(point).map_err(|e| Error::domain(point, e)))
            .collect()
    }
}

/// `Jⁱ = (1/3!) ε^{ijkl} J_{jkl}` for a 3-form.
pub fn dualize3(form: &RegularForm) -> Result<[Expr; 4]> {
    if form.degree != 3 {
        return Err(Error::DegreeMismatch {
            expected: 3,
            found: form.degree,
        });
    }
    // The six orderings of the complementary triple each contribute
    // ε^{ijkl} J_{jkl} with the same sign, cancelling the 1/3!.
    Ok(std::array::from_fn(|i| {
        let rest: Vec<usize> = (0..DIM).filter(|&j| j != i).collect();
        let eps = LeviCivita.get(i, rest[0], rest[1], rest[2]);
        form.component(&rest).scale(eps * 6.0 * DUAL_NORMALIZATION)
    }))
}

/// Axis-aligned box in spacetime used for sampling checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

impl Region {
    pub fn new(lo: [f64; 4], hi: [f64; 4]) -> Region {
        Region { lo, hi }
    }

    pub fn cube(half_width: f64) -> Region {
        Region {
            lo: [-half_width; 4],
            hi: [half_width; 4],
        }
    }

    /// Tensor grid with `n` points per axis, endpoints included.
    pub fn grid(&self, n: usize) -> Vec<[f64; 4]> {
        let n = n.max(2);
        let mut out = Vec::with_capacity(n.pow(4));
        let coord = |axis: usize, k: usize| {
            self.lo[axis] + (self.hi[axis] - self.lo[axis]) * k as f64 / (n - 1) as f64
        };
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        out.push([coord(0, a), coord(1, b), coord(2, c), coord(3, d)]);
                    }
                }
            }
        }
        out
    }

    /// Deterministic low-discrepancy (Halton) points.
    pub fn halton(&self, count: usize) -> Vec<[f64; 4]> {
        const PRIMES: [u32; 4] = [2, 3, 5, 7];
        (1..=count)
            .map(|n| {
                std::array::from_fn(|axis| {
                    let base = PRIMES[axis];
                    let (mut f, mut r, mut i) = (1.0, 0.0, n as u32);
                    while i > 0 {
                        f /= base as f64;
                        r += f * (i % base) as f64;
                        i /= base;
                    }
                    self.lo[axis] + (self.hi[axis] - self.lo[axis]) * r
                })
            })
            .collect()
    }
}

/// A coordinate change `x = m(x')`, given by four component fields.
#[derive(Debug, Clone)]
pub struct SmoothMap {
    components: [Expr; 4],
    /// `jacobian[i][a] = ∂m^i/∂x'^a`
    jacobian: [[Expr; 4]; 4],
    orientation: f64,
}

impl SmoothMap {
    /// Validates that the Jacobian determinant is nonzero with a fixed sign
    /// on a sample grid of `region`.
    pub fn new(components: [Expr; 4], region: &Region) -> Result<SmoothMap> {
        let jacobian = std::array::from_fn(|i| std::array::from_fn(|a| components[i].diff(a)));
        let mut map = SmoothMap {
            components,
            jacobian,
            orientation: 1.0,
        };
        let mut sign = 0.0;
        for p in region.grid(4) {
            let det = map.jacobian_determinant(&p)?;
            if det.abs() < 1e-12 {
                return Err(Error::InvalidMap(format!("Jacobian degenerates at {p:?}")));
            }
            if sign == 0.0 {
                sign = det.signum();
            } else if det.signum() != sign {
                return Err(Error::InvalidMap(
                    "Jacobian determinant changes sign on the region".into(),
                ));
            }
        }
        map.orientation = sign;
        Ok(map)
    }

    pub fn identity() -> SmoothMap {
        SmoothMap::new(std::array::from_fn(Expr::var), &Region::cube(1.0)).expect("identity")
    }

    pub fn components(&self) -> &[Expr; 4] {
        &self.components
    }

    /// +1 for orientation preserving, -1 for reversing.
    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn apply(&self, p: &[f64]) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(p).map_err(|e| Error::domain(p, e))?;
        }
        Ok(out)
    }

    pub fn jacobian_determinant(&self, p: &[f64]) -> Result<f64> {
        let mut m = Matrix4::zeros();
        for i in 0..DIM {
            for a in 0..DIM {
                m[(i, a)] = self.jacobian[i][a].eval(p).map_err(|e| Error::domain(p, e))?;
            }
        }
        Ok(m.determinant())
    }

    /// Scalar pullback `f ∘ m`.
    pub fn pull_scalar(&self, f: &Expr) -> Expr {
        f.substitute(&self.components)
    }
}

pub fn pullback(form: &RegularForm, map: &SmoothMap) -> RegularForm {
    form.pullback(map)
}

impl fmt::Display for RegularForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, c) in self.terms() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let idx = mask_indices(m);
            if idx.is_empty() {
                write!(f, "{c}")?;
            } else {
                let basis: Vec<String> = idx.iter().map(|&i| format!("d{}", var_name(i))).collect();
                write!(f, "({c}) {}", basis.join("∧"))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
