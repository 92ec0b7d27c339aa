//! Delta-forms `D(φ) = δ(φ) dφ` and singular currents built from them.
//!
//! A [`SingularForm`] is `R ∧ D(φ₁) ∧ … ∧ D(φ_m)` with a smooth form `R` and
//! the delta factors kept rightmost. There is deliberately no standalone
//! `δ(φ)` value: a delta always travels together with its `dφ`, which is
//! what makes the object independent of how the level set is written
//! (`D(f∘φ) = D(φ)` for increasing `f`).
//!
//! Equality of singular forms is weak: two forms are equal when their
//! integrals agree on a family of test chains ([`weak_equal`]).

use std::fmt;
use std::sync::Arc;

use crate::chains::{collapse_integrate, Chain, QuadratureSpec};
use crate::chart::AdaptedChart;
use crate::error::{Error, Result};
use crate::exterior::{Parity, RegularForm, SmoothMap, DIM};
use crate::expr::Expr;
use crate::levelset::{transversality, LevelSets, PROBE_COUNT, PROBE_REGION};

/// Gradient norm below which a level set counts as degenerate on its zero set.
const DEGENERATE_GRADIENT: f64 = 1e-5;
/// Two zero sets coincide when this fraction of samples of one lies on the other.
const COINCIDENT_FRACTION: f64 = 0.1;
const COINCIDENT_TOL: f64 = 1e-9;

/// `D(φ)`, stored by its level-set function.
#[derive(Debug, Clone)]
pub struct DeltaFactor {
    phi: Expr,
    gradient: [Expr; 4],
    zero_set: Arc<Vec<[f64; 4]>>,
}

impl DeltaFactor {
    /// Validates that `∇φ` does not vanish on the sampled zero set.
    pub fn new(phi: Expr) -> Result<DeltaFactor> {
        let gradient: [Expr; 4] = std::array::from_fn(|i| phi.diff(i));
        let probes = PROBE_REGION.halton(PROBE_COUNT);
        let sets = LevelSets::new(std::slice::from_ref(&phi));
        let zero_set = sets.zero_set_samples(&probes);
        let grad_norm = |p: &[f64; 4]| -> f64 {
            gradient
                .iter()
                .map(|g| g.eval(p).map(|v| v * v).unwrap_or(0.0))
                .sum::<f64>()
                .sqrt()
        };
        let degenerate = if zero_set.is_empty() {
            probes.iter().all(|p| grad_norm(p) < 1e-12)
        } else {
            zero_set.iter().all(|p| grad_norm(p) < DEGENERATE_GRADIENT)
        };
        if degenerate {
            return Err(Error::DegenerateSurface(phi.to_string()));
        }
        Ok(DeltaFactor {
            phi,
            gradient,
            zero_set: Arc::new(zero_set),
        })
    }

    pub fn phi(&self) -> &Expr {
        &self.phi
    }

    pub fn gradient(&self) -> &[Expr; 4] {
        &self.gradient
    }

    /// `dφ` as an untwisted 1-form.
    pub fn differential(&self) -> RegularForm {
        RegularForm::from_coefficients(1, Parity::Untwisted, self.gradient.to_vec())
            .expect("four components")
    }

    /// Probabilistic test for `{φ = 0} = {ψ = 0}` on the probe region.
    pub fn shares_zero_set(&self, other: &DeltaFactor) -> bool {
        let on = |a: &DeltaFactor, b: &DeltaFactor| {
            if a.zero_set.is_empty() {
                return false;
            }
            let hits = a
                .zero_set
                .iter()
                .filter(|p| b.phi.eval(&p[..]).is_ok_and(|v| v.abs() < COINCIDENT_TOL))
                .count();
            hits as f64 > COINCIDENT_FRACTION * a.zero_set.len() as f64
        };
        on(self, other) || on(other, self)
    }
}

fn check_disjoint(deltas: &[DeltaFactor]) -> Result<()> {
    for (i, a) in deltas.iter().enumerate() {
        for b in &deltas[i + 1..] {
            if a.shares_zero_set(b) {
                return Err(Error::IllDefinedProduct(a.phi.to_string(), b.phi.to_string()));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SingularForm {
    regular: RegularForm,
    deltas: Vec<DeltaFactor>,
}

impl SingularForm {
    pub fn new(regular: RegularForm, deltas: Vec<DeltaFactor>) -> Result<SingularForm> {
        let degree = regular.degree() + deltas.len();
        if degree > DIM {
            return Err(Error::DegreeOverflow(degree));
        }
        check_disjoint(&deltas)?;
        Ok(SingularForm { regular, deltas })
    }

    pub fn from_regular(regular: RegularForm) -> SingularForm {
        SingularForm {
            regular,
            deltas: Vec::new(),
        }
    }

    pub fn regular(&self) -> &RegularForm {
        &self.regular
    }

    pub fn deltas(&self) -> &[DeltaFactor] {
        &self.deltas
    }

    pub fn degree(&self) -> usize {
        self.regular.degree() + self.deltas.len()
    }

    pub fn parity(&self) -> Parity {
        self.regular.parity()
    }

    pub fn wedge(&self, other: &SingularForm) -> Result<SingularForm> {
        let degree = self.degree() + other.degree();
        if degree > DIM {
            return Err(Error::DegreeOverflow(degree));
        }
        let swaps = self.deltas.len() * other.regular.degree();
        let sign = if swaps.is_multiple_of(2) { 1.0 } else { -1.0 };
        let regular = self.regular.wedge(&other.regular)?.scale(sign);
        let mut deltas = self.deltas.clone();
        deltas.extend(other.deltas.iter().cloned());
        SingularForm::new(regular, deltas)
    }

    /// `self ∧ β` for a smooth form `β`.
    pub fn wedge_regular(&self, beta: &RegularForm) -> Result<SingularForm> {
        self.wedge(&SingularForm::from_regular(beta.clone()))
    }

    /// `d(R ∧ ΠD) = dR ∧ ΠD`, the delta-forms being closed.
    pub fn exterior_derivative(&self) -> Result<SingularForm> {
        let degree = self.degree();
        if degree >= DIM {
            return Err(Error::DegreeOverflow(degree + 1));
        }
        Ok(SingularForm {
            regular: self.regular.exterior_derivative()?,
            deltas: self.deltas.clone(),
        })
    }

    /// The smooth pattern `R ∧ dφ₁ ∧ … ∧ dφ_m` multiplying `Πδ(φ_a)`.
    pub fn pattern(&self) -> RegularForm {
        self.deltas.iter().fold(self.regular.clone(), |acc, d| {
            acc.wedge(&d.differential()).expect("degree checked at construction")
        })
    }

    pub fn scale(&self, c: f64) -> SingularForm {
        SingularForm {
            regular: self.regular.scale(c),
            deltas: self.deltas.clone(),
        }
    }

    pub fn pullback(&self, map: &SmoothMap) -> Result<SingularForm> {
        let deltas = self
            .deltas
            .iter()
            .map(|d| DeltaFactor::new(map.pull_scalar(&d.phi)))
            .collect::<Result<Vec<_>>>()?;
        SingularForm::new(self.regular.pullback(map), deltas)
    }

    pub fn is_symbolically_zero(&self) -> bool {
        self.regular.is_symbolically_zero()
    }
}

impl fmt::Display for SingularForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.regular)?;
        for d in &self.deltas {
            write!(f, " ∧ D({})", d.phi)?;
        }
        Ok(())
    }
}

/// `D(φ) = δ(φ) dφ`.
pub fn delta(phi: &Expr) -> Result<SingularForm> {
    Ok(SingularForm {
        regular: RegularForm::one(),
        deltas: vec![DeltaFactor::new(phi.clone())?],
    })
}

pub fn wedge_singular(a: &SingularForm, b: &SingularForm) -> Result<SingularForm> {
    a.wedge(b)
}

pub fn d_singular(a: &SingularForm) -> Result<SingularForm> {
    a.exterior_derivative()
}

fn require(form: &RegularForm, degree: usize, what: &str) -> Result<()> {
    if form.degree() != degree {
        return Err(Error::DegreeMismatch {
            expected: degree,
            found: form.degree(),
        });
    }
    if form.parity() != Parity::Twisted {
        return Err(Error::Parity(format!("{what} must be a twisted form")));
    }
    Ok(())
}

fn require_transversal(fields: &[Expr]) -> Result<()> {
    let probes = PROBE_REGION.halton(200);
    let report = transversality(fields, &probes, false)?;
    if !report.transversal() {
        let names: Vec<String> = fields.iter().map(Expr::to_string).collect();
        return Err(Error::Transversality(format!(
            "level sets {} have dependent gradients (minor {:e})",
            names.join(", "),
            report.min_minor
        )));
    }
    Ok(())
}

/// `L ∧ D(φ)` for a twisted 2-form `L`.
pub fn surface_current(l: &RegularForm, phi: &Expr) -> Result<SingularForm> {
    require(l, 2, "L")?;
    SingularForm::from_regular(l.clone()).wedge(&delta(phi)?)
}

/// `K ∧ D(φ) ∧ D(ψ)` for a twisted 1-form `K`.
pub fn string_current(k: &RegularForm, phi: &Expr, psi: &Expr) -> Result<SingularForm> {
    require(k, 1, "K")?;
    require_transversal(&[phi.clone(), psi.clone()])?;
    SingularForm::new(
        k.clone(),
        vec![DeltaFactor::new(phi.clone())?, DeltaFactor::new(psi.clone())?],
    )
}

/// `q D(φ) ∧ D(ψ) ∧ D(τ)` for a twisted 0-form `q`.
pub fn point_current(q: &RegularForm, phi: &Expr, psi: &Expr, tau: &Expr) -> Result<SingularForm> {
    require(q, 0, "q")?;
    let fields = [phi.clone(), psi.clone(), tau.clone()];
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        require_transversal(&[fields[a].clone(), fields[b].clone()])?;
    }
    require_transversal(&fields)?;
    SingularForm::new(
        q.clone(),
        fields
            .into_iter()
            .map(DeltaFactor::new)
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Drops the `dφ` part of `L` in the chart adapted to `φ` (affine `φ` only).
pub fn gauge_reduce(l: &RegularForm, phi: &Expr) -> Result<RegularForm> {
    let chart = AdaptedChart::surface(phi)?;
    let adapted = l.pullback(chart.to_original());
    let coeffs = adapted
        .terms()
        .map(|(mask, c)| if mask & 0b1000 != 0 { Expr::zero() } else { c.clone() })
        .collect();
    let reduced = RegularForm::from_coefficients(l.degree(), l.parity(), coeffs)?;
    Ok(reduced.pullback(chart.to_adapted()))
}

/// True iff `|∫_C a − ∫_C b| < tol` on every chain.
pub fn weak_equal(
    a: &SingularForm,
    b: &SingularForm,
    chains: &[Chain],
    tol: f64,
    spec: &QuadratureSpec,
) -> Result<bool> {
    if a.degree() != b.degree() {
        return Err(Error::DegreeMismatch {
            expected: a.degree(),
            found: b.degree(),
        });
    }
    for c in chains {
        let ia = collapse_integrate(a, c, spec)?.value;
        let ib = collapse_integrate(b, c, spec)?.value;
        if (ia - ib).abs() >= tol {
            return Ok(false);
        }
    }
    Ok(true)
}
