//! Sampling of level sets and their joint zero loci.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exterior::{basis, mask_indices, Region, DIM};
use crate::expr::Expr;

/// Probe region used when a level set is validated without an explicit domain.
pub const PROBE_REGION: Region = Region {
    lo: [-2.0; 4],
    hi: [2.0; 4],
};
pub const PROBE_COUNT: usize = 1000;

/// Transversality threshold on the largest gradient minor.
pub const MINOR_THRESHOLD: f64 = 1e-10;

const PROJECTION_STEPS: usize = 80;
const PROJECTION_TOL: f64 = 1e-13;

/// A list of scalar fields with cached symbolic gradients.
#[derive(Debug, Clone)]
pub struct LevelSets {
    fields: Vec<Expr>,
    grads: Vec<[Expr; 4]>,
}

impl LevelSets {
    pub fn new(fields: &[Expr]) -> LevelSets {
        LevelSets {
            fields: fields.to_vec(),
            grads: fields
                .iter()
                .map(|f| std::array::from_fn(|i| f.diff(i)))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn values(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.fields
            .iter()
            .map(|f| f.eval(p).map_err(|e| Error::domain(p, e)))
            .collect()
    }

    /// m×4 gradient matrix.
    pub fn jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.fields.len(), DIM);
        for (a, g) in self.grads.iter().enumerate() {
            for i in 0..DIM {
                m[(a, i)] = g[i].eval(p).map_err(|e| Error::domain(p, e))?;
            }
        }
        Ok(m)
    }

    /// Minimum-norm Gauss-Newton projection onto the joint zero set.
    pub fn project(&self, start: [f64; 4]) -> Option<[f64; 4]> {
        let mut p = start;
        for _ in 0..PROJECTION_STEPS {
            let values = self.values(&p).ok()?;
            let norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if norm < PROJECTION_TOL {
                return Some(p);
            }
            let jac = self.jacobian(&p).ok()?;
            let gram = &jac * jac.transpose();
            let lambda = gram.lu().solve(&DVector::from_vec(values))?;
            let step = jac.transpose() * lambda;
            if step.iter().any(|s| !s.is_finite()) {
                return None;
            }
            for i in 0..DIM {
                p[i] -= step[i];
            }
            if p.iter().any(|c| c.abs() > 1e6) {
                return None;
            }
        }
        None
    }

    /// Projections of `probes` that converge onto the joint zero set.
    pub fn zero_set_samples(&self, probes: &[[f64; 4]]) -> Vec<[f64; 4]> {
        probes.iter().filter_map(|&p| self.project(p)).collect()
    }
}

/// Largest absolute m×m minor of an m×4 matrix.
pub fn largest_minor(jac: &DMatrix<f64>) -> f64 {
    let m = jac.nrows();
    if m == 0 {
        return 1.0;
    }
    basis(m)
        .iter()
        .map(|&mask| {
            let cols = mask_indices(mask);
            let sub = DMatrix::from_fn(m, m, |r, c| jac[(r, cols[c])]);
            sub.determinant().abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransversalityReport {
    /// Smallest largest-minor of the gradient matrix over the samples.
    pub min_minor: f64,
    /// Number of points found on the joint zero locus.
    pub zero_set_samples: usize,
    /// Smallest spatial gradient norm over the samples, per field
    /// (`dφ∧dt ≠ 0`); `None` unless requested.
    pub min_spatial_gradient: Option<f64>,
    pub threshold: f64,
}

impl TransversalityReport {
    pub fn transversal(&self) -> bool {
        self.min_minor >= self.threshold
    }

    pub fn time_transversal(&self) -> bool {
        self.min_spatial_gradient.is_none_or(|g| g >= self.threshold)
    }

    pub fn passed(&self) -> bool {
        self.transversal() && self.time_transversal()
    }
}

/// Samples the joint zero locus reached from `probes` and reports how far
/// the gradients are from linear dependence there. When no probe reaches the
/// locus the gradients are assessed at the probes themselves.
pub fn transversality(
    fields: &[Expr],
    probes: &[[f64; 4]],
    check_time_axis: bool,
) -> Result<TransversalityReport> {
    let sets = LevelSets::new(fields);
    let samples = sets.zero_set_samples(probes);
    let minors: Vec<f64> = if samples.is_empty() {
        let best = probes
            .iter()
            .map(|p| sets.jacobian(p).map(|j| largest_minor(&j)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        vec![best]
    } else {
        samples
            .iter()
            .map(|p| sets.jacobian(p).map(|j| largest_minor(&j)))
            .collect::<Result<_>>()?
    };
    let min_minor = minors.into_iter().fold(f64::INFINITY, f64::min);
    let min_spatial_gradient = if check_time_axis {
        let points = if samples.is_empty() { probes } else { &samples[..] };
        let mut worst = f64::INFINITY;
        for p in points {
            let jac = sets.jacobian(p)?;
            for r in 0..jac.nrows() {
                let g = (1..DIM).map(|i| jac[(r, i)].powi(2)).sum::<f64>().sqrt();
                worst = worst.min(g);
            }
        }
        Some(worst)
    } else {
        None
    };
    Ok(TransversalityReport {
        min_minor,
        zero_set_samples: samples.len(),
        min_spatial_gradient,
        threshold: MINOR_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;

    fn e(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn projects_onto_tilted_plane() {
        let sets = LevelSets::new(&[e("z - x - 0.3")]);
        let p = sets.project([0.1, 0.5, -0.2, 0.9]).unwrap();
        assert!((p[3] - p[1] - 0.3).abs() < 1e-13);
    }

    #[test]
    fn orthogonal_planes_are_transversal() {
        let probes = Region::new([0.0; 4], [1.0; 4]).halton(50);
        let r = transversality(&[e("x"), e("z")], &probes, false).unwrap();
        assert!(r.passed());
        assert!((r.min_minor - 1.0).abs() < 1e-14);
    }

    #[test]
    fn near_parallel_planes_fail() {
        let probes = Region::new([0.0; 4], [1.0; 4]).halton(50);
        let r = transversality(&[e("x"), e("x + 1e-15*y")], &probes, false).unwrap();
        assert!(!r.passed());
        let r = transversality(&[e("x"), e("x")], &probes, false).unwrap();
        assert_eq!(r.min_minor, 0.0);
    }

    #[test]
    fn time_axis_check() {
        let probes = Region::new([0.0; 4], [1.0; 4]).halton(50);
        let r = transversality(&[e("t - 0.5")], &probes, true).unwrap();
        assert!(r.transversal());
        assert!(!r.time_transversal());
        let r = transversality(&[e("z - t")], &probes, true).unwrap();
        assert!(r.passed());
    }
}
