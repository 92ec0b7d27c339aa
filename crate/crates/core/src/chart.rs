//! Coordinate charts adapted to affine level sets.
//!
//! For a surface `φ = 0` the adapted coordinates are `(t, y¹, y², φ)`, where
//! `y¹, y²` are the two spatial coordinates left after removing the axis
//! along which `φ` varies most, taken in cyclic order so the chart is
//! orientation preserving when that component of `∇φ` is positive. For a
//! string `φ = ψ = 0` they are `(t, φ, ψ, s)` with `s` the remaining spatial
//! coordinate that makes the chart best conditioned.
//!
//! Only affine level-set functions are supported.

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::exterior::{Region, SmoothMap, DIM};
use crate::expr::{Expr, EvalError};

fn affine_parts(phi: &Expr, name: &str) -> Result<([f64; 4], f64)> {
    let unsupported = || Error::UnsupportedChart(format!("{name} = {phi} is not affine"));
    let origin = [0.0; 4];
    let mut grad = [0.0; 4];
    for i in 0..DIM {
        let di = phi.diff(i);
        for j in 0..DIM {
            if !di.diff(j).is_zero() {
                return Err(unsupported());
            }
        }
        grad[i] = di
            .eval(&origin)
            .map_err(|e: EvalError| Error::domain(&origin, e))?;
    }
    let offset = phi.eval(&origin).map_err(|e| Error::domain(&origin, e))?;
    Ok((grad, offset))
}

fn affine_expr(row: &[f64; 4], offset: f64) -> Expr {
    let mut terms = vec![Expr::constant(offset)];
    for (i, &c) in row.iter().enumerate() {
        if c != 0.0 {
            terms.push(Expr::var(i).scale(c));
        }
    }
    Expr::sum_of(terms)
}

#[derive(Debug, Clone)]
pub struct AdaptedChart {
    /// original coordinates -> adapted coordinates
    to_adapted: SmoothMap,
    /// adapted coordinates -> original coordinates
    to_original: SmoothMap,
    /// adapted slots holding the level-set functions
    level_slots: Vec<usize>,
}

impl AdaptedChart {
    pub fn surface(phi: &Expr) -> Result<AdaptedChart> {
        let (grad, offset) = affine_parts(phi, "phi")?;
        let alpha = (1..DIM)
            .max_by(|&a, &b| grad[a].abs().total_cmp(&grad[b].abs()))
            .expect("spatial axes");
        if grad[alpha] == 0.0 {
            return Err(Error::Transversality(format!(
                "phi = {phi} is not transversal to the time axis"
            )));
        }
        let (a, b) = match alpha {
            1 => (2, 3),
            2 => (3, 1),
            _ => (1, 2),
        };
        let mut rows = [[0.0; 4]; 4];
        let mut offsets = [0.0; 4];
        rows[0][0] = 1.0;
        rows[1][a] = 1.0;
        rows[2][b] = 1.0;
        rows[3] = grad;
        offsets[3] = offset;
        AdaptedChart::from_affine(rows, offsets, vec![3])
    }

    pub fn string(phi: &Expr, psi: &Expr) -> Result<AdaptedChart> {
        let (gp, op) = affine_parts(phi, "phi")?;
        let (gs, os) = affine_parts(psi, "psi")?;
        let mut best: Option<(f64, [[f64; 4]; 4])> = None;
        for s in 1..DIM {
            let mut rows = [[0.0; 4]; 4];
            rows[0][0] = 1.0;
            rows[1] = gp;
            rows[2] = gs;
            rows[3][s] = 1.0;
            let det = Matrix4::from_fn(|r, c| rows[r][c]).determinant();
            if best.is_none_or(|(d, _)| det.abs() > d.abs()) {
                best = Some((det, rows));
            }
        }
        let (_, rows) = best.expect("three candidates");
        AdaptedChart::from_affine(rows, [0.0, op, os, 0.0], vec![1, 2])
    }

    fn from_affine(rows: [[f64; 4]; 4], offsets: [f64; 4], level_slots: Vec<usize>) -> Result<AdaptedChart> {
        let a = Matrix4::from_fn(|r, c| rows[r][c]);
        if a.determinant().abs() < 1e-12 {
            return Err(Error::Transversality(
                "level sets do not define an adapted chart".into(),
            ));
        }
        let inv = a.try_inverse().ok_or_else(|| {
            Error::Transversality("level sets do not define an adapted chart".into())
        })?;
        // x = A⁻¹ (x' - b)
        let forward: [Expr; 4] = std::array::from_fn(|r| affine_expr(&rows[r], offsets[r]));
        let backward: [Expr; 4] = std::array::from_fn(|r| {
            let row: [f64; 4] = std::array::from_fn(|c| inv[(r, c)]);
            let shift = -(0..DIM).map(|c| inv[(r, c)] * offsets[c]).sum::<f64>();
            affine_expr(&row, shift)
        });
        let region = Region::cube(1.0);
        Ok(AdaptedChart {
            to_adapted: SmoothMap::new(forward, &region)?,
            to_original: SmoothMap::new(backward, &region)?,
            level_slots,
        })
    }

    pub fn to_adapted(&self) -> &SmoothMap {
        &self.to_adapted
    }

    pub fn to_original(&self) -> &SmoothMap {
        &self.to_original
    }

    pub fn level_slots(&self) -> &[usize] {
        &self.level_slots
    }

    /// Expresses a field given in original coordinates in adapted ones.
    pub fn to_adapted_field(&self, f: &Expr) -> Expr {
        self.to_original.pull_scalar(f)
    }
}
