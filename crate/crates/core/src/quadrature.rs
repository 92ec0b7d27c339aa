//! Gauss–Legendre rules on the unit interval and their tensor products.

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct UnitRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl UnitRule {
    pub fn new(order: usize) -> Result<UnitRule> {
        let rule = GaussLegendre::new(order)
            .map_err(|_| Error::InvalidQuadrature(format!("order {order} is below 2")))?;
        let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(UnitRule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// All `(point, weight)` pairs of the `dim`-fold tensor rule on
    /// `[lo, hi]`, in lexicographic order (last axis fastest).
    pub fn tensor(&self, lo: &[f64], hi: &[f64]) -> Vec<(Vec<f64>, f64)> {
        let dim = lo.len();
        let n = self.order();
        let total = n.pow(dim as u32);
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            let mut p = Vec::with_capacity(dim);
            let mut w = 1.0;
            for a in 0..dim {
                let h = hi[a] - lo[a];
                p.push(lo[a] + h * self.nodes[idx[a]]);
                w *= h * self.weights[idx[a]];
            }
            out.push((p, w));
            for a in (0..dim).rev() {
                idx[a] += 1;
                if idx[a] < n {
                    break;
                }
                idx[a] = 0;
            }
        }
        out
    }

    pub fn tensor_unit(&self, dim: usize) -> Vec<(Vec<f64>, f64)> {
        self.tensor(&vec![0.0; dim], &vec![1.0; dim])
    }
}
