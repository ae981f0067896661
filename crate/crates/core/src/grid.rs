//! Computational interval `[a, b]` with uniform output nodes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default node count used throughout the crate.
pub const DEFAULT_NODES: usize = 2001;

/// Closed interval `[a, b]` sampled by `n_nodes` equispaced nodes (endpoints included).
///
/// The grid only fixes where solutions are reported; it plays no part in
/// integrator error control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
    pub n_nodes: usize,
}

impl Interval {
    pub fn new(a: f64, b: f64, n_nodes: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidInterval(format!("need finite a < b, got [{a}, {b}]")));
        }
        if n_nodes < 3 {
            return Err(Error::InvalidInterval(format!(
                "need at least 3 nodes, got {n_nodes}"
            )));
        }
        Ok(Self { a, b, n_nodes })
    }

    /// `[-pi, pi]` with the default node count.
    pub fn symmetric_pi() -> Self {
        Self {
            a: -std::f64::consts::PI,
            b: std::f64::consts::PI,
            n_nodes: DEFAULT_NODES,
        }
    }

    pub fn with_nodes(self, n_nodes: usize) -> Result<Self> {
        Self::new(self.a, self.b, n_nodes)
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.n_nodes - 1) as f64
    }

    /// Node `i`. The last node is exactly `b`.
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n_nodes {
            self.b
        } else {
            self.a + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.node(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// Index of the node interval containing `x` (clamped to the grid).
    pub fn cell_of(&self, x: f64) -> usize {
        let t = ((x - self.a) / self.spacing()).floor();
        if t < 0.0 {
            0
        } else {
            (t as usize).min(self.n_nodes - 2)
        }
    }

    pub fn same_grid(&self, other: &Interval) -> bool {
        self.n_nodes == other.n_nodes && self.a == other.a && self.b == other.b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_intervals() {
        assert!(Interval::new(1.0, 1.0, 10).is_err());
        assert!(Interval::new(2.0, 1.0, 10).is_err());
        assert!(Interval::new(0.0, 1.0, 2).is_err());
        assert!(Interval::new(f64::NAN, 1.0, 10).is_err());
    }

    #[test]
    fn endpoints_are_exact() {
        let g = Interval::symmetric_pi();
        assert_eq!(g.node(0), -std::f64::consts::PI);
        assert_eq!(g.node(g.n_nodes - 1), std::f64::consts::PI);
        assert_eq!(g.nodes().len(), DEFAULT_NODES);
        assert_eq!(g.cell_of(g.b), g.n_nodes - 2);
        assert_eq!(g.cell_of(g.a - 1.0), 0);
    }
}
