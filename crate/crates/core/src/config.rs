//! Every numeric threshold used by verification and validation, kept in one
//! place so reports can echo exactly what they were judged against.

use serde::{Deserialize, Serialize};

use crate::expr::ZeroConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Identity testing: trials, relative tolerance, seed, redraw budget.
    pub zero: ZeroConfig,
    /// Minimum magnitude for a nondegeneracy witness.
    pub witness: f64,
    /// Two-point determinant threshold below which a pair of functions
    /// counts as linearly dependent.
    pub dependence: f64,
    /// Point pairs sampled by the dependence test.
    pub dependence_pairs: usize,
    /// Nodes with `det g` below this are excluded from curvature checks.
    pub degenerate_metric: f64,
    /// Largest excluded-node fraction a geometry run may have and still pass.
    pub degenerate_fraction: f64,
    pub order_min: f64,
    pub order_max: f64,
    /// Bound on max interior `|K + delta|` at the finest level.
    pub curvature: f64,
    /// Solver state magnitude treated as blowup.
    pub blowup: f64,
    /// Goursat corner compatibility.
    pub corner: f64,
    /// Fixed-point sweeps per solver cell.
    pub sweeps: usize,
    /// Per-sweep change above which the final sweep counts as unconverged.
    pub sweep_change: f64,
    /// Determinant / norm drift per unit path length allowed in transport.
    pub transport_drift: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero: ZeroConfig::default(),
            witness: 1e-6,
            dependence: 1e-8,
            dependence_pairs: 5,
            degenerate_metric: 1e-8,
            degenerate_fraction: 0.1,
            order_min: 1.8,
            order_max: 2.5,
            curvature: 1e-2,
            blowup: 1e6,
            corner: 1e-12,
            sweeps: 2,
            sweep_change: 1e-2,
            transport_drift: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.zero.seed = seed;
        self
    }
}
