//! Numerical tolerances shared by the analysis pipeline.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute residual of the fast equation when solving for the slow variable.
    pub y_solve: f64,
    pub y_solve_max_iter: usize,
    /// Residual of f1 - f2 at a symmetric fold.
    pub fold_residual: f64,
    /// Subintervals of the sign-change scan for symmetric folds.
    pub fold_scan_intervals: usize,
    /// |det DF| accepted on fold points.
    pub det_df: f64,
    /// Threshold below which D* or A count as zero.
    pub nondegeneracy: f64,
    /// Margin for strict inequalities in the condition checks.
    pub condition_margin: f64,
    /// |trace J_a| at a located Hopf point.
    pub hopf_trace: f64,
    /// Relative agreement required between the dual-number jet and an analytic oracle.
    pub jet_oracle_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            y_solve: 1e-12,
            y_solve_max_iter: 50,
            fold_residual: 1e-10,
            fold_scan_intervals: 400,
            det_df: 1e-8,
            nondegeneracy: 1e-8,
            condition_margin: 1e-10,
            hopf_trace: 1e-10,
            jet_oracle_rel: 1e-6,
        }
    }
}
