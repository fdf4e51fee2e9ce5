//! Analysis of symmetric two-cell slow-fast systems with mutual inhibition:
//! critical manifold folds and cusps, the local reduced normal form,
//! Jacobian block spectra and singular Hopf points, trajectory integration,
//! and mixed-mode oscillation signatures.

// `!(a < b)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dual;
pub mod error;
pub mod linalg;
pub mod manifold;
pub mod model;
pub mod models;
pub mod ode;
pub mod reduction;
pub mod signature;
pub mod spectra;
pub mod tolerances;

pub use error::{Error, Result};
pub use manifold::{
    cusp_test, find_symmetric_fold, trace_fold_curve, CuspReport, FoldCurve, TraceOptions,
};
pub use model::{exchange, y_flip, FJet3, GJet2, PairState, SlowFastModel};
pub use models::{
    build_curtu, build_morris_lecar, BuiltinModel, Curtu, CurtuParams, MorrisLecar,
    MorrisLecarParams,
};
pub use ode::{integrate, IntegratorOptions, Trajectory};
pub use reduction::{
    check_conditions, desingularized_eigenvalues, reduction_coefficients, ConditionReport, Opening,
    ReducedCoefficients, SaoPrediction,
};
pub use signature::{classify_mmo, extract_extrema, MmoSignature, Observable};
pub use spectra::{
    jacobian_blocks, locate_singular_hopf, Classification, HopfResult, JacobianBlocks,
};
pub use tolerances::Tolerances;
