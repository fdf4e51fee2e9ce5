//! Center-manifold reduction at a cusped fold, the conditions for a singular
//! Hopf bifurcation and the SAO-count prediction.
//!
//! In symmetry-adapted coordinates the reduced system (cubic truncation) is
//!
//! ```text
//! u' = fy z + Omega u w + Gamma u^3
//! w' = eps (g0 + nu_eff w + rho_eff u^2)
//! z' = eps (gx u + gy z)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::critical_y;
use crate::model::{f_jet_with, g_jet_with, SlowFastModel};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedCoefficients {
    pub x_star: f64,
    pub y_star: f64,
    pub f1: f64,
    pub f2: f64,
    pub fy: f64,
    pub d_star: f64,
    pub h0w: f64,
    pub huu: f64,
    pub omega: f64,
    pub gamma: f64,
    pub g0: f64,
    pub nu_eff: f64,
    pub rho_eff: f64,
    pub gx: f64,
    pub gy: f64,
}

/// Reduction coefficients at the symmetric fold `x*`.
pub fn reduction_coefficients<M: SlowFastModel>(
    model: &M,
    x_star: f64,
    tol: &Tolerances,
) -> Result<ReducedCoefficients> {
    let y_star = critical_y(model, x_star, x_star, tol)?;
    let j = f_jet_with(model, x_star, x_star, y_star, tol.jet_oracle_rel)?;
    let g = g_jet_with(model, x_star, y_star, tol.jet_oracle_rel)?;
    if j.f1.abs() <= 10.0 * tol.fold_residual {
        return Err(Error::Degenerate(format!(
            "f1 = {:e} vanishes at the fold",
            j.f1
        )));
    }
    if j.fy == 0.0 {
        return Err(Error::Solvability { fy: 0.0 });
    }
    let d_star = j.f11 - j.f22 - 2.0 * (j.f1 / j.fy) * (j.f1y - j.f2y);
    let curv = j.f11 - 2.0 * j.f12 + j.f22;
    let h0w = -j.fy / (2.0 * j.f1);
    let huu = -curv / (4.0 * j.f1);
    let omega = h0w * d_star;
    let gamma = (j.f111 - 3.0 * j.f112 + 3.0 * j.f122 - j.f222) / 6.0
        - (j.f11 - j.f22) * curv / (4.0 * j.f1);
    Ok(ReducedCoefficients {
        x_star,
        y_star,
        f1: j.f1,
        f2: j.f2,
        fy: j.fy,
        d_star,
        h0w,
        huu,
        omega,
        gamma,
        g0: g.g,
        nu_eff: g.gy + g.gx * h0w,
        rho_eff: g.gx * huu + 0.5 * g.gxx,
        gx: g.gx,
        gy: g.gy,
    })
}

/// Cubic truncation of the reduced vector field in `(u, w, z)`.
pub fn reduced_field(rc: &ReducedCoefficients, u: f64, w: f64, z: f64, eps: f64) -> [f64; 3] {
    [
        rc.fy * z + rc.omega * u * w + rc.gamma * u * u * u,
        eps * (rc.g0 + rc.nu_eff * w + rc.rho_eff * u * u),
        eps * (rc.gx * u + rc.gy * z),
    ]
}

/// Critical surface `z = Q(u, w)` of the truncated fast equation.
pub fn q_surface(rc: &ReducedCoefficients, u: f64, w: f64) -> f64 {
    -(rc.omega / rc.fy) * u * w - (rc.gamma / rc.fy) * u * u * u
}

/// `dQ/du`.
pub fn q_surface_du(rc: &ReducedCoefficients, u: f64, w: f64) -> f64 {
    -(rc.omega / rc.fy) * w - 3.0 * (rc.gamma / rc.fy) * u * u
}

/// `w` on the fold parabola of `Q` (where `dQ/du = 0`).
pub fn q_fold_w(rc: &ReducedCoefficients, u: f64) -> f64 {
    -3.0 * rc.gamma / rc.omega * u * u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Opening {
    OpensWNegative,
    OpensWPositive,
}

/// Direction in which the cusp opens and whether the central sheet is attracting.
///
/// The cusp opens toward `w < 0` iff `Gamma / Omega > 0`. Inside the cusp the
/// central sheet has fast eigenvalue `Omega w` with `w` of the opening sign,
/// so it attracts iff `Gamma > 0`.
pub fn classify_opening(rc: &ReducedCoefficients) -> Result<(Opening, bool)> {
    if rc.omega == 0.0 || rc.gamma == 0.0 || rc.fy == 0.0 || !(rc.omega * rc.gamma).is_finite() {
        return Err(Error::Degenerate(
            "opening needs nonzero Omega, Gamma and fy".into(),
        ));
    }
    let opening = if rc.gamma / rc.omega > 0.0 {
        Opening::OpensWNegative
    } else {
        Opening::OpensWPositive
    };
    Ok((opening, rc.gamma > 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub satisfied: bool,
    /// Numeric witness; absent when it cannot be computed at this fold.
    pub witness: Option<f64>,
}

impl ConditionCheck {
    fn of(witness: Option<f64>, test: impl Fn(f64) -> bool) -> Self {
        ConditionCheck {
            satisfied: witness.map(test).unwrap_or(false),
            witness,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// Inhibitory coupling, witness `f2`.
    pub c1: ConditionCheck,
    /// Non-positive slow self-feedback, witness `gy`.
    pub c2: ConditionCheck,
    /// Rotation in the antisymmetric plane, witness `fy * gx`.
    pub c3: ConditionCheck,
    /// Cubic non-degeneracy, witness `Gamma`.
    pub c4: ConditionCheck,
    /// Cusp is not an equilibrium, witness `g0`.
    pub c5: ConditionCheck,
    /// Slow flow enters from the attracting sheet, witness `g0 * Omega` (and `Gamma > 0`).
    pub c6: ConditionCheck,
    pub all_satisfied: bool,
    pub opening: Option<Opening>,
    pub central_sheet_attracting: Option<bool>,
}

/// Evaluate the six conditions at the symmetric fold `x*`.
///
/// A fold where the reduction itself degenerates (`f1 = 0`) is reported with
/// the dependent conditions failing rather than as an error.
pub fn check_conditions<M: SlowFastModel>(
    model: &M,
    x_star: f64,
    tol: &Tolerances,
) -> Result<ConditionReport> {
    let y_star = critical_y(model, x_star, x_star, tol)?;
    let j = f_jet_with(model, x_star, x_star, y_star, tol.jet_oracle_rel)?;
    let g = g_jet_with(model, x_star, y_star, tol.jet_oracle_rel)?;
    let rc = match reduction_coefficients(model, x_star, tol) {
        Ok(rc) => Some(rc),
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(build_report(
        j.f2,
        g.gy,
        j.fy * g.gx,
        g.g,
        rc.as_ref(),
        tol.condition_margin,
    ))
}

/// Conditions evaluated from precomputed coefficients.
pub fn conditions_from(rc: &ReducedCoefficients, margin: f64) -> ConditionReport {
    build_report(rc.f2, rc.gy, rc.fy * rc.gx, rc.g0, Some(rc), margin)
}

fn build_report(
    f2: f64,
    gy: f64,
    fygx: f64,
    g0: f64,
    rc: Option<&ReducedCoefficients>,
    margin: f64,
) -> ConditionReport {
    let gamma = rc.map(|r| r.gamma);
    let g0_omega = rc.map(|r| r.g0 * r.omega);
    let c1 = ConditionCheck::of(Some(f2), |v| v < -margin);
    let c2 = ConditionCheck::of(Some(gy), |v| v <= 0.0);
    let c3 = ConditionCheck::of(Some(fygx), |v| v < -margin);
    let c4 = ConditionCheck::of(gamma, |v| v.abs() > margin);
    let c5 = ConditionCheck::of(Some(g0), |v| v.abs() > margin);
    let gamma_pos = gamma.map(|v| v > margin).unwrap_or(false);
    let c6 = ConditionCheck::of(g0_omega, |v| v > margin && gamma_pos);
    let all = [c1, c2, c3, c4, c5, c6].iter().all(|c| c.satisfied);
    let (opening, attracting) = match rc.map(classify_opening) {
        Some(Ok((o, a))) => (Some(o), Some(a)),
        _ => (None, None),
    };
    ConditionReport {
        c1,
        c2,
        c3,
        c4,
        c5,
        c6,
        all_satisfied: all,
        opening,
        central_sheet_attracting: attracting,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaoPrediction {
    /// Eigenvalue of larger magnitude.
    pub lambda_strong: f64,
    /// Eigenvalue of smaller magnitude.
    pub lambda_weak: f64,
    /// Eigenvalue along the `u` direction.
    pub lambda_u: f64,
    /// Eigenvalue along the `w` direction.
    pub lambda_w: f64,
    /// `|lambda_strong| / |lambda_weak|`.
    pub ratio: f64,
    pub n_sao: Option<u32>,
    pub resonance_flag: bool,
    /// Largest relative gap between the analytic and finite-difference eigenvalues.
    pub fd_discrepancy: f64,
}

/// Orientation factor of the desingularization, `sign(fy)`.
///
/// Multiplying the slow flow on the critical surface by `sign(fy) dQ/du` agrees
/// with `-dQ/du` when `fy < 0` and keeps the result invariant under `y -> -y`.
fn orientation(rc: &ReducedCoefficients) -> f64 {
    rc.fy.signum()
}

/// The desingularized slow flow on `z = Q(u, w)`, in slow time with `eps` removed.
///
/// `solve_z` returns the surface height; its partials are taken by central
/// differences so the construction does not reuse the closed form of `Q`.
fn desingularized_numeric(rc: &ReducedCoefficients, u: f64, w: f64) -> [f64; 2] {
    let solve_z = |u: f64, w: f64| {
        // Fast component is affine in z: fy z + c(u, w) = 0.
        let c = reduced_field(rc, u, w, 0.0, 1.0)[0];
        let slope = reduced_field(rc, u, w, 1.0, 1.0)[0] - c;
        -c / slope
    };
    // Richardson-extrapolated central differences, exact on the cubic truncation.
    let d = |f: &dyn Fn(f64) -> f64, h: f64| {
        let c = |h: f64| (f(h) - f(-h)) / (2.0 * h);
        (4.0 * c(0.5 * h) - c(h)) / 3.0
    };
    let qu = d(&|e| solve_z(u + e, w), 1e-3);
    let qw = d(&|e| solve_z(u, w + e), 1e-3);
    let z = solve_z(u, w);
    let [_, wdot, zdot] = reduced_field(rc, u, w, z, 1.0);
    let s = orientation(rc);
    [s * (zdot - qw * wdot), s * qu * wdot]
}

/// Eigenvalues of the desingularized reduced flow at the cusp and the SAO count.
pub fn desingularized_eigenvalues(rc: &ReducedCoefficients, margin: f64) -> Result<SaoPrediction> {
    if rc.fy == 0.0 {
        return Err(Error::Solvability { fy: 0.0 });
    }
    let s = orientation(rc);
    let k = rc.omega * rc.g0 / rc.fy;
    let lambda_u = s * (rc.gx + k);
    let lambda_w = -s * k;

    // Finite-difference Jacobian of the constructed planar field.
    let h = 1e-5;
    let rich = |f: &dyn Fn(f64) -> [f64; 2], i: usize| {
        let d = |h: f64| (f(h)[i] - f(-h)[i]) / (2.0 * h);
        (4.0 * d(0.5 * h) - d(h)) / 3.0
    };
    let along_u = |e: f64| desingularized_numeric(rc, e, 0.0);
    let along_w = |e: f64| desingularized_numeric(rc, 0.0, e);
    let jac = [
        [rich(&along_u, 0), rich(&along_w, 0)],
        [rich(&along_u, 1), rich(&along_w, 1)],
    ];
    let tr = jac[0][0] + jac[1][1];
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    let disc = tr * tr - 4.0 * det;
    let fd = if disc >= 0.0 {
        let r = disc.sqrt();
        [0.5 * (tr - r), 0.5 * (tr + r)]
    } else {
        [f64::NAN, f64::NAN]
    };
    let mut an = [lambda_u, lambda_w];
    an.sort_by(|a, b| a.total_cmp(b));
    let scale = an[0].abs().max(an[1].abs());
    let fd_discrepancy = (an[0] - fd[0]).abs().max((an[1] - fd[1]).abs()) / scale;
    if !(fd_discrepancy < 1e-6) {
        return Err(Error::Inconsistency(format!(
            "desingularized eigenvalues {an:?} disagree with finite differences {fd:?}"
        )));
    }

    if conditions_from(rc, margin).all_satisfied && (lambda_u >= 0.0 || lambda_w >= 0.0) {
        return Err(Error::Inconsistency(format!(
            "conditions hold but desingularized eigenvalues are ({lambda_u}, {lambda_w})"
        )));
    }
    let (strong, weak) = if lambda_u.abs() >= lambda_w.abs() {
        (lambda_u, lambda_w)
    } else {
        (lambda_w, lambda_u)
    };
    let (ratio, n_sao, resonance_flag) = sao_count_from(strong, weak);
    Ok(SaoPrediction {
        lambda_strong: strong,
        lambda_weak: weak,
        lambda_u,
        lambda_w,
        ratio,
        n_sao,
        resonance_flag,
        fd_discrepancy,
    })
}

/// Magnitude-ordered ratio, its floor, and the resonance flag (ratio within
/// 1e-6 of an integer, in which case the count is undefined).
pub fn sao_count_from(l1: f64, l2: f64) -> (f64, Option<u32>, bool) {
    let (big, small) = if l1.abs() >= l2.abs() {
        (l1.abs(), l2.abs())
    } else {
        (l2.abs(), l1.abs())
    };
    if small == 0.0 || !big.is_finite() {
        return (f64::INFINITY, None, false);
    }
    let ratio = big / small;
    let resonance = (ratio - ratio.round()).abs() < 1e-6;
    let n = (!resonance).then(|| ratio.floor() as u32);
    (ratio, n, resonance)
}

pub fn sao_count(pred: &SaoPrediction) -> Option<u32> {
    sao_count_from(pred.lambda_strong, pred.lambda_weak).1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(
        fy: f64,
        omega: f64,
        gamma: f64,
        g0: f64,
        gx: f64,
        gy: f64,
    ) -> ReducedCoefficients {
        ReducedCoefficients {
            x_star: 0.0,
            y_star: 0.0,
            f1: -1.0,
            f2: -0.5,
            fy,
            d_star: 2.0 * omega / fy,
            h0w: fy / 2.0,
            huu: 0.0,
            omega,
            gamma,
            g0,
            nu_eff: -0.3,
            rho_eff: 0.2,
            gx,
            gy,
        }
    }

    #[test]
    fn cusp_is_not_an_equilibrium() {
        let rc = synthetic(-1.0, 2.0, 3.0, 0.5, 1.0, -1.0);
        assert_eq!(
            reduced_field(&rc, 0.0, 0.0, 0.0, 0.1),
            [0.0, 0.1 * 0.5, 0.0]
        );
    }

    #[test]
    fn fast_component_is_odd() {
        let rc = synthetic(-1.3, 2.0, 3.0, 0.5, 1.0, -1.0);
        let a = reduced_field(&rc, 0.2, 0.1, 0.3, 0.01);
        let b = reduced_field(&rc, -0.2, 0.1, -0.3, 0.01);
        assert_eq!(a[0], -b[0]);
    }

    #[test]
    fn q_surface_geometry() {
        let rc = synthetic(-0.6, 11.0, 10.0, 0.0036, 0.63, -1.0);
        assert_eq!(q_surface(&rc, -0.3, 0.2), -q_surface(&rc, 0.3, 0.2));
        let expected = -4.0 * rc.omega.powi(3) / (27.0 * rc.fy * rc.fy * rc.gamma);
        for u in [1e-3, 0.01, 0.05] {
            let w = q_fold_w(&rc, u);
            assert!(q_surface_du(&rc, u, w).abs() < 1e-12);
            let z = q_surface(&rc, u, w);
            assert!((z * z / w.powi(3) / expected - 1.0).abs() < 1e-10);
            assert!(reduced_field(&rc, u, w, z, 0.01)[0].abs() < 1e-15);
        }
    }

    #[test]
    fn opening_rules() {
        let rc = synthetic(-0.6, 11.0, 10.0, 0.0036, 0.63, -1.0);
        assert_eq!(
            classify_opening(&rc).unwrap(),
            (Opening::OpensWNegative, true)
        );
        let ml_like = synthetic(-21.0, -12.0, 0.002, -1e-5, 7e-5, -0.01);
        assert_eq!(
            classify_opening(&ml_like).unwrap(),
            (Opening::OpensWPositive, true)
        );
        assert!(classify_opening(&synthetic(-1.0, 0.0, 1.0, 1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn sao_count_examples() {
        assert_eq!(sao_count_from(-10.0, -25.0), (2.5, Some(2), false));
        let (r, n, res) = sao_count_from(-1.0, -3.0000000);
        assert_eq!((r, n, res), (3.0, None, true));
        assert_eq!(sao_count_from(-4.0, -4.0), (1.0, None, true));
    }

    #[test]
    fn eigenvalues_without_slow_feedback_are_opposite() {
        // gx = gy = 0: the pair is (s k, -s k) with s = sign(fy), k = Omega g0 / fy.
        let rc = synthetic(-2.0, 3.0, 1.0, 0.4, 0.0, 0.0);
        let p = desingularized_eigenvalues(&rc, 1e-10).unwrap();
        let k = rc.omega * rc.g0 / rc.fy;
        assert!((p.lambda_u - (-k)).abs() < 1e-14);
        assert!((p.lambda_w - k).abs() < 1e-14);
        assert!(p.fd_discrepancy < 1e-6);
    }
}
