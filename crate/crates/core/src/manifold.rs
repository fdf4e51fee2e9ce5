//! Critical manifold, symmetric folds and the cusp expansion.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::dual::D1;
use crate::error::{Error, Result};
use crate::model::{f_jet_with, first_partials, PairState, SlowFastModel};
use crate::tolerances::Tolerances;

/// Solve `f(x_i, x_j, y) = 0` for `y` by damped Newton iteration.
pub fn solve_y<M: SlowFastModel>(
    model: &M,
    xi: f64,
    xj: f64,
    y_guess: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let eval = |y: f64| {
        let r = model.fast(D1::var(xi, 0.0), D1::var(xj, 0.0), D1::var(y, 1.0));
        (r.re, r.du)
    };
    let mut y = y_guess;
    let (mut r, mut dr) = eval(y);
    for _ in 0..tol.y_solve_max_iter {
        if !r.is_finite() {
            return Err(Error::RootFind {
                what: "critical manifold solve",
                residual: r,
            });
        }
        if r.abs() < tol.y_solve {
            return Ok(y);
        }
        if dr == 0.0 || !dr.is_finite() || dr.abs() < 1e-300 {
            return Err(Error::Solvability { fy: dr });
        }
        let step = r / dr;
        let mut lambda = 1.0;
        loop {
            let cand = y - lambda * step;
            let (rc, dc) = eval(cand);
            if rc.is_finite() && (rc.abs() < r.abs() || lambda < 1e-8) {
                y = cand;
                r = rc;
                dr = dc;
                break;
            }
            lambda *= 0.5;
        }
    }
    if r.abs() < tol.y_solve {
        Ok(y)
    } else {
        Err(Error::RootFind {
            what: "critical manifold solve",
            residual: r,
        })
    }
}

/// `Y(x_i, x_j)` starting from the model's hint.
pub fn critical_y<M: SlowFastModel>(model: &M, xi: f64, xj: f64, tol: &Tolerances) -> Result<f64> {
    solve_y(model, xi, xj, model.y_hint(xi, xj), tol)
}

/// Projection Jacobian `DF` of `(x1, x2) -> (Y(x1,x2), Y(x2,x1))`.
pub fn df_at<M: SlowFastModel>(
    model: &M,
    x1: f64,
    x2: f64,
    tol: &Tolerances,
) -> Result<[[f64; 2]; 2]> {
    let y1 = critical_y(model, x1, x2, tol)?;
    let y2 = critical_y(model, x2, x1, tol)?;
    df_at_with(model, x1, x2, y1, y2)
}

fn df_at_with<M: SlowFastModel>(
    model: &M,
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
) -> Result<[[f64; 2]; 2]> {
    let (a1, a2, ay) = first_partials(model, x1, x2, y1);
    let (b1, b2, by) = first_partials(model, x2, x1, y2);
    if ay == 0.0 || by == 0.0 {
        return Err(Error::Solvability {
            fy: if ay == 0.0 { ay } else { by },
        });
    }
    Ok([[-a1 / ay, -a2 / ay], [-b2 / by, -b1 / by]])
}

pub fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `f1 - f2` on the symmetric diagonal of the critical manifold.
pub fn fold_function<M: SlowFastModel>(model: &M, x: f64, tol: &Tolerances) -> Result<f64> {
    let y = critical_y(model, x, x, tol)?;
    let (f1, f2, _) = first_partials(model, x, x, y);
    Ok(f1 - f2)
}

/// All roots of the symmetric fold condition `f1 = f2` inside `bracket`.
pub fn find_symmetric_fold<M: SlowFastModel>(
    model: &M,
    bracket: (f64, f64),
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    let (lo, hi) = bracket;
    let dom = model.domain();
    if !(lo < hi) || !dom.x.contains(lo) || !dom.x.contains(hi) {
        return Err(Error::InvalidParameter(format!(
            "fold bracket ({lo}, {hi}) must lie inside the model domain"
        )));
    }
    let n = tol.fold_scan_intervals.max(1);
    let xs: Vec<f64> = (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n as f64)
        .collect();
    let rs = xs
        .iter()
        .map(|&x| fold_function(model, x, tol))
        .collect::<Result<Vec<f64>>>()?;
    let mut roots = Vec::new();
    for k in 0..n {
        let (ra, rb) = (rs[k], rs[k + 1]);
        if ra == 0.0 {
            roots.push(xs[k]);
            continue;
        }
        if ra.signum() != rb.signum() && rb != 0.0 {
            roots.push(bisect(
                |x| fold_function(model, x, tol),
                xs[k],
                xs[k + 1],
                ra,
                tol.fold_residual,
            )?);
        }
    }
    if rs[n] == 0.0 {
        roots.push(xs[n]);
    }
    Ok(roots)
}

/// Bisection refined by secant steps; stops when `|r| < ftol` or the bracket collapses.
pub(crate) fn bisect<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    ftol: f64,
) -> Result<f64> {
    let mut fb = f(b)?;
    for _ in 0..200 {
        // Secant candidate, accepted only if it falls well inside the bracket.
        let mut m = b - fb * (b - a) / (fb - fa);
        let w = (b - a).abs();
        if !(m.is_finite() && (m - a).abs() > 0.05 * w && (b - m).abs() > 0.05 * w) {
            m = 0.5 * (a + b);
        }
        let fm = f(m)?;
        if fm.abs() < ftol && w < 1e-6 * (1.0 + m.abs()) || fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
        if (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1e-300) {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    let best = if fa.abs() < fb.abs() { a } else { b };
    Ok(best)
}

/// Symmetry-adapted coordinates `(v, u, w, z)` relative to `(x*, y*)`.
pub fn to_adapted(s: &PairState, x_star: f64, y_star: f64) -> [f64; 4] {
    [
        0.5 * (s.x1 + s.x2) - x_star,
        0.5 * (s.x1 - s.x2),
        0.5 * (s.y1 + s.y2) - y_star,
        0.5 * (s.y1 - s.y2),
    ]
}

pub fn from_adapted(c: [f64; 4], x_star: f64, y_star: f64) -> PairState {
    let [v, u, w, z] = c;
    PairState::new(
        x_star + v + u,
        x_star + v - u,
        y_star + w + z,
        y_star + w - z,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspReport {
    pub x_star: f64,
    pub y_star: f64,
    pub f1_star: f64,
    pub f2_star: f64,
    pub fy_star: f64,
    pub d_star: f64,
    #[serde(rename = "A")]
    pub a: f64,
    /// `Y11 - Y22` from the mixed difference of the antisymmetric slow coordinate.
    #[serde(rename = "B")]
    pub b: f64,
    /// `Y11 - Y22` from separate second differences of `Y` along each axis.
    pub b_direct: f64,
    pub is_nondegenerate_cusp: bool,
    /// `-(f1 + f2)/fy` and `-(f1 - f2)/fy`.
    pub fold_eigenvalues: [f64; 2],
}

/// Antisymmetric slow coordinate of the critical manifold,
/// `Z(v, u) = (Y(x*+v+u, x*+v-u) - Y(x*+v-u, x*+v+u)) / 2`.
fn z_graph<M: SlowFastModel>(
    model: &M,
    x_star: f64,
    y_star: f64,
    v: f64,
    u: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let a = x_star + v + u;
    let b = x_star + v - u;
    let ya = solve_y(model, a, b, y_star, tol)?;
    let yb = solve_y(model, b, a, y_star, tol)?;
    Ok(0.5 * (ya - yb))
}

fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Non-degeneracy test and cusp expansion at a symmetric fold `x*`.
pub fn cusp_test<M: SlowFastModel>(model: &M, x_star: f64, tol: &Tolerances) -> Result<CuspReport> {
    let y_star = critical_y(model, x_star, x_star, tol)?;
    let j = f_jet_with(model, x_star, x_star, y_star, tol.jet_oracle_rel)?;
    if j.fy == 0.0 {
        return Err(Error::Solvability { fy: 0.0 });
    }
    let d_star = j.f11 - j.f22 - 2.0 * (j.f1 / j.fy) * (j.f1y - j.f2y);
    let (sx, _) = model.fd_scale();

    // Mixed second difference of Z in (v, u).
    let mixed = |h: f64| -> Result<f64> {
        let zpp = z_graph(model, x_star, y_star, h, h, tol)?;
        let zpm = z_graph(model, x_star, y_star, h, -h, tol)?;
        let zmp = z_graph(model, x_star, y_star, -h, h, tol)?;
        let zmm = z_graph(model, x_star, y_star, -h, -h, tol)?;
        Ok((zpp - zpm - zmp + zmm) / (4.0 * h * h))
    };
    let h2 = f64::EPSILON.powf(1.0 / 6.0) * sx;
    let b = richardson(mixed(h2)?, mixed(0.5 * h2)?);

    // Y11 and Y22 separately.
    let yv = |x1: f64, x2: f64| solve_y(model, x1, x2, y_star, tol);
    let second = |h: f64, axis: usize| -> Result<f64> {
        let (dx1, dx2) = if axis == 0 { (h, 0.0) } else { (0.0, h) };
        let p = yv(x_star + dx1, x_star + dx2)?;
        let m = yv(x_star - dx1, x_star - dx2)?;
        Ok((p - 2.0 * y_star + m) / (h * h))
    };
    let y11 = richardson(second(h2, 0)?, second(0.5 * h2, 0)?);
    let y22 = richardson(second(h2, 1)?, second(0.5 * h2, 1)?);
    let b_direct = y11 - y22;

    // Third difference of Z along u at v = 0.
    let third = |h: f64| -> Result<f64> {
        let z = |u: f64| z_graph(model, x_star, y_star, 0.0, u, tol);
        Ok((z(2.0 * h)? - 2.0 * z(h)? + 2.0 * z(-h)? - z(-2.0 * h)?) / (2.0 * h * h * h))
    };
    // Two extrapolation levels: the step is a sizeable fraction of the
    // graph's variation scale near the domain edge.
    let h3 = 0.1 * sx;
    let (t1, t2, t4) = (third(h3)?, third(0.5 * h3)?, third(0.25 * h3)?);
    let (r1, r2) = (richardson(t1, t2), richardson(t2, t4));
    let a = (16.0 * r2 - r1) / 15.0 / 6.0;

    let is_nondegenerate_cusp = d_star.abs() > tol.nondegeneracy && a.abs() > tol.nondegeneracy;
    Ok(CuspReport {
        x_star,
        y_star,
        f1_star: j.f1,
        f2_star: j.f2,
        fy_star: j.fy,
        d_star,
        a,
        b,
        b_direct,
        is_nondegenerate_cusp,
        fold_eigenvalues: [-(j.f1 + j.f2) / j.fy, -(j.f1 - j.f2) / j.fy],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldPoint {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub v: f64,
    pub u: f64,
    pub w: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldCurve {
    pub x_star: f64,
    pub y_star: f64,
    /// Ordered by arclength, from the end of one branch through the cusp to the other.
    pub points: Vec<FoldPoint>,
    pub cusp_index: usize,
    pub truncated: bool,
    pub warning: Option<String>,
}

impl FoldCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x1,x2,y1,y2,v,u,w,z")?;
        for p in &self.points {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                p.x1, p.x2, p.y1, p.y2, p.v, p.u, p.w, p.z
            )?;
        }
        Ok(())
    }

    /// Points before the cusp (nearest first) and after it.
    pub fn branches(&self) -> (Vec<FoldPoint>, Vec<FoldPoint>) {
        let mut a: Vec<FoldPoint> = self.points[..self.cusp_index].to_vec();
        a.reverse();
        let b = self.points[self.cusp_index + 1..].to_vec();
        (a, b)
    }
}

/// `det DF` on the critical manifold and the solved slow values.
fn det_df<M: SlowFastModel>(
    model: &M,
    x: [f64; 2],
    y_seed: [f64; 2],
    tol: &Tolerances,
) -> Result<(f64, [f64; 2])> {
    let y1 = solve_y(model, x[0], x[1], y_seed[0], tol)?;
    let y2 = solve_y(model, x[1], x[0], y_seed[1], tol)?;
    Ok((det2(&df_at_with(model, x[0], x[1], y1, y2)?), [y1, y2]))
}

/// Central-difference gradient of `det DF` with respect to `(x1, x2)`.
pub fn det_df_gradient<M: SlowFastModel>(
    model: &M,
    x1: f64,
    x2: f64,
    tol: &Tolerances,
) -> Result<[f64; 2]> {
    let y1 = critical_y(model, x1, x2, tol)?;
    let y2 = critical_y(model, x2, x1, tol)?;
    grad_det(model, [x1, x2], [y1, y2], tol)
}

fn grad_det<M: SlowFastModel>(
    model: &M,
    x: [f64; 2],
    y: [f64; 2],
    tol: &Tolerances,
) -> Result<[f64; 2]> {
    let h = f64::EPSILON.cbrt() * model.fd_scale().0;
    let mut g = [0.0; 2];
    for k in 0..2 {
        let mut p = x;
        let mut m = x;
        p[k] += h;
        m[k] -= h;
        g[k] = (det_df(model, p, y, tol)?.0 - det_df(model, m, y, tol)?.0) / (2.0 * h);
    }
    Ok(g)
}

/// Options for fold-curve continuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Arclength in `(x1, x2)` traced along each branch.
    pub arclength: f64,
    /// Nominal number of points per branch.
    pub n_points: usize,
    pub max_corrector_iter: usize,
    pub det_tol: f64,
}

impl TraceOptions {
    pub fn new(arclength: f64, n_points: usize) -> Self {
        TraceOptions {
            arclength,
            n_points,
            max_corrector_iter: 4,
            det_tol: 1e-10,
        }
    }
}

fn norm2(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// Pseudo-arclength continuation of `det DF = 0` through the cusp in both directions.
pub fn trace_fold_curve<M: SlowFastModel>(
    model: &M,
    x_star: f64,
    opts: &TraceOptions,
    tol: &Tolerances,
) -> Result<FoldCurve> {
    let y_star = critical_y(model, x_star, x_star, tol)?;
    let g0 = grad_det(model, [x_star, x_star], [y_star, y_star], tol)?;
    let gn = norm2(g0);
    if gn == 0.0 {
        return Err(Error::Degenerate(
            "det DF has vanishing gradient at the cusp".into(),
        ));
    }
    // Tangent is orthogonal to the gradient; orient it along (1, -1).
    let mut tau = [-g0[1] / gn, g0[0] / gn];
    if tau[0] - tau[1] < 0.0 {
        tau = [-tau[0], -tau[1]];
    }
    let start = [x_star, x_star];
    let (plus, w1) = trace_branch(model, start, [y_star; 2], tau, opts, tol)?;
    let (minus, w2) = trace_branch(model, start, [y_star; 2], [-tau[0], -tau[1]], opts, tol)?;

    let mk = |x: [f64; 2], y: [f64; 2]| {
        let s = PairState::new(x[0], x[1], y[0], y[1]);
        let [v, u, w, z] = to_adapted(&s, x_star, y_star);
        FoldPoint {
            x1: x[0],
            x2: x[1],
            y1: y[0],
            y2: y[1],
            v,
            u,
            w,
            z,
        }
    };
    let mut points: Vec<FoldPoint> = minus.iter().rev().map(|&(x, y)| mk(x, y)).collect();
    let cusp_index = points.len();
    points.push(mk(start, [y_star; 2]));
    points.extend(plus.iter().map(|&(x, y)| mk(x, y)));
    let warning = w1.or(w2);
    Ok(FoldCurve {
        x_star,
        y_star,
        points,
        cusp_index,
        truncated: warning.is_some(),
        warning,
    })
}

type Branch = Vec<([f64; 2], [f64; 2])>;

fn trace_branch<M: SlowFastModel>(
    model: &M,
    start: [f64; 2],
    y_start: [f64; 2],
    tau0: [f64; 2],
    opts: &TraceOptions,
    tol: &Tolerances,
) -> Result<(Branch, Option<String>)> {
    let ds0 = opts.arclength / opts.n_points.max(1) as f64;
    let ds_min = ds0 * 1e-6;
    let mut out: Branch = Vec::new();
    let mut x = start;
    let mut y = y_start;
    let mut tau = tau0;
    let mut ds = ds0;
    let mut travelled = 0.0;
    while travelled < opts.arclength * (1.0 - 1e-12) {
        let step = ds.min(opts.arclength - travelled);
        match corrector(model, x, y, tau, step, opts, tol) {
            Ok((xn, yn)) => {
                let d = [xn[0] - x[0], xn[1] - x[1]];
                let dn = norm2(d);
                if dn == 0.0 {
                    return Ok((out, Some("continuation stalled".into())));
                }
                tau = [d[0] / dn, d[1] / dn];
                travelled += step;
                x = xn;
                y = yn;
                out.push((x, y));
                ds = (ds * 1.5).min(ds0);
            }
            Err(_) => {
                ds *= 0.5;
                if ds < ds_min {
                    let msg = format!("continuation step failed after arclength {travelled:.3e}");
                    return Ok((out, Some(msg)));
                }
            }
        }
    }
    Ok((out, None))
}

fn corrector<M: SlowFastModel>(
    model: &M,
    x: [f64; 2],
    y: [f64; 2],
    tau: [f64; 2],
    ds: f64,
    opts: &TraceOptions,
    tol: &Tolerances,
) -> Result<([f64; 2], [f64; 2])> {
    let pred = [x[0] + ds * tau[0], x[1] + ds * tau[1]];
    let mut p = pred;
    let mut ys = y;
    for _ in 0..opts.max_corrector_iter {
        let (g, yn) = det_df(model, p, ys, tol)?;
        ys = yn;
        let arc = tau[0] * (p[0] - pred[0]) + tau[1] * (p[1] - pred[1]);
        let grad = grad_det(model, p, ys, tol)?;
        // [grad; tau] dp = -[g; arc]
        let det = grad[0] * tau[1] - grad[1] * tau[0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Degenerate("singular corrector system".into()));
        }
        let dp0 = (-g * tau[1] + arc * grad[1]) / det;
        let dp1 = (-arc * grad[0] + g * tau[0]) / det;
        p = [p[0] + dp0, p[1] + dp1];
        let (gn, yn) = det_df(model, p, ys, tol)?;
        ys = yn;
        if gn.abs() < opts.det_tol && dp0.hypot(dp1) < 1e-10 * (1.0 + norm2(p)) {
            return Ok((p, ys));
        }
        if gn.abs() < opts.det_tol * 1e-2 {
            return Ok((p, ys));
        }
    }
    Err(Error::RootFind {
        what: "fold corrector",
        residual: f64::NAN,
    })
}

/// Least-squares slope of `log|z|` against `log|w|` on the fold curve.
///
/// Uses points with `|w|` in `[w_max/10, w_max]`, where `w_max` is the largest
/// `|w|` on the curve unless given; each branch must contribute at least 20.
pub fn cusp_exponent_fit(curve: &FoldCurve, w_max: Option<f64>) -> Result<f64> {
    let (a, b) = curve.branches();
    let wmax = w_max.unwrap_or_else(|| curve.points.iter().map(|p| p.w.abs()).fold(0.0, f64::max));
    if !(wmax > 0.0) {
        return Err(Error::Fit("fold curve has no extent in w".into()));
    }
    let window = |p: &&FoldPoint| {
        let w = p.w.abs();
        w >= wmax / 10.0 && w <= wmax && p.z != 0.0
    };
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for branch in [&a, &b] {
        let sel: Vec<&FoldPoint> = branch.iter().filter(window).collect();
        if sel.len() < 20 {
            return Err(Error::Fit(format!(
                "only {} points of a branch fall in the fit window",
                sel.len()
            )));
        }
        pts.extend(sel.iter().map(|p| (p.w.abs().ln(), p.z.abs().ln())));
    }
    Ok(slope(&pts))
}

/// Ordinary least-squares slope.
pub fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
