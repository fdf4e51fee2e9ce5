//! Symmetric equilibria, the block structure of their Jacobian, and the
//! singular Hopf bifurcation of the antisymmetric block.
//!
//! At a symmetric point `(x, x, y, y)` the 4×4 Jacobian splits into
//!
//! ```text
//! J_s = [[f1 + f2, fy], [eps gx, eps gy]]   (symmetric subspace)
//! J_a = [[f1 - f2, fy], [eps gx, eps gy]]   (antisymmetric subspace)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig2, Complex};
use crate::manifold::{bisect, critical_y, find_symmetric_fold};
use crate::model::{eval_field, first_partials, g_jet_with, PairState, SlowFastModel};
use crate::tolerances::Tolerances;

/// Newton solve of `f(x, x, y) = 0`, `g(x, y) = 0` from `guess = (x, y)`.
pub fn find_symmetric_equilibrium<M: SlowFastModel>(
    model: &M,
    guess: (f64, f64),
) -> Result<(f64, f64)> {
    let dom = model.domain();
    let resid = |x: f64, y: f64| [model.fast(x, x, y), model.slow(x, y)];
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let (mut x, mut y) = guess;
    dom.check(x, y)?;
    let mut r = resid(x, y);
    for _ in 0..100 {
        if norm(r) < 1e-12 {
            return Ok((x, y));
        }
        let (f1, f2, fy) = first_partials(model, x, x, y);
        let g = g_jet_with(model, x, y, f64::INFINITY)?;
        let (a, b, c, d) = (f1 + f2, fy, g.gx, g.gy);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::RootFind {
                what: "symmetric equilibrium",
                residual: norm(r),
            });
        }
        let dx = (d * r[0] - b * r[1]) / det;
        let dy = (-c * r[0] + a * r[1]) / det;
        let mut lambda = 1.0;
        loop {
            let (xn, yn) = (x - lambda * dx, y - lambda * dy);
            if dom.check(xn, yn).is_ok() {
                let rn = resid(xn, yn);
                if norm(rn) < norm(r) || lambda < 1e-10 {
                    x = xn;
                    y = yn;
                    r = rn;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                return Err(Error::RootFind {
                    what: "symmetric equilibrium",
                    residual: norm(r),
                });
            }
        }
    }
    if norm(r) < 1e-12 {
        Ok((x, y))
    } else {
        Err(Error::RootFind {
            what: "symmetric equilibrium",
            residual: norm(r),
        })
    }
}

/// Starting point for the equilibrium search: the first symmetric fold in the
/// model's default bracket, or the bracket midpoint when there is none.
pub fn default_equilibrium_guess<M: SlowFastModel>(
    model: &M,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let (lo, hi) = model.default_fold_bracket();
    let x = match find_symmetric_fold(model, (lo, hi), tol) {
        Ok(roots) if !roots.is_empty() => roots[0],
        _ => 0.5 * (lo + hi),
    };
    Ok((x, critical_y(model, x, x, tol)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    SaddleFocus,
    StableFocus,
    UnstableFocus,
    StableNode,
    UnstableNode,
    Saddle,
    Nonhyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianBlocks {
    pub j_s: [[f64; 2]; 2],
    pub j_a: [[f64; 2]; 2],
    #[serde(with = "pairs")]
    pub eig_s: [Complex; 2],
    #[serde(with = "pairs")]
    pub eig_a: [Complex; 2],
    pub classification: Classification,
    pub det_s: f64,
    /// Leading-order approximation `eps (2 f1 gy - fy gx)` of `det J_s`.
    pub det_s_leading: f64,
}

/// Serialize complex numbers as `(re, im)` pairs.
pub(crate) mod pairs {
    use super::Complex;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex; 2], s: S) -> Result<S::Ok, S::Error> {
        [v[0].pair(), v[1].pair()].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Complex; 2], D::Error> {
        let p: [(f64, f64); 2] = Deserialize::deserialize(d)?;
        Ok([Complex::new(p[0].0, p[0].1), Complex::new(p[1].0, p[1].1)])
    }
}

/// Classify an equilibrium from its eigenvalues.
///
/// An eigenvalue with `|re| <= 1e-12 * max|lambda|` makes it nonhyperbolic.
/// Otherwise: all real parts negative gives a stable focus (if any eigenvalue
/// is complex) or node, all positive the unstable analogues; mixed signs give a
/// saddle-focus when a complex pair is present and a saddle otherwise.
pub fn classify(eigs: &[Complex]) -> Classification {
    let scale = eigs.iter().map(|e| e.abs()).fold(0.0, f64::max);
    if eigs.iter().any(|e| e.re.abs() <= 1e-12 * scale) {
        return Classification::Nonhyperbolic;
    }
    let complex = eigs.iter().any(|e| e.im != 0.0);
    let n_pos = eigs.iter().filter(|e| e.re > 0.0).count();
    match (n_pos, complex) {
        (0, true) => Classification::StableFocus,
        (0, false) => Classification::StableNode,
        (n, true) if n == eigs.len() => Classification::UnstableFocus,
        (n, false) if n == eigs.len() => Classification::UnstableNode,
        (_, true) => Classification::SaddleFocus,
        (_, false) => Classification::Saddle,
    }
}

/// Symmetric and antisymmetric Jacobian blocks at the symmetric point `(x, x, y, y)`.
pub fn jacobian_blocks<M: SlowFastModel>(model: &M, x: f64, y: f64) -> Result<JacobianBlocks> {
    model.domain().check(x, y)?;
    let eps = model.epsilon();
    let (f1, f2, fy) = first_partials(model, x, x, y);
    let g = g_jet_with(model, x, y, f64::INFINITY)?;
    let j_s = [[f1 + f2, fy], [eps * g.gx, eps * g.gy]];
    let j_a = [[f1 - f2, fy], [eps * g.gx, eps * g.gy]];
    let eig_s = eig2(&j_s);
    let eig_a = eig2(&j_a);
    let all = [eig_s[0], eig_s[1], eig_a[0], eig_a[1]];
    Ok(JacobianBlocks {
        j_s,
        j_a,
        eig_s,
        eig_a,
        classification: classify(&all),
        det_s: j_s[0][0] * j_s[1][1] - j_s[0][1] * j_s[1][0],
        det_s_leading: eps * (2.0 * f1 * g.gy - fy * g.gx),
    })
}

/// Full 4×4 Jacobian of the vector field by Richardson-extrapolated central differences.
pub fn full_jacobian_fd<M: SlowFastModel>(model: &M, s: &PairState) -> Result<[[f64; 4]; 4]> {
    let (sx, sy) = model.fd_scale();
    let scale = [sx, sx, sy, sy];
    let base = s.to_array();
    let mut j = [[0.0; 4]; 4];
    for k in 0..4 {
        let h = f64::EPSILON.powf(0.2) * scale[k];
        let diff = |h: f64| -> Result<[f64; 4]> {
            let mut p = base;
            let mut m = base;
            p[k] += h;
            m[k] -= h;
            let fp = eval_field(model, &PairState::from_array(p))?;
            let fm = eval_field(model, &PairState::from_array(m))?;
            Ok([0, 1, 2, 3].map(|i| (fp[i] - fm[i]) / (2.0 * h)))
        };
        let c = diff(h)?;
        let f = diff(0.5 * h)?;
        for i in 0..4 {
            j[i][k] = (4.0 * f[i] - c[i]) / 3.0;
        }
    }
    Ok(j)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfResult {
    pub parameter_name: String,
    pub mu_h: f64,
    pub epsilon: f64,
    pub equilibrium: Equilibrium,
    pub trace_a: f64,
    pub det_a: f64,
    #[serde(with = "pairs")]
    pub eig_a: [Complex; 2],
    pub omega_h: f64,
    /// `sqrt(eps |fy gx|)`.
    pub predicted_omega: f64,
}

struct Branch<'a, M> {
    base: &'a M,
    name: &'a str,
    /// Last solved `(mu, x, y)`, used as the Newton seed.
    last: (f64, f64, f64),
}

impl<M: SlowFastModel> Branch<'_, M> {
    /// Equilibrium at `mu` by natural continuation from the last solution,
    /// halving the parameter step on failure.
    fn solve(&mut self, mu: f64) -> Result<(M, f64, f64)> {
        let (mut mu0, mut x0, mut y0) = self.last;
        let mut target = mu;
        for _ in 0..60 {
            let m = self.base.with_param(self.name, target)?;
            match find_symmetric_equilibrium(&m, (x0, y0)) {
                Ok((x, y)) => {
                    self.last = (target, x, y);
                    if target == mu {
                        return Ok((m, x, y));
                    }
                    mu0 = target;
                    x0 = x;
                    y0 = y;
                    target = mu;
                }
                Err(e) if e.is_config() => return Err(e),
                Err(_) => target = 0.5 * (mu0 + target),
            }
        }
        Err(Error::RootFind {
            what: "equilibrium continuation",
            residual: f64::NAN,
        })
    }

    fn trace_a(&mut self, mu: f64) -> Result<f64> {
        let (m, x, y) = self.solve(mu)?;
        let b = jacobian_blocks(&m, x, y)?;
        Ok(b.j_a[0][0] + b.j_a[1][1])
    }
}

/// Locate `trace J_a = 0` along the symmetric equilibrium branch as
/// `parameter` varies over `bracket`.
pub fn locate_singular_hopf<M: SlowFastModel>(
    model: &M,
    parameter: &str,
    bracket: (f64, f64),
    tol: &Tolerances,
) -> Result<HopfResult> {
    let (lo, hi) = bracket;
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "empty parameter bracket ({lo}, {hi})"
        )));
    }
    let start = model.with_param(parameter, lo)?;
    let guess = default_equilibrium_guess(&start, tol)?;
    let (x0, y0) = find_symmetric_equilibrium(&start, guess)?;
    let mut br = Branch {
        base: model,
        name: parameter,
        last: (lo, x0, y0),
    };

    let n = 50;
    let mut prev = (lo, br.trace_a(lo)?);
    let mut found = None;
    for k in 1..=n {
        let mu = lo + (hi - lo) * k as f64 / n as f64;
        let t = br.trace_a(mu)?;
        if prev.1 == 0.0 || prev.1.signum() != t.signum() {
            found = Some((prev, (mu, t)));
            break;
        }
        prev = (mu, t);
    }
    let ((a, ta), (b, _)) = found.ok_or_else(|| {
        Error::NotFound(format!(
            "trace of J_a keeps its sign for {parameter} in [{lo}, {hi}]"
        ))
    })?;

    br.solve(a)?;
    let mu_h = if ta == 0.0 {
        a
    } else {
        bisect(|mu| br.trace_a(mu), a, b, ta, tol.hopf_trace)?
    };
    let (m, x, y) = br.solve(mu_h)?;
    let blocks = jacobian_blocks(&m, x, y)?;
    let trace_a = blocks.j_a[0][0] + blocks.j_a[1][1];
    let det_a = blocks.j_a[0][0] * blocks.j_a[1][1] - blocks.j_a[0][1] * blocks.j_a[1][0];
    if det_a <= 0.0 {
        return Err(Error::WrongBranch { mu: mu_h, det_a });
    }
    let (_, _, fy) = first_partials(&m, x, x, y);
    let gx = g_jet_with(&m, x, y, f64::INFINITY)?.gx;
    let eps = m.epsilon();
    Ok(HopfResult {
        parameter_name: parameter.to_string(),
        mu_h,
        epsilon: eps,
        equilibrium: Equilibrium { x, y },
        trace_a,
        det_a,
        eig_a: blocks.eig_a,
        omega_h: blocks.eig_a[1].im.abs(),
        predicted_omega: (eps * (fy * gx).abs()).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Real;
    use crate::model::{Interval, StateBox};
    use crate::models::Curtu;

    #[test]
    fn classification_table() {
        let c = |re: f64, im: f64| Complex::new(re, im);
        assert_eq!(
            classify(&[c(-1.0, 0.0), c(-2.0, 0.0), c(0.1, 1.0), c(0.1, -1.0)]),
            Classification::SaddleFocus
        );
        assert_eq!(
            classify(&[c(-1.0, 0.0), c(-2.0, 0.0), c(-0.1, 1.0), c(-0.1, -1.0)]),
            Classification::StableFocus
        );
        assert_eq!(
            classify(&[c(1.0, 0.0), c(2.0, 0.0)]),
            Classification::UnstableNode
        );
        assert_eq!(
            classify(&[c(-1.0, 0.0), c(2.0, 0.0)]),
            Classification::Saddle
        );
        assert_eq!(
            classify(&[c(0.0, 1.0), c(0.0, -1.0)]),
            Classification::Nonhyperbolic
        );
    }

    /// Curtu fast law with a slow law independent of `a`: `g = c u - kappa`.
    #[derive(Clone)]
    struct NoSlowFeedback {
        inner: Curtu,
        kappa: f64,
    }

    impl SlowFastModel for NoSlowFeedback {
        fn name(&self) -> &str {
            "no_slow_feedback"
        }
        fn epsilon(&self) -> f64 {
            0.01
        }
        fn fast<T: Real>(&self, xi: T, xj: T, yi: T) -> T {
            self.inner.fast(xi, xj, yi)
        }
        fn slow<T: Real>(&self, x: T, y: T) -> T {
            x * self.inner.p.c - self.kappa + y * 0.0
        }
        fn domain(&self) -> StateBox {
            StateBox {
                x: Interval::open(0.0, 1.0),
                y: Interval::unbounded(),
            }
        }
        fn params(&self) -> Vec<(&'static str, f64)> {
            self.inner.params()
        }
        fn with_param(&self, name: &str, value: f64) -> Result<Self> {
            Ok(NoSlowFeedback {
                inner: self.inner.with_param(name, value)?,
                kappa: self.kappa,
            })
        }
        fn y_hint(&self, xi: f64, xj: f64) -> f64 {
            self.inner.y_hint(xi, xj)
        }
        fn fd_scale(&self) -> (f64, f64) {
            (0.1, 0.1)
        }
        fn default_fold_bracket(&self) -> (f64, f64) {
            (0.5, 0.99)
        }
    }

    #[test]
    fn hopf_without_slow_feedback_sits_on_the_fold() {
        let m = NoSlowFeedback {
            inner: Curtu::default(),
            kappa: 0.63 * 0.933,
        };
        let tol = Tolerances::default();
        let h = locate_singular_hopf(&m, "b", (0.55, 0.66), &tol).unwrap();
        // Equilibrium is pinned at u = kappa / c; the fold condition there is phi'(u) = -b.
        let u = m.kappa / m.inner.p.c;
        let b_fold = -m.inner.phi_d1(u);
        assert!((h.mu_h - b_fold).abs() < 1e-8, "{} vs {}", h.mu_h, b_fold);
        assert!(h.trace_a.abs() < 1e-10);
    }

    #[test]
    fn no_sign_change_is_not_found() {
        let tol = Tolerances::default();
        let r = locate_singular_hopf(&Curtu::default(), "b", (0.62, 0.66), &tol);
        assert!(matches!(r, Err(Error::NotFound(_))), "{r:?}");
    }
}
