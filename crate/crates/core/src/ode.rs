//! Adaptive Dormand–Prince 5(4) integration of the full and reduced systems.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{raw_field, PairState, SlowFastModel};
use crate::reduction::{reduced_field, ReducedCoefficients};
use crate::spectra::{default_equilibrium_guess, find_symmetric_equilibrium};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-9,
            atol: 1e-11,
            max_step: f64::INFINITY,
            h0: None,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub model: String,
    pub epsilon: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub accepted: usize,
    pub rejected: usize,
}

/// Time samples, states and the vector field at each sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory<const N: usize = 4> {
    pub t: Vec<f64>,
    pub states: Vec<[f64; N]>,
    /// Vector field at each sample, used for Hermite interpolation.
    pub derivs: Vec<[f64; N]>,
    pub meta: TrajectoryMeta,
}

impl<const N: usize> Trajectory<N> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Cubic Hermite interpolation at `t` (clamped to the covered span).
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let n = self.t.len();
        if n == 1 || t <= self.t[0] {
            return self.states[0];
        }
        if t >= self.t[n - 1] {
            return self.states[n - 1];
        }
        let k = self.t.partition_point(|&ti| ti <= t) - 1;
        hermite(
            self.t[k],
            self.t[k + 1],
            &self.states[k],
            &self.states[k + 1],
            &self.derivs[k],
            &self.derivs[k + 1],
            t,
        )
    }

    /// Derivative of the Hermite interpolant at `t`.
    pub fn interpolate_derivative(&self, t: f64) -> [f64; N] {
        let n = self.t.len();
        if n < 2 {
            return self.derivs[0];
        }
        let k = (self.t.partition_point(|&ti| ti <= t).max(1) - 1).min(n - 2);
        let (t0, t1) = (self.t[k], self.t[k + 1]);
        let h = t1 - t0;
        let s = ((t - t0) / h).clamp(0.0, 1.0);
        let (y0, y1, d0, d1) = (
            &self.states[k],
            &self.states[k + 1],
            &self.derivs[k],
            &self.derivs[k + 1],
        );
        let mut out = [0.0; N];
        for i in 0..N {
            let dh00 = (6.0 * s * s - 6.0 * s) / h;
            let dh10 = 3.0 * s * s - 4.0 * s + 1.0;
            let dh01 = (-6.0 * s * s + 6.0 * s) / h;
            let dh11 = 3.0 * s * s - 2.0 * s;
            out[i] = dh00 * y0[i] + dh10 * d0[i] + dh01 * y1[i] + dh11 * d1[i];
        }
        out
    }

    /// Samples at `t0, t0 + dt, ...` by cubic Hermite interpolation.
    pub fn resample(&self, dt: f64) -> Trajectory<N> {
        let mut out = Trajectory {
            meta: self.meta.clone(),
            ..Default::default()
        };
        if self.is_empty() || !(dt > 0.0) {
            return out;
        }
        let (t0, t1) = (self.t[0], self.t[self.len() - 1]);
        let n = ((t1 - t0) / dt).floor() as usize;
        for k in 0..=n {
            let t = t0 + k as f64 * dt;
            out.t.push(t);
            out.states.push(self.interpolate(t));
            out.derivs.push(self.interpolate_derivative(t));
        }
        out
    }

    /// Samples with `t >= t_from`.
    pub fn after(&self, t_from: f64) -> Trajectory<N> {
        let k = self.t.partition_point(|&t| t < t_from);
        Trajectory {
            t: self.t[k..].to_vec(),
            states: self.states[k..].to_vec(),
            derivs: self.derivs.get(k..).map(<[_]>::to_vec).unwrap_or_default(),
            meta: self.meta.clone(),
        }
    }
}

impl Trajectory<4> {
    pub fn pair(&self, k: usize) -> PairState {
        PairState::from_array(self.states[k])
    }

    /// Mirror image under the cell exchange.
    pub fn exchanged(&self) -> Trajectory<4> {
        let sw = |s: &[f64; 4]| [s[1], s[0], s[3], s[2]];
        Trajectory {
            t: self.t.clone(),
            states: self.states.iter().map(sw).collect(),
            derivs: self.derivs.iter().map(sw).collect(),
            meta: self.meta.clone(),
        }
    }

    /// CSV with header `t,x1,x2,y1,y2` (or `t,<aliases>`), 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W, aliases: Option<[&str; 4]>) -> io::Result<()> {
        let names = aliases.unwrap_or(["x1", "x2", "y1", "y2"]);
        writeln!(w, "t,{},{},{},{}", names[0], names[1], names[2], names[3])?;
        for (t, s) in self.t.iter().zip(&self.states) {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t, s[0], s[1], s[2], s[3]
            )?;
        }
        Ok(())
    }
}

fn hermite<const N: usize>(
    t0: f64,
    t1: f64,
    y0: &[f64; N],
    y1: &[f64; N],
    d0: &[f64; N],
    d1: &[f64; N],
    t: f64,
) -> [f64; N] {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i];
    }
    out
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

/// Why a run stopped early.
#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    StepUnderflow,
    TooManySteps,
    NonFinite,
    /// The state left the admissible region; carries the offending state.
    LeftDomain(Vec<f64>),
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

fn error_norm<const N: usize>(
    err: &[f64; N],
    y: &[f64; N],
    ynew: &[f64; N],
    rtol: f64,
    atol: f64,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = atol + rtol * y[i].abs().max(ynew[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / N as f64).sqrt()
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` (with `t1 > t0`).
///
/// `inside` is checked on every accepted state. On failure the accepted prefix
/// is returned together with the reason.
pub fn dopri5<const N: usize, F, G>(
    mut f: F,
    inside: G,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    opts: &IntegratorOptions,
) -> std::result::Result<Trajectory<N>, (Trajectory<N>, f64, StopReason)>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> bool,
{
    let meta = TrajectoryMeta {
        rtol: opts.rtol,
        atol: opts.atol,
        max_step: opts.max_step,
        ..Default::default()
    };
    let mut tr = Trajectory {
        meta,
        ..Default::default()
    };
    let mut k1 = f(t0, &y0);
    tr.t.push(t0);
    tr.states.push(y0);
    tr.derivs.push(k1);
    if !(t1 > t0) {
        return Ok(tr);
    }
    let span = t1 - t0;
    let hmax = opts.max_step.min(span);
    let mut h = match opts.h0 {
        Some(h) => h.min(hmax),
        None => initial_step(&mut f, t0, &y0, &k1, opts).min(hmax),
    };
    let mut t = t0;
    let mut y = y0;
    let mut err_old = 1e-4f64;
    let mut last_rejected = false;

    while t < t1 {
        if tr.meta.accepted + tr.meta.rejected >= opts.max_steps {
            return Err((tr, t, StopReason::TooManySteps));
        }
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err((tr, t, StopReason::StepUnderflow));
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let ynew = axpy(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let tnew = if last { t1 } else { t + h };
        let k7 = f(tnew, &ynew);
        let mut err = [0.0; N];
        for i in 0..N {
            err[i] =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let en = error_norm(&err, &y, &ynew, opts.rtol, opts.atol);
        if !en.is_finite() || ynew.iter().chain(k7.iter()).any(|v| !v.is_finite()) {
            tr.meta.rejected += 1;
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }
        if en <= 1.0 {
            if !inside(&ynew) {
                return Err((tr, tnew, StopReason::LeftDomain(ynew.to_vec())));
            }
            let en_c = en.max(1e-10);
            let mut fac = SAFETY * en_c.powf(-ALPHA) * err_old.powf(BETA);
            fac = fac.clamp(FAC_MIN, if last_rejected { 1.0 } else { FAC_MAX });
            err_old = en_c;
            t = tnew;
            y = ynew;
            k1 = k7;
            tr.t.push(t);
            tr.states.push(y);
            tr.derivs.push(k1);
            tr.meta.accepted += 1;
            last_rejected = false;
            h = (h * fac).min(hmax);
        } else {
            tr.meta.rejected += 1;
            let fac = (SAFETY * en.powf(-ALPHA)).max(FAC_MIN);
            h *= fac;
            last_rejected = true;
        }
    }
    Ok(tr)
}

fn initial_step<const N: usize, F: FnMut(f64, &[f64; N]) -> [f64; N]>(
    f: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    opts: &IntegratorOptions,
) -> f64 {
    let sc: Vec<f64> = y0.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let norm = |v: &[f64; N]| {
        (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / N as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = f(t0 + h0, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// Integrate the full four-dimensional system from `s0` over `t_span`.
pub fn integrate<M: SlowFastModel>(
    model: &M,
    s0: PairState,
    t_span: (f64, f64),
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidParameter(
            "rtol and atol must be positive".into(),
        ));
    }
    let dom = model.domain();
    dom.check_state(&s0)?;
    let field = |_t: f64, y: &[f64; 4]| raw_field(model, &PairState::from_array(*y));
    let inside = |y: &[f64; 4]| dom.check_state(&PairState::from_array(*y)).is_ok();
    let name = model.name().to_string();
    let eps = model.epsilon();
    let stamp = |mut tr: Trajectory| {
        tr.meta.model = name.clone();
        tr.meta.epsilon = eps;
        tr
    };
    match dopri5(field, inside, t_span.0, t_span.1, s0.to_array(), opts) {
        Ok(tr) => Ok(stamp(tr)),
        Err((tr, t, reason)) => {
            let partial = Box::new(stamp(tr));
            Err(match reason {
                StopReason::LeftDomain(s) => Error::DomainExit {
                    t,
                    state: [s[0], s[1], s[2], s[3]],
                    partial,
                },
                other => Error::Integration {
                    t,
                    reason: format!("{other:?}"),
                    partial: Some(partial),
                },
            })
        }
    }
}

/// Size of the antisymmetric kick applied to the symmetric equilibrium.
pub const DEFAULT_KICK: f64 = 1e-3;

/// Fraction of the time span discarded as transient before signature analysis.
pub const TRANSIENT_FRACTION: f64 = 0.2;

/// Symmetric equilibrium with `x1, x2 = x_eq ± DEFAULT_KICK`.
pub fn default_initial_state<M: SlowFastModel>(model: &M, tol: &Tolerances) -> Result<PairState> {
    let guess = default_equilibrium_guess(model, tol)?;
    let (x, y) = find_symmetric_equilibrium(model, guess)?;
    Ok(PairState::new(x + DEFAULT_KICK, x - DEFAULT_KICK, y, y))
}

/// Integrate the truncated reduced system in `(u, w, z)`.
pub fn integrate_reduced(
    rc: &ReducedCoefficients,
    eps: f64,
    s0: [f64; 3],
    t_span: (f64, f64),
    opts: &IntegratorOptions,
) -> Result<Trajectory<3>> {
    let field = |_t: f64, s: &[f64; 3]| reduced_field(rc, s[0], s[1], s[2], eps);
    match dopri5(field, |_| true, t_span.0, t_span.1, s0, opts) {
        Ok(mut tr) => {
            tr.meta.model = "reduced".into();
            tr.meta.epsilon = eps;
            Ok(tr)
        }
        Err((_, t, reason)) => Err(Error::Integration {
            t,
            reason: format!("{reason:?}"),
            partial: None,
        }),
    }
}
