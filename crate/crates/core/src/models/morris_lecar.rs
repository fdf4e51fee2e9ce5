//! Two Morris–Lecar neurons coupled by fast synaptic inhibition.
//!
//! The fast law is `dV/dt` (the current balance divided by `C`); the slow law
//! is `phi_n (n_inf(V) - n) / tau(V)` with `tau(V) = 1 / cosh((V - v3) / (2 v4))`.

use serde::{Deserialize, Serialize};

use crate::dual::Real;
use crate::error::{Error, Result};
use crate::model::{FJet3, GJet2, Interval, SlowFastModel, StateBox};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MorrisLecarParams {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "V_K")]
    pub v_k: f64,
    #[serde(rename = "g_K")]
    pub g_k: f64,
    #[serde(rename = "V_Ca")]
    pub v_ca: f64,
    #[serde(rename = "g_Ca")]
    pub g_ca: f64,
    #[serde(rename = "V_L")]
    pub v_l: f64,
    #[serde(rename = "g_L")]
    pub g_l: f64,
    #[serde(rename = "I_app")]
    pub i_app: f64,
    #[serde(rename = "V_syn")]
    pub v_syn: f64,
    pub g_s: f64,
    pub phi_n: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub v4: f64,
    pub k_s: f64,
    pub theta_s: f64,
    pub epsilon: f64,
}

// Parameter names as used in configs, in field order.
mod names {
    pub const ALL: [&str; 18] = [
        "C", "V_K", "g_K", "V_Ca", "g_Ca", "V_L", "g_L", "I_app", "V_syn", "g_s", "phi_n", "v1",
        "v2", "v3", "v4", "k_s", "theta_s", "epsilon",
    ];
}

impl Default for MorrisLecarParams {
    fn default() -> Self {
        MorrisLecarParams {
            c: 20.0,
            v_k: -84.0,
            g_k: 8.0,
            v_ca: 120.0,
            g_ca: 4.4,
            v_l: -60.0,
            g_l: 2.0,
            i_app: 80.0,
            v_syn: -70.0,
            g_s: 0.3,
            phi_n: 0.01,
            v1: -1.2,
            v2: 18.0,
            v3: 2.0,
            v4: 30.0,
            k_s: 2.0,
            theta_s: -25.0,
            epsilon: 1.0,
        }
    }
}

impl MorrisLecarParams {
    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "C" => &mut self.c,
            "V_K" => &mut self.v_k,
            "g_K" => &mut self.g_k,
            "V_Ca" => &mut self.v_ca,
            "g_Ca" => &mut self.g_ca,
            "V_L" => &mut self.v_l,
            "g_L" => &mut self.g_l,
            "I_app" => &mut self.i_app,
            "V_syn" => &mut self.v_syn,
            "g_s" => &mut self.g_s,
            "phi_n" => &mut self.phi_n,
            "v1" => &mut self.v1,
            "v2" => &mut self.v2,
            "v3" => &mut self.v3,
            "v4" => &mut self.v4,
            "k_s" => &mut self.k_s,
            "theta_s" => &mut self.theta_s,
            "epsilon" => &mut self.epsilon,
            _ => return None,
        })
    }

    fn values(&self) -> [f64; 18] {
        [
            self.c,
            self.v_k,
            self.g_k,
            self.v_ca,
            self.g_ca,
            self.v_l,
            self.g_l,
            self.i_app,
            self.v_syn,
            self.g_s,
            self.phi_n,
            self.v1,
            self.v2,
            self.v3,
            self.v4,
            self.k_s,
            self.theta_s,
            self.epsilon,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if self.c <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        for (name, g) in [
            ("g_K", self.g_k),
            ("g_Ca", self.g_ca),
            ("g_L", self.g_l),
            ("g_s", self.g_s),
        ] {
            if g < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative, got {g}"
                )));
            }
        }
        for (name, s) in [("v2", self.v2), ("v4", self.v4), ("k_s", self.k_s)] {
            if s == 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be nonzero")));
            }
        }
        if self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MorrisLecar {
    pub p: MorrisLecarParams,
}

pub fn build_morris_lecar(p: MorrisLecarParams) -> Result<MorrisLecar> {
    p.validate()?;
    Ok(MorrisLecar { p })
}

/// `(h, h', h'', h''')` for `h(V) = (1 + tanh((V - mid) / width)) / 2`.
fn tanh_gate(v: f64, mid: f64, width: f64) -> [f64; 4] {
    let t = ((v - mid) / width).tanh();
    let sech2 = 1.0 - t * t;
    [
        0.5 * (1.0 + t),
        sech2 / (2.0 * width),
        -t * sech2 / (width * width),
        -(1.0 - 3.0 * t * t) * sech2 / (width * width * width),
    ]
}

/// `(s, s', s'', s''')` for the logistic `s(V) = 1 / (1 + exp(-(V - mid) / k))`.
fn logistic(v: f64, mid: f64, k: f64) -> [f64; 4] {
    let s = 1.0 / (1.0 + (-(v - mid) / k).exp());
    let s1 = s * (1.0 - s) / k;
    let s2 = s1 * (1.0 - 2.0 * s) / k;
    let s3 = (s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1) / k;
    [s, s1, s2, s3]
}

impl MorrisLecar {
    pub fn m_inf(&self, v: f64) -> f64 {
        tanh_gate(v, self.p.v1, self.p.v2)[0]
    }

    pub fn n_inf(&self, v: f64) -> f64 {
        tanh_gate(v, self.p.v3, self.p.v4)[0]
    }

    pub fn tau(&self, v: f64) -> f64 {
        1.0 / ((v - self.p.v3) / (2.0 * self.p.v4)).cosh()
    }

    pub fn s_inf(&self, v: f64) -> f64 {
        logistic(v, self.p.theta_s, self.p.k_s)[0]
    }

    /// Intrinsic current `I_app - g_Ca m_inf (V - V_Ca) - g_L (V - V_L)` and its
    /// first three derivatives.
    pub fn intrinsic_current(&self, v: f64) -> [f64; 4] {
        let p = &self.p;
        let [m, m1, m2, m3] = tanh_gate(v, p.v1, p.v2);
        let dv = v - p.v_ca;
        [
            p.i_app - p.g_ca * m * dv - p.g_l * (v - p.v_l),
            -p.g_ca * (m1 * dv + m) - p.g_l,
            -p.g_ca * (m2 * dv + 2.0 * m1),
            -p.g_ca * (m3 * dv + 3.0 * m2),
        ]
    }

    /// Closed-form critical manifold `n = (f0(V_i) - g_s s_inf(V_j)(V_i - V_syn)) / (g_K (V_i - V_K))`.
    pub fn critical_n(&self, vi: f64, vj: f64) -> f64 {
        let p = &self.p;
        (self.intrinsic_current(vi)[0] - p.g_s * self.s_inf(vj) * (vi - p.v_syn))
            / (p.g_k * (vi - p.v_k))
    }
}

/// Closed-form fast jet at `(V_i, V_j, n)`; valid at arbitrary points.
pub fn ml_analytic_jet(p: &MorrisLecarParams, vi: f64, vj: f64, n: f64) -> FJet3 {
    let m = MorrisLecar { p: *p };
    let [f0, f0_1, f0_2, f0_3] = m.intrinsic_current(vi);
    let [s, s1, s2, s3] = logistic(vj, p.theta_s, p.k_s);
    let c = p.c;
    let dsyn = vi - p.v_syn;
    FJet3 {
        f: (f0 - p.g_k * n * (vi - p.v_k) - p.g_s * s * dsyn) / c,
        f1: (f0_1 - p.g_k * n - p.g_s * s) / c,
        f2: -p.g_s * s1 * dsyn / c,
        fy: -p.g_k * (vi - p.v_k) / c,
        f11: f0_2 / c,
        f12: -p.g_s * s1 / c,
        f22: -p.g_s * s2 * dsyn / c,
        f1y: -p.g_k / c,
        f2y: 0.0,
        f111: f0_3 / c,
        f112: 0.0,
        f122: -p.g_s * s2 / c,
        f222: -p.g_s * s3 * dsyn / c,
    }
}

impl SlowFastModel for MorrisLecar {
    fn name(&self) -> &str {
        "morris_lecar"
    }

    fn epsilon(&self) -> f64 {
        self.p.epsilon
    }

    fn fast<T: Real>(&self, vi: T, vj: T, n: T) -> T {
        let p = &self.p;
        let m = (((vi - p.v1) / p.v2).tanh() + 1.0) * 0.5;
        let s = ((vj - p.theta_s) / (-p.k_s)).exp() + 1.0;
        let s = s.recip();
        let i_ca = m * (vi - p.v_ca) * p.g_ca;
        let i_l = (vi - p.v_l) * p.g_l;
        let i_k = n * (vi - p.v_k) * p.g_k;
        let i_syn = s * (vi - p.v_syn) * p.g_s;
        (-(i_ca + i_l + i_k + i_syn) + p.i_app) / p.c
    }

    fn slow<T: Real>(&self, v: T, n: T) -> T {
        let p = &self.p;
        let n_inf = (((v - p.v3) / p.v4).tanh() + 1.0) * 0.5;
        let inv_tau = ((v - p.v3) / (2.0 * p.v4)).cosh();
        (n_inf - n) * inv_tau * p.phi_n
    }

    fn domain(&self) -> StateBox {
        StateBox {
            x: Interval::closed(self.p.v_k, self.p.v_ca),
            y: Interval::closed(0.0, 1.0),
        }
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        names::ALL.iter().copied().zip(self.p.values()).collect()
    }

    fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut p = self.p;
        *p.slot(name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))? = value;
        build_morris_lecar(p)
    }

    fn y_hint(&self, _vi: f64, _vj: f64) -> f64 {
        0.1
    }

    fn fd_scale(&self) -> (f64, f64) {
        (10.0, 0.1)
    }

    fn default_fold_bracket(&self) -> (f64, f64) {
        (-50.0, -10.0)
    }

    fn channel_names(&self) -> [&'static str; 4] {
        ["V1", "V2", "n1", "n2"]
    }

    fn analytic_f_jet(&self, vi: f64, vj: f64, n: f64) -> Option<FJet3> {
        Some(ml_analytic_jet(&self.p, vi, vj, n))
    }

    fn analytic_g_jet(&self, v: f64, n: f64) -> Option<GJet2> {
        let p = &self.p;
        let [ni, ni1, ni2, _] = tanh_gate(v, p.v3, p.v4);
        let eta = (v - p.v3) / (2.0 * p.v4);
        let c = eta.cosh();
        let c1 = eta.sinh() / (2.0 * p.v4);
        let c2 = c / (4.0 * p.v4 * p.v4);
        let phi = p.phi_n;
        let d = ni - n;
        Some(GJet2 {
            g: phi * d * c,
            gx: phi * (ni1 * c + d * c1),
            gy: -phi * c,
            gxx: phi * (ni2 * c + 2.0 * ni1 * c1 + d * c2),
            gxy: -phi * c1,
            gyy: 0.0,
        })
    }
}
