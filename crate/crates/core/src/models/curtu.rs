//! Two mutually inhibiting neural populations with slow adaptation.
//!
//! ```text
//! u_i' = -u_i + S(I - b u_j - a_i + u_i)
//! a_i' = eps (-a_i + c u_i)
//! S(x) = 1 / (1 + exp(-r (x - theta)))
//! ```

use serde::{Deserialize, Serialize};

use crate::dual::Real;
use crate::error::{Error, Result};
use crate::model::{FJet3, GJet2, Interval, SlowFastModel, StateBox};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurtuParams {
    #[serde(rename = "I")]
    pub i: f64,
    pub b: f64,
    pub c: f64,
    pub r: f64,
    pub theta: f64,
    pub epsilon: f64,
}

impl Default for CurtuParams {
    fn default() -> Self {
        CurtuParams {
            i: 0.68,
            b: 0.6055,
            c: 0.63,
            r: 10.0,
            theta: 0.2,
            epsilon: 0.01,
        }
    }
}

impl CurtuParams {
    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "I" => &mut self.i,
            "b" => &mut self.b,
            "c" => &mut self.c,
            "r" => &mut self.r,
            "theta" => &mut self.theta,
            "epsilon" => &mut self.epsilon,
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.i, self.b, self.c, self.r, self.theta, self.epsilon];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if self.r <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "r must be positive, got {}",
                self.r
            )));
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
pub struct Curtu {
    pub p: CurtuParams,
}

pub fn build_curtu(p: CurtuParams) -> Result<Curtu> {
    p.validate()?;
    Ok(Curtu { p })
}

impl Curtu {
    pub fn sigmoid(&self, x: f64) -> f64 {
        1.0 / (1.0 + (-self.p.r * (x - self.p.theta)).exp())
    }

    /// `(S, S', S'', S''')` at `x`.
    pub fn sigmoid_derivs(&self, x: f64) -> [f64; 4] {
        let r = self.p.r;
        let s = self.sigmoid(x);
        let s1 = r * s * (1.0 - s);
        let s2 = r * s1 * (1.0 - 2.0 * s);
        let s3 = r * (s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1);
        [s, s1, s2, s3]
    }

    pub fn sigmoid_inverse(&self, u: f64) -> f64 {
        self.p.theta + (u / (1.0 - u)).ln() / self.p.r
    }

    /// `phi(u) = u - S^{-1}(u)`.
    pub fn phi(&self, u: f64) -> f64 {
        u - self.sigmoid_inverse(u)
    }

    pub fn phi_d1(&self, u: f64) -> f64 {
        1.0 - 1.0 / (self.p.r * u * (1.0 - u))
    }

    pub fn phi_d2(&self, u: f64) -> f64 {
        let q = u * (1.0 - u);
        (1.0 - 2.0 * u) / (self.p.r * q * q)
    }

    pub fn phi_d3(&self, u: f64) -> f64 {
        let q = u * (1.0 - u);
        let dq = 1.0 - 2.0 * u;
        -2.0 * (q + dq * dq) / (self.p.r * q * q * q)
    }

    /// Closed-form critical manifold `a = I - b u_j + phi(u_i)`.
    pub fn critical_a(&self, ui: f64, uj: f64) -> f64 {
        self.p.i - self.p.b * uj + self.phi(ui)
    }

    /// Upper root of `phi'(u) = -b`, i.e. `u (1 - u) = 1 / (r (1 + b))`.
    pub fn fold_closed_form(&self) -> Option<f64> {
        let disc = 1.0 - 4.0 / (self.p.r * (1.0 + self.p.b));
        (disc >= 0.0).then(|| 0.5 * (1.0 + disc.sqrt()))
    }

    fn arg(&self, ui: f64, uj: f64, a: f64) -> f64 {
        self.p.i - self.p.b * uj - a + ui
    }
}

impl SlowFastModel for Curtu {
    fn name(&self) -> &str {
        "curtu"
    }

    fn epsilon(&self) -> f64 {
        self.p.epsilon
    }

    fn fast<T: Real>(&self, ui: T, uj: T, a: T) -> T {
        let x = ui - uj * self.p.b - a + self.p.i;
        let s = ((x - self.p.theta) * (-self.p.r)).exp() + 1.0;
        s.recip() - ui
    }

    fn slow<T: Real>(&self, u: T, a: T) -> T {
        u * self.p.c - a
    }

    fn domain(&self) -> StateBox {
        StateBox {
            x: Interval::open(0.0, 1.0),
            y: Interval::unbounded(),
        }
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        let p = &self.p;
        vec![
            ("I", p.i),
            ("b", p.b),
            ("c", p.c),
            ("r", p.r),
            ("theta", p.theta),
            ("epsilon", p.epsilon),
        ]
    }

    fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut p = self.p;
        *p.slot(name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))? = value;
        build_curtu(p)
    }

    fn y_hint(&self, ui: f64, uj: f64) -> f64 {
        self.p.i - self.p.b * uj + ui - self.p.theta
    }

    fn fd_scale(&self) -> (f64, f64) {
        (0.1, 0.1)
    }

    fn default_fold_bracket(&self) -> (f64, f64) {
        (0.5, 0.99)
    }

    fn channel_names(&self) -> [&'static str; 4] {
        ["u1", "u2", "a1", "a2"]
    }

    fn analytic_f_jet(&self, ui: f64, uj: f64, a: f64) -> Option<FJet3> {
        let [s, s1, s2, s3] = self.sigmoid_derivs(self.arg(ui, uj, a));
        let b = self.p.b;
        Some(FJet3 {
            f: s - ui,
            f1: s1 - 1.0,
            f2: -b * s1,
            fy: -s1,
            f11: s2,
            f12: -b * s2,
            f22: b * b * s2,
            f1y: -s2,
            f2y: b * s2,
            f111: s3,
            f112: -b * s3,
            f122: b * b * s3,
            f222: -b * b * b * s3,
        })
    }

    fn analytic_g_jet(&self, u: f64, a: f64) -> Option<GJet2> {
        Some(GJet2 {
            g: self.p.c * u - a,
            gx: self.p.c,
            gy: -1.0,
            gxx: 0.0,
            gxy: 0.0,
            gyy: 0.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{dual_f_jet, g_jet};

    #[test]
    fn sigmoid_midpoint() {
        for r in [1.0, 10.0, 37.0] {
            let m = Curtu {
                p: CurtuParams {
                    r,
                    ..Default::default()
                },
            };
            assert_eq!(m.sigmoid(m.p.theta), 0.5);
        }
    }

    #[test]
    fn closed_form_manifold_zeroes_fast_law() {
        let m = Curtu::default();
        for i in 1..20 {
            for j in 1..20 {
                let (ui, uj) = (i as f64 / 20.0, j as f64 / 20.0);
                let a = m.critical_a(ui, uj);
                assert!(m.fast(ui, uj, a).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn fold_root_satisfies_phi_prime_equals_minus_b() {
        let m = Curtu::default();
        let u = m.fold_closed_form().unwrap();
        assert!((m.phi_d1(u) + m.p.b).abs() < 1e-12);
    }

    #[test]
    fn fast_y_derivative_has_no_b_factor() {
        let m = Curtu::default();
        let (ui, uj, a) = (0.93, 0.93, 0.58);
        let s1 = m.sigmoid_derivs(m.arg(ui, uj, a))[1];
        let j = dual_f_jet(&m, ui, uj, a);
        assert!((j.fy + s1).abs() < 1e-12);
        assert!((j.fy + m.p.b * s1).abs() > 0.1 * s1);
    }

    #[test]
    fn slow_jet_is_affine() {
        let m = Curtu::default();
        let g = g_jet(&m, 0.4, 0.1).unwrap();
        assert_eq!((g.gx, g.gy, g.gxx), (0.63, -1.0, 0.0));
    }

    #[test]
    fn phi_derivatives_match_differences() {
        let m = Curtu::default();
        let u = 0.8;
        let h = 1e-4;
        let d2 = (m.phi_d1(u + h) - m.phi_d1(u - h)) / (2.0 * h);
        let d3 = (m.phi_d2(u + h) - m.phi_d2(u - h)) / (2.0 * h);
        assert!((d2 - m.phi_d2(u)).abs() < 1e-6 * m.phi_d2(u).abs());
        assert!((d3 - m.phi_d3(u)).abs() < 1e-6 * m.phi_d3(u).abs());
    }

    #[test]
    fn parameter_override_and_validation() {
        let m = Curtu::default().with_param("b", 0.0).unwrap();
        assert_eq!(m.p.b, 0.0);
        assert!(matches!(
            Curtu::default().with_param("q", 1.0),
            Err(Error::UnknownParameter(_))
        ));
        assert!(Curtu::default().with_param("r", -1.0).is_err());
    }
}
