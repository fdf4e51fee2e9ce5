//! Symmetric two-cell slow-fast models and their derivative jets.
//!
//! A model supplies a fast law `f(x_i, x_j, y_i)` and a slow law `g(x_i, y_i)`;
//! the full system is
//!
//! ```text
//! x1' = f(x1, x2, y1)      y1' = eps * g(x1, y1)
//! x2' = f(x2, x1, y2)      y2' = eps * g(x2, y2)
//! ```
//!
//! Both laws are written once against [`Real`] so the same code evaluates on
//! `f64` and on nested dual numbers.

use serde::{Deserialize, Serialize};

use crate::dual::{Real, D1, D2, D3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl PairState {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        PairState { x1, x2, y1, y2 }
    }

    /// The point `(x, x, y, y)` on the symmetric subspace.
    pub fn symmetric(x: f64, y: f64) -> Self {
        PairState::new(x, x, y, y)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.y1, self.y2]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        PairState::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Swap the two cells: `(x1, x2, y1, y2) -> (x2, x1, y2, y1)`.
pub fn exchange(s: PairState) -> PairState {
    PairState::new(s.x2, s.x1, s.y2, s.y1)
}

/// A real interval with either closed or open ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            open: false,
        }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, open: true }
    }

    pub fn unbounded() -> Self {
        Interval::open(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        if self.open {
            v > self.lo && v < self.hi
        } else {
            v >= self.lo && v <= self.hi
        }
    }

    pub fn negate(&self) -> Self {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
            open: self.open,
        }
    }
}

/// Per-cell box on which the model laws are smooth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateBox {
    pub x: Interval,
    pub y: Interval,
}

impl StateBox {
    pub fn check(&self, x: f64, y: f64) -> Result<()> {
        if !self.x.contains(x) {
            return Err(Error::Domain {
                what: "x",
                value: x,
            });
        }
        if !self.y.contains(y) {
            return Err(Error::Domain {
                what: "y",
                value: y,
            });
        }
        Ok(())
    }

    pub fn check_state(&self, s: &PairState) -> Result<()> {
        self.check(s.x1, s.y1)?;
        self.check(s.x2, s.y2)
    }
}

/// Partial derivatives of `f(x_i, x_j, y_i)`: `1 = d/dx_i`, `2 = d/dx_j`, `y = d/dy_i`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FJet3 {
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub fy: f64,
    pub f11: f64,
    pub f12: f64,
    pub f22: f64,
    pub f1y: f64,
    pub f2y: f64,
    pub f111: f64,
    pub f112: f64,
    pub f122: f64,
    pub f222: f64,
}

impl FJet3 {
    /// `(name, derivative order, value)` for every entry.
    pub fn entries(&self) -> [(&'static str, usize, f64); 13] {
        [
            ("f", 0, self.f),
            ("f1", 1, self.f1),
            ("f2", 1, self.f2),
            ("fy", 1, self.fy),
            ("f11", 2, self.f11),
            ("f12", 2, self.f12),
            ("f22", 2, self.f22),
            ("f1y", 2, self.f1y),
            ("f2y", 2, self.f2y),
            ("f111", 3, self.f111),
            ("f112", 3, self.f112),
            ("f122", 3, self.f122),
            ("f222", 3, self.f222),
        ]
    }

    /// Largest scaled discrepancy against a reference jet, see [`scaled_discrepancy`].
    pub fn discrepancy(&self, reference: &FJet3) -> (&'static str, f64, f64, f64) {
        scaled_discrepancy(&self.entries(), &reference.entries())
    }
}

/// Partial derivatives of `g(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GJet2 {
    pub g: f64,
    pub gx: f64,
    pub gy: f64,
    pub gxx: f64,
    pub gxy: f64,
    pub gyy: f64,
}

impl GJet2 {
    pub fn entries(&self) -> [(&'static str, usize, f64); 6] {
        [
            ("g", 0, self.g),
            ("gx", 1, self.gx),
            ("gy", 1, self.gy),
            ("gxx", 2, self.gxx),
            ("gxy", 2, self.gxy),
            ("gyy", 2, self.gyy),
        ]
    }

    pub fn discrepancy(&self, reference: &GJet2) -> (&'static str, f64, f64, f64) {
        scaled_discrepancy(&self.entries(), &reference.entries())
    }
}

/// Relative difference `|a - b| / max(|a|, |b|, m)` where `m` is the largest
/// reference magnitude among entries of the same order. Entries that vanish
/// identically are thereby compared on the scale of their siblings. Values
/// (order 0) also use the first-order scale, since they vanish on the
/// critical manifold. Each order's scale is floored at 1e-3 of the order
/// below, so entries that vanish identically are not compared on the scale
/// of finite-difference noise.
///
/// Returns `(field, a, b, discrepancy)` for the worst entry.
pub fn scaled_discrepancy(
    a: &[(&'static str, usize, f64)],
    b: &[(&'static str, usize, f64)],
) -> (&'static str, f64, f64, f64) {
    let mut order_max = [0.0f64; 4];
    for &(_, k, v) in b {
        order_max[k] = order_max[k].max(v.abs());
    }
    order_max[0] = order_max[0].max(order_max[1]);
    for k in 1..4 {
        order_max[k] = order_max[k].max(1e-3 * order_max[k - 1]);
    }
    let mut worst = ("", 0.0, 0.0, 0.0);
    for (&(name, k, x), &(_, _, y)) in a.iter().zip(b) {
        let scale = x.abs().max(y.abs()).max(order_max[k]);
        let d = if scale == 0.0 {
            0.0
        } else {
            (x - y).abs() / scale
        };
        if !(d <= worst.3) {
            worst = (name, x, y, d);
        }
    }
    worst
}

/// A symmetric two-cell slow-fast model.
pub trait SlowFastModel: Send + Sync {
    fn name(&self) -> &str;

    /// Time-scale ratio multiplying the slow law.
    fn epsilon(&self) -> f64;

    /// Fast law `f(x_i, x_j, y_i)`.
    fn fast<T: Real>(&self, xi: T, xj: T, yi: T) -> T;

    /// Slow law `g(x_i, y_i)` (without the factor `epsilon`).
    fn slow<T: Real>(&self, x: T, y: T) -> T;

    fn domain(&self) -> StateBox;

    /// Named parameters, including `epsilon`.
    fn params(&self) -> Vec<(&'static str, f64)>;

    /// Copy of the model with one parameter replaced.
    fn with_param(&self, name: &str, value: f64) -> Result<Self>
    where
        Self: Sized;

    /// Starting guess for the slow variable on the critical manifold.
    fn y_hint(&self, xi: f64, xj: f64) -> f64;

    /// Characteristic lengths of `(x, y)` used for finite-difference steps.
    fn fd_scale(&self) -> (f64, f64);

    /// Default search interval for symmetric folds.
    fn default_fold_bracket(&self) -> (f64, f64);

    /// Channel names for CSV aliases.
    fn channel_names(&self) -> [&'static str; 4] {
        ["x1", "x2", "y1", "y2"]
    }

    /// Hand-derived fast jet, used as an oracle for the dual-number engine.
    fn analytic_f_jet(&self, _xi: f64, _xj: f64, _y: f64) -> Option<FJet3> {
        None
    }

    /// Hand-derived slow jet.
    fn analytic_g_jet(&self, _x: f64, _y: f64) -> Option<GJet2> {
        None
    }
}

/// Full vector field `(f(x1,x2,y1), f(x2,x1,y2), eps g(x1,y1), eps g(x2,y2))`.
pub fn eval_field<M: SlowFastModel>(model: &M, s: &PairState) -> Result<[f64; 4]> {
    if !s.is_finite() {
        return Err(Error::NonFinite("state"));
    }
    model.domain().check_state(s)?;
    let out = raw_field(model, s);
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::NonFinite("vector field"))
    }
}

/// Vector field without domain or finiteness checks.
#[inline]
pub fn raw_field<M: SlowFastModel>(model: &M, s: &PairState) -> [f64; 4] {
    let eps = model.epsilon();
    [
        model.fast(s.x1, s.x2, s.y1),
        model.fast(s.x2, s.x1, s.y2),
        eps * model.slow(s.x1, s.y1),
        eps * model.slow(s.x2, s.y2),
    ]
}

/// `(f1, f2, fy)` from three first-order dual evaluations.
pub fn first_partials<M: SlowFastModel>(model: &M, xi: f64, xj: f64, y: f64) -> (f64, f64, f64) {
    let d = |a: f64, b: f64, c: f64| model.fast(D1::var(xi, a), D1::var(xj, b), D1::var(y, c)).du;
    (d(1.0, 0.0, 0.0), d(0.0, 1.0, 0.0), d(0.0, 0.0, 1.0))
}

// Axis indices for seeding.
const XI: usize = 0;
const XJ: usize = 1;
const Y: usize = 2;

fn seeded_eval<M: SlowFastModel>(model: &M, p: [f64; 3], dirs: [usize; 3]) -> D3 {
    let s = |axis: usize, k: usize| if dirs[k] == axis { 1.0 } else { 0.0 };
    let var = |axis: usize| D3::var(p[axis], s(axis, 0), s(axis, 1), s(axis, 2));
    model.fast(var(XI), var(XJ), var(Y))
}

/// Fast jet from nested forward-mode duals, without domain or oracle checks.
pub fn dual_f_jet<M: SlowFastModel>(model: &M, xi: f64, xj: f64, y: f64) -> FJet3 {
    let p = [xi, xj, y];
    let a = seeded_eval(model, p, [XI, XI, XI]);
    let b = seeded_eval(model, p, [XI, XI, XJ]);
    let c = seeded_eval(model, p, [XI, XJ, XJ]);
    let d = seeded_eval(model, p, [XJ, XJ, XJ]);
    let e = seeded_eval(model, p, [XI, XJ, Y]);
    FJet3 {
        f: a.d0(),
        f1: a.d1(),
        f2: d.d1(),
        fy: e.d3(),
        f11: a.d12(),
        f12: b.d13(),
        f22: d.d12(),
        f1y: e.d13(),
        f2y: e.d23(),
        f111: a.d123(),
        f112: b.d123(),
        f122: c.d123(),
        f222: d.d123(),
    }
}

/// Slow jet from second-order duals. Also returns `gxy` computed with the
/// opposite differentiation order.
pub fn dual_g_jet<M: SlowFastModel>(model: &M, x: f64, y: f64) -> (GJet2, f64) {
    let ev =
        |sx: [f64; 2], sy: [f64; 2]| model.slow(D2::var(x, sx[0], sx[1]), D2::var(y, sy[0], sy[1]));
    let xx = ev([1.0, 1.0], [0.0, 0.0]);
    let xy = ev([1.0, 0.0], [0.0, 1.0]);
    let yx = ev([0.0, 1.0], [1.0, 0.0]);
    let yy = ev([0.0, 0.0], [1.0, 1.0]);
    let jet = GJet2 {
        g: xx.d0(),
        gx: xx.d1(),
        gy: yy.d1(),
        gxx: xx.d12(),
        gxy: xy.d12(),
        gyy: yy.d12(),
    };
    (jet, yx.d12())
}

/// Fast jet at a point inside the model domain.
///
/// When the model ships an analytic jet the two are compared and a
/// disagreement beyond `tol_rel` is reported as an error.
pub fn f_jet_with<M: SlowFastModel>(
    model: &M,
    xi: f64,
    xj: f64,
    y: f64,
    tol_rel: f64,
) -> Result<FJet3> {
    let dom = model.domain();
    dom.check(xi, y)?;
    if !dom.x.contains(xj) {
        return Err(Error::Domain {
            what: "x",
            value: xj,
        });
    }
    let jet = dual_f_jet(model, xi, xj, y);
    if jet.entries().iter().any(|e| !e.2.is_finite()) {
        return Err(Error::NonFinite("f jet"));
    }
    if let Some(oracle) = model.analytic_f_jet(xi, xj, y) {
        let (field, a, b, d) = jet.discrepancy(&oracle);
        if d > tol_rel {
            return Err(Error::DerivativeConsistency {
                field,
                primary: a,
                reference: b,
            });
        }
    }
    Ok(jet)
}

pub fn f_jet<M: SlowFastModel>(model: &M, xi: f64, xj: f64, y: f64) -> Result<FJet3> {
    f_jet_with(model, xi, xj, y, 1e-6)
}

pub fn g_jet_with<M: SlowFastModel>(model: &M, x: f64, y: f64, tol_rel: f64) -> Result<GJet2> {
    model.domain().check(x, y)?;
    let (jet, gyx) = dual_g_jet(model, x, y);
    if jet.entries().iter().any(|e| !e.2.is_finite()) {
        return Err(Error::NonFinite("g jet"));
    }
    let scale = jet.gxx.abs().max(jet.gyy.abs()).max(jet.gxy.abs());
    if scale > 0.0 && (jet.gxy - gyx).abs() > tol_rel * scale {
        return Err(Error::DerivativeConsistency {
            field: "gxy",
            primary: jet.gxy,
            reference: gyx,
        });
    }
    if let Some(oracle) = model.analytic_g_jet(x, y) {
        let (field, a, b, d) = jet.discrepancy(&oracle);
        if d > tol_rel {
            return Err(Error::DerivativeConsistency {
                field,
                primary: a,
                reference: b,
            });
        }
    }
    Ok(jet)
}

pub fn g_jet<M: SlowFastModel>(model: &M, x: f64, y: f64) -> Result<GJet2> {
    g_jet_with(model, x, y, 1e-6)
}

/// Central finite differences composed along `dirs`, one step per axis.
fn nested_central<F: Fn([f64; 3]) -> f64>(f: &F, p: [f64; 3], dirs: &[usize], h: &[f64; 3]) -> f64 {
    match dirs.split_first() {
        None => f(p),
        Some((&d, rest)) => {
            let mut plus = p;
            let mut minus = p;
            plus[d] += h[d];
            minus[d] -= h[d];
            (nested_central(f, plus, rest, h) - nested_central(f, minus, rest, h)) / (2.0 * h[d])
        }
    }
}

/// Mixed partial along `dirs` by central differences at steps `h` and `h/2`
/// combined with one Richardson extrapolation step.
///
/// The base step for a k-th order derivative is `eps^(1/(k+4))` times the axis
/// scale, which balances the O(h^4) extrapolated truncation error against
/// roundoff amplified by `h^-k`.
pub fn fd_partial<F: Fn([f64; 3]) -> f64>(
    f: &F,
    p: [f64; 3],
    dirs: &[usize],
    scale: [f64; 3],
) -> f64 {
    let k = dirs.len();
    if k == 0 {
        return f(p);
    }
    let base = f64::EPSILON.powf(1.0 / (k as f64 + 4.0));
    let h = [base * scale[0], base * scale[1], base * scale[2]];
    let h2 = [h[0] / 2.0, h[1] / 2.0, h[2] / 2.0];
    let coarse = nested_central(f, p, dirs, &h);
    let fine = nested_central(f, p, dirs, &h2);
    (4.0 * fine - coarse) / 3.0
}

/// Fast jet by finite differences; independent of the dual-number engine.
pub fn fd_f_jet<M: SlowFastModel>(model: &M, xi: f64, xj: f64, y: f64) -> FJet3 {
    let f = |q: [f64; 3]| model.fast(q[0], q[1], q[2]);
    let (sx, sy) = model.fd_scale();
    let sc = [sx, sx, sy];
    let p = [xi, xj, y];
    let d = |dirs: &[usize]| fd_partial(&f, p, dirs, sc);
    FJet3 {
        f: f(p),
        f1: d(&[XI]),
        f2: d(&[XJ]),
        fy: d(&[Y]),
        f11: d(&[XI, XI]),
        f12: d(&[XI, XJ]),
        f22: d(&[XJ, XJ]),
        f1y: d(&[XI, Y]),
        f2y: d(&[XJ, Y]),
        f111: d(&[XI, XI, XI]),
        f112: d(&[XI, XI, XJ]),
        f122: d(&[XI, XJ, XJ]),
        f222: d(&[XJ, XJ, XJ]),
    }
}

/// Slow jet by finite differences.
pub fn fd_g_jet<M: SlowFastModel>(model: &M, x: f64, y: f64) -> GJet2 {
    let g = |q: [f64; 3]| model.slow(q[0], q[2]);
    let (sx, sy) = model.fd_scale();
    let sc = [sx, sx, sy];
    let p = [x, x, y];
    let d = |dirs: &[usize]| fd_partial(&g, p, dirs, sc);
    GJet2 {
        g: g(p),
        gx: d(&[XI]),
        gy: d(&[Y]),
        gxx: d(&[XI, XI]),
        gxy: d(&[XI, Y]),
        gyy: d(&[Y, Y]),
    }
}

/// The model under the reflection `y -> -y` of both slow variables.
///
/// In the new coordinates the fast law reads `f(x_i, x_j, -y)` and the slow law
/// `-g(x, -y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct YFlip<M> {
    pub inner: M,
    name: String,
}

/// Reflect the slow variables of a model.
pub fn y_flip<M: SlowFastModel>(model: M) -> YFlip<M> {
    let name = format!("{}_yflip", model.name());
    YFlip { inner: model, name }
}

impl<M: SlowFastModel> YFlip<M> {
    pub fn map_state(s: &PairState) -> PairState {
        PairState::new(s.x1, s.x2, -s.y1, -s.y2)
    }
}

impl<M: SlowFastModel> SlowFastModel for YFlip<M> {
    fn name(&self) -> &str {
        &self.name
    }

    fn epsilon(&self) -> f64 {
        self.inner.epsilon()
    }

    fn fast<T: Real>(&self, xi: T, xj: T, yi: T) -> T {
        self.inner.fast(xi, xj, -yi)
    }

    fn slow<T: Real>(&self, x: T, y: T) -> T {
        -self.inner.slow(x, -y)
    }

    fn domain(&self) -> StateBox {
        let d = self.inner.domain();
        StateBox {
            x: d.x,
            y: d.y.negate(),
        }
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        self.inner.params()
    }

    fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        Ok(y_flip(self.inner.with_param(name, value)?))
    }

    fn y_hint(&self, xi: f64, xj: f64) -> f64 {
        -self.inner.y_hint(xi, xj)
    }

    fn fd_scale(&self) -> (f64, f64) {
        self.inner.fd_scale()
    }

    fn default_fold_bracket(&self) -> (f64, f64) {
        self.inner.default_fold_bracket()
    }

    fn channel_names(&self) -> [&'static str; 4] {
        self.inner.channel_names()
    }

    fn analytic_f_jet(&self, xi: f64, xj: f64, y: f64) -> Option<FJet3> {
        self.inner.analytic_f_jet(xi, xj, -y).map(|j| FJet3 {
            fy: -j.fy,
            f1y: -j.f1y,
            f2y: -j.f2y,
            ..j
        })
    }

    fn analytic_g_jet(&self, x: f64, y: f64) -> Option<GJet2> {
        self.inner.analytic_g_jet(x, -y).map(|j| GJet2 {
            g: -j.g,
            gx: -j.gx,
            gy: j.gy,
            gxx: -j.gxx,
            gxy: j.gxy,
            gyy: -j.gyy,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// f = -x_i + tanh(2 x_i - x_j^2 y) ; g = x - y^3 / 3
    #[derive(Clone)]
    struct Toy;

    impl SlowFastModel for Toy {
        fn name(&self) -> &str {
            "toy"
        }
        fn epsilon(&self) -> f64 {
            0.1
        }
        fn fast<T: Real>(&self, xi: T, xj: T, yi: T) -> T {
            -xi + (xi * 2.0 - xj * xj * yi).tanh()
        }
        fn slow<T: Real>(&self, x: T, y: T) -> T {
            x - y * y * y / 3.0
        }
        fn domain(&self) -> StateBox {
            StateBox {
                x: Interval::unbounded(),
                y: Interval::closed(-5.0, 5.0),
            }
        }
        fn params(&self) -> Vec<(&'static str, f64)> {
            vec![("epsilon", 0.1)]
        }
        fn with_param(&self, _: &str, _: f64) -> Result<Self> {
            Ok(Toy)
        }
        fn y_hint(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn fd_scale(&self) -> (f64, f64) {
            (1.0, 1.0)
        }
        fn default_fold_bracket(&self) -> (f64, f64) {
            (-1.0, 1.0)
        }
    }

    #[test]
    fn exchange_swaps_cells() {
        let s = exchange(PairState::new(1.0, 2.0, 3.0, 4.0));
        assert_eq!(s, PairState::new(2.0, 1.0, 4.0, 3.0));
        let sym = PairState::symmetric(0.3, -0.2);
        assert_eq!(exchange(sym), sym);
    }

    #[test]
    fn dual_jet_matches_hand_derivatives_of_toy() {
        let (xi, xj, y) = (0.3, -0.7, 0.4);
        let j = dual_f_jet(&Toy, xi, xj, y);
        let a = 2.0 * xi - xj * xj * y;
        let t = a.tanh();
        let s1 = 1.0 - t * t; // tanh'
        let s2 = -2.0 * t * s1; // tanh''
        assert!((j.f1 - (-1.0 + 2.0 * s1)).abs() < 1e-14);
        assert!((j.fy - (-xj * xj * s1)).abs() < 1e-14);
        assert!((j.f11 - 4.0 * s2).abs() < 1e-13);
        assert!((j.f1y - 2.0 * s2 * (-xj * xj)).abs() < 1e-13);
        // f2 = -2 xj y tanh'(a)
        assert!((j.f2 - (-2.0 * xj * y * s1)).abs() < 1e-14);
    }

    #[test]
    fn finite_differences_agree_with_duals() {
        let j = dual_f_jet(&Toy, 0.2, 0.5, -0.3);
        let fd = fd_f_jet(&Toy, 0.2, 0.5, -0.3);
        let (field, _, _, d) = j.discrepancy(&fd);
        assert!(d < 1e-6, "{field}: {d}");
        let (g, gyx) = dual_g_jet(&Toy, 0.4, 1.2);
        assert_eq!(g.gxy, gyx);
        assert!((g.gyy + 2.4).abs() < 1e-14);
        let gfd = fd_g_jet(&Toy, 0.4, 1.2);
        assert!(g.discrepancy(&gfd).3 < 1e-7);
    }

    #[test]
    fn field_is_exchange_equivariant() {
        let s = PairState::new(0.1, -0.4, 0.7, 1.3);
        let a = eval_field(&Toy, &exchange(s)).unwrap();
        let b = eval_field(&Toy, &s).unwrap();
        assert_eq!(a, [b[1], b[0], b[3], b[2]]);
    }

    #[test]
    fn domain_violation_is_an_error() {
        let s = PairState::new(0.0, 0.0, 6.0, 0.0);
        assert!(matches!(
            eval_field(&Toy, &s),
            Err(Error::Domain { what: "y", .. })
        ));
        assert!(matches!(
            eval_field(&Toy, &PairState::new(f64::NAN, 0.0, 0.0, 0.0)),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn open_interval_excludes_ends() {
        let i = Interval::open(0.0, 1.0);
        assert!(!i.contains(0.0) && !i.contains(1.0) && i.contains(0.5));
        assert!(Interval::closed(0.0, 1.0).contains(1.0));
    }

    #[test]
    fn y_flip_negates_y_derivatives() {
        let m = y_flip(Toy);
        let a = dual_f_jet(&Toy, 0.2, 0.5, -0.3);
        let b = dual_f_jet(&m, 0.2, 0.5, 0.3);
        assert_eq!(a.f, b.f);
        assert_eq!(a.f11, b.f11);
        assert!((a.fy + b.fy).abs() < 1e-15);
        let (ga, _) = dual_g_jet(&Toy, 0.4, 1.2);
        let (gb, _) = dual_g_jet(&m, 0.4, -1.2);
        assert_eq!(gb.g, -ga.g);
        assert_eq!(gb.gx, -ga.gx);
        assert!((gb.gy - ga.gy).abs() < 1e-15);
    }

    #[test]
    fn scaled_discrepancy_uses_sibling_scale() {
        let a = [("p", 1, 1.0), ("q", 1, 1e-12)];
        let b = [("p", 1, 1.0), ("q", 1, 0.0)];
        assert!(scaled_discrepancy(&a, &b).3 < 1e-11);
    }
}
