//! Forward-mode automatic differentiation with nestable dual numbers.
//!
//! A [`Dual<T>`] carries a value and one directional derivative. Because
//! `Dual<T>` is itself a [`Real`] whenever `T` is, nesting three levels deep
//! (`Dual<Dual<Dual<f64>>>`) yields every mixed partial up to third order from a
//! single evaluation, exact up to rounding.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic needed by model right-hand sides.
///
/// Model code is written once against this trait and evaluated either on plain
/// `f64` or on nested duals.
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    /// The primal value, stripped of all derivative parts.
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn tanh(self) -> Self;
    fn cosh(self) -> Self;
    fn sinh(self) -> Self;

    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    #[inline]
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
}

/// `re + du·ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub du: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, du: T) -> Self {
        Dual { re, du }
    }

    pub fn constant(re: T) -> Self {
        Dual {
            re,
            du: T::cst(0.0),
        }
    }
}

/// First-order dual.
pub type D1 = Dual<f64>;
/// Second-order (two nested infinitesimals).
pub type D2 = Dual<D1>;
/// Third-order (three nested infinitesimals).
pub type D3 = Dual<D2>;

impl D1 {
    /// Variable seeded with direction `s`.
    pub fn var(x: f64, s: f64) -> Self {
        Dual { re: x, du: s }
    }
}

impl D2 {
    /// Variable with seed `s1` on the inner infinitesimal and `s2` on the outer one.
    pub fn var(x: f64, s1: f64, s2: f64) -> Self {
        Dual {
            re: D1::var(x, s1),
            du: D1::var(s2, 0.0),
        }
    }

    pub fn d0(&self) -> f64 {
        self.re.re
    }
    pub fn d1(&self) -> f64 {
        self.re.du
    }
    pub fn d2(&self) -> f64 {
        self.du.re
    }
    pub fn d12(&self) -> f64 {
        self.du.du
    }
}

impl D3 {
    /// Variable seeded with `s1`, `s2`, `s3` on the three infinitesimals
    /// (innermost first).
    pub fn var(x: f64, s1: f64, s2: f64, s3: f64) -> Self {
        Dual {
            re: D2::var(x, s1, s2),
            du: Dual {
                re: D1::var(s3, 0.0),
                du: D1::var(0.0, 0.0),
            },
        }
    }

    pub fn d0(&self) -> f64 {
        self.re.re.re
    }
    pub fn d1(&self) -> f64 {
        self.re.re.du
    }
    pub fn d2(&self) -> f64 {
        self.re.du.re
    }
    pub fn d3(&self) -> f64 {
        self.du.re.re
    }
    pub fn d12(&self) -> f64 {
        self.re.du.du
    }
    pub fn d13(&self) -> f64 {
        self.du.re.du
    }
    pub fn d23(&self) -> f64 {
        self.du.du.re
    }
    pub fn d123(&self) -> f64 {
        self.du.du.du
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.du + o.du)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.du - o.du)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.du * o.re + self.re * o.du)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        let q = self.re * inv;
        Dual::new(q, (self.du - q * o.du) * inv)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.du)
    }
}

impl<T: Real> Add<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, c: f64) -> Self {
        Dual::new(self.re + c, self.du)
    }
}

impl<T: Real> Sub<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, c: f64) -> Self {
        Dual::new(self.re - c, self.du)
    }
}

impl<T: Real> Mul<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, c: f64) -> Self {
        Dual::new(self.re * c, self.du * c)
    }
}

impl<T: Real> Div<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, c: f64) -> Self {
        Dual::new(self.re / c, self.du / c)
    }
}

impl<T: Real> Real for Dual<T> {
    fn cst(v: f64) -> Self {
        Dual::constant(T::cst(v))
    }

    fn value(&self) -> f64 {
        self.re.value()
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.du * e)
    }

    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.du / self.re)
    }

    fn tanh(self) -> Self {
        let t = self.re.tanh();
        Dual::new(t, self.du * (-(t * t) + 1.0))
    }

    fn cosh(self) -> Self {
        Dual::new(self.re.cosh(), self.du * self.re.sinh())
    }

    fn sinh(self) -> Self {
        Dual::new(self.re.sinh(), self.du * self.re.cosh())
    }

    fn recip(self) -> Self {
        let inv = self.re.recip();
        Dual::new(inv, -(self.du * inv * inv))
    }
}
