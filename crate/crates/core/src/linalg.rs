//! Small dense eigenvalue routines.
//!
//! Production code only needs closed-form 2×2 eigenvalues. The general path
//! (Hessenberg reduction, characteristic polynomial, simultaneous root
//! iteration) exists to validate the block decomposition of the 4×4 Jacobian.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub fn real(re: f64) -> Self {
        Complex { re, im: 0.0 }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn conj(self) -> Self {
        Complex::new(self.re, -self.im)
    }

    pub fn pair(self) -> (f64, f64) {
        (self.re, self.im)
    }
}

impl Add for Complex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Div for Complex {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let d = o.re * o.re + o.im * o.im;
        Complex::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }
}

impl Neg for Complex {
    type Output = Self;
    fn neg(self) -> Self {
        Complex::new(-self.re, -self.im)
    }
}

/// Eigenvalues of a real 2×2 matrix, ordered by real part then imaginary part.
pub fn eig2(m: &[[f64; 2]; 2]) -> [Complex; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = 0.5 * tr;
    let disc = half * half - det;
    if disc >= 0.0 {
        // Avoid cancellation in the smaller root.
        let r = disc.sqrt();
        let big = if half >= 0.0 { half + r } else { half - r };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (a, b) = if big <= small {
            (big, small)
        } else {
            (small, big)
        };
        [Complex::real(a), Complex::real(b)]
    } else {
        let w = (-disc).sqrt();
        [Complex::new(half, -w), Complex::new(half, w)]
    }
}

/// Reduce to upper Hessenberg form by Householder reflections.
pub fn hessenberg<const N: usize>(a: &[[f64; N]; N]) -> [[f64; N]; N] {
    let mut h = *a;
    for k in 0..N.saturating_sub(2) {
        let alpha_norm: f64 = (k + 1..N).map(|i| h[i][k] * h[i][k]).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let alpha = if h[k + 1][k] > 0.0 {
            -alpha_norm
        } else {
            alpha_norm
        };
        let mut v = [0.0; N];
        v[k + 1] = h[k + 1][k] - alpha;
        for i in k + 2..N {
            v[i] = h[i][k];
        }
        let vn: f64 = v.iter().map(|x| x * x).sum();
        if vn == 0.0 {
            continue;
        }
        // H <- (I - 2vv'/v'v) H (I - 2vv'/v'v)
        for j in 0..N {
            let s: f64 = (0..N).map(|i| v[i] * h[i][j]).sum::<f64>() * 2.0 / vn;
            for i in 0..N {
                h[i][j] -= s * v[i];
            }
        }
        for i in 0..N {
            let s: f64 = (0..N).map(|j| h[i][j] * v[j]).sum::<f64>() * 2.0 / vn;
            for j in 0..N {
                h[i][j] -= s * v[j];
            }
        }
    }
    h
}

/// Monic characteristic polynomial of an upper Hessenberg matrix, coefficients
/// in ascending powers (`c[N] = 1`).
pub fn charpoly_hessenberg<const N: usize>(h: &[[f64; N]; N]) -> Vec<f64> {
    // p[k] is the characteristic polynomial of the leading k×k block.
    let mut p: Vec<Vec<f64>> = vec![vec![1.0]];
    for k in 1..=N {
        let kk = k - 1;
        // (x - h_kk) p_{k-1}
        let prev = &p[k - 1];
        let mut next = vec![0.0; k + 1];
        for (i, &c) in prev.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= h[kk][kk] * c;
        }
        // - sum_{i<k} h_{i,k} prod_{j=i+1..k} h_{j,j-1} p_{i-1}
        let mut prod = 1.0;
        for i in (0..kk).rev() {
            prod *= h[i + 1][i];
            let coef = h[i][kk] * prod;
            for (m, &c) in p[i].iter().enumerate() {
                next[m] -= coef * c;
            }
        }
        p.push(next);
    }
    p.pop().unwrap()
}

fn horner(c: &[f64], x: Complex) -> (Complex, Complex) {
    let mut p = Complex::real(c[c.len() - 1]);
    let mut dp = Complex::default();
    for &a in c[..c.len() - 1].iter().rev() {
        dp = dp * x + p;
        p = p * x + Complex::real(a);
    }
    (p, dp)
}

/// Roots of a polynomial (ascending coefficients, nonzero leading term) by
/// Aberth–Ehrlich simultaneous iteration.
pub fn poly_roots(c: &[f64]) -> Vec<Complex> {
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let c: Vec<f64> = c.iter().map(|a| a / lead).collect();
    // Cauchy bound for the initial circle.
    let radius = 1.0 + c[..n].iter().map(|a| a.abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex::new(radius * th.cos(), radius * th.sin())
        })
        .collect();
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = horner(&c, z[i]);
            if p.abs() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut sum = Complex::default();
            for j in 0..n {
                if j != i {
                    sum = sum + Complex::real(1.0) / (z[i] - z[j]);
                }
            }
            let step = ratio / (Complex::real(1.0) - ratio * sum);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] = z[i] - step;
                max_step = max_step.max(step.abs() / (1.0 + z[i].abs()));
            }
        }
        if max_step < 1e-16 {
            break;
        }
    }
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    z
}

/// Eigenvalues of a small dense matrix.
pub fn eigenvalues<const N: usize>(a: &[[f64; N]; N]) -> Vec<Complex> {
    let h = hessenberg(a);
    poly_roots(&charpoly_hessenberg(&h))
}

/// Smallest over all pairings of the largest distance between paired elements.
pub fn multiset_distance(a: &[Complex], b: &[Complex]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let d = (0..n).map(|i| (a[i] - b[p[i]]).abs()).fold(0.0, f64::max);
        best = best.min(d);
    });
    best
}

fn permute<F: FnMut(&[usize])>(p: &mut Vec<usize>, k: usize, f: &mut F) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}
