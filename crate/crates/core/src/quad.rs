//! Adaptive Simpson quadrature for real and complex integrands.

use std::ops::{Add, Mul, Sub};

use crate::point::C64;

pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

const MAX_DEPTH: u32 = 48;

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Scalar, F: FnMut(f64) -> T>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: f64,
    depth: u32,
    evals: &mut usize,
) -> (T, f64) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *evals += 2;
    let h = b - a;
    let left = (fa + flm * 4.0 + fm) * (h / 12.0);
    let right = (fm + frm * 4.0 + fb) * (h / 12.0);
    let delta = left + right - whole;
    let err = delta.magnitude() / 15.0;
    if depth >= MAX_DEPTH || err <= tol || h.abs() < 1e-300 {
        return (left + right + delta * (1.0 / 15.0), err);
    }
    let (lv, le) = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, evals);
    let (rv, re) = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, evals);
    (lv + rv, le + re)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<T: Scalar>(mut f: impl FnMut(f64) -> T, a: f64, b: f64, tol: f64) -> Quadrature<T> {
    if a == b {
        return Quadrature {
            value: T::zero(),
            error: 0.0,
            evals: 0,
        };
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (fa + fm * 4.0 + fb) * ((b - a) / 6.0);
    let mut evals = 3;
    let (value, error) = simpson_step(&mut f, a, b, fa, fm, fb, whole, tol, 0, &mut evals);
    Quadrature { value, error, evals }
}

/// Panels `[t'·2^{-k-1}, t'·2^{-k}]` covering `[t, t']`, ordered from `t'` down to `t`.
pub fn geometric_panels(t: f64, t_prime: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut hi = t_prime;
    while hi > t {
        let lo = (0.5 * hi).max(t);
        if (hi - lo) <= f64::EPSILON * hi {
            out.push((t, hi));
            break;
        }
        out.push((lo, hi));
        hi = lo;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = adaptive_simpson(|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12);
        assert!((q.value - 0.0).abs() < 1e-13);
    }

    #[test]
    fn sine_integral() {
        let q = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-12);
        assert!((q.value - 2.0).abs() < 1e-11);
        assert!(q.error < 1e-11);
    }

    #[test]
    fn complex_exponential() {
        let q = adaptive_simpson(|x: f64| C64::new(0.0, x).exp(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((q.value - C64::new(0.0, 2.0)).norm() < 1e-11);
    }

    #[test]
    fn panels_cover_interval() {
        let p = geometric_panels(1e-3, 1.0);
        assert_eq!(p.first().unwrap().1, 1.0);
        assert_eq!(p.last().unwrap().0, 1e-3);
        for w in p.windows(2) {
            assert_eq!(w[0].0, w[1].1);
        }
        assert_eq!(p.len(), 10);
    }
}
