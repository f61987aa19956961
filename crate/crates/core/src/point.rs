//! Points and matrices over C^n.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CPoint(pub Vec<C64>);

impl CPoint {
    pub fn new(coords: Vec<C64>) -> Self {
        CPoint(coords)
    }

    pub fn zeros(n: usize) -> Self {
        CPoint(vec![C64::new(0.0, 0.0); n])
    }

    /// Real point with the given coordinates.
    pub fn real(xs: &[f64]) -> Self {
        CPoint(xs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Standard basis vector e_k (zero-based).
    pub fn basis(n: usize, k: usize) -> Self {
        let mut p = Self::zeros(n);
        p.0[k] = C64::new(1.0, 0.0);
        p
    }

    /// Interleaved real coordinates (re_1, im_1, ..., re_n, im_n).
    pub fn from_real_vec(xs: &[f64]) -> Self {
        debug_assert!(xs.len() % 2 == 0);
        CPoint(xs.chunks(2).map(|p| C64::new(p[0], p[1])).collect())
    }

    pub fn to_real_vec(&self) -> Vec<f64> {
        self.0.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Hermitian product sum a_j conj(b_j).
    pub fn inner(&self, other: &CPoint) -> C64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn scale(&self, s: C64) -> CPoint {
        CPoint(self.0.iter().map(|z| z * s).collect())
    }

    pub fn scale_re(&self, s: f64) -> CPoint {
        CPoint(self.0.iter().map(|z| z * s).collect())
    }

    /// self + s * dir
    pub fn axpy(&self, s: C64, dir: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(&dir.0).map(|(a, b)| a + s * b).collect())
    }

    pub fn axpy_re(&self, s: f64, dir: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(&dir.0).map(|(a, b)| a + b * s).collect())
    }

    pub fn dist(&self, other: &CPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalized(&self) -> Result<CPoint> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroDirection);
        }
        Ok(self.scale_re(1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn midpoint(&self, other: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(&other.0).map(|(a, b)| (a + b) * 0.5).collect())
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for CPoint {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CPoint {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Add for &CPoint {
    type Output = CPoint;
    fn add(self, o: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CPoint {
    type Output = CPoint;
    fn sub(self, o: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &CPoint {
    type Output = CPoint;
    fn neg(self) -> CPoint {
        CPoint(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<f64> for &CPoint {
    type Output = CPoint;
    fn mul(self, s: f64) -> CPoint {
        self.scale_re(s)
    }
}

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = C64::new(1.0, 0.0);
        }
        CMatrix { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        Ok(CMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub fn apply(&self, z: &CPoint) -> CPoint {
        let n = self.n;
        CPoint(
            (0..n)
                .map(|i| (0..n).map(|j| self.data[i * n + j] * z.0[j]).sum())
                .collect(),
        )
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let n = self.n;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        CMatrix { n, data }
    }

    /// max |(U* U - I)_{ij}|
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..n {
                    s += self.data[k * n + i].conj() * self.data[k * n + j];
                }
                if i == j {
                    s -= 1.0;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }
}
