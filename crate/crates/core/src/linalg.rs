//! Tiny symmetric-matrix helper for parameter dimensions 1 and 2.
//!
//! Every family in this crate has at most two parameters, so the Fisher
//! information is at most 2×2 and all factorizations are closed-form.

use crate::error::{Error, Result};

/// Symmetric `dim`×`dim` matrix, `dim` ∈ {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat {
    dim: usize,
    m: [[f64; 2]; 2],
}

impl SymMat {
    pub fn new_1d(a: f64) -> Self {
        SymMat { dim: 1, m: [[a, 0.0], [0.0, 0.0]] }
    }

    pub fn new_2d(a11: f64, a12: f64, a22: f64) -> Self {
        SymMat { dim: 2, m: [[a11, a12], [a12, a22]] }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 1 || dim == 2);
        SymMat { dim, m: [[0.0; 2]; 2] }
    }

    pub fn diag(dim: usize, d: [f64; 2]) -> Self {
        assert!(dim == 1 || dim == 2);
        SymMat { dim, m: [[d[0], 0.0], [0.0, d[1]]] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.dim && j < self.dim);
        self.m[i][j]
    }

    pub fn is_finite(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| self.m[i][j].is_finite()))
    }

    /// Row-major copy, `dim`×`dim`.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.m[i][j]).collect())
            .collect()
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        match self.dim {
            1 => [self.m[0][0] * v[0], 0.0],
            _ => [
                self.m[0][0] * v[0] + self.m[0][1] * v[1],
                self.m[1][0] * v[0] + self.m[1][1] * v[1],
            ],
        }
    }

    /// vᵀ M v.
    pub fn quad_form(&self, v: [f64; 2]) -> f64 {
        let mv = self.mul_vec(v);
        mv[0] * v[0] + mv[1] * v[1]
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        match self.dim {
            1 => (self.m[0][0], self.m[0][0]),
            _ => {
                let tr = self.m[0][0] + self.m[1][1];
                let det = self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0];
                let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
                (0.5 * tr - disc, 0.5 * tr + disc)
            }
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().0
    }

    /// λ_max / λ_min; infinite when not positive definite.
    pub fn condition(&self) -> f64 {
        let (lo, hi) = self.eigenvalues();
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Lower-triangular Cholesky factor; errors when not positive definite.
    pub fn cholesky_lower(&self) -> Result<[[f64; 2]; 2]> {
        if !self.is_finite() {
            return Err(Error::numerical("non-finite matrix in Cholesky"));
        }
        let a = self.m[0][0];
        if a <= 0.0 {
            return Err(Error::numerical(format!(
                "matrix not positive definite (leading entry {a})"
            )));
        }
        let l11 = a.sqrt();
        if self.dim == 1 {
            return Ok([[l11, 0.0], [0.0, 0.0]]);
        }
        let l21 = self.m[1][0] / l11;
        let rest = self.m[1][1] - l21 * l21;
        if rest <= 0.0 {
            return Err(Error::numerical(format!(
                "matrix not positive definite (Schur complement {rest})"
            )));
        }
        Ok([[l11, 0.0], [l21, rest.sqrt()]])
    }

    /// Inverse of a positive-definite matrix.
    pub fn inverse(&self) -> Result<SymMat> {
        if !self.is_finite() {
            return Err(Error::numerical("non-finite matrix in inverse"));
        }
        match self.dim {
            1 => {
                let a = self.m[0][0];
                if a <= 0.0 {
                    return Err(Error::numerical("singular 1x1 matrix"));
                }
                Ok(SymMat::new_1d(1.0 / a))
            }
            _ => {
                let det = self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0];
                if det <= 0.0 || self.m[0][0] <= 0.0 {
                    return Err(Error::numerical(format!(
                        "matrix not positive definite (det {det})"
                    )));
                }
                Ok(SymMat::new_2d(
                    self.m[1][1] / det,
                    -self.m[0][1] / det,
                    self.m[0][0] / det,
                ))
            }
        }
    }

    pub fn scale(&self, s: f64) -> SymMat {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] *= s;
            }
        }
        out
    }

    pub fn add(&self, other: &SymMat) -> SymMat {
        assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] += other.m[i][j];
            }
        }
        out
    }
}
