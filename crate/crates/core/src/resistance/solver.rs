//! Symmetric positive-definite solves with Laplacian submatrices.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Laplacian of a graph restricted to a set of free vertices (Dirichlet
/// conditions elsewhere), stored as CSR over local indices.
#[derive(Debug, Clone)]
pub(crate) struct ReducedLaplacian {
    /// Full degree of each free vertex, counting edges to fixed vertices.
    pub diag: Vec<f64>,
    pub offsets: Vec<usize>,
    pub cols: Vec<u32>,
}

impl ReducedLaplacian {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.len() {
            let mut acc = self.diag[i] * x[i];
            for &j in &self.cols[self.offsets[i]..self.offsets[i + 1]] {
                acc -= x[j as usize];
            }
            y[i] = acc;
        }
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for &j in &self.cols[self.offsets[i]..self.offsets[i + 1]] {
                m[(i, j as usize)] -= 1.0;
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Systems with fewer unknowns are factored densely.
    pub dense_threshold: usize,
    /// Relative residual target of conjugate gradients.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dense_threshold: 2000,
            rel_tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

pub(crate) enum Factor {
    Dense(Cholesky<f64, Dyn>),
    Iterative,
}

pub(crate) struct SpdSolver {
    pub lap: ReducedLaplacian,
    factor: Factor,
    opts: SolverOptions,
}

impl SpdSolver {
    pub fn new(lap: ReducedLaplacian, opts: SolverOptions) -> Result<Self> {
        let factor = if lap.len() < opts.dense_threshold {
            let chol = Cholesky::new(lap.dense())
                .ok_or_else(|| Error::domain("Laplacian block is not positive definite"))?;
            Factor::Dense(chol)
        } else {
            Factor::Iterative
        };
        Ok(Self { lap, factor, opts })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match &self.factor {
            Factor::Dense(chol) => {
                let x = chol.solve(&DVector::from_column_slice(b));
                Ok(x.iter().copied().collect())
            }
            Factor::Iterative => pcg(&self.lap, b, &self.opts),
        }
    }
}

/// Jacobi-preconditioned conjugate gradients.
pub(crate) fn pcg(lap: &ReducedLaplacian, b: &[f64], opts: &SolverOptions) -> Result<Vec<f64>> {
    let n = lap.len();
    let mut x = vec![0.0; n];
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&lap.diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for _ in 0..opts.max_iter {
        lap.apply(&p, &mut ap);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= opts.rel_tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / lap.diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Statistical {
        attempts: opts.max_iter as u64,
        reason: "conjugate gradients did not reach the residual target".into(),
    })
}
