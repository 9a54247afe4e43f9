//! Eigendecomposition of real symmetric tridiagonal matrices.
//!
//! Implicit-shift QL iteration with eigenvector accumulation, the classic
//! EISPACK `tql2` scheme. Every eigenproblem in this crate is symmetric
//! tridiagonal (the open-chain hopping Hamiltonian in the single-excitation
//! sector, and the diffusion-rate operator restricted to an even-spaced
//! encoding window), so a dedicated solver beats dragging in a LAPACK
//! binding: it is deterministic across runs, has no linkage requirements,
//! and is exact-fit O(n) storage.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix: `diag` has length n, `off` length n-1,
/// with `off[i]` sitting between rows/columns i and i+1.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    diag: Vec<f64>,
    off: Vec<f64>,
}

/// Full spectral decomposition: `values[j]` ascending, eigenvector in column
/// j of `vectors` (columns orthonormal).
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidConfig(
                "tridiagonal matrix needs at least one row".into(),
            ));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len() - 1,
                actual: off.len(),
            });
        }
        Ok(SymTridiag { diag, off })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Dense copy (for oracle-style comparisons and small operator algebra).
    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.n();
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            a[[i, i]] = self.diag[i];
        }
        for i in 0..n - 1 {
            a[[i, i + 1]] = self.off[i];
            a[[i + 1, i]] = self.off[i];
        }
        a
    }

    /// Matrix-vector product (used by residual tests).
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(v.len(), n, "length mismatch in tridiagonal apply");
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * v[i];
            if i > 0 {
                acc += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * v[i + 1];
            }
            out[i] = acc;
        }
        out
    }

    /// Implicit-shift QL with eigenvector accumulation. Returns eigenpairs
    /// sorted ascending by eigenvalue.
    pub fn decompose(&self) -> Result<TridiagEigen> {
        let n = self.n();
        let mut d = self.diag.clone();
        // e[i] couples i and i+1; last slot is workspace.
        let mut e = {
            let mut e = self.off.clone();
            e.push(0.0);
            e
        };
        let mut z = Array2::<f64>::eye(n);

        const MAX_SWEEPS: usize = 50;
        let eps = f64::EPSILON;

        for l in 0..n {
            let mut sweeps = 0usize;
            loop {
                // Find the first negligible subdiagonal at or after l; the
                // block [l..=m] is what the QL step works on.
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= eps * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break; // d[l] has converged
                }
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::EigenNoConverge {
                        index: l,
                        iterations: MAX_SWEEPS,
                    });
                }

                // Wilkinson-style shift from the leading 2x2 of the block.
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                let signed_r = if g >= 0.0 { r.abs() } else { -r.abs() };
                g = d[m] - d[l] + e[l] / (g + signed_r);
                let mut s = 1.0;
                let mut c = 1.0;
                let mut p = 0.0;

                let mut underflow = false;
                for i in (l..m).rev() {
                    let mut f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        // Rotation annihilated early; drop the shift that has
                        // been applied so far and restart this sweep.
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    // Accumulate the rotation into eigenvector columns i, i+1.
                    for k in 0..n {
                        f = z[[k, i + 1]];
                        z[[k, i + 1]] = s * z[[k, i]] + c * f;
                        z[[k, i]] = c * z[[k, i]] - s * f;
                    }
                }
                if underflow {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }

        // Sort ascending, permuting eigenvector columns to match.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let values: Vec<f64> = order.iter().map(|&j| d[j]).collect();
        let mut vectors = Array2::<f64>::zeros((n, n));
        for (new_col, &old_col) in order.iter().enumerate() {
            for k in 0..n {
                vectors[[k, new_col]] = z[[k, old_col]];
            }
        }
        Ok(TridiagEigen { values, vectors })
    }
}

impl TridiagEigen {
    /// max_j || A v_j - lambda_j v_j ||_inf, the convergence certificate.
    pub fn max_residual(&self, a: &SymTridiag) -> f64 {
        let n = a.n();
        let mut worst = 0.0f64;
        for j in 0..n {
            let v: Vec<f64> = (0..n).map(|k| self.vectors[[k, j]]).collect();
            let av = a.apply(&v);
            for k in 0..n {
                worst = worst.max((av[k] - self.values[j] * v[k]).abs());
            }
        }
        worst
    }

    /// max |Q^T Q - I|, the orthonormality certificate.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.values.len();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                let mut dot = 0.0;
                for k in 0..n {
                    dot += self.vectors[[k, a]] * self.vectors[[k, b]];
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}
