//! Cyclic Jacobi eigendecomposition of real symmetric matrices and the
//! spectral calculus built on it.

use rayon::prelude::*;

use super::dense::{DenseMatrix, Vector};
use crate::error::{Error, Result};

/// Relative asymmetry accepted by [`sym_eigen`].
pub const SYMMETRY_TOL: f64 = 1e-12;

const OFF_DIAG_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 60;

/// `M = Q Λ Qᵀ` with eigenvalues ascending and orthogonal `Q`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    eigenvalues: Vec<f64>,
    /// Row `k` holds the `k`-th eigenvector (so this is `Qᵀ`).
    vectors_t: DenseMatrix,
}

impl SymEigen {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthogonal matrix whose columns are the eigenvectors.
    pub fn eigenvectors(&self) -> DenseMatrix {
        self.vectors_t.transpose()
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Q · diag(f(λ)) · Qᵀ`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.with_diag(&fl)
    }

    /// `Q · diag(d) · Qᵀ` for explicit diagonal values.
    pub fn with_diag(&self, d: &[f64]) -> DenseMatrix {
        let n = self.dim();
        assert_eq!(d.len(), n);
        let vt = &self.vectors_t;
        let mut out = DenseMatrix::zeros(n, n);
        let kernel = |i: usize, row: &mut [f64]| {
            for (k, &dk) in d.iter().enumerate() {
                let coef = vt[(k, i)] * dk;
                if coef == 0.0 {
                    continue;
                }
                for (o, &q) in row.iter_mut().zip(vt.row(k)) {
                    *o += coef * q;
                }
            }
        };
        if n >= 64 {
            let rows: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut row = vec![0.0; n];
                    kernel(i, &mut row);
                    row
                })
                .collect();
            for (i, r) in rows.into_iter().enumerate() {
                out.row_mut(i).copy_from_slice(&r);
            }
        } else {
            for i in 0..n {
                kernel(i, out.row_mut(i));
            }
        }
        out
    }

    /// `Q · diag(f(λ)) · Qᵀ · v` without forming the matrix.
    pub fn apply_fn_vec(&self, f: impl Fn(f64) -> f64, v: &Vector) -> Result<Vector> {
        if v.len() != self.dim() {
            return Err(Error::dim(format!(
                "vector of length {} for {}-dimensional eigenbasis",
                v.len(),
                self.dim()
            )));
        }
        let coeffs = self.vectors_t.mul_vec(v)?;
        let n = self.dim();
        let mut out = vec![0.0; n];
        for (k, (&c, &l)) in coeffs.iter().zip(&self.eigenvalues).enumerate() {
            let w = c * f(l);
            for (o, &q) in out.iter_mut().zip(self.vectors_t.row(k)) {
                *o += w * q;
            }
        }
        Ok(Vector::from_raw(out))
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps continue until the off-diagonal Frobenius norm drops to
/// `1e-13 · ‖M‖_F`.
pub fn sym_eigen(m: &DenseMatrix) -> Result<SymEigen> {
    let n = m.require_square("sym_eigen")?;
    let asym = m.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::Contract(format!(
            "matrix is not symmetric (relative asymmetry {asym:e})"
        )));
    }
    let mut a = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let mut vt = DenseMatrix::identity(n);
    let tol = OFF_DIAG_TOL * a.norm_fro();
    // rotations below this size cannot keep the off-diagonal norm above `tol`
    let skip = tol / n.max(1) as f64;

    let mut converged = false;
    let mut off = off_norm(&a);
    for _ in 0..MAX_SWEEPS {
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= skip {
                    continue;
                }
                rotate(&mut a, &mut vt, p, q);
            }
        }
        off = off_norm(&a);
    }
    if !converged && off > tol {
        return Err(Error::NoConvergence {
            sweeps: MAX_SWEEPS,
            off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors_t = DenseMatrix::from_fn(n, n, |k, j| vt[(order[k], j)]);
    Ok(SymEigen {
        eigenvalues,
        vectors_t,
    })
}

fn off_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    (2.0 * s).sqrt()
}

/// Applies `A ← JᵀAJ`, `Vᵀ ← JᵀVᵀ` for the rotation annihilating `a[p][q]`.
fn rotate(a: &mut DenseMatrix, vt: &mut DenseMatrix, p: usize, q: usize) {
    let n = a.rows();
    let apq = a[(p, q)];
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(p, k)];
        let akq = a[(q, k)];
        let np = c * akp - s * akq;
        let nq = s * akp + c * akq;
        a[(p, k)] = np;
        a[(k, p)] = np;
        a[(q, k)] = nq;
        a[(k, q)] = nq;
    }
    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for k in 0..n {
        let vp = vt[(p, k)];
        let vq = vt[(q, k)];
        vt[(p, k)] = c * vp - s * vq;
        vt[(q, k)] = s * vp + c * vq;
    }
}

/// `Q · diag(λ^γ) · Qᵀ`.
///
/// Non-integral exponents need strictly positive eigenvalues; negative
/// integral exponents need nonzero ones.
pub fn frac_power(e: &SymEigen, gamma: f64) -> Result<DenseMatrix> {
    let integral = gamma.fract() == 0.0;
    for &l in e.eigenvalues() {
        let bad = if integral {
            gamma < 0.0 && l == 0.0
        } else {
            l <= 0.0
        };
        if bad {
            return Err(Error::Domain(format!(
                "eigenvalue {l:e} has no real power {gamma}"
            )));
        }
    }
    if integral && gamma.abs() <= i32::MAX as f64 {
        let g = gamma as i32;
        Ok(e.apply_fn(|l| l.powi(g)))
    } else {
        Ok(e.apply_fn(|l| l.powf(gamma)))
    }
}
