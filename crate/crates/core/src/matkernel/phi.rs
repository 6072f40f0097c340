//! The φ-functions `φ₀(z) = eᶻ`, `φ_{k+1}(z) = (φ_k(z) − 1/k!)/z`, for scalar
//! and matrix arguments.

use super::dense::{DenseMatrix, Vector};
use super::eigen::{sym_eigen, SymEigen, SYMMETRY_TOL};
use super::expm::expm;
use crate::error::{Error, Result};

/// Highest φ order supported by [`phi_scalar`].
pub const MAX_PHI_ORDER: usize = 8;

/// Below this magnitude the recursion is replaced by a Taylor series.
const TAYLOR_RADIUS: f64 = 0.1;
const TAYLOR_TERMS: usize = 20;

/// `1/k!`.
pub fn inv_factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc / j as f64)
}

/// Scalar `φ_k(z)`.
///
/// # Panics
/// If `k > MAX_PHI_ORDER`.
pub fn phi_scalar(k: usize, z: f64) -> f64 {
    assert!(k <= MAX_PHI_ORDER, "phi order {k} exceeds {MAX_PHI_ORDER}");
    if z.abs() < TAYLOR_RADIUS {
        phi_taylor(k, z)
    } else {
        phi_recursion(k, z)
    }
}

/// `Σ_j z^j / (j+k)!`, summed back to front.
fn phi_taylor(k: usize, z: f64) -> f64 {
    let mut acc = 0.0;
    for j in (0..TAYLOR_TERMS).rev() {
        acc = acc * z + inv_factorial(j + k);
    }
    acc
}

fn phi_recursion(k: usize, z: f64) -> f64 {
    let mut p = z.exp();
    for j in 0..k {
        p = (p - inv_factorial(j)) / z;
    }
    p
}

/// `φ_0(M), …, φ_kmax(M)` from the top block row of
/// `exp([[M, I, 0, …], [0, 0, I, …], …, [0, …, 0]])`.
pub fn phi_matrices_augmented(kmax: usize, m: &DenseMatrix) -> Result<Vec<DenseMatrix>> {
    let n = m.require_square("phi_matrix")?;
    if kmax == 0 {
        return Ok(vec![expm(m)?]);
    }
    let big_n = n * (kmax + 1);
    let mut big = DenseMatrix::zeros(big_n, big_n);
    for i in 0..n {
        for j in 0..n {
            big[(i, j)] = m[(i, j)];
        }
    }
    for blk in 0..kmax {
        for i in 0..n {
            big[(blk * n + i, (blk + 1) * n + i)] = 1.0;
        }
    }
    let e = expm(&big)?;
    Ok((0..=kmax)
        .map(|blk| DenseMatrix::from_fn(n, n, |i, j| e[(i, blk * n + j)]))
        .collect())
}

/// `φ_k(M)` through the block-augmented exponential.
pub fn phi_matrix_augmented(k: usize, m: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(phi_matrices_augmented(k, m)?.pop().expect("non-empty"))
}

/// `φ_k(scale · M)` for a symmetric `M` given by its eigendecomposition.
pub fn phi_matrix_symmetric(k: usize, e: &SymEigen, scale: f64) -> DenseMatrix {
    e.apply_fn(|l| phi_scalar(k, scale * l))
}

/// `φ_k(M)`; symmetric inputs go through the eigendecomposition, all others
/// through the augmented exponential.
pub fn phi_matrix(k: usize, m: &DenseMatrix) -> Result<DenseMatrix> {
    m.require_square("phi_matrix")?;
    if k > MAX_PHI_ORDER {
        return Err(Error::param(format!(
            "phi order {k} exceeds {MAX_PHI_ORDER}"
        )));
    }
    if m.asymmetry() <= SYMMETRY_TOL {
        let e = sym_eigen(m)?;
        Ok(phi_matrix_symmetric(k, &e, 1.0))
    } else {
        phi_matrix_augmented(k, m)
    }
}

/// `Σ_{i=1..k} φ_i(M) v_i` from a single exponential of the `(n+k)×(n+k)`
/// matrix `[[M, W], [0, K]]`, `W = [v_k, …, v_1]`, `K` the upper shift.
pub fn phi_combination(m: &DenseMatrix, vs: &[Vector]) -> Result<Vector> {
    let n = m.require_square("phi_combination")?;
    let k = vs.len();
    if k == 0 {
        return Err(Error::param("phi_combination needs at least one vector"));
    }
    if let Some((i, v)) = vs.iter().enumerate().find(|(_, v)| v.len() != n) {
        return Err(Error::dim(format!(
            "vector {} has length {}, matrix is {n}x{n}",
            i + 1,
            v.len()
        )));
    }
    let size = n + k;
    let mut aug = DenseMatrix::zeros(size, size);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = m[(i, j)];
        }
    }
    for (col, v) in vs.iter().rev().enumerate() {
        for i in 0..n {
            aug[(i, n + col)] = v[i];
        }
    }
    for j in 0..k.saturating_sub(1) {
        aug[(n + j, n + j + 1)] = 1.0;
    }
    let e = expm(&aug)?;
    Ok(Vector::from_raw((0..n).map(|i| e[(i, size - 1)]).collect()))
}
