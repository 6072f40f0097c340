//! Power-iteration estimates used by stability guards and probes.

use super::dense::{DenseMatrix, SparseRows};

fn start_vector(n: usize) -> Vec<f64> {
    // alternating signs seed the high-frequency modes of difference operators;
    // the decaying term keeps the vector out of simple null spaces
    (0..n)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } + 1.0 / (i + 1) as f64)
        .collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

/// Spectral radius estimate `‖M x_k‖ / ‖x_k‖` after `iters` power steps.
pub fn spectral_radius_estimate(m: &SparseRows, iters: usize) -> f64 {
    let n = m.rows();
    if n == 0 {
        return 0.0;
    }
    let mut x = start_vector(n);
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut est = 0.0;
    for _ in 0..iters.max(1) {
        m.mul_slice_into(&x, &mut y);
        est = normalize(&mut y);
        if est == 0.0 {
            break;
        }
        std::mem::swap(&mut x, &mut y);
    }
    est
}

/// Largest singular value of `M` by power iteration on `MᵀM`.
///
/// Stops after `max_iters` or when successive estimates differ by less than
/// `rel_tol` relative.
pub fn norm2_estimate(m: &DenseMatrix, max_iters: usize, rel_tol: f64) -> f64 {
    let n = m.cols();
    if n == 0 || m.rows() == 0 {
        return 0.0;
    }
    let mt = m.transpose();
    let mut x = start_vector(n);
    normalize(&mut x);
    let mut y = vec![0.0; m.rows()];
    let mut z = vec![0.0; n];
    let mut sigma: f64 = 0.0;
    for _ in 0..max_iters.max(1) {
        m.mul_slice_into(&x, &mut y);
        mt.mul_slice_into(&y, &mut z);
        let lambda = normalize(&mut z);
        let next = lambda.sqrt();
        std::mem::swap(&mut x, &mut z);
        let done = (next - sigma).abs() <= rel_tol * next;
        sigma = next;
        if lambda == 0.0 || done {
            break;
        }
    }
    sigma
}
