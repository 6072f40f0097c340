//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use stiffexp::matkernel::{DenseMatrix, Vector};

/// Uniform entries, rescaled so that `‖M‖₁ = norm_one`.
pub fn random_matrix(rng: &mut impl Rng, n: usize, norm_one: f64) -> DenseMatrix {
    let m = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let s = m.norm_one();
    if s == 0.0 {
        m
    } else {
        m.scaled(norm_one / s)
    }
}

/// Random matrix with every eigenvalue in `Re z ≤ −margin`.
pub fn random_stable(rng: &mut impl Rng, n: usize, margin: f64) -> DenseMatrix {
    let r = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    r.sub(&DenseMatrix::identity(n).scaled(r.norm_inf() + margin))
        .unwrap()
}

/// `RᵀR + shift·I`.
pub fn random_spd(rng: &mut impl Rng, n: usize, shift: f64) -> DenseMatrix {
    let r = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    r.transpose()
        .matmul(&r)
        .unwrap()
        .add(&DenseMatrix::identity(n).scaled(shift))
        .unwrap()
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_| rng.gen_range(-1.0..1.0))
}

/// Truncated Taylor series `Σ_{j<terms} M^j/j!`, Horner form.
pub fn taylor_expm(m: &DenseMatrix, terms: usize) -> DenseMatrix {
    let n = m.rows();
    let id = DenseMatrix::identity(n);
    let mut acc = id.clone();
    for j in (1..terms).rev() {
        acc = id
            .add(&m.matmul(&acc).unwrap().scaled(1.0 / j as f64))
            .unwrap();
    }
    acc
}

/// `‖got − want‖∞ / ‖want‖∞`.
pub fn rel_err(got: &DenseMatrix, want: &DenseMatrix) -> f64 {
    got.sub(want).unwrap().norm_inf() / want.norm_inf()
}

pub fn rel_err_vec(got: &Vector, want: &Vector) -> f64 {
    got.sub(want).unwrap().norm_inf() / want.norm_inf()
}

/// Least-squares slope of `log e` against `log τ`.
pub fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), &(t, e)| {
        (a + t.ln() / n, b + e.ln() / n)
    });
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(a, b), &(t, e)| {
        let dx = t.ln() - mx;
        (a + dx * (e.ln() - my), b + dx * dx)
    });
    sxy / sxx
}
