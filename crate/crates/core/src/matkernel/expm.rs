//! Matrix exponential by scaling and squaring with the degree-13 diagonal
//! Padé approximant.

use super::dense::DenseMatrix;
use crate::error::Result;

/// Largest 1-norm for which the [13/13] Padé approximant is accurate to
/// double precision without scaling.
pub const THETA_13: f64 = 5.371920351148152;

const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Number of squarings used for a matrix with the given 1-norm.
pub fn squaring_count(norm_one: f64) -> u32 {
    if norm_one <= THETA_13 {
        0
    } else {
        (norm_one / THETA_13).log2().ceil().max(0.0) as u32
    }
}

/// `e^M` for a square matrix.
pub fn expm(m: &DenseMatrix) -> Result<DenseMatrix> {
    let n = m.require_square("expm")?;
    if n == 0 {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    let s = squaring_count(m.norm_one());
    let a = m.scaled(0.5f64.powi(s as i32));
    let b = &PADE_13;
    let ident = DenseMatrix::identity(n);

    let a2 = a.matmul(&a)?;
    let a4 = a2.matmul(&a2)?;
    let a6 = a4.matmul(&a2)?;

    let mut inner = a6.scaled(b[13]);
    inner.axpy(b[11], &a4);
    inner.axpy(b[9], &a2);
    let mut odd = a6.matmul(&inner)?;
    odd.axpy(b[7], &a6);
    odd.axpy(b[5], &a4);
    odd.axpy(b[3], &a2);
    odd.axpy(b[1], &ident);
    let u = a.matmul(&odd)?;

    let mut inner = a6.scaled(b[12]);
    inner.axpy(b[10], &a4);
    inner.axpy(b[8], &a2);
    let mut v = a6.matmul(&inner)?;
    v.axpy(b[6], &a6);
    v.axpy(b[4], &a4);
    v.axpy(b[2], &a2);
    v.axpy(b[0], &ident);

    let p = v.add(&u)?;
    let q = v.sub(&u)?;
    let mut r = q.solve(&p)?;
    for _ in 0..s {
        r = r.matmul(&r)?;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Horner-evaluated truncated Taylor series, no scaling.
    fn taylor_oracle(m: &DenseMatrix, terms: usize) -> DenseMatrix {
        let n = m.rows();
        let ident = DenseMatrix::identity(n);
        let mut acc = ident.clone();
        for k in (1..terms).rev() {
            acc = m.matmul(&acc).unwrap().scaled(1.0 / k as f64);
            acc = acc.add(&ident).unwrap();
        }
        acc
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, norm1: f64) -> DenseMatrix {
        let m = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let s = norm1 / m.norm_one();
        m.scaled(s)
    }

    #[test]
    fn zero_gives_identity() {
        let e = expm(&DenseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(e, DenseMatrix::identity(2));
    }

    #[test]
    fn diagonal_is_elementwise() {
        let e = expm(&DenseMatrix::from_diag(&[-1.0, -2.0])).unwrap();
        assert!((e[(0, 0)] - (-1f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)] - (-2f64).exp()).abs() < 1e-15);
        assert_eq!(e[(0, 1)], 0.0);
        assert_eq!(e[(1, 0)], 0.0);
    }

    #[test]
    fn matches_taylor_on_small_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let norm = rng.gen_range(0.1..1.0);
            let m = random_matrix(&mut rng, 5, norm);
            let e = expm(&m).unwrap();
            let t = taylor_oracle(&m, 30);
            let rel = e.sub(&t).unwrap().max_abs() / t.max_abs();
            assert!(rel < 1e-12, "rel err {rel}");
        }
    }

    #[test]
    fn large_diagonal_after_scaling() {
        let e = expm(&DenseMatrix::from_diag(&[-300.0, 10.0])).unwrap();
        assert!((e[(1, 1)] / 10f64.exp() - 1.0).abs() < 1e-12);
        assert!(e[(0, 0)].abs() < 1e-120);
    }

    #[test]
    fn rotation_generator() {
        // exp([[0, t], [-t, 0]]) is a rotation by t
        let t = 3.0;
        let e = expm(&DenseMatrix::from_rows(&[&[0.0, t], &[-t, 0.0]]).unwrap()).unwrap();
        assert!((e[(0, 0)] - t.cos()).abs() < 1e-13);
        assert!((e[(0, 1)] - t.sin()).abs() < 1e-13);
    }

    #[test]
    fn scaling_rule() {
        assert_eq!(squaring_count(1.0), 0);
        assert_eq!(squaring_count(THETA_13), 0);
        assert_eq!(squaring_count(2.0 * THETA_13), 1);
        assert_eq!(squaring_count(2.1 * THETA_13), 2);
    }

    #[test]
    fn non_square_rejected() {
        assert!(expm(&DenseMatrix::zeros(2, 3)).is_err());
    }
}
