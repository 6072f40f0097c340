//! Built-in schemes of stiff orders one to three.

use super::tableau::{ExpRKTableau, PhiCombo};
use crate::error::{Error, Result};

/// Exponential Euler: `u⁺ = e^{−τA}u + τφ₁(−τA)Bu`.
pub fn scheme_euler() -> ExpRKTableau {
    ExpRKTableau::new(
        "euler",
        vec![0.0],
        vec![vec![]],
        vec![PhiCombo::term(1.0, 1, 1.0)],
        1,
    )
    .expect("valid built-in tableau")
}

/// The one-parameter family of two-stage second-order methods.
///
/// `c₂ = c`, `a₂₁ = c·φ₁(−cτA)`, `b₂ = φ₂(−τA)/c`, `b₁ = φ₁(−τA) − φ₂(−τA)/c`.
pub fn scheme_second_order(c: f64) -> Result<ExpRKTableau> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::param(format!(
            "second-order node c = {c} outside (0, 1]"
        )));
    }
    ExpRKTableau::new(
        format!("rk2({c})"),
        vec![0.0, c],
        vec![vec![], vec![PhiCombo::term(c, 1, c)]],
        vec![
            PhiCombo::term(1.0, 1, 1.0).plus(1.0, 2, -1.0 / c),
            PhiCombo::term(1.0, 2, 1.0 / c),
        ],
        2,
    )
}

/// Three-stage method with nodes `(0, ½, 1)` satisfying conditions 1–4 in
/// strong form and condition 5 only with the weights evaluated at zero.
///
/// ```text
///   0 |
///   ½ | ½φ₁(½Z)
///   1 | φ₁(Z) − 2φ₂(½Z) − 2φ₂(Z)    2φ₂(½Z) + 2φ₂(Z)
///  ---+--------------------------------------------------------------
///     | φ₁ − 3φ₂ + 4φ₃    4φ₂ − 8φ₃    −φ₂ + 4φ₃        (at Z = −τA)
/// ```
pub fn scheme_third_order() -> ExpRKTableau {
    let a21 = PhiCombo::term(0.5, 1, 0.5);
    let a31 = PhiCombo::term(1.0, 1, 1.0)
        .plus(0.5, 2, -2.0)
        .plus(1.0, 2, -2.0);
    let a32 = PhiCombo::term(0.5, 2, 2.0).plus(1.0, 2, 2.0);
    let b1 = PhiCombo::term(1.0, 1, 1.0)
        .plus(1.0, 2, -3.0)
        .plus(1.0, 3, 4.0);
    let b2 = PhiCombo::term(1.0, 2, 4.0).plus(1.0, 3, -8.0);
    let b3 = PhiCombo::term(1.0, 2, -1.0).plus(1.0, 3, 4.0);
    ExpRKTableau::new(
        "rk3paper",
        vec![0.0, 0.5, 1.0],
        vec![vec![], vec![a21], vec![a31, a32]],
        vec![b1, b2, b3],
        3,
    )
    .expect("valid built-in tableau")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_weight_at_zero() {
        let t = scheme_euler();
        assert_eq!(t.stages(), 1);
        assert_eq!(t.b(0).eval_scalar(0.0), 1.0);
    }

    #[test]
    fn second_order_collapses_at_zero() {
        for c in [0.25, 0.5, 1.0] {
            let t = scheme_second_order(c).unwrap();
            assert!((t.b(0).eval_scalar(0.0) - (1.0 - 0.5 / c)).abs() < 1e-15);
            assert!((t.b(1).eval_scalar(0.0) - 0.5 / c).abs() < 1e-15);
            assert!((t.a(1, 0).eval_scalar(0.0) - c).abs() < 1e-15);
        }
        assert!(scheme_second_order(0.0).is_err());
        assert!(scheme_second_order(1.5).is_err());
        assert_eq!(scheme_second_order(0.5).unwrap().name(), "rk2(0.5)");
    }

    #[test]
    fn third_order_underlying_rk_is_kutta3() {
        // at Z = 0 the coefficients reduce to Kutta's classical third-order method
        let t = scheme_third_order();
        let b: Vec<f64> = (0..3).map(|i| t.b(i).eval_scalar(0.0)).collect();
        for (got, want) in b.iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((t.a(1, 0).eval_scalar(0.0) - 0.5).abs() < 1e-15);
        assert!((t.a(2, 0).eval_scalar(0.0) + 1.0).abs() < 1e-15);
        assert!((t.a(2, 1).eval_scalar(0.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_phi1_termwise() {
        // φ₂ weights −3 + 4 − 1 and φ₃ weights 4 − 8 + 4 cancel
        let t = scheme_third_order();
        let mut w2 = 0.0;
        let mut w3 = 0.0;
        for b in t.b_all() {
            for term in b.terms() {
                match term.order {
                    2 => w2 += term.weight,
                    3 => w3 += term.weight,
                    _ => {}
                }
            }
        }
        assert_eq!((w2, w3), (0.0, 0.0));
    }
}
