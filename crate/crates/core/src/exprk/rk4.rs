//! Classical RK4 on `u′ = (B − A)u`, used for reference solutions.

use super::stepper::step_count;
use crate::discretize::OperatorPair;
use crate::error::{Error, Result};
use crate::matkernel::{spectral_radius_estimate, SparseRows, Vector};

/// Admissible `τ·ρ(A − B)`; RK4's real stability interval ends near 2.785.
pub const RK4_STABILITY_LIMIT: f64 = 2.7;
/// Power-iteration steps for the spectral radius estimate.
pub const RADIUS_ITERATIONS: usize = 20;
/// Upper cap for the default reference step.
pub const DEFAULT_REFERENCE_CAP: f64 = 1.0 / 65536.0;

pub fn spectral_radius(ops: &OperatorPair) -> Result<f64> {
    let m = ops.a().sub(ops.b())?;
    Ok(spectral_radius_estimate(
        &SparseRows::from_dense(&m),
        RADIUS_ITERATIONS,
    ))
}

/// `min(2⁻¹⁶, 0.9·2.7/ρ)`, shrunk so that it divides `t_final`.
pub fn default_reference_step(ops: &OperatorPair, t_final: f64) -> Result<f64> {
    let rho = spectral_radius(ops)?;
    let mut tau = DEFAULT_REFERENCE_CAP;
    if rho > 0.0 {
        tau = tau.min(0.9 * RK4_STABILITY_LIMIT / rho);
    }
    let n = (t_final / tau).ceil().max(1.0);
    Ok(t_final / n)
}

pub fn solve_reference_rk4(
    ops: &OperatorPair,
    u0: &Vector,
    t_final: f64,
    tau_ref: f64,
) -> Result<Vector> {
    let steps = step_count(t_final, tau_ref)?;
    if u0.len() != ops.dim() {
        return Err(Error::dim(format!(
            "initial state of length {} for {}-dimensional operators",
            u0.len(),
            ops.dim()
        )));
    }
    let rho = spectral_radius(ops)?;
    if tau_ref * rho > RK4_STABILITY_LIMIT {
        return Err(Error::param(format!(
            "reference step {tau_ref:e} violates the RK4 stability bound {:e} (spectral radius ≈ {rho:e})",
            RK4_STABILITY_LIMIT / rho
        )));
    }
    let m = SparseRows::from_dense(&ops.b().sub(ops.a())?);
    let n = u0.len();
    let h = tau_ref;
    let mut u = u0.as_slice().to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for step in 0..steps {
        m.mul_slice_into(&u, &mut k1);
        for i in 0..n {
            tmp[i] = u[i] + 0.5 * h * k1[i];
        }
        m.mul_slice_into(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = u[i] + 0.5 * h * k2[i];
        }
        m.mul_slice_into(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = u[i] + h * k3[i];
        }
        m.mul_slice_into(&tmp, &mut k4);
        for i in 0..n {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Instability { step: step + 1 });
        }
    }
    Ok(Vector::from_raw(u))
}
