//! Explicit exponential Runge–Kutta methods
//!
//! ```text
//! U_i  = e^{−c_i τA} u_n + τ Σ_{j<i} a_ij(−τA) B U_j
//! u_n+1 = e^{−τA} u_n   + τ Σ_i   b_i(−τA)  B U_i
//! ```
//!
//! plus the RK4 reference integrator.

mod rk4;
mod schemes;
mod stepper;
mod tableau;

pub use rk4::{
    default_reference_step, solve_reference_rk4, spectral_radius, DEFAULT_REFERENCE_CAP,
    RADIUS_ITERATIONS, RK4_STABILITY_LIMIT,
};
pub use schemes::{scheme_euler, scheme_second_order, scheme_third_order};
pub use stepper::{solve, solve_with, step, step_count, SolveResult, Stepper, STEP_COUNT_TOL};
pub use tableau::{Condition5Claim, ExpRKTableau, OrderClaim, PhiCombo, PhiTerm};
