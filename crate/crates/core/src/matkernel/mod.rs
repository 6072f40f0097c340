//! Dense linear algebra and matrix functions: `expm`, the φ-functions, the
//! augmented-matrix evaluation of φ-combinations, and a Jacobi eigensolver for
//! symmetric matrices with fractional powers.

mod dense;
mod eigen;
mod expm;
mod phi;
mod power;

pub use dense::{DenseMatrix, SparseRows, Vector};
pub use eigen::{frac_power, sym_eigen, SymEigen, SYMMETRY_TOL};
pub use expm::{expm, squaring_count, THETA_13};
pub use phi::{
    inv_factorial, phi_combination, phi_matrices_augmented, phi_matrix, phi_matrix_augmented,
    phi_matrix_symmetric, phi_scalar, MAX_PHI_ORDER,
};
pub use power::{norm2_estimate, spectral_radius_estimate};
