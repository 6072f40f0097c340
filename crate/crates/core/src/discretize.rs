//! The 1D advection–diffusion testbed `u_t − ν u_xx = u_x` on `(0, 1)` with
//! homogeneous Dirichlet conditions, discretized by central second-order
//! finite differences on the inner nodes.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::matkernel::{sym_eigen, DenseMatrix, SymEigen, Vector, SYMMETRY_TOL};

/// Uniform grid of inner nodes `x_i = i·h`, `h = 1/(n+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D {
    n_inner: usize,
    h: f64,
    xs: Vec<f64>,
}

impl Grid1D {
    pub fn n_inner(&self) -> usize {
        self.n_inner
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }
}

pub fn build_grid(n_inner: usize) -> Result<Grid1D> {
    if n_inner < 2 {
        return Err(Error::param(format!(
            "grid needs at least 2 inner points, got {n_inner}"
        )));
    }
    let h = 1.0 / (n_inner + 1) as f64;
    let xs = (1..=n_inner).map(|i| i as f64 * h).collect();
    Ok(Grid1D { n_inner, h, xs })
}

/// The operator pair of `u′ + Au = Bu`.
///
/// `A` is the stiff part treated exactly by the integrators, `B` the part
/// treated explicitly. The eigendecomposition of a symmetric `A` is computed
/// on first use and shared afterwards.
#[derive(Debug)]
pub struct OperatorPair {
    a: DenseMatrix,
    b: DenseMatrix,
    nu: Option<f64>,
    a_eigen: OnceLock<Option<SymEigen>>,
}

impl Clone for OperatorPair {
    fn clone(&self) -> Self {
        let a_eigen = OnceLock::new();
        if let Some(e) = self.a_eigen.get() {
            let _ = a_eigen.set(e.clone());
        }
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            nu: self.nu,
            a_eigen,
        }
    }
}

impl OperatorPair {
    /// Generic pair; both operators square and of equal size.
    pub fn new(a: DenseMatrix, b: DenseMatrix) -> Result<Self> {
        let n = a.require_square("operator A")?;
        if b.rows() != n || b.cols() != n {
            return Err(Error::dim(format!(
                "A is {n}x{n} but B is {}x{}",
                b.rows(),
                b.cols()
            )));
        }
        Ok(Self {
            a,
            b,
            nu: None,
            a_eigen: OnceLock::new(),
        })
    }

    /// 1×1 pair for scalar model problems `u′ = (b − a)u`.
    pub fn scalar(a: f64, b: f64) -> Result<Self> {
        Self::new(
            DenseMatrix::new(1, 1, vec![a])?,
            DenseMatrix::new(1, 1, vec![b])?,
        )
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    /// Diffusion coefficient when built by [`build_operators`].
    pub fn nu(&self) -> Option<f64> {
        self.nu
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// Eigendecomposition of `A` if `A` is symmetric, `None` otherwise.
    pub fn a_eigen(&self) -> Result<Option<&SymEigen>> {
        if let Some(e) = self.a_eigen.get() {
            return Ok(e.as_ref());
        }
        let e = if self.a.asymmetry() <= SYMMETRY_TOL {
            Some(sym_eigen(&self.a)?)
        } else {
            None
        };
        Ok(self.a_eigen.get_or_init(|| e).as_ref())
    }
}

/// `A = (ν/h²)·tridiag(−1, 2, −1)`, `B = (1/2h)·tridiag(−1, 0, 1)`.
pub fn build_operators(g: &Grid1D, nu: f64) -> Result<OperatorPair> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::param(format!(
            "diffusion coefficient must be positive, got {nu}"
        )));
    }
    let n = g.n_inner;
    let h = g.h;
    let d = nu / (h * h);
    let adv = 1.0 / (2.0 * h);
    let a = DenseMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0 * d,
        1 => -d,
        _ => 0.0,
    });
    let b = DenseMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            adv
        } else if i == j + 1 {
            -adv
        } else {
            0.0
        }
    });
    let mut ops = OperatorPair::new(a, b)?;
    ops.nu = Some(nu);
    Ok(ops)
}

/// Samples `4x(1 − x)` on the inner nodes.
pub fn initial_data(g: &Grid1D) -> Vector {
    Vector::from_fn(g.n_inner, |i| {
        let x = g.xs[i];
        4.0 * x * (1.0 - x)
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteNormTriple {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Norm selector used by the harness and the probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormKind {
    L1,
    L2,
    LInf,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::L1, NormKind::L2, NormKind::LInf];

    pub fn name(self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::LInf => "linf",
        }
    }

    pub fn parse(s: &str) -> Option<NormKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" => Some(NormKind::L1),
            "l2" => Some(NormKind::L2),
            "linf" | "inf" | "max" => Some(NormKind::LInf),
            _ => None,
        }
    }
}

impl DiscreteNormTriple {
    pub fn get(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L1 => self.l1,
            NormKind::L2 => self.l2,
            NormKind::LInf => self.linf,
        }
    }
}

/// `h·Σ|v_i|`, `√(h·Σv_i²)`, `max|v_i|`.
pub fn discrete_norms(g: &Grid1D, v: &Vector) -> Result<DiscreteNormTriple> {
    if v.len() != g.n_inner {
        return Err(Error::dim(format!(
            "vector of length {} on a grid with {} inner points",
            v.len(),
            g.n_inner
        )));
    }
    let h = g.h;
    Ok(DiscreteNormTriple {
        l1: h * v.iter().map(|x| x.abs()).sum::<f64>(),
        l2: (h * v.iter().map(|x| x * x).sum::<f64>()).sqrt(),
        linf: v.norm_inf(),
    })
}
