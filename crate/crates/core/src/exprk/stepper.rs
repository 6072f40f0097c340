use std::collections::BTreeMap;

use super::tableau::{ExpRKTableau, PhiCombo};
use crate::discretize::OperatorPair;
use crate::error::{Error, Result};
use crate::matkernel::{phi_matrices_augmented, DenseMatrix, SparseRows, SymEigen, Vector};

/// Tolerance on `T/τ` being an integer.
pub const STEP_COUNT_TOL: f64 = 1e-9;

/// Evaluates coefficient functions of `−τA` as dense matrices.
enum CoefficientSource<'a> {
    /// Symmetric `A`: every coefficient is `Q·diag(f(−τλ))·Qᵀ`.
    Spectral { eigen: &'a SymEigen, tau: f64 },
    /// General `A`: `φ_0..φ_kmax(−sτA)` per distinct scale `s`.
    Augmented {
        n: usize,
        blocks: BTreeMap<u64, Vec<DenseMatrix>>,
    },
}

impl<'a> CoefficientSource<'a> {
    fn new(tab: &ExpRKTableau, ops: &'a OperatorPair, tau: f64) -> Result<Self> {
        if let Some(eigen) = ops.a_eigen()? {
            return Ok(Self::Spectral { eigen, tau });
        }
        // highest φ order needed at each scale; nodes need φ₀ at their scale
        let mut need: BTreeMap<u64, usize> = BTreeMap::new();
        for &c in tab.c() {
            need.entry(c.to_bits()).or_insert(0);
        }
        need.entry(1f64.to_bits()).or_insert(0);
        for combo in tab.coefficients() {
            for t in combo.terms() {
                let e = need.entry(t.scale.to_bits()).or_insert(0);
                *e = (*e).max(t.order);
            }
        }
        let minus_tau_a = ops.a().scaled(-tau);
        let mut blocks = BTreeMap::new();
        for (bits, kmax) in need {
            let s = f64::from_bits(bits);
            blocks.insert(bits, phi_matrices_augmented(kmax, &minus_tau_a.scaled(s))?);
        }
        Ok(Self::Augmented {
            n: ops.dim(),
            blocks,
        })
    }

    fn exp(&self, scale: f64) -> DenseMatrix {
        match self {
            Self::Spectral { eigen, tau } => eigen.apply_fn(|l| (-scale * tau * l).exp()),
            Self::Augmented { blocks, .. } => blocks[&scale.to_bits()][0].clone(),
        }
    }

    fn combo(&self, combo: &PhiCombo) -> DenseMatrix {
        match self {
            Self::Spectral { eigen, tau } => eigen.apply_fn(|l| combo.eval_scalar(-tau * l)),
            Self::Augmented { n, blocks } => {
                let mut acc = DenseMatrix::zeros(*n, *n);
                for t in combo.terms() {
                    acc.axpy(t.weight, &blocks[&t.scale.to_bits()][t.order]);
                }
                acc
            }
        }
    }
}

/// Precomputed coefficient matrices of one tableau for fixed `A`, `B`, `τ`.
///
/// Building the stepper costs a handful of dense matrix functions; each step
/// afterwards costs only matrix–vector products.
pub struct Stepper {
    tau: f64,
    n: usize,
    b_op: SparseRows,
    /// `e^{−c_i τA}`; `None` for `c_i = 0`.
    stage_exp: Vec<Option<DenseMatrix>>,
    full_exp: DenseMatrix,
    a_mats: Vec<Vec<Option<DenseMatrix>>>,
    b_mats: Vec<Option<DenseMatrix>>,
}

impl Stepper {
    pub fn new(tab: &ExpRKTableau, ops: &OperatorPair, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::param(format!(
                "step size must be positive, got {tau}"
            )));
        }
        let src = CoefficientSource::new(tab, ops, tau)?;
        let nonzero = |c: &PhiCombo| (!c.is_zero()).then(|| src.combo(c));
        let stage_exp = tab
            .c()
            .iter()
            .map(|&c| (c != 0.0).then(|| src.exp(c)))
            .collect();
        let a_mats = (0..tab.stages())
            .map(|i| tab.a_row(i).iter().map(nonzero).collect())
            .collect();
        let b_mats = tab.b_all().iter().map(nonzero).collect();
        Ok(Self {
            tau,
            n: ops.dim(),
            b_op: SparseRows::from_dense(ops.b()),
            stage_exp,
            full_exp: src.exp(1.0),
            a_mats,
            b_mats,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// One step `u ↦ u⁺`.
    pub fn step(&self, u: &Vector) -> Result<Vector> {
        if u.len() != self.n {
            return Err(Error::dim(format!(
                "state of length {} for {}-dimensional operators",
                u.len(),
                self.n
            )));
        }
        let mut out = vec![0.0; self.n];
        self.advance(u.as_slice(), &mut out);
        Ok(Vector::from_raw(out))
    }

    fn advance(&self, u: &[f64], out: &mut [f64]) {
        let s = self.stage_exp.len();
        let mut bu: Vec<Vec<f64>> = Vec::with_capacity(s);
        let mut stage = vec![0.0; self.n];
        for i in 0..s {
            match &self.stage_exp[i] {
                Some(e) => e.mul_slice_into(u, &mut stage),
                None => stage.copy_from_slice(u),
            }
            for (j, a) in self.a_mats[i].iter().enumerate() {
                if let Some(a) = a {
                    a.mul_slice_acc(self.tau, &bu[j], &mut stage);
                }
            }
            let mut b_stage = vec![0.0; self.n];
            self.b_op.mul_slice_into(&stage, &mut b_stage);
            bu.push(b_stage);
        }
        self.full_exp.mul_slice_into(u, out);
        for (b, bui) in self.b_mats.iter().zip(&bu) {
            if let Some(b) = b {
                b.mul_slice_acc(self.tau, bui, out);
            }
        }
    }
}

/// One step, recomputing every coefficient matrix.
pub fn step(tab: &ExpRKTableau, ops: &OperatorPair, tau: f64, u: &Vector) -> Result<Vector> {
    Stepper::new(tab, ops, tau)?.step(u)
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub final_state: Vector,
    pub steps: usize,
    pub tau: f64,
    /// `u_0, u_1, …, u_N` when requested.
    pub trace: Option<Vec<Vector>>,
}

/// Checks that `t_final/tau` is a positive integer and returns it.
pub fn step_count(t_final: f64, tau: f64) -> Result<usize> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::param(format!(
            "step size must be positive, got {tau}"
        )));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::param(format!(
            "final time must be positive, got {t_final}"
        )));
    }
    let ratio = t_final / tau;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > STEP_COUNT_TOL {
        return Err(Error::param(format!(
            "step {tau} does not divide final time {t_final} (ratio {ratio})"
        )));
    }
    Ok(n as usize)
}

pub fn solve(
    tab: &ExpRKTableau,
    ops: &OperatorPair,
    u0: &Vector,
    t_final: f64,
    tau: f64,
) -> Result<SolveResult> {
    solve_with(tab, ops, u0, t_final, tau, false)
}

/// [`solve`] with optional capture of every intermediate state.
pub fn solve_with(
    tab: &ExpRKTableau,
    ops: &OperatorPair,
    u0: &Vector,
    t_final: f64,
    tau: f64,
    keep_trace: bool,
) -> Result<SolveResult> {
    let steps = step_count(t_final, tau)?;
    if u0.len() != ops.dim() {
        return Err(Error::dim(format!(
            "initial state of length {} for {}-dimensional operators",
            u0.len(),
            ops.dim()
        )));
    }
    let stepper = Stepper::new(tab, ops, tau)?;
    let mut trace = keep_trace.then(|| vec![u0.clone()]);
    let mut u = u0.as_slice().to_vec();
    let mut next = vec![0.0; u.len()];
    for k in 0..steps {
        stepper.advance(&u, &mut next);
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::Instability { step: k + 1 });
        }
        std::mem::swap(&mut u, &mut next);
        if let Some(t) = trace.as_mut() {
            t.push(Vector::from_raw(u.clone()));
        }
    }
    Ok(SolveResult {
        final_state: Vector::from_raw(u),
        steps,
        tau,
        trace,
    })
}
