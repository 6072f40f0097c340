//! Numerical residuals of the stiff order conditions up to order three.
//!
//! | no. | condition |
//! |-----|-----------|
//! | 1 | `Σ b_i(Z) = φ₁(Z)` |
//! | 2 | `Σ b_i(Z) c_i = φ₂(Z)` |
//! | 3 | `Σ_j a_ij(Z) = c_i φ₁(c_i Z)`, for each stage `i ≥ 2` |
//! | 4 | `Σ b_i(Z) c_i²/2 = φ₃(Z)` |
//! | 5 | `Σ b_i(Z) J (Σ_k a_ik(Z) c_k − c_i² φ₂(c_i Z)) = 0` |
//!
//! Stages are numbered from 1 in reports. Each residual is the ∞-norm of
//! left side minus right side.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretize::{build_grid, build_operators};
use crate::error::{Error, Result};
use crate::exprk::{Condition5Claim, ExpRKTableau};
use crate::matkernel::{phi_matrix, DenseMatrix};

/// Conditions are numbered 1 through this value.
pub const CONDITION_COUNT: u8 = 5;
/// Relative pass threshold: `residual ≤ PASS_TOL · (1 + ‖rhs‖∞)`.
pub const PASS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// Every coefficient at the given `Z`.
    Strong,
    /// Every coefficient and φ-function at `Z = 0`.
    WeakAllZero,
    /// Weights `b_i` at `Z = 0`; in condition 5 the bracket stays at `Z`.
    /// Conditions 1–4 are evaluated as in [`CheckMode::WeakAllZero`].
    WeakBOnly,
}

impl CheckMode {
    pub fn name(self) -> &'static str {
        match self {
            CheckMode::Strong => "strong",
            CheckMode::WeakAllZero => "weak-all-zero",
            CheckMode::WeakBOnly => "weak-b-only",
        }
    }
}

impl fmt::Display for CheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub condition: u8,
    /// 1-based stage index for condition 3.
    pub stage: Option<usize>,
    pub value: f64,
    /// ∞-norm of the right-hand side.
    pub rhs_norm: f64,
}

impl Residual {
    pub fn passes(&self) -> bool {
        self.value <= PASS_TOL * (1.0 + self.rhs_norm)
    }
}

/// Residuals of condition `no` for tableau `tab`.
///
/// `z` is the operator argument (a `1×1` zero matrix stands for the scalar
/// zero); `j` defaults to the identity and matters only for condition 5.
pub fn check_condition(
    tab: &ExpRKTableau,
    no: u8,
    z: &DenseMatrix,
    j: Option<&DenseMatrix>,
    mode: CheckMode,
) -> Result<Vec<Residual>> {
    if !(1..=CONDITION_COUNT).contains(&no) {
        return Err(Error::param(format!(
            "order condition number {no} outside 1..={CONDITION_COUNT}"
        )));
    }
    if !z.is_square() {
        return Err(Error::dim(format!(
            "test matrix is {}x{}, expected square",
            z.rows(),
            z.cols()
        )));
    }
    let n = z.rows();
    if let Some(j) = j {
        if j.rows() != n || j.cols() != n {
            return Err(Error::dim(format!(
                "J is {}x{}, expected {n}x{n}",
                j.rows(),
                j.cols()
            )));
        }
    }
    let zero = DenseMatrix::zeros(n, n);
    let (z_b, z_rest) = match mode {
        CheckMode::Strong => (z, z),
        CheckMode::WeakAllZero => (&zero, &zero),
        CheckMode::WeakBOnly if no == 5 => (&zero, z),
        CheckMode::WeakBOnly => (&zero, &zero),
    };
    let c = tab.c();
    let s = tab.stages();
    let b = |i: usize| tab.b(i).eval_matrix(z_b);
    let residual = |lhs: DenseMatrix, rhs: DenseMatrix, stage| -> Result<Residual> {
        Ok(Residual {
            condition: no,
            stage,
            value: lhs.sub(&rhs)?.norm_inf(),
            rhs_norm: rhs.norm_inf(),
        })
    };
    // Σ b_i(Z)·w_i for stage weights w
    let weighted_b = |w: &dyn Fn(usize) -> f64| -> Result<DenseMatrix> {
        let mut acc = DenseMatrix::zeros(n, n);
        for i in 0..s {
            let wi = w(i);
            if wi != 0.0 {
                acc.axpy(wi, &b(i)?);
            }
        }
        Ok(acc)
    };
    match no {
        1 => Ok(vec![residual(
            weighted_b(&|_| 1.0)?,
            phi_matrix(1, z_b)?,
            None,
        )?]),
        2 => Ok(vec![residual(
            weighted_b(&|i| c[i])?,
            phi_matrix(2, z_b)?,
            None,
        )?]),
        4 => Ok(vec![residual(
            weighted_b(&|i| 0.5 * c[i] * c[i])?,
            phi_matrix(3, z_b)?,
            None,
        )?]),
        3 => (1..s)
            .map(|i| {
                let mut lhs = DenseMatrix::zeros(n, n);
                for a in tab.a_row(i) {
                    lhs = lhs.add(&a.eval_matrix(z_rest)?)?;
                }
                let rhs = phi_matrix(1, &z_rest.scaled(c[i]))?.scaled(c[i]);
                residual(lhs, rhs, Some(i + 1))
            })
            .collect(),
        _ => {
            let mut lhs = DenseMatrix::zeros(n, n);
            for i in 1..s {
                let mut bracket = phi_matrix(2, &z_rest.scaled(c[i]))?.scaled(-c[i] * c[i]);
                for (k, a) in tab.a_row(i).iter().enumerate() {
                    if c[k] != 0.0 {
                        bracket.axpy(c[k], &a.eval_matrix(z_rest)?);
                    }
                }
                let jb = match j {
                    Some(j) => j.matmul(&bracket)?,
                    None => bracket,
                };
                lhs = lhs.add(&b(i)?.matmul(&jb)?)?;
            }
            Ok(vec![residual(lhs, zero, None)?])
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportEntry {
    pub residual: Residual,
    pub mode: CheckMode,
    /// Test matrix label, e.g. `zero`, `random6(seed=1)`, `testbed10(tau=0.1)`.
    pub z_spec: String,
    /// `I`, `random`, or `-` when `J` does not enter.
    pub j_spec: String,
    /// Whether the tableau claims this condition in this mode.
    pub claimed: bool,
}

impl ReportEntry {
    pub fn passes(&self) -> bool {
        self.residual.passes()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderConditionReport {
    pub scheme: String,
    pub entries: Vec<ReportEntry>,
}

impl OrderConditionReport {
    /// True when every claimed entry passes.
    pub fn claims_hold(&self) -> bool {
        self.entries
            .iter()
            .filter(|e| e.claimed)
            .all(ReportEntry::passes)
    }

    /// True when every entry of `condition` evaluated in `mode` passes.
    pub fn condition_passes(&self, condition: u8, mode: CheckMode) -> bool {
        let mut hits = self
            .entries
            .iter()
            .filter(|e| e.residual.condition == condition && e.mode == mode)
            .peekable();
        hits.peek().is_some() && hits.all(ReportEntry::passes)
    }

    pub fn entries_for(&self, condition: u8) -> impl Iterator<Item = &ReportEntry> {
        self.entries
            .iter()
            .filter(move |e| e.residual.condition == condition)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scheme: {}", self.scheme);
        let _ = writeln!(
            out,
            "{:<4} {:<5} {:<20} {:<13} {:<6} {:>12} {:>12} {:<7} status",
            "cond", "stage", "z", "mode", "j", "residual", "rhs_norm", "claimed"
        );
        for e in &self.entries {
            let r = &e.residual;
            let _ = writeln!(
                out,
                "{:<4} {:<5} {:<20} {:<13} {:<6} {:>12.3e} {:>12.3e} {:<7} {}",
                r.condition,
                r.stage.map_or_else(|| "-".to_string(), |s| s.to_string()),
                e.z_spec,
                e.mode.name(),
                e.j_spec,
                r.value,
                r.rhs_norm,
                if e.claimed { "yes" } else { "no" },
                if e.passes() { "pass" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "claimed conditions: {}",
            if self.claims_hold() {
                "all pass"
            } else {
                "FAILED"
            }
        );
        out
    }
}

/// Seeded `6×6` test matrix with spectrum in `Re z ≤ −½` and `‖Z‖₁ ≤ 3.5`.
pub fn random_stable_matrix(rng: &mut impl Rng, n: usize) -> DenseMatrix {
    let r = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.25..=0.25));
    let shift = r.norm_inf() + 0.5;
    r.sub(&DenseMatrix::identity(n).scaled(shift))
        .expect("same shape")
}

fn claimed(tab: &ExpRKTableau, condition: u8, mode: CheckMode) -> bool {
    let claims = tab.claims();
    if condition == 5 {
        match claims.condition5 {
            Condition5Claim::Strong => true,
            Condition5Claim::Weak => mode == CheckMode::WeakAllZero,
            Condition5Claim::None => false,
        }
    } else {
        claims.strong.contains(&condition)
    }
}

/// All five conditions on `Z = 0`, a seeded random stable `6×6` matrix, and
/// `Z = −0.1·A` for the 10-point testbed; condition 5 additionally with a
/// seeded random `J`.
pub fn full_report(tab: &ExpRKTableau, seed: u64) -> Result<OrderConditionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z_random = random_stable_matrix(&mut rng, 6);
    let j_random6 = DenseMatrix::from_fn(6, 6, |_, _| rng.gen_range(-1.0..=1.0));
    let j_random10 = DenseMatrix::from_fn(10, 10, |_, _| rng.gen_range(-1.0..=1.0));
    let testbed = build_operators(&build_grid(10)?, 0.2)?;
    let z_testbed = testbed.a().scaled(-0.1);

    let specs: [(&str, String, DenseMatrix, DenseMatrix, bool); 3] = [
        (
            "zero",
            "zero".into(),
            DenseMatrix::zeros(1, 1),
            DenseMatrix::zeros(1, 1),
            true,
        ),
        (
            "random",
            format!("random6(seed={seed})"),
            z_random,
            j_random6,
            false,
        ),
        (
            "testbed",
            "testbed10(tau=0.1)".into(),
            z_testbed,
            j_random10,
            false,
        ),
    ];

    let mut entries = Vec::new();
    let mut push = |residuals: Vec<Residual>, mode, z_spec: &str, j_spec: &str| {
        for r in residuals {
            entries.push(ReportEntry {
                residual: r,
                mode,
                z_spec: z_spec.to_string(),
                j_spec: j_spec.to_string(),
                claimed: claimed(tab, r.condition, mode),
            });
        }
    };
    for (_, label, z, j_rand, is_zero) in &specs {
        let mode = if *is_zero {
            CheckMode::WeakAllZero
        } else {
            CheckMode::Strong
        };
        for no in 1..=4 {
            push(check_condition(tab, no, z, None, mode)?, mode, label, "-");
        }
        if *is_zero {
            push(check_condition(tab, 5, z, None, mode)?, mode, label, "1");
        } else {
            push(check_condition(tab, 5, z, None, mode)?, mode, label, "I");
            push(
                check_condition(tab, 5, z, Some(j_rand), mode)?,
                mode,
                label,
                "random",
            );
            let weak_b = CheckMode::WeakBOnly;
            push(
                check_condition(tab, 5, z, None, weak_b)?,
                weak_b,
                label,
                "I",
            );
        }
    }
    Ok(OrderConditionReport {
        scheme: tab.name().to_string(),
        entries,
    })
}
