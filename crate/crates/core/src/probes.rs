//! Numerical probes of the analytic hypotheses behind the convergence theory:
//! the smoothing bound `‖t^γ A^γ e^{−tA}‖ ≤ C`, relative boundedness
//! `‖BA^{−γ}‖, ‖A^{−γ}B‖ ≤ C`, and boundedness of the Fourier series
//! `Σ f̂_k (kπ)^{2β−1} (cos kπx + (1 − (−1)^k)x − 1)`.
//!
//! Each probe samples a quantity along an increasing grid and reports whether
//! the trend looks bounded: the last value is at most
//! [`TREND_TOLERANCE`] times the median of the earlier ones.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::discretize::{build_grid, build_operators, NormKind, OperatorPair};
use crate::error::{Error, Result};
use crate::harness::fmt_sig17;
use crate::matkernel::{frac_power, norm2_estimate};

pub const TREND_TOLERANCE: f64 = 1.05;
pub const NORM_ITERATIONS: usize = 50;
pub const NORM_REL_TOL: f64 = 1e-10;
pub const MIN_FOURIER_POINTS: usize = 1000;
/// Slack on the analytic smoothing envelope.
pub const ENVELOPE_SLACK: f64 = 1e-12;

/// Exponents of the analysis: `0 < γ < 1`, `0 < α ≤ ½`, `ζ > 0`, `β` free.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisParams {
    gamma: f64,
    alpha: f64,
    beta: f64,
    zeta: f64,
}

impl AnalysisParams {
    pub const DEFAULT_ZETA: f64 = 1e-2;

    pub fn new(gamma: f64, alpha: f64, beta: f64, zeta: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::param(format!("gamma = {gamma} outside (0, 1)")));
        }
        if !(alpha > 0.0 && alpha <= 0.5) {
            return Err(Error::param(format!("alpha = {alpha} outside (0, 1/2]")));
        }
        if !beta.is_finite() {
            return Err(Error::param("beta must be finite"));
        }
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(Error::param(format!("zeta = {zeta} must be positive")));
        }
        Ok(Self {
            gamma,
            alpha,
            beta,
            zeta,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    /// Strictly increasing.
    pub grid: Vec<f64>,
    /// Nonnegative, one per grid point.
    pub values: Vec<f64>,
    pub max: f64,
    pub bounded: bool,
}

impl ProbeReport {
    fn new(grid: Vec<f64>, values: Vec<f64>) -> Self {
        let max = values.iter().copied().fold(0.0, f64::max);
        let bounded = bounded_trend(&values);
        Self {
            grid,
            values,
            max,
            bounded,
        }
    }

    pub fn verdict(&self) -> &'static str {
        if self.bounded {
            "bounded"
        } else {
            "unbounded"
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("grid_value,quantity\n");
        for (g, v) in self.grid.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{}", fmt_sig17(*g), fmt_sig17(*v));
        }
        let _ = writeln!(out, "verdict,{}", self.verdict());
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Last value ≤ [`TREND_TOLERANCE`] × median of the earlier values.
/// Sequences shorter than two are trivially bounded.
pub fn bounded_trend(values: &[f64]) -> bool {
    let Some((&last, earlier)) = values.split_last() else {
        return true;
    };
    if earlier.is_empty() {
        return true;
    }
    let mut sorted = earlier.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };
    last <= TREND_TOLERANCE * median
}

fn require_increasing(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::param(format!("{what} is empty")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

/// `max_{x>0} x^γ e^{−x} = γ^γ e^{−γ}` (with `0⁰ = 1`).
pub fn smoothing_envelope(gamma: f64) -> f64 {
    gamma.powf(gamma) * (-gamma).exp()
}

/// `‖t^γ A^γ e^{−tA}‖₂ = max_λ (tλ)^γ e^{−tλ}` over the spectrum of a
/// symmetric positive definite `A`, for each `t` in `t_grid`.
pub fn smoothing_probe(ops: &OperatorPair, gamma: f64, t_grid: &[f64]) -> Result<ProbeReport> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::param(format!("gamma = {gamma} must be nonnegative")));
    }
    require_increasing(t_grid, "t grid")?;
    if t_grid[0] <= 0.0 {
        return Err(Error::param("t grid must be positive"));
    }
    let eigen = ops
        .a_eigen()?
        .ok_or_else(|| Error::Contract("smoothing probe needs a symmetric A".into()))?;
    if eigen.eigenvalues()[0] <= 0.0 {
        return Err(Error::Contract(
            "smoothing probe needs a positive definite A".into(),
        ));
    }
    let values = t_grid
        .iter()
        .map(|&t| {
            eigen
                .eigenvalues()
                .iter()
                .map(|&l| (t * l).powf(gamma) * (-t * l).exp())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(ProbeReport::new(t_grid.to_vec(), values))
}

/// `(‖B·A^{−γ}‖₂, ‖A^{−γ}·B‖₂)` on the `n`-point testbed.
pub fn relative_boundedness_norms(gamma: f64, n: usize, nu: f64) -> Result<(f64, f64)> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::param(format!("gamma = {gamma} outside (0, 1]")));
    }
    let ops = build_operators(&build_grid(n)?, nu)?;
    let eigen = ops.a_eigen()?.expect("testbed A is symmetric");
    let a_neg = frac_power(eigen, -gamma)?;
    let left = ops.b().matmul(&a_neg)?;
    let right = a_neg.matmul(ops.b())?;
    Ok((
        norm2_estimate(&left, NORM_ITERATIONS, NORM_REL_TOL),
        norm2_estimate(&right, NORM_ITERATIONS, NORM_REL_TOL),
    ))
}

/// `max(‖BA^{−γ}‖₂, ‖A^{−γ}B‖₂)` across the testbed sizes in `n_list`.
pub fn relative_boundedness_probe(gamma: f64, n_list: &[usize], nu: f64) -> Result<ProbeReport> {
    let grid: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    require_increasing(&grid, "n list")?;
    let values = n_list
        .iter()
        .map(|&n| relative_boundedness_norms(gamma, n, nu).map(|(l, r)| l.max(r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbeReport::new(grid, values))
}

/// Coefficients `f̂_k`, `k ≥ 1`, fed to [`fourier_beta_probe`].
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientRule {
    Zero,
    /// `f̂_k = 1/k`.
    InverseK,
    /// Sine coefficients of `4x(1 − x)`: `32/(kπ)³` for odd `k`, else 0.
    InitialData,
    Sum(Box<CoefficientRule>, Box<CoefficientRule>),
}

impl CoefficientRule {
    pub fn coefficient(&self, k: usize) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::InverseK => 1.0 / k as f64,
            Self::InitialData if k % 2 == 1 => 32.0 / (k as f64 * PI).powi(3),
            Self::InitialData => 0.0,
            Self::Sum(a, b) => a.coefficient(k) + b.coefficient(k),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zero" => Some(Self::Zero),
            "inverse-k" | "1/k" => Some(Self::InverseK),
            "initial-data" | "u0" => Some(Self::InitialData),
            _ => None,
        }
    }
}

/// Discrete norm of the partial sums `S_N(x)` on `points` equispaced nodes of
/// `[0, 1]`, for each `N` in `n_list`. `L¹` and `L²` use the trapezoidal rule.
pub fn fourier_beta_probe(
    rule: &CoefficientRule,
    beta: f64,
    n_list: &[usize],
    norm: NormKind,
    points: usize,
) -> Result<ProbeReport> {
    if points < MIN_FOURIER_POINTS {
        return Err(Error::param(format!(
            "x grid of {points} points; at least {MIN_FOURIER_POINTS} required"
        )));
    }
    if !beta.is_finite() {
        return Err(Error::param("beta must be finite"));
    }
    let grid: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    require_increasing(&grid, "N list")?;
    if n_list[0] == 0 {
        return Err(Error::param("N list entries must be positive"));
    }
    let h = 1.0 / (points - 1) as f64;
    let n_max = *n_list.last().expect("nonempty");
    let weights: Vec<f64> = (1..=n_max)
        .map(|k| rule.coefficient(k) * (k as f64 * PI).powf(2.0 * beta - 1.0))
        .collect();

    // partial sums at every node, snapshotted at each N
    let columns: Vec<Vec<f64>> = (0..points)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 * h;
            let mut acc = 0.0;
            let mut snaps = Vec::with_capacity(n_list.len());
            let mut next = n_list.iter().peekable();
            for k in 1..=n_max {
                let w = weights[k - 1];
                if w != 0.0 {
                    let kf = k as f64;
                    let boundary = if k % 2 == 1 { 2.0 * x - 1.0 } else { -1.0 };
                    acc += w * ((kf * PI * x).cos() + boundary);
                }
                if next.peek() == Some(&&k) {
                    snaps.push(acc);
                    next.next();
                }
            }
            snaps
        })
        .collect();

    let values = (0..n_list.len())
        .map(|s| {
            let col = columns.iter().map(|c| c[s]);
            match norm {
                NormKind::LInf => col.map(f64::abs).fold(0.0, f64::max),
                NormKind::L1 => trapezoid(col.map(f64::abs), h),
                NormKind::L2 => trapezoid(col.map(|v| v * v), h).sqrt(),
            }
        })
        .collect();
    Ok(ProbeReport::new(grid, values))
}

fn trapezoid(vals: impl ExactSizeIterator<Item = f64>, h: f64) -> f64 {
    let last = vals.len() - 1;
    vals.enumerate()
        .map(|(i, v)| if i == 0 || i == last { 0.5 * v } else { v })
        .sum::<f64>()
        * h
}
