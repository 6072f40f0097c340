//! Convergence studies: a scheme across a grid of step sizes against the RK4
//! reference, errors at the final time in three discrete norms, and fitted
//! orders. Results serialize to CSV:
//!
//! ```text
//! tau,err_l1,err_l2,err_linf,flag
//! 6.2500000000000000e-2,...,ok
//! # fitted_order_l1=<v> fitted_order_l2=<v> fitted_order_linf=<v>
//! # scheme=<name> n=<n> nu=<v> T=<v> tau_ref=<v>
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::discretize::{
    build_grid, build_operators, discrete_norms, initial_data, DiscreteNormTriple, NormKind,
};
use crate::error::{Error, Result};
use crate::exprk::{
    default_reference_step, scheme_euler, scheme_second_order, scheme_third_order, solve,
    solve_reference_rk4, step_count, ExpRKTableau,
};

pub const CSV_HEADER: &str = "tau,err_l1,err_l2,err_linf,flag";
/// Minimum ratio between the coarsest admissible τ_ref and the finest τ.
pub const REFERENCE_RATIO: f64 = 16.0;
pub const MIN_TAU_COUNT: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub enum SchemeSpec {
    Euler,
    SecondOrder { c: f64 },
    ThirdOrder,
    Custom(ExpRKTableau),
}

impl SchemeSpec {
    /// Parses `euler`, `rk2` (with `c`), `rk2(<c>)` or `rk3paper`.
    pub fn parse(name: &str, c: f64) -> Result<Self> {
        let name = name.trim();
        match name {
            "euler" => Ok(Self::Euler),
            "rk2" => Ok(Self::SecondOrder { c }),
            "rk3paper" | "rk3" => Ok(Self::ThirdOrder),
            _ => {
                if let Some(inner) = name.strip_prefix("rk2(").and_then(|s| s.strip_suffix(')')) {
                    let c = inner
                        .parse()
                        .map_err(|_| Error::Config(format!("bad parameter in scheme '{name}'")))?;
                    return Ok(Self::SecondOrder { c });
                }
                Err(Error::Config(format!(
                    "unknown scheme '{name}' (expected euler, rk2, rk3paper)"
                )))
            }
        }
    }

    pub fn tableau(&self) -> Result<ExpRKTableau> {
        match self {
            Self::Euler => Ok(scheme_euler()),
            Self::SecondOrder { c } => scheme_second_order(*c),
            Self::ThirdOrder => Ok(scheme_third_order()),
            Self::Custom(t) => Ok(t.clone()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Euler => "euler".into(),
            Self::SecondOrder { c } => format!("rk2({c})"),
            Self::ThirdOrder => "rk3paper".into(),
            Self::Custom(t) => t.name().to_string(),
        }
    }
}

/// `2⁻⁴, 2⁻⁵, …, 2⁻¹⁰`.
pub fn default_tau_list() -> Vec<f64> {
    (4..=10).map(|k| 0.5f64.powi(k)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub n_inner: usize,
    pub nu: f64,
    pub t_final: f64,
    pub scheme: SchemeSpec,
    pub tau_list: Vec<f64>,
    /// `None` selects [`default_reference_step`].
    pub tau_ref: Option<f64>,
    pub norms: Vec<NormKind>,
}

impl ExperimentSpec {
    /// The advection–diffusion testbed: `n = 399`, `ν = 0.2`, `T = 1`.
    pub fn testbed(scheme: SchemeSpec) -> Self {
        Self {
            n_inner: 399,
            nu: 0.2,
            t_final: 1.0,
            scheme,
            tau_list: default_tau_list(),
            tau_ref: None,
            norms: NormKind::ALL.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau_list.len() < MIN_TAU_COUNT {
            return Err(Error::Config(format!(
                "tau_list has {} entries; order fitting needs tau_list to have >= {MIN_TAU_COUNT} entries",
                self.tau_list.len()
            )));
        }
        if self.tau_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("tau_list must be strictly decreasing".into()));
        }
        for &tau in &self.tau_list {
            step_count(self.t_final, tau)
                .map_err(|e| Error::Config(format!("tau_list entry {tau}: {e}")))?;
        }
        if self.n_inner < 2 {
            return Err(Error::Config(format!(
                "n must be at least 2, got {}",
                self.n_inner
            )));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::Config(format!(
                "nu must be positive, got {}",
                self.nu
            )));
        }
        if let Some(r) = self.tau_ref {
            self.check_reference_step(r)?;
        }
        self.scheme
            .tableau()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    fn check_reference_step(&self, tau_ref: f64) -> Result<()> {
        let finest = self.tau_list.iter().copied().fold(f64::INFINITY, f64::min);
        if tau_ref > finest / REFERENCE_RATIO * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "tau_ref {tau_ref} must be <= min(tau_list)/{REFERENCE_RATIO} = {}",
                finest / REFERENCE_RATIO
            )));
        }
        step_count(self.t_final, tau_ref).map_err(|e| Error::Config(format!("tau_ref: {e}")))?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowFlag {
    Ok,
    Unstable,
    /// Bit-identical to the reference: kept, but excluded from order fits.
    ZeroError,
}

impl RowFlag {
    pub fn csv_name(self) -> &'static str {
        match self {
            RowFlag::Unstable => "unstable",
            RowFlag::Ok | RowFlag::ZeroError => "ok",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRow {
    pub tau: f64,
    /// NaN when the run was unstable.
    pub errors: DiscreteNormTriple,
    pub flag: RowFlag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderFit {
    /// Least-squares slope of `log err` against `log τ`.
    pub fitted: f64,
    /// `log(e_i/e_{i+1}) / log(τ_i/τ_{i+1})` for consecutive rows.
    pub pairwise: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportMeta {
    pub scheme: String,
    pub n_inner: usize,
    pub nu: f64,
    pub t_final: f64,
    pub tau_ref: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub meta: ReportMeta,
    pub norms: Vec<NormKind>,
    pub rows: Vec<ErrorRow>,
    /// One entry per selected norm that had at least two usable rows.
    pub fits: BTreeMap<NormKind, OrderFit>,
}

impl ConvergenceReport {
    pub fn fitted_order(&self, norm: NormKind) -> Option<f64> {
        self.fits.get(&norm).map(|f| f.fitted)
    }

    fn usable_rows(&self) -> impl Iterator<Item = &ErrorRow> {
        self.rows.iter().filter(|r| r.flag == RowFlag::Ok)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        if self.norms.is_empty() {
            return out;
        }
        let cell = |kind: NormKind, v: f64| -> String {
            if !self.norms.contains(&kind) {
                String::new()
            } else {
                fmt_sig17(v)
            }
        };
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_sig17(r.tau),
                cell(NormKind::L1, r.errors.l1),
                cell(NormKind::L2, r.errors.l2),
                cell(NormKind::LInf, r.errors.linf),
                r.flag.csv_name()
            );
        }
        let fit = |k: NormKind| {
            self.fitted_order(k)
                .map_or_else(|| "nan".to_string(), |v| v.to_string())
        };
        let _ = writeln!(
            out,
            "# fitted_order_l1={} fitted_order_l2={} fitted_order_linf={}",
            fit(NormKind::L1),
            fit(NormKind::L2),
            fit(NormKind::LInf)
        );
        let m = &self.meta;
        let _ = writeln!(
            out,
            "# scheme={} n={} nu={} T={} tau_ref={}",
            m.scheme, m.n_inner, m.nu, m.t_final, m.tau_ref
        );
        out
    }
}

/// 17 significant digits in scientific notation; `nan` for NaN.
pub fn fmt_sig17(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Least-squares and pairwise orders from `(τ, error)` points.
pub fn fit_order(points: &[(f64, f64)]) -> Result<OrderFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "order fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|&(t, e)| !(t > 0.0 && e > 0.0 && e.is_finite()))
    {
        return Err(Error::InsufficientData(
            "order fit needs positive finite step sizes and errors".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all step sizes are equal".into()));
    }
    let pairwise = points
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect();
    Ok(OrderFit {
        fitted: sxy / sxx,
        pairwise,
    })
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    spec.validate()?;
    let tableau = spec.scheme.tableau()?;
    let grid = build_grid(spec.n_inner)?;
    let ops = build_operators(&grid, spec.nu)?;
    let u0 = initial_data(&grid);

    let tau_ref = match spec.tau_ref {
        Some(t) => t,
        None => {
            let t = default_reference_step(&ops, spec.t_final)?;
            spec.check_reference_step(t)?;
            t
        }
    };
    let reference = solve_reference_rk4(&ops, &u0, spec.t_final, tau_ref)?;
    // shared by every τ run below
    ops.a_eigen()?;

    let rows = spec
        .tau_list
        .par_iter()
        .map(|&tau| -> Result<ErrorRow> {
            match solve(&tableau, &ops, &u0, spec.t_final, tau) {
                Ok(res) => {
                    let errors = discrete_norms(&grid, &res.final_state.sub(&reference)?)?;
                    let zero = spec.norms.iter().any(|&k| errors.get(k) == 0.0);
                    Ok(ErrorRow {
                        tau,
                        errors,
                        flag: if zero {
                            RowFlag::ZeroError
                        } else {
                            RowFlag::Ok
                        },
                    })
                }
                Err(Error::Instability { .. }) => Ok(ErrorRow {
                    tau,
                    errors: DiscreteNormTriple {
                        l1: f64::NAN,
                        l2: f64::NAN,
                        linf: f64::NAN,
                    },
                    flag: RowFlag::Unstable,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = ConvergenceReport {
        meta: ReportMeta {
            scheme: spec.scheme.name(),
            n_inner: spec.n_inner,
            nu: spec.nu,
            t_final: spec.t_final,
            tau_ref,
        },
        norms: spec.norms.clone(),
        rows,
        fits: BTreeMap::new(),
    };
    report.fits = fits_for(&report);
    Ok(report)
}

fn fits_for(report: &ConvergenceReport) -> BTreeMap<NormKind, OrderFit> {
    let mut fits = BTreeMap::new();
    for &kind in &report.norms {
        let pts: Vec<(f64, f64)> = report
            .usable_rows()
            .map(|r| (r.tau, r.errors.get(kind)))
            .collect();
        if let Ok(f) = fit_order(&pts) {
            fits.insert(kind, f);
        }
    }
    fits
}

pub fn emit_csv(report: &ConvergenceReport, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_csv()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Content of a CSV written by [`emit_csv`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedCsv {
    pub norms: Vec<NormKind>,
    pub rows: Vec<ErrorRow>,
    pub fitted: BTreeMap<NormKind, f64>,
    pub meta: Option<ReportMeta>,
}

pub fn parse_csv(text: &str) -> Result<ParsedCsv> {
    let bad = |line: usize, msg: String| Error::Parse {
        path: "<csv>".into(),
        line,
        column: 1,
        message: msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(bad(1, "missing header".into())),
    }
    let mut rows = Vec::new();
    let mut present = [false; 3];
    let mut fitted = BTreeMap::new();
    let mut meta = None;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if let Some(rest) = line.strip_prefix("# ") {
            let kv: BTreeMap<&str, &str> =
                rest.split(' ').filter_map(|t| t.split_once('=')).collect();
            if kv.contains_key("scheme") {
                let get = |k: &str| {
                    kv.get(k)
                        .copied()
                        .ok_or_else(|| bad(lineno, format!("missing {k}")))
                };
                let num = |k: &str| -> Result<f64> {
                    get(k)?.parse().map_err(|_| bad(lineno, format!("bad {k}")))
                };
                meta = Some(ReportMeta {
                    scheme: get("scheme")?.to_string(),
                    n_inner: get("n")?.parse().map_err(|_| bad(lineno, "bad n".into()))?,
                    nu: num("nu")?,
                    t_final: num("T")?,
                    tau_ref: num("tau_ref")?,
                });
            } else {
                for kind in NormKind::ALL {
                    if let Some(v) = kv.get(format!("fitted_order_{}", kind.name()).as_str()) {
                        let v: f64 = v
                            .parse()
                            .map_err(|_| bad(lineno, "bad fitted order".into()))?;
                        if !v.is_nan() {
                            fitted.insert(kind, v);
                        }
                    }
                }
            }
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 5 {
            return Err(bad(
                lineno,
                format!("expected 5 fields, got {}", cells.len()),
            ));
        }
        let num = |s: &str| -> Result<f64> {
            if s == "nan" {
                Ok(f64::NAN)
            } else {
                s.parse()
                    .map_err(|_| bad(lineno, format!("bad number '{s}'")))
            }
        };
        let mut errs = [f64::NAN; 3];
        for (k, cell) in cells[1..4].iter().enumerate() {
            if !cell.is_empty() {
                present[k] = true;
                errs[k] = num(cell)?;
            }
        }
        let flag = match cells[4] {
            "ok" if errs.contains(&0.0) => RowFlag::ZeroError,
            "ok" => RowFlag::Ok,
            "unstable" => RowFlag::Unstable,
            other => return Err(bad(lineno, format!("unknown flag '{other}'"))),
        };
        rows.push(ErrorRow {
            tau: num(cells[0])?,
            errors: DiscreteNormTriple {
                l1: errs[0],
                l2: errs[1],
                linf: errs[2],
            },
            flag,
        });
    }
    let norms = NormKind::ALL
        .iter()
        .zip(present)
        .filter_map(|(&k, p)| p.then_some(k))
        .collect();
    Ok(ParsedCsv {
        norms,
        rows,
        fitted,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_exact_powers() {
        let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|&t| (t, t)).collect();
        assert!((fit_order(&pts).unwrap().fitted - 1.0).abs() < 1e-12);
        for c in [1e-3, 7.0] {
            let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|&t| (t, c * t * t)).collect();
            assert!((fit_order(&pts).unwrap().fitted - 2.0).abs() < 1e-12);
        }
        let pts = [(0.1, 1e-2), (0.05, 2.5e-3), (0.025, 6.25e-4)];
        let f = fit_order(&pts).unwrap();
        assert_eq!(f.pairwise.len(), 2);
        for p in f.pairwise {
            assert!((p - 2.0).abs() < 1e-12);
        }
        assert!(matches!(
            fit_order(&pts[..1]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn scheme_names_parse() {
        assert_eq!(SchemeSpec::parse("euler", 0.5).unwrap(), SchemeSpec::Euler);
        assert_eq!(
            SchemeSpec::parse("rk2", 0.3).unwrap(),
            SchemeSpec::SecondOrder { c: 0.3 }
        );
        assert_eq!(
            SchemeSpec::parse("rk2(0.5)", 0.3).unwrap(),
            SchemeSpec::SecondOrder { c: 0.5 }
        );
        assert_eq!(
            SchemeSpec::parse("rk3paper", 0.5).unwrap(),
            SchemeSpec::ThirdOrder
        );
        assert!(SchemeSpec::parse("etd3rk", 0.5).is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = ExperimentSpec::testbed(SchemeSpec::Euler);
        assert!(s.validate().is_ok());
        s.tau_list = vec![0.5, 0.25];
        let msg = s.validate().unwrap_err().to_string();
        assert!(msg.contains(">= 4 entries"), "{msg}");
        s.tau_list = vec![0.5, 0.25, 0.3, 0.125];
        assert!(s.validate().is_err());
        s.tau_list = vec![0.5, 0.25, 0.2, 0.15];
        assert!(s.validate().is_err());
        s.tau_list = default_tau_list();
        s.tau_ref = Some(1.0 / 8192.0);
        assert!(s.validate().is_err());
        s.tau_ref = Some(1.0 / 16384.0);
        assert!(s.validate().is_ok());
    }

    fn sample_report(norms: Vec<NormKind>) -> ConvergenceReport {
        let rows: Vec<ErrorRow> = [0.25, 0.125, 0.0625]
            .iter()
            .map(|&t: &f64| ErrorRow {
                tau: t,
                errors: DiscreteNormTriple {
                    l1: 0.3 * t * t,
                    l2: std::f64::consts::PI * t * t,
                    linf: t * t * (1.0 + t),
                },
                flag: RowFlag::Ok,
            })
            .collect();
        let mut r = ConvergenceReport {
            meta: ReportMeta {
                scheme: "rk2(0.5)".into(),
                n_inner: 10,
                nu: 0.2,
                t_final: 1.0,
                tau_ref: 1.0 / 1024.0,
            },
            norms,
            rows,
            fits: BTreeMap::new(),
        };
        r.fits = fits_for(&r);
        r
    }

    #[test]
    fn csv_layout() {
        let empty = sample_report(vec![]);
        assert_eq!(empty.to_csv(), format!("{CSV_HEADER}\n"));
        let full = sample_report(NormKind::ALL.to_vec());
        let csv = full.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 3 + 2);
        assert!(lines[1].starts_with("2.5000000000000000e-1,"));
        assert!(lines[4].starts_with("# fitted_order_l1="));
        assert_eq!(
            lines[5],
            "# scheme=rk2(0.5) n=10 nu=0.2 T=1 tau_ref=0.0009765625"
        );
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }

    #[test]
    fn csv_roundtrip() {
        let r = sample_report(NormKind::ALL.to_vec());
        let parsed = parse_csv(&r.to_csv()).unwrap();
        assert_eq!(parsed.rows, r.rows);
        assert_eq!(parsed.norms, r.norms);
        assert_eq!(parsed.meta.as_ref(), Some(&r.meta));
        for (k, f) in &r.fits {
            assert_eq!(parsed.fitted[k], f.fitted);
        }
    }

    #[test]
    fn csv_partial_norms_and_unstable() {
        let mut r = sample_report(vec![NormKind::L2]);
        r.rows[0].flag = RowFlag::Unstable;
        r.rows[0].errors.l2 = f64::NAN;
        r.fits = fits_for(&r);
        let csv = r.to_csv();
        assert!(csv.lines().nth(1).unwrap().ends_with(",,nan,,unstable"));
        assert!(csv.contains("fitted_order_l1=nan"));
        let parsed = parse_csv(&csv).unwrap();
        assert_eq!(parsed.norms, vec![NormKind::L2]);
        assert_eq!(parsed.rows[0].flag, RowFlag::Unstable);
        // order fit excluded the unstable row
        assert_eq!(r.fits[&NormKind::L2].pairwise.len(), 1);
    }

    #[test]
    fn emit_reports_path_on_failure() {
        let r = sample_report(vec![]);
        let err = emit_csv(&r, Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }

    #[test]
    fn small_experiment_runs() {
        let spec = ExperimentSpec {
            n_inner: 15,
            nu: 0.2,
            t_final: 1.0,
            scheme: SchemeSpec::Euler,
            tau_list: vec![0.125, 0.0625, 0.03125, 0.015625],
            tau_ref: None,
            norms: NormKind::ALL.to_vec(),
        };
        let r = run_experiment(&spec).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(r.rows.iter().all(|row| row.flag == RowFlag::Ok));
        let p = r.fitted_order(NormKind::L2).unwrap();
        assert!(p > 0.8 && p < 1.3, "{p}");
    }
}
