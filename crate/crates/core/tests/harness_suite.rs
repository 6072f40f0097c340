use std::sync::OnceLock;

use stiffexp::discretize::{build_grid, build_operators, discrete_norms, initial_data, NormKind};
use stiffexp::exprk::solve_reference_rk4;
use stiffexp::harness::*;

fn reports() -> &'static [ConvergenceReport; 3] {
    static CELL: OnceLock<[ConvergenceReport; 3]> = OnceLock::new();
    CELL.get_or_init(|| {
        [
            SchemeSpec::Euler,
            SchemeSpec::SecondOrder { c: 0.5 },
            SchemeSpec::ThirdOrder,
        ]
        .map(|s| run_experiment(&ExperimentSpec::testbed(s)).unwrap())
    })
}

#[test]
fn errors_decrease_under_halving() {
    for r in reports() {
        assert!(r.rows.iter().all(|row| row.flag == RowFlag::Ok));
        for k in NormKind::ALL {
            for w in r.rows.windows(2) {
                assert!(
                    w[1].errors.get(k) < w[0].errors.get(k),
                    "{} {k:?}",
                    r.meta.scheme
                );
            }
        }
    }
}

#[test]
fn fitted_orders_are_ordered() {
    let [e, r2, r3] = reports();
    for k in NormKind::ALL {
        let (a, b, c) = (
            e.fitted_order(k).unwrap(),
            r2.fitted_order(k).unwrap(),
            r3.fitted_order(k).unwrap(),
        );
        assert!(a < b && b < c, "{k:?}: {a} {b} {c}");
    }
}

#[test]
fn pairwise_orders_have_one_entry_per_halving() {
    for r in reports() {
        for fit in r.fits.values() {
            assert_eq!(fit.pairwise.len(), r.rows.len() - 1);
            assert!(fit.fitted.is_finite());
        }
    }
}

#[test]
fn reference_error_is_negligible() {
    // |err(ref₁) − err(ref₂)| ≤ ‖ref₁ − ref₂‖, so a reference discrepancy below
    // 1% of the smallest reported error bounds every relative change by 1%
    let g = build_grid(399).unwrap();
    let ops = build_operators(&g, 0.2).unwrap();
    let u0 = initial_data(&g);
    let tau_ref = reports()[0].meta.tau_ref;
    let r1 = solve_reference_rk4(&ops, &u0, 1.0, tau_ref).unwrap();
    let r2 = solve_reference_rk4(&ops, &u0, 1.0, tau_ref / 2.0).unwrap();
    let gap = discrete_norms(&g, &r1.sub(&r2).unwrap()).unwrap();
    for r in reports() {
        for k in NormKind::ALL {
            let smallest = r
                .rows
                .iter()
                .map(|row| row.errors.get(k))
                .fold(f64::INFINITY, f64::min);
            assert!(
                gap.get(k) < 0.01 * smallest,
                "{} {k:?}: gap {} vs {smallest}",
                r.meta.scheme,
                gap.get(k)
            );
        }
    }
}

#[test]
fn identical_specs_give_identical_csv() {
    let spec = ExperimentSpec {
        n_inner: 63,
        tau_list: vec![0.125, 0.0625, 0.03125, 0.015625],
        ..ExperimentSpec::testbed(SchemeSpec::ThirdOrder)
    };
    let a = run_experiment(&spec).unwrap().to_csv();
    let b = run_experiment(&spec).unwrap().to_csv();
    assert_eq!(a, b);
}

#[test]
fn emitted_file_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("conv.csv");
    let r = &reports()[1];
    emit_csv(r, &path).unwrap();
    emit_csv(r, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, r.to_csv());
    let parsed = parse_csv(&text).unwrap();
    assert_eq!(parsed.rows, r.rows);
    assert_eq!(parsed.meta.as_ref(), Some(&r.meta));
    assert_eq!(text.lines().count(), 1 + r.rows.len() + 2);
}

#[test]
fn norm_subset_leaves_other_columns_empty() {
    let spec = ExperimentSpec {
        n_inner: 31,
        norms: vec![NormKind::L2],
        tau_list: vec![0.25, 0.125, 0.0625, 0.03125],
        ..ExperimentSpec::testbed(SchemeSpec::Euler)
    };
    let r = run_experiment(&spec).unwrap();
    let csv = r.to_csv();
    let line = csv.lines().nth(1).unwrap();
    let cells: Vec<&str> = line.split(',').collect();
    assert!(cells[1].is_empty() && !cells[2].is_empty() && cells[3].is_empty());
    assert!(r.fitted_order(NormKind::L1).is_none());
    let empty = ExperimentSpec {
        norms: vec![],
        ..spec
    };
    assert_eq!(
        run_experiment(&empty).unwrap().to_csv(),
        format!("{CSV_HEADER}\n")
    );
}

#[test]
fn unstable_reference_step_is_a_parameter_error() {
    let spec = ExperimentSpec {
        n_inner: 399,
        tau_list: vec![0.5, 0.25, 0.125, 0.0625],
        tau_ref: Some(1.0 / 1024.0),
        ..ExperimentSpec::testbed(SchemeSpec::Euler)
    };
    assert!(matches!(
        run_experiment(&spec),
        Err(stiffexp::Error::Parameter(_))
    ));
}
