use steklov_core::analysis::{convergence_study, OmegaSource};
use steklov_core::kernels::density_by_name;
use steklov_core::operators::{OperatorConfig, SteklovOperator};
use steklov_core::target::resolve_catalog_function;

#[test]
fn step_converges_pointwise_away_from_the_jump() {
    let f = resolve_catalog_function("step_half").unwrap();
    for kernel in ["logistic", "tanh"] {
        let phi = density_by_name(kernel).unwrap();
        for r in 1..=3 {
            let errors: Vec<[f64; 4]> = [20, 80, 320]
                .iter()
                .map(|&n| {
                    let cfg = OperatorConfig::for_function(&f, n, r, phi.clone()).unwrap();
                    let op = SteklovOperator::new(&f, cfg).unwrap();
                    [0.2, 0.4, 0.6, 0.85].map(|x| (op.eval(x).unwrap() - f.eval(x)).abs())
                })
                .collect();
            for i in 0..4 {
                assert!(
                    errors[1][i] < errors[0][i] && errors[2][i] <= errors[1][i] + 1e-15,
                    "{kernel} r = {r}: {errors:?}"
                );
            }
            assert!(
                errors[2].iter().all(|&e| e < 1e-3),
                "{kernel} r = {r}: {:?}",
                errors[2]
            );
        }
    }
}

#[test]
fn study_rows_follow_the_order_policy() {
    let f = resolve_catalog_function("sin_pi").unwrap();
    let phi = density_by_name("logistic").unwrap();
    let first = convergence_study(&f, &phi, 1, &[10, 20, 30, 60], 1001).unwrap();
    assert!(first.rows.iter().all(|row| row.bound.is_none()));
    assert_eq!(first.omega_source, None);
    let orders: Vec<bool> = first
        .rows
        .iter()
        .map(|row| row.empirical_order.is_some())
        .collect();
    assert_eq!(orders, [false, true, false, true]);
    let csv = first.to_csv();
    assert!(csv.lines().nth(1).unwrap().ends_with(",,"));

    let second = convergence_study(&f, &phi, 2, &[10, 20, 40], 1001).unwrap();
    assert_eq!(second.omega_source, Some(OmegaSource::Lipschitz));
    assert!(second.violations().is_empty());
    // boundary effects slow the first doublings below the asymptotic rate
    for row in &second.rows[1..] {
        assert!(row.empirical_order.unwrap() > 0.5, "{row:?}");
    }
}

#[test]
fn empty_ranges_are_reported_per_row() {
    let f = resolve_catalog_function("square").unwrap();
    let phi = density_by_name("tanh").unwrap();
    let report = convergence_study(&f, &phi, 4, &[2, 3, 10], 1001).unwrap();
    assert!(report.rows[0]
        .error
        .as_deref()
        .unwrap()
        .contains("invalid index range"));
    assert!(report.rows[0].sup_error.is_none());
    assert!(report.rows[2].error.is_none() && report.rows[2].sup_error.is_some());
}

#[test]
fn reports_are_reproducible() {
    let f = resolve_catalog_function("abs_shift").unwrap();
    let phi = density_by_name("tanh").unwrap();
    let a = convergence_study(&f, &phi, 3, &[10, 20, 40, 80], 1001)
        .unwrap()
        .to_csv();
    let b = convergence_study(&f, &phi, 3, &[10, 20, 40, 80], 1001)
        .unwrap()
        .to_csv();
    assert_eq!(a, b);
}

#[test]
fn unsampled_modulus_is_labelled() {
    let f = resolve_catalog_function("step_half").unwrap();
    let phi = density_by_name("logistic").unwrap();
    let report = convergence_study(&f, &phi, 2, &[10, 20], 1001).unwrap();
    assert_eq!(report.omega_source, Some(OmegaSource::Estimated));
    assert_eq!(OmegaSource::Estimated.label(), "estimated-omega");
}
