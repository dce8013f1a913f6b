use std::sync::{Arc, Mutex};

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use steklov_core::kernels::density_by_name;
use steklov_core::moments::absolute_moment_sum;
use steklov_core::operators::{index_range, kernel_sum, OperatorConfig, SteklovOperator};
use steklov_core::quadrature::QuadratureRule;
use steklov_core::steklov::{irwin_hall_pdf, steklov_mean, steklov_mean_oracle, SteklovConfig};
use steklov_core::target::{Interval, TargetFunction};

fn kernel_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["logistic", "tanh"])
}

fn unit(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> TargetFunction {
    TargetFunction::from_fn(name, Interval::unit(), f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operator_is_linear(
        kernel in kernel_name(),
        n in 6u32..60,
        r in 1u32..4,
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
        x in 0.0f64..=1.0,
    ) {
        let phi = density_by_name(kernel).unwrap();
        let f = unit("sin", |t| (3.0 * t).sin());
        let g = unit("exp", f64::exp);
        let combo = unit("combo", move |t| alpha * (3.0 * t).sin() + beta * t.exp());
        let eval = |h: &TargetFunction| {
            let cfg = OperatorConfig::for_function(h, n, r, phi.clone()).unwrap();
            SteklovOperator::new(h, cfg).unwrap().eval(x).unwrap()
        };
        let lhs = eval(&combo);
        let rhs = alpha * eval(&f) + beta * eval(&g);
        let scale = (1.0 + alpha.abs() + beta.abs()) * 8.0;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn first_order_operator_is_positive(
        kernel in kernel_name(),
        n in 2u32..80,
        freq in 0.5f64..20.0,
        x in 0.0f64..=1.0,
    ) {
        let phi = density_by_name(kernel).unwrap();
        let f = unit("abs-sin", move |t| (freq * t).sin().abs());
        let cfg = OperatorConfig::for_function(&f, n, 1, phi).unwrap();
        let op = SteklovOperator::new(&f, cfg).unwrap();
        prop_assert!(op.samples().iter().all(|&s| s >= 0.0));
        prop_assert!(op.eval(x).unwrap() >= 0.0);
    }

    #[test]
    fn operator_reads_only_the_domain(
        a in -2.0f64..2.0,
        len in 0.5f64..3.0,
        n in 4u32..40,
        r in 1u32..6,
    ) {
        let b = a + len;
        let seen = Arc::new(Mutex::new((f64::INFINITY, f64::NEG_INFINITY)));
        let probe = Arc::clone(&seen);
        let f = TargetFunction::from_fn("tracked", Interval::new(a, b).unwrap(), move |t| {
            let mut s = probe.lock().unwrap();
            s.0 = s.0.min(t);
            s.1 = s.1.max(t);
            t.cos()
        });
        let phi = density_by_name("logistic").unwrap();
        let Ok(cfg) = OperatorConfig::for_function(&f, n, r, phi) else {
            // empty index range for this (n, r): nothing is read
            return Ok(());
        };
        let op = SteklovOperator::new(&f, cfg).unwrap();
        op.evaluate_on_grid(17).unwrap();
        let (lo, hi) = *seen.lock().unwrap();
        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
        prop_assert!(lo >= a - slack && hi <= b + slack, "read [{lo}, {hi}] outside [{a}, {b}]");
    }

    #[test]
    fn moment_sum_is_periodic(
        kernel in kernel_name(),
        beta in 0u32..3,
        u in 0.0f64..1.0,
        shift in -20i32..20,
    ) {
        let phi = density_by_name(kernel).unwrap();
        let base = absolute_moment_sum(&phi, beta, u, 200);
        let shifted = absolute_moment_sum(&phi, beta, u + f64::from(shift), 200);
        prop_assert!((base - shifted).abs() <= 1e-11 * base.max(1.0), "{base} vs {shifted}");
    }

    #[test]
    fn collapsed_mean_matches_tensor_rule(
        r in 1u32..4,
        x in 0.0f64..0.5,
        h in 0.01f64..0.16,
        which in 0usize..2,
    ) {
        let f = match which {
            0 => unit("sin", |t| (5.0 * t).sin()),
            _ => unit("exp", |t| (2.0 * t).exp()),
        };
        let cfg = SteklovConfig::new(r, h).unwrap();
        let fast = steklov_mean(&f, cfg, x, &QuadratureRule::default()).unwrap();
        let oracle = steklov_mean_oracle(&f, cfg, x, 16).unwrap();
        prop_assert!((fast - oracle).abs() <= 1e-10, "{fast} vs {oracle}");
    }

    #[test]
    fn kernel_sum_stays_above_floor(
        kernel in kernel_name(),
        a in -3.0f64..3.0,
        len in 0.2f64..4.0,
        n in 1u32..200,
        r in 1u32..5,
        t in 0.0f64..=1.0,
    ) {
        let phi = density_by_name(kernel).unwrap();
        let interval = Interval::new(a, a + len).unwrap();
        let Ok(cfg) = OperatorConfig::new(n, r, interval, phi.clone()) else {
            return Ok(());
        };
        let (k_min, k_max) = index_range(&cfg).unwrap();
        let x = a + t * len;
        let sum = kernel_sum(&phi, n, x, k_min, k_max);
        prop_assert!(sum >= phi.eval(f64::from(r) + 1.0) * (1.0 - 1e-12));
    }

    #[test]
    fn constants_and_lines_are_reproduced_by_means(
        r in 2u32..6,
        x in 0.0f64..0.5,
        h in 0.001f64..0.1,
        c in -5.0f64..5.0,
    ) {
        let rule = QuadratureRule::default();
        let cfg = SteklovConfig::new(r, h).unwrap();
        let constant = unit("c", move |_| c);
        let line = unit("line", |t| 2.0 * t - 1.0);
        prop_assert!((steklov_mean(&constant, cfg, x, &rule).unwrap() - c).abs() <= 1e-12 * (1.0 + c.abs()));
        prop_assert!((steklov_mean(&line, cfg, x, &rule).unwrap() - (2.0 * x - 1.0)).abs() <= 1e-12);
    }
}

/// `p_r(x) = P(x − 1 ≤ U_1 + ⋯ + U_{r−1} ≤ x)`: a seeded Monte Carlo
/// estimate of that probability is an independent check on the density.
#[test]
fn irwin_hall_density_matches_sampling() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let samples = 2_000_000;
    for (r, x) in [(2u32, 0.7f64), (3, 1.5), (3, 0.4), (4, 2.0), (5, 1.3)] {
        let hits = (0..samples)
            .filter(|_| {
                let s: f64 = (1..r).map(|_| rng.gen::<f64>()).sum();
                (x - 1.0..=x).contains(&s)
            })
            .count();
        let estimate = hits as f64 / samples as f64;
        let exact = irwin_hall_pdf(r, x);
        // standard error is below 3.6e-4
        assert!(
            (estimate - exact).abs() < 2e-3,
            "r = {r}, x = {x}: {estimate} vs {exact}"
        );
    }
    assert!((irwin_hall_pdf(3, 1.5) - 0.75).abs() < 1e-15);
}
