//! The classical normalized neural network operator `F_n` and the Steklov
//! operator `F_n^r`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::DensityFunction;
use crate::quadrature::QuadratureRule;
use crate::steklov::{SteklovRule, MAX_ORDER};
use crate::target::{Interval, TargetFunction};

/// Rounds `t` to the nearest integer when it is within rounding error of
/// it, so that e.g. `10 · 0.3` counts as exactly 3 before ceil/floor.
fn snap(t: f64) -> f64 {
    let nearest = t.round();
    if (t - nearest).abs() <= 1e-12 * nearest.abs().max(1.0) {
        nearest
    } else {
        t
    }
}

/// `(⌈n·a⌉, ⌊n·b⌋ − r)`, the summation limits of `F_n^r`.
pub fn index_range_for(interval: Interval, n: u32, r: u32) -> Result<(i64, i64)> {
    let nf = f64::from(n);
    let k_min = snap(nf * interval.a).ceil() as i64;
    let k_max = snap(nf * interval.b).floor() as i64 - i64::from(r);
    if k_min > k_max {
        return Err(Error::InvalidRange {
            k_min,
            k_max,
            n,
            r,
            a: interval.a,
            b: interval.b,
        });
    }
    Ok((k_min, k_max))
}

#[derive(Debug, Clone)]
pub struct OperatorConfig {
    n: u32,
    r: u32,
    interval: Interval,
    kernel: DensityFunction,
}

impl OperatorConfig {
    pub fn new(n: u32, r: u32, interval: Interval, kernel: DensityFunction) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if r == 0 {
            return Err(Error::InvalidParameter("r must be at least 1".into()));
        }
        if r > MAX_ORDER {
            return Err(Error::OrderTooLarge { r, max: MAX_ORDER });
        }
        index_range_for(interval, n, r)?;
        Ok(Self {
            n,
            r,
            interval,
            kernel,
        })
    }

    /// Configuration on the domain of `f`.
    pub fn for_function(
        f: &TargetFunction,
        n: u32,
        r: u32,
        kernel: DensityFunction,
    ) -> Result<Self> {
        Self::new(n, r, f.domain(), kernel)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn kernel(&self) -> &DensityFunction {
        &self.kernel
    }

    /// `φ(r + 1)`, the lower bound of the kernel sums.
    pub fn kernel_floor(&self) -> f64 {
        self.kernel.eval(f64::from(self.r) + 1.0)
    }
}

pub fn index_range(cfg: &OperatorConfig) -> Result<(i64, i64)> {
    index_range_for(cfg.interval, cfg.n, cfg.r)
}

/// `Σ_{k=k_min}^{k_max} φ(n·x − k)`.
pub fn kernel_sum(kernel: &DensityFunction, n: u32, x: f64, k_min: i64, k_max: i64) -> f64 {
    let nx = f64::from(n) * x;
    (k_min..=k_max).map(|k| kernel.eval(nx - k as f64)).sum()
}

fn check_point(interval: Interval, x: f64) -> Result<()> {
    if !(x >= interval.a - interval.slack() && x <= interval.b + interval.slack()) {
        return Err(Error::InvalidParameter(format!(
            "x = {x} lies outside [{}, {}]",
            interval.a, interval.b
        )));
    }
    Ok(())
}

/// `F_n(f; x) = Σ f(k/n) φ(nx − k) / Σ φ(nx − k)` over `k = ⌈na⌉..=⌊nb⌋`.
pub fn classical_operator(
    f: &TargetFunction,
    n: u32,
    kernel: &DensityFunction,
    x: f64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let domain = f.domain();
    check_point(domain, x)?;
    let (k_min, k_max) = index_range_for(domain, n, 0)?;
    let nf = f64::from(n);
    let nx = nf * x;
    let (num, den) = (k_min..=k_max).fold((0.0, 0.0), |(num, den), k| {
        let w = kernel.eval(nx - k as f64);
        (num + f.eval(k as f64 / nf) * w, den + w)
    });
    Ok(num / den)
}

/// `F_n^r` for one target, with the Steklov means `f_{r,1/n}(k/n)`
/// precomputed for every `k` in the index range.
#[derive(Debug, Clone)]
pub struct SteklovOperator {
    cfg: OperatorConfig,
    k_min: i64,
    samples: Vec<f64>,
    kernel_floor: f64,
}

impl SteklovOperator {
    pub fn new(f: &TargetFunction, cfg: OperatorConfig) -> Result<Self> {
        Self::with_rule(f, cfg, QuadratureRule::default())
    }

    pub fn with_rule(
        f: &TargetFunction,
        cfg: OperatorConfig,
        rule: QuadratureRule,
    ) -> Result<Self> {
        let domain = f.domain();
        if domain != cfg.interval {
            return Err(Error::InvalidParameter(format!(
                "operator interval [{}, {}] differs from the domain of {} [{}, {}]",
                cfg.interval.a,
                cfg.interval.b,
                f.name(),
                domain.a,
                domain.b
            )));
        }
        let (k_min, k_max) = index_range(&cfg)?;
        let means = SteklovRule::new(cfg.r, rule)?;
        let nf = f64::from(cfg.n);
        let h = 1.0 / nf;
        let samples = (k_min..=k_max)
            .into_par_iter()
            .map(|k| means.mean(f, k as f64 / nf, h))
            .collect::<Result<Vec<f64>>>()?;
        let kernel_floor = cfg.kernel_floor();
        Ok(Self {
            cfg,
            k_min,
            samples,
            kernel_floor,
        })
    }

    pub fn config(&self) -> &OperatorConfig {
        &self.cfg
    }

    /// `(k_min, k_max)`.
    pub fn index_range(&self) -> (i64, i64) {
        (self.k_min, self.k_min + self.samples.len() as i64 - 1)
    }

    /// Steklov means `f_{r,1/n}(k/n)`, indexed from `k_min`.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `(F_n^r f)(x)` for `x ∈ [a, b]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        check_point(self.cfg.interval, x)?;
        let nx = f64::from(self.cfg.n) * x;
        let kernel = &self.cfg.kernel;
        let (num, den) = self
            .samples
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(num, den), (i, &s)| {
                let w = kernel.eval(nx - (self.k_min + i as i64) as f64);
                (num + s * w, den + w)
            });
        assert!(
            den >= self.kernel_floor * (1.0 - 1e-12),
            "kernel sum {den:e} below φ(r + 1) = {:e} at x = {x}",
            self.kernel_floor
        );
        Ok(num / den)
    }

    /// `(x, F_n^r f(x))` on `grid_points` uniform points including both
    /// endpoints.
    pub fn evaluate_on_grid(&self, grid_points: usize) -> Result<Vec<(f64, f64)>> {
        if grid_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points, got {grid_points}"
            )));
        }
        self.cfg
            .interval
            .grid(grid_points)
            .into_par_iter()
            .map(|x| self.eval(x).map(|y| (x, y)))
            .collect()
    }
}

pub fn steklov_operator(f: &TargetFunction, cfg: &OperatorConfig, x: f64) -> Result<f64> {
    SteklovOperator::new(f, cfg.clone())?.eval(x)
}

pub fn evaluate_on_grid(
    f: &TargetFunction,
    cfg: &OperatorConfig,
    grid_points: usize,
) -> Result<Vec<(f64, f64)>> {
    SteklovOperator::new(f, cfg.clone())?.evaluate_on_grid(grid_points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub measured_sup: f64,
    pub bound: f64,
    pub sup_norm: f64,
    pub pass: bool,
}

/// Compares `max |F_n^r f|` on a grid with `(2^r − 1)‖f‖_∞ / φ(r + 1)`.
pub fn sup_norm_bound_check(
    f: &TargetFunction,
    cfg: &OperatorConfig,
    grid_points: usize,
) -> Result<BoundCheck> {
    if grid_points < 100 {
        return Err(Error::InvalidParameter(format!(
            "bound check needs at least 100 grid points, got {grid_points}"
        )));
    }
    let values = evaluate_on_grid(f, cfg, grid_points)?;
    let measured_sup = values.iter().map(|(_, y)| y.abs()).fold(0.0, f64::max);
    let sup_norm = f.sup_norm();
    let bound = ((1u64 << cfg.r) - 1) as f64 * sup_norm / cfg.kernel_floor();
    Ok(BoundCheck {
        measured_sup,
        bound,
        sup_norm,
        pass: measured_sup <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::density_by_name;
    use crate::target::resolve_catalog_function;
    use approx::assert_abs_diff_eq;

    fn logistic() -> DensityFunction {
        density_by_name("logistic").unwrap()
    }

    #[test]
    fn index_range_examples() {
        assert_eq!(index_range_for(Interval::unit(), 10, 2).unwrap(), (0, 8));
        assert_eq!(
            index_range_for(Interval::new(-1.0, 1.0).unwrap(), 5, 1).unwrap(),
            (-5, 4)
        );
        assert!(matches!(
            index_range_for(Interval::new(0.13, 0.29).unwrap(), 10, 1),
            Err(Error::InvalidRange {
                k_min: 2,
                k_max: 1,
                ..
            })
        ));
        // 10 · 0.3 rounds to 3.0000000000000004 in floating point
        assert_eq!(
            index_range_for(Interval::new(0.3, 0.7).unwrap(), 10, 1).unwrap(),
            (3, 6)
        );
        assert_eq!(
            index_range_for(Interval::new(-0.75, -0.25).unwrap(), 4, 1).unwrap(),
            (-3, -2)
        );
    }

    #[test]
    fn config_rejects_empty_range() {
        let err = OperatorConfig::new(2, 3, Interval::unit(), logistic()).unwrap_err();
        assert_eq!(err.kind(), "InvalidRange");
        assert!(OperatorConfig::new(0, 1, Interval::unit(), logistic()).is_err());
        assert!(OperatorConfig::new(10, 0, Interval::unit(), logistic()).is_err());
    }

    #[test]
    fn classical_operator_examples() {
        let phi = logistic();
        let three = TargetFunction::from_fn("three", Interval::unit(), |_| 3.0);
        for n in [1, 7, 100] {
            for x in [0.0, 0.33, 1.0] {
                assert_abs_diff_eq!(
                    classical_operator(&three, n, &phi, x).unwrap(),
                    3.0,
                    epsilon = 1e-14
                );
            }
        }
        let id = resolve_catalog_function("identity").unwrap();
        let v = classical_operator(&id, 100, &phi, 0.5).unwrap();
        assert!((v - 0.5).abs() < 0.02);

        // at a node the nearest sample dominates
        let sq = resolve_catalog_function("square").unwrap();
        let x = 20.0 / 50.0;
        let v = classical_operator(&sq, 50, &phi, x).unwrap();
        assert!((v - x * x).abs() < 0.01, "{v}");
    }

    #[test]
    fn constants_are_reproduced() {
        let f = resolve_catalog_function("const1").unwrap();
        for r in 1..=3 {
            for n in [10, 100] {
                let cfg = OperatorConfig::for_function(&f, n, r, logistic()).unwrap();
                let op = SteklovOperator::new(&f, cfg).unwrap();
                for (_, y) in op.evaluate_on_grid(101).unwrap() {
                    assert_abs_diff_eq!(y, 1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn grid_shape() {
        let f = resolve_catalog_function("sin_pi").unwrap();
        let cfg = OperatorConfig::for_function(&f, 20, 2, logistic()).unwrap();
        let op = SteklovOperator::new(&f, cfg.clone()).unwrap();
        let two = op.evaluate_on_grid(2).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two[0], (0.0, op.eval(0.0).unwrap()));
        assert_eq!(two[1], (1.0, op.eval(1.0).unwrap()));
        assert_eq!(op.evaluate_on_grid(37).unwrap().len(), 37);
        assert!(op.evaluate_on_grid(1).is_err());
        assert_eq!(
            steklov_operator(&f, &cfg, 0.3).unwrap(),
            op.eval(0.3).unwrap()
        );
        assert!(op.eval(1.5).is_err());
    }

    #[test]
    fn samples_cover_index_range() {
        let f = resolve_catalog_function("square").unwrap();
        let cfg = OperatorConfig::for_function(&f, 10, 2, logistic()).unwrap();
        let op = SteklovOperator::new(&f, cfg).unwrap();
        assert_eq!(op.index_range(), (0, 8));
        assert_eq!(op.samples().len(), 9);
        // x² has second-order Steklov mean x² − h²/12·(something); check by the oracle
        let oracle = crate::steklov::steklov_mean_oracle(
            &f,
            crate::steklov::SteklovConfig::new(2, 0.1).unwrap(),
            0.3,
            8,
        )
        .unwrap();
        assert_abs_diff_eq!(op.samples()[3], oracle, epsilon = 1e-14);
    }

    #[test]
    fn mismatched_interval_rejected() {
        let f = resolve_catalog_function("square").unwrap();
        let cfg = OperatorConfig::new(10, 1, Interval::new(0.0, 2.0).unwrap(), logistic()).unwrap();
        assert!(SteklovOperator::new(&f, cfg).is_err());
    }

    #[test]
    fn sup_norm_bound_examples() {
        let one = resolve_catalog_function("const1").unwrap();
        let cfg = OperatorConfig::for_function(&one, 10, 2, logistic()).unwrap();
        let check = sup_norm_bound_check(&one, &cfg, 200).unwrap();
        assert_abs_diff_eq!(check.measured_sup, 1.0, epsilon = 1e-12);
        assert!(check.bound > 50.0 && check.pass);

        let f = TargetFunction::from_fn("sin5", Interval::new(0.0, 2.0).unwrap(), |x| {
            (5.0 * x).sin()
        });
        assert_eq!(f.sup_norm_hint(), None);
        let cfg = OperatorConfig::for_function(&f, 50, 3, logistic()).unwrap();
        let check = sup_norm_bound_check(&f, &cfg, 500).unwrap();
        assert!(check.pass);
        assert!((check.sup_norm - 1.0).abs() < 1e-6);
        assert!(sup_norm_bound_check(&f, &cfg, 99).is_err());
    }
}
