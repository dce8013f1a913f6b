//! Sigmoidal activations, grid certification of their admissibility
//! conditions, and the density kernels they generate.
//!
//! A density kernel is built from a sigmoidal `σ` as
//! `φ(x) = ½[σ(x + 1) − σ(x − 1)]`. For the catalog activations it is even,
//! unimodal, positive and sums to one over integer shifts.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Shared scalar map.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Truncated sums over `k ∈ ℤ` stop once doubling the radius changes the
/// partial sum by less than this.
pub const SUM_TOLERANCE: f64 = 1e-14;

/// Half-width of the grid used by [`validate_sigmoidal`].
pub const VALIDATION_HALF_WIDTH: f64 = 20.0;

const MAX_DOUBLINGS: u32 = 20;

#[derive(Clone)]
pub struct SigmoidalFunction {
    name: String,
    eval: RealFn,
    decay_alpha: f64,
    twice_differentiable: bool,
}

impl SigmoidalFunction {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        decay_alpha: f64,
        twice_differentiable: bool,
    ) -> Result<Self> {
        if !(decay_alpha > 0.0 && decay_alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "decay_alpha must be positive and finite, got {decay_alpha}"
            )));
        }
        Ok(Self {
            name: name.into(),
            eval: Arc::new(eval),
            decay_alpha,
            twice_differentiable,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn decay_alpha(&self) -> f64 {
        self.decay_alpha
    }

    pub fn is_twice_differentiable(&self) -> bool {
        self.twice_differentiable
    }
}

impl fmt::Debug for SigmoidalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SigmoidalFunction")
            .field("name", &self.name)
            .field("decay_alpha", &self.decay_alpha)
            .field("twice_differentiable", &self.twice_differentiable)
            .finish()
    }
}

/// `σ(x) = 1 / (1 + e^{−x})`.
///
/// Exponential decay dominates every power law, so any positive `α` is
/// admissible; we record `α = 1`.
pub fn make_logistic() -> SigmoidalFunction {
    SigmoidalFunction::new("logistic", |x: f64| 1.0 / (1.0 + (-x).exp()), 1.0, true)
        .expect("catalog alpha is positive")
}

/// `σ(x) = (1 + tanh x) / 2`.
pub fn make_tanh_sigmoidal() -> SigmoidalFunction {
    // (1 + tanh x)/2 == 1/(1 + e^{-2x}); this form keeps relative accuracy
    // in the left tail where 1 + tanh x cancels.
    SigmoidalFunction::new("tanh", |x: f64| 1.0 / (1.0 + (-2.0 * x).exp()), 1.0, true)
        .expect("catalog alpha is positive")
}

/// Piecewise-linear ramp: 0 below −1, 1 above 1, linear in between.
///
/// Monotone, symmetric and compactly decaying, but not C² (corners at ±1),
/// so it fails condition (S2). Kept as a validator fixture only.
pub fn make_ramp_sigmoidal() -> SigmoidalFunction {
    SigmoidalFunction::new(
        "ramp-nonconforming",
        |x: f64| ((x + 1.0) / 2.0).clamp(0.0, 1.0),
        1.0,
        false,
    )
    .expect("catalog alpha is positive")
}

/// Kernel names accepted by [`sigmoidal_by_name`].
pub const KERNEL_NAMES: [&str; 3] = ["logistic", "tanh", "ramp-nonconforming"];

pub fn sigmoidal_by_name(name: &str) -> Result<SigmoidalFunction> {
    match name {
        "logistic" => Ok(make_logistic()),
        "tanh" => Ok(make_tanh_sigmoidal()),
        "ramp-nonconforming" | "ramp" => Ok(make_ramp_sigmoidal()),
        other => Err(Error::UnknownKernel(other.to_string())),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub condition: &'static str,
    pub passed: bool,
    /// Worst observed residual or metric for this condition.
    pub metric: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub kernel: String,
    pub grid_resolution: usize,
    pub grid_half_width: f64,
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, condition: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }
}

fn uniform_grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(move |i| {
        if i + 1 == points {
            hi
        } else {
            lo + step * i as f64
        }
    })
}

/// Largest |Δ²σ / h²| over a uniform grid of spacing `h` on `[lo, hi]`.
fn max_scaled_second_difference(s: &SigmoidalFunction, lo: f64, hi: f64, h: f64) -> f64 {
    let points = ((hi - lo) / h).round() as usize + 1;
    uniform_grid(lo, hi, points)
        .map(|x| ((s.eval(x + h) - 2.0 * s.eval(x) + s.eval(x - h)) / (h * h)).abs())
        .fold(0.0, f64::max)
}

/// Certifies the admissibility conditions on sampled grids.
///
/// Grid: `grid_resolution` uniform points on `[−20, 20]`. Checks performed:
///
/// * `monotone`: `σ(x_{i+1}) ≥ σ(x_i) − 1e−15`;
/// * `limits`: `σ(−50) ≤ 1e−8` and `1 − σ(50) ≤ 1e−8`;
/// * `S1`: `max |σ(x) + σ(−x) − 1| ≤ 1e−14`;
/// * `S2`: second differences `≤ 1e−12` on `x ≥ 0` (concavity) and the
///   scaled second difference does not more than double when the spacing is
///   refined eightfold (a corner makes it grow like `1/h`);
/// * `S3`: `σ(x)|x|^{1+α}` does not grow from `[−30, −10]` to `[−50, −30]`;
/// * `technical`: `σ(r + 2) > σ(r)` for `r = 1..=r_max`.
pub fn validate_sigmoidal(
    s: &SigmoidalFunction,
    r_max: u32,
    grid_resolution: usize,
) -> Result<ValidationReport> {
    if grid_resolution < 100 {
        return Err(Error::InvalidParameter(format!(
            "grid_resolution must be at least 100, got {grid_resolution}"
        )));
    }
    if r_max == 0 {
        return Err(Error::InvalidParameter("r_max must be positive".into()));
    }
    let l = VALIDATION_HALF_WIDTH;
    let grid: Vec<f64> = uniform_grid(-l, l, grid_resolution).collect();
    let values: Vec<f64> = grid.iter().map(|&x| s.eval(x)).collect();
    let mut checks = Vec::with_capacity(6);

    let worst_drop = values
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(ConditionCheck {
        condition: "monotone",
        passed: worst_drop <= 1e-15,
        metric: worst_drop.max(0.0),
        detail: "largest decrease between consecutive grid points".into(),
    });

    let left = s.eval(-50.0).abs();
    let right = (1.0 - s.eval(50.0)).abs();
    checks.push(ConditionCheck {
        condition: "limits",
        passed: left <= 1e-8 && right <= 1e-8,
        metric: left.max(right),
        detail: "max(|σ(−50)|, |1 − σ(50)|)".into(),
    });

    let symmetry = grid
        .iter()
        .map(|&x| (s.eval(x) + s.eval(-x) - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(ConditionCheck {
        condition: "S1",
        passed: symmetry <= 1e-14,
        metric: symmetry,
        detail: "max |σ(x) + σ(−x) − 1|".into(),
    });

    let h = 2.0 * l / (grid_resolution - 1) as f64;
    let convexity = grid
        .iter()
        .filter(|&&x| x >= 0.0)
        .map(|&x| s.eval(x + h) - 2.0 * s.eval(x) + s.eval(x - h))
        .fold(f64::NEG_INFINITY, f64::max);
    let coarse = max_scaled_second_difference(s, -l, l, h);
    let fine = max_scaled_second_difference(s, -l, l, h / 8.0);
    let concave = convexity <= 1e-12;
    let smooth = fine <= 2.0 * coarse + 1e-6;
    checks.push(ConditionCheck {
        condition: "S2",
        passed: concave && smooth,
        metric: if coarse > 0.0 { fine / coarse } else { 0.0 },
        detail: format!(
            "max second difference on x ≥ 0: {convexity:e}; |σ''| estimate {coarse:e} at h, {fine:e} at h/8"
        ),
    });

    let alpha = s.decay_alpha();
    let weighted = |lo: f64, hi: f64| {
        uniform_grid(lo, hi, grid_resolution)
            .map(|x| s.eval(x).abs() * x.abs().powf(1.0 + alpha))
            .fold(0.0, f64::max)
    };
    let near = weighted(-30.0, -10.0);
    let far = weighted(-50.0, -30.0);
    checks.push(ConditionCheck {
        condition: "S3",
        passed: far.is_finite() && far <= near * (1.0 + 1e-9) + f64::MIN_POSITIVE,
        metric: far,
        detail: format!(
            "max σ(x)|x|^(1+α) with α = {alpha}: {near:e} on [−30,−10], {far:e} on [−50,−30]"
        ),
    });

    let failing: Vec<u32> = (1..=r_max)
        .filter(|&r| s.eval(f64::from(r) + 2.0) <= s.eval(f64::from(r)))
        .collect();
    checks.push(ConditionCheck {
        condition: "technical",
        passed: failing.is_empty(),
        metric: failing.len() as f64,
        detail: if failing.is_empty() {
            format!("σ(r + 2) > σ(r) for r = 1..={r_max}")
        } else {
            format!("σ(r + 2) <= σ(r) for r in {failing:?}")
        },
    });

    Ok(ValidationReport {
        kernel: s.name().to_string(),
        grid_resolution,
        grid_half_width: l,
        checks,
    })
}

#[derive(Clone)]
enum DensityRepr {
    Sigmoidal(SigmoidalFunction),
    Custom(RealFn),
}

/// The density kernel `φ_σ`, or an arbitrary even kernel for fixtures.
#[derive(Clone)]
pub struct DensityFunction {
    name: String,
    repr: DensityRepr,
    decay_alpha: f64,
}

impl DensityFunction {
    /// Wraps an arbitrary kernel. Used for moment fixtures that are not
    /// generated by a sigmoidal.
    pub fn from_fn(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        decay_alpha: f64,
    ) -> Self {
        Self {
            name: name.into(),
            repr: DensityRepr::Custom(Arc::new(eval)),
            decay_alpha,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> Option<&SigmoidalFunction> {
        match &self.repr {
            DensityRepr::Sigmoidal(s) => Some(s),
            DensityRepr::Custom(_) => None,
        }
    }

    pub fn decay_alpha(&self) -> f64 {
        self.decay_alpha
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.repr {
            DensityRepr::Sigmoidal(s) => {
                // φ(x) = φ(−x) under (S1); the left tail of σ carries full
                // relative precision, the right one does not.
                let y = -x.abs();
                0.5 * (s.eval(y + 1.0) - s.eval(y - 1.0))
            }
            DensityRepr::Custom(f) => f(x),
        }
    }
}

impl fmt::Debug for DensityFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityFunction")
            .field("name", &self.name)
            .field("decay_alpha", &self.decay_alpha)
            .finish()
    }
}

pub fn density_of(s: &SigmoidalFunction) -> DensityFunction {
    DensityFunction {
        name: s.name().to_string(),
        decay_alpha: s.decay_alpha(),
        repr: DensityRepr::Sigmoidal(s.clone()),
    }
}

pub fn density_by_name(name: &str) -> Result<DensityFunction> {
    sigmoidal_by_name(name).map(|s| density_of(&s))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSum {
    pub value: f64,
    /// Final truncation radius `K`; the sum ran over `|k − round(x)| ≤ K`.
    pub radius: u64,
}

fn initial_radius(phi: &DensityFunction) -> u64 {
    (8.0 / phi.decay_alpha().min(8.0)).ceil().max(8.0) as u64
}

/// `∑_{k∈ℤ} φ(x − k)`, truncated symmetrically around `round(x)` and doubled
/// until the increment falls below [`SUM_TOLERANCE`].
pub fn partition_sum(phi: &DensityFunction, x: f64) -> Result<TruncatedSum> {
    let center = x.round() as i64;
    let mut radius = initial_radius(phi);
    let mut value: f64 = (-(radius as i64)..=radius as i64)
        .map(|j| phi.eval(x - (center + j) as f64))
        .sum();
    for _ in 0..MAX_DOUBLINGS {
        let next = 2 * radius;
        let increment: f64 = ((radius + 1)..=next)
            .map(|j| {
                let j = j as i64;
                phi.eval(x - (center + j) as f64) + phi.eval(x - (center - j) as f64)
            })
            .sum();
        value += increment;
        radius = next;
        if increment.abs() < SUM_TOLERANCE {
            return Ok(TruncatedSum { value, radius });
        }
    }
    Err(Error::NonConvergentTail {
        tol: SUM_TOLERANCE,
        doublings: MAX_DOUBLINGS,
        radius,
    })
}

/// `∑_{|x−k| > cutoff} φ(x − k)`, summed outward from the cutoff until the
/// terms no longer change the total.
pub fn tail_mass(phi: &DensityFunction, x: f64, cutoff: f64) -> f64 {
    let mut total = 0.0;
    // k_lo is the largest k with x − k > cutoff, k_hi the smallest with k − x > cutoff
    let lo = (x - cutoff).ceil() as i64 - 1;
    let hi = (x + cutoff).floor() as i64 + 1;
    for j in 0..10_000_000 {
        let (k_lo, k_hi) = (lo - j, hi + j);
        let term = phi.eval(x - k_lo as f64) + phi.eval(x - k_hi as f64);
        let before = total;
        total += term;
        if term == 0.0 || (total == before && term < f64::MIN_POSITIVE.sqrt()) {
            break;
        }
    }
    total
}
