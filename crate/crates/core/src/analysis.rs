//! Error measurement and the quantitative bound
//! `|F_n^r f − f| ≤ ω(f; 1/n) / φ(r + 1) · (1 + M_1(φ))` for `r ≥ 2`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::DensityFunction;
use crate::moments::{discrete_absolute_moment, DEFAULT_TOLERANCE};
use crate::operators::{OperatorConfig, SteklovOperator};
use crate::target::TargetFunction;

/// Default grid for sup-error measurements, endpoints included.
pub const DEFAULT_GRID_POINTS: usize = 1001;
/// Default number of base points for the modulus-of-continuity estimate.
pub const DEFAULT_PROBES: usize = 4096;
pub const MIN_PROBES: usize = 1000;
/// Offsets per base point, spread symmetrically inside `(−δ, δ)`.
pub const OFFSETS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaSource {
    /// `L·δ` from a known Lipschitz constant: an upper bound for `ω(f; δ)`,
    /// attained by Lipschitz-extremal functions.
    Lipschitz,
    /// Grid maximum of `|f(t) − f(x)|`: a lower estimate of `ω(f; δ)`.
    Estimated,
}

impl OmegaSource {
    pub fn label(self) -> &'static str {
        match self {
            OmegaSource::Lipschitz => "lipschitz",
            OmegaSource::Estimated => "estimated-omega",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub delta: f64,
    /// The value used downstream.
    pub value: f64,
    /// The sampled lower estimate, always computed.
    pub grid_estimate: f64,
    pub source: OmegaSource,
}

/// `max |f(t) − f(x)|` over `probes` uniform base points `x` and
/// [`OFFSETS`] offsets `t − x ∈ (−δ, δ)`, both clamped to `[a, b]`.
pub fn modulus_grid_estimate(f: &TargetFunction, delta: f64, probes: usize) -> f64 {
    let domain = f.domain();
    let half = (OFFSETS / 2) as f64;
    let offsets: Vec<f64> = (1..=OFFSETS / 2)
        .flat_map(|j| {
            // strictly inside the open ball
            let s = delta * (j as f64 / half) * (1.0 - f64::EPSILON);
            [s, -s]
        })
        .collect();
    domain
        .grid(probes)
        .into_par_iter()
        .map(|x| {
            let fx = f.eval(x);
            offsets
                .iter()
                .map(|s| (f.eval((x + s).clamp(domain.a, domain.b)) - fx).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// `ω(f; δ) = sup_{|t−x|<δ} |f(t) − f(x)|`.
///
/// With a Lipschitz constant `L` the value is `L·δ`; otherwise it is the
/// grid estimate, flagged as [`OmegaSource::Estimated`].
pub fn modulus_of_continuity(
    f: &TargetFunction,
    delta: f64,
    probes: usize,
) -> Result<ModulusEstimate> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if probes < MIN_PROBES {
        return Err(Error::InvalidParameter(format!(
            "modulus estimate needs at least {MIN_PROBES} probes, got {probes}"
        )));
    }
    let grid_estimate = modulus_grid_estimate(f, delta, probes);
    let (value, source) = match f.lipschitz_constant() {
        Some(l) => (l * delta, OmegaSource::Lipschitz),
        None => (grid_estimate, OmegaSource::Estimated),
    };
    Ok(ModulusEstimate {
        delta,
        value,
        grid_estimate,
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateBound {
    pub value: f64,
    pub omega: ModulusEstimate,
    /// `φ(r + 1)`.
    pub kernel_floor: f64,
    pub m1: f64,
}

/// `ω(f; 1/n) / φ(r + 1) · (1 + M_1)`. Only stated for `r ≥ 2`.
pub fn theoretical_bound(
    f: &TargetFunction,
    cfg: &OperatorConfig,
    m1: f64,
) -> Result<RateBound> {
    if cfg.r() < 2 {
        return Err(Error::OrderOutOfScope { r: cfg.r() });
    }
    let omega = modulus_of_continuity(f, 1.0 / f64::from(cfg.n()), DEFAULT_PROBES)?;
    Ok(bound_from_omega(omega, cfg, m1))
}

/// The bound for an already computed `ω` value.
pub fn bound_from_omega(omega: ModulusEstimate, cfg: &OperatorConfig, m1: f64) -> RateBound {
    let kernel_floor = cfg.kernel_floor();
    RateBound {
        value: omega.value / kernel_floor * (1.0 + m1),
        omega,
        kernel_floor,
        m1,
    }
}

/// `max |F_n^r f(x) − f(x)|` over a uniform grid.
pub fn measure_sup_error(
    f: &TargetFunction,
    cfg: &OperatorConfig,
    grid_points: usize,
) -> Result<f64> {
    if grid_points < 100 {
        return Err(Error::InvalidParameter(format!(
            "sup error needs at least 100 grid points, got {grid_points}"
        )));
    }
    let op = SteklovOperator::new(f, cfg.clone())?;
    Ok(op
        .evaluate_on_grid(grid_points)?
        .into_iter()
        .map(|(x, y)| (y - f.eval(x)).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub sup_error: Option<f64>,
    pub bound: Option<f64>,
    pub empirical_order: Option<f64>,
    /// Set when this `n` could not be evaluated (e.g. an empty index range).
    pub error: Option<String>,
}

impl ConvergenceRow {
    /// Whether the measured error exceeds the bound.
    pub fn violates_bound(&self) -> bool {
        matches!((self.sup_error, self.bound), (Some(e), Some(b)) if e > b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub kernel: String,
    pub function: String,
    pub r: u32,
    pub grid_points: usize,
    /// `M_1(φ)`, present when bounds were computed.
    pub m1: Option<f64>,
    /// How `ω` was obtained for the bound column.
    pub omega_source: Option<OmegaSource>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn violations(&self) -> Vec<u32> {
        self.rows
            .iter()
            .filter(|r| r.violates_bound())
            .map(|r| r.n)
            .collect()
    }

    /// Multiplies every bound by `factor`.
    pub fn scale_bounds(&mut self, factor: f64) {
        for row in &mut self.rows {
            if let Some(b) = row.bound.as_mut() {
                *b *= factor;
            }
        }
    }

    /// CSV with header `n,sup_error,bound,empirical_order`; absent values
    /// are empty fields.
    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("n,sup_error,bound,empirical_order\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                row.n,
                cell(row.sup_error),
                cell(row.bound),
                cell(row.empirical_order)
            );
        }
        out
    }
}

/// One row per `n`: sup error on `grid_points`, the rate bound for `r ≥ 2`,
/// and `log2(e_{i−1} / e_i)` between consecutive rows where `n` doubles.
pub fn convergence_study(
    f: &TargetFunction,
    kernel: &DensityFunction,
    r: u32,
    n_list: &[u32],
    grid_points: usize,
) -> Result<ConvergenceReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("n list is empty".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "n list must be strictly ascending, got {n_list:?}"
        )));
    }
    let m1 = if r >= 2 {
        Some(discrete_absolute_moment(kernel, 1, DEFAULT_TOLERANCE)?.value)
    } else {
        None
    };
    let mut omega_source = None;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let cfg = match OperatorConfig::for_function(f, n, r, kernel.clone()) {
            Ok(cfg) => cfg,
            Err(e @ Error::InvalidRange { .. }) => {
                rows.push(ConvergenceRow {
                    n,
                    sup_error: None,
                    bound: None,
                    empirical_order: None,
                    error: Some(e.to_string()),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let sup_error = measure_sup_error(f, &cfg, grid_points)?;
        let bound = match m1 {
            Some(m1) => {
                let b = theoretical_bound(f, &cfg, m1)?;
                omega_source = Some(b.omega.source);
                Some(b.value)
            }
            None => None,
        };
        rows.push(ConvergenceRow {
            n,
            sup_error: Some(sup_error),
            bound,
            empirical_order: None,
            error: None,
        });
    }
    for i in 1..rows.len() {
        let (prev, cur) = (&rows[i - 1], &rows[i]);
        if cur.n == 2 * prev.n {
            if let (Some(a), Some(b)) = (prev.sup_error, cur.sup_error) {
                rows[i].empirical_order = Some((a / b).log2());
            }
        }
    }
    Ok(ConvergenceReport {
        kernel: kernel.name().to_string(),
        function: f.name().to_string(),
        r,
        grid_points,
        m1,
        omega_source,
        rows,
    })
}
