//! Truncated algebraic moments `m_β^n(φ, u)` and discrete absolute moments
//! `M_β(φ)` of a kernel.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::DensityFunction;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_GRID_POINTS: usize = 4097;
pub const MIN_GRID_POINTS: usize = 1001;
pub const MAX_DOUBLINGS: u32 = 20;

const INITIAL_RADIUS: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentQuery {
    pub beta: u32,
    pub u: f64,
    pub n: u32,
}

impl MomentQuery {
    pub fn new(beta: u32, u: f64, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "truncation radius n must be at least 1".into(),
            ));
        }
        if !u.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "u must be finite, got {u}"
            )));
        }
        Ok(Self { beta, u, n })
    }
}

/// `m_β^n(φ, u) = Σ_{k=−n}^{n} φ(u − k)(u − k)^β`, signed powers included.
pub fn truncated_algebraic_moment(phi: &DensityFunction, q: MomentQuery) -> f64 {
    let n = i64::from(q.n);
    (-n..=n)
        .map(|k| {
            let d = q.u - k as f64;
            phi.eval(d) * d.powi(q.beta as i32)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOptions {
    pub tol: f64,
    pub grid_points: usize,
    /// Lower bound on the truncation radius; the adaptive radius is used when
    /// it is larger.
    pub min_radius: u64,
}

impl Default for MomentOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOLERANCE,
            grid_points: DEFAULT_GRID_POINTS,
            min_radius: 0,
        }
    }
}

/// A grid estimate of `M_β(φ)` with the diagnostics needed to judge it.
///
/// `value` is the maximum over the `u`-grid, hence a lower estimate of the
/// supremum; `grid_spacing` bounds how far the maximizer can be from a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbsoluteMoment {
    pub beta: u32,
    pub value: f64,
    pub argmax_u: f64,
    pub grid_points: usize,
    pub grid_spacing: f64,
    pub truncation_radius: u64,
    /// Contribution of the outermost doubling shell at the chosen radius.
    pub tail_increment: f64,
    pub tol: f64,
}

#[inline]
fn term(phi: &DensityFunction, beta: u32, d: f64) -> f64 {
    phi.eval(d).abs() * d.abs().powi(beta as i32)
}

/// `Σ_k |φ(u − k)| |u − k|^β` over `k ∈ [⌊u⌋ − radius, ⌊u⌋ + 1 + radius]`.
pub fn absolute_moment_sum(phi: &DensityFunction, beta: u32, u: f64, radius: u64) -> f64 {
    let base = u.floor() as i64;
    let radius = radius as i64;
    ((base - radius)..=(base + 1 + radius))
        .map(|k| term(phi, beta, u - k as f64))
        .sum()
}

/// Sum of the terms with `radius < |k − k_center| ≤ 2·radius`.
fn shell(phi: &DensityFunction, beta: u32, u: f64, radius: u64) -> f64 {
    let base = u.floor() as i64;
    let (inner, outer) = (radius as i64, 2 * radius as i64);
    ((inner + 1)..=outer)
        .map(|j| {
            term(phi, beta, u - (base - j) as f64) + term(phi, beta, u - (base + 1 + j) as f64)
        })
        .sum()
}

/// Smallest doubling radius whose last shell contributes less than `tol`.
fn adaptive_radius(phi: &DensityFunction, beta: u32, u: f64, tol: f64) -> Result<(u64, f64)> {
    let mut radius = INITIAL_RADIUS;
    for _ in 0..MAX_DOUBLINGS {
        let increment = shell(phi, beta, u, radius);
        radius *= 2;
        if increment < tol {
            return Ok((radius, increment));
        }
    }
    Err(Error::NonConvergentTail {
        tol,
        doublings: MAX_DOUBLINGS,
        radius,
    })
}

/// `M_β(φ) = sup_u Σ_k |φ(u − k)| |u − k|^β` with default options.
pub fn discrete_absolute_moment(
    phi: &DensityFunction,
    beta: u32,
    tol: f64,
) -> Result<AbsoluteMoment> {
    discrete_absolute_moment_with(
        phi,
        beta,
        MomentOptions {
            tol,
            ..MomentOptions::default()
        },
    )
}

/// `M_β(φ)` as the maximum over a uniform grid of `u ∈ [0, 1]`.
///
/// The summand is 1-periodic in `u`, so the supremum over `ℝ` equals the
/// supremum over one period.
pub fn discrete_absolute_moment_with(
    phi: &DensityFunction,
    beta: u32,
    opts: MomentOptions,
) -> Result<AbsoluteMoment> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    if opts.grid_points < MIN_GRID_POINTS {
        return Err(Error::InvalidParameter(format!(
            "u-grid needs at least {MIN_GRID_POINTS} points, got {}",
            opts.grid_points
        )));
    }
    let (adaptive, tail_increment) = adaptive_radius(phi, beta, 0.5, opts.tol)?;
    let radius = adaptive.max(opts.min_radius);
    let spacing = 1.0 / (opts.grid_points - 1) as f64;
    let sums: Vec<f64> = (0..opts.grid_points)
        .into_par_iter()
        .map(|i| absolute_moment_sum(phi, beta, i as f64 * spacing, radius))
        .collect();
    let (argmax, value) = sums
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        });
    Ok(AbsoluteMoment {
        beta,
        value,
        argmax_u: argmax as f64 * spacing,
        grid_points: opts.grid_points,
        grid_spacing: spacing,
        truncation_radius: radius,
        tail_increment,
        tol: opts.tol,
    })
}
