//! Steklov integral means of order `r`,
//!
//! ```text
//! f_{r,h}(x) = h^{-r} ∫_0^h ⋯ ∫_0^h Σ_{m=1}^r (−1)^{1−m} C(r,m) f(x + (m/r)(t_1 + ⋯ + t_r)) dt_1 ⋯ dt_r.
//! ```
//!
//! The integrand depends on `t` only through `t_1 + ⋯ + t_r`. Substituting
//! `t_i = h·s_i` with `s_i` uniform on `[0, 1]`, the sum `u = s_1 + ⋯ + s_r`
//! has the Irwin–Hall density `p_r`, so every mean collapses to
//!
//! ```text
//! f_{r,h}(x) = Σ_{m=1}^r (−1)^{1−m} C(r,m) ∫_0^r f(x + (m h / r) u) p_r(u) du,
//! ```
//!
//! which is integrated piecewise on `[j, j + 1]` where `p_r` is a polynomial.
//! [`steklov_mean_oracle`] keeps the literal `r`-fold form for cross-checks.

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::target::TargetFunction;

/// Largest order with exact binomial arithmetic.
pub const MAX_ORDER: u32 = 20;

/// Largest order accepted by the tensor-product oracle.
pub const MAX_ORACLE_ORDER: u32 = 4;

fn check_order(r: u32) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidParameter(
            "Steklov order r must be at least 1".into(),
        ));
    }
    if r > MAX_ORDER {
        return Err(Error::OrderTooLarge { r, max: MAX_ORDER });
    }
    Ok(())
}

/// `C(r, m)` in exact integer arithmetic.
pub fn binomial(r: u32, m: u32) -> u64 {
    if m > r {
        return 0;
    }
    let m = m.min(r - m) as u64;
    (0..m).fold(1u64, |acc, i| acc * (r as u64 - i) / (i + 1))
}

/// Signed weights `(−1)^{1−m} C(r, m)` for `m = 1..=r`.
fn signed_binomials(r: u32) -> impl Iterator<Item = (u32, i64)> {
    (1..=r).map(move |m| {
        let c = binomial(r, m) as i64;
        (m, if m % 2 == 1 { c } else { -c })
    })
}

/// `Σ_{m=1}^r (−1)^{1−m} C(r, m)`, which is `1 − (1 − 1)^r = 1`.
pub fn alternating_binomial_sum(r: u32) -> Result<f64> {
    check_order(r)?;
    Ok(signed_binomials(r).map(|(_, c)| c).sum::<i64>() as f64)
}

/// `Σ_{m=1}^r (−1)^{1−m} C(r, m) · m / r`, which is `(−1 + 1)^{r−1}`:
/// one for `r = 1` and zero otherwise.
pub fn weighted_binomial_sum(r: u32) -> Result<f64> {
    check_order(r)?;
    let numerator: i64 = signed_binomials(r).map(|(m, c)| c * i64::from(m)).sum();
    Ok(numerator as f64 / f64::from(r))
}

/// Density of the sum of `r` independent uniforms on `[0, 1]`.
///
/// Evaluated with the Cox–de Boor recursion for the cardinal B-spline of
/// order `r`, which only combines non-negative terms.
pub fn irwin_hall_pdf(r: u32, u: f64) -> f64 {
    assert!(r >= 1, "Irwin–Hall order must be positive");
    let r = r as usize;
    if !(0.0..=r as f64).contains(&u) {
        return 0.0;
    }
    let mut values: Vec<f64> = (0..r)
        .map(|j| {
            let t = u - j as f64;
            if (0.0..1.0).contains(&t) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    // r = 1 is the uniform density on the closed interval
    if r == 1 {
        return 1.0;
    }
    for k in 2..=r {
        let kf = k as f64;
        for j in 0..=(r - k) {
            let t = u - j as f64;
            values[j] = (t * values[j] + (kf - t) * values[j + 1]) / (kf - 1.0);
        }
    }
    values[0]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteklovConfig {
    r: u32,
    h: f64,
}

impl SteklovConfig {
    pub fn new(r: u32, h: f64) -> Result<Self> {
        check_order(r)?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step h must be positive, got {h}"
            )));
        }
        Ok(Self { r, h })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn h(&self) -> f64 {
        self.h
    }
}

fn check_domain(f: &TargetFunction, x: f64, reach: f64) -> Result<()> {
    let d = f.domain();
    let (lo, hi) = (x, x + reach);
    if !(lo >= d.a - d.slack() && hi <= d.b + d.slack()) {
        return Err(Error::DomainViolation {
            lo,
            hi,
            a: d.a,
            b: d.b,
        });
    }
    Ok(())
}

/// The collapsed quadrature for one order `r`: Gauss–Legendre nodes on each
/// unit piece of `[0, r]` with the Irwin–Hall density folded into the
/// weights.
#[derive(Debug, Clone)]
pub struct SteklovRule {
    r: u32,
    rule: QuadratureRule,
    coefficients: Vec<f64>,
    /// `(u, w · p_r(u))` per piece.
    pieces: Vec<Vec<(f64, f64)>>,
}

impl SteklovRule {
    pub fn new(r: u32, rule: QuadratureRule) -> Result<Self> {
        check_order(r)?;
        let coefficients = signed_binomials(r).map(|(_, c)| c as f64).collect();
        let pieces = (0..r)
            .map(|j| {
                let j = f64::from(j);
                rule.nodes()
                    .iter()
                    .zip(rule.weights())
                    .map(|(&t, &w)| {
                        let u = j + t;
                        (u, w * irwin_hall_pdf(r, u))
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            r,
            rule,
            coefficients,
            pieces,
        })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// `f_{r,h}(x)`; reads `f` only on `[x, x + r·h]`.
    pub fn mean(&self, f: &TargetFunction, x: f64, h: f64) -> Result<f64> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step h must be positive, got {h}"
            )));
        }
        let r = f64::from(self.r);
        check_domain(f, x, r * h)?;
        let mut total = 0.0;
        for (m, &c) in (1..=self.r).zip(&self.coefficients) {
            let scale = f64::from(m) * h / r;
            let mut integral = 0.0;
            for (j, piece) in self.pieces.iter().enumerate() {
                let u0 = j as f64;
                let (y0, y1) = (x + scale * u0, x + scale * (u0 + 1.0));
                let kinks = f.breakpoints_between(y0, y1);
                if kinks.is_empty() {
                    integral += piece
                        .iter()
                        .map(|&(u, w)| w * f.eval(x + scale * u))
                        .sum::<f64>();
                } else {
                    integral += self.split_piece(f, x, scale, u0, kinks);
                }
            }
            total += c * integral;
        }
        Ok(total)
    }

    /// `∫_{u0}^{u0+1} f(x + s·u) p_r(u) du` with the piece cut at the
    /// preimages of `f`'s breakpoints.
    fn split_piece(&self, f: &TargetFunction, x: f64, scale: f64, u0: f64, kinks: &[f64]) -> f64 {
        let mut cuts = Vec::with_capacity(kinks.len() + 2);
        cuts.push(u0);
        cuts.extend(kinks.iter().map(|&p| ((p - x) / scale).clamp(u0, u0 + 1.0)));
        cuts.push(u0 + 1.0);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                self.rule.integrate(w[0], w[1], |u| {
                    irwin_hall_pdf(self.r, u) * f.eval(x + scale * u)
                })
            })
            .sum()
    }
}

/// `f_{r,h}(x)` through the one-dimensional reduction.
pub fn steklov_mean(
    f: &TargetFunction,
    cfg: SteklovConfig,
    x: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    SteklovRule::new(cfg.r, rule.clone())?.mean(f, x, cfg.h)
}

/// `f_{r,h}(x)` evaluated literally as
/// `(−h)^{−r} ∫_{[0,h]^r} Σ_m (−1)^{r−m+1} C(r,m) f(x + (m/r)(t_1 + ⋯ + t_r))`
/// with an `r`-fold tensor Gauss–Legendre rule.
pub fn steklov_mean_oracle(
    f: &TargetFunction,
    cfg: SteklovConfig,
    x: f64,
    nodes_per_dim: usize,
) -> Result<f64> {
    let SteklovConfig { r, h } = cfg;
    if r > MAX_ORACLE_ORDER {
        return Err(Error::OrderTooLarge {
            r,
            max: MAX_ORACLE_ORDER,
        });
    }
    check_domain(f, x, f64::from(r) * h)?;
    let rule = QuadratureRule::gauss_legendre(nodes_per_dim)?;
    let nodes: Vec<f64> = rule.nodes().iter().map(|t| h * t).collect();
    let weights: Vec<f64> = rule.weights().iter().map(|w| h * w).collect();
    let terms: Vec<(f64, f64)> = (1..=r)
        .map(|m| {
            let sign = if (r - m + 1) % 2 == 0 { 1.0 } else { -1.0 };
            (f64::from(m) / f64::from(r), sign * binomial(r, m) as f64)
        })
        .collect();

    let dims = r as usize;
    let mut index = vec![0usize; dims];
    let mut total = 0.0;
    'outer: loop {
        let (sum_t, weight) = index
            .iter()
            .fold((0.0, 1.0), |(s, w), &i| (s + nodes[i], w * weights[i]));
        let integrand: f64 = terms
            .iter()
            .map(|&(ratio, c)| c * f.eval(x + ratio * sum_t))
            .sum();
        total += weight * integrand;
        for i in index.iter_mut() {
            *i += 1;
            if *i < nodes_per_dim {
                continue 'outer;
            }
            *i = 0;
        }
        break;
    }
    Ok((-h).powi(-(r as i32)) * total)
}
