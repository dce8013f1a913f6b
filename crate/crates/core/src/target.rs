//! Bounded target functions on a closed interval: a small analytic catalog
//! and piecewise-linear interpolants of sampled data.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::RealFn;

/// Grid size used for `‖f‖_∞` when no exact value is known.
pub const SUP_NORM_GRID: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidParameter(format!(
                "invalid interval [{a}, {b}]"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn unit() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Slack allowed when checking that computed abscissae stay inside.
    pub fn slack(&self) -> f64 {
        1e-12 * (1.0 + self.a.abs().max(self.b.abs()))
    }

    /// `points` uniformly spaced abscissae including both endpoints.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        assert!(points >= 2, "a grid needs both endpoints");
        let step = self.length() / (points - 1) as f64;
        (0..points)
            .map(|i| {
                if i + 1 == points {
                    self.b
                } else {
                    self.a + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionKind {
    Catalog,
    Sampled,
}

#[derive(Clone)]
enum Repr {
    Closure(RealFn),
    Sampled { xs: Arc<[f64]>, ys: Arc<[f64]> },
}

#[derive(Clone)]
pub struct TargetFunction {
    name: String,
    domain: Interval,
    kind: FunctionKind,
    repr: Repr,
    lipschitz_constant: Option<f64>,
    sup_norm_hint: Option<f64>,
    breakpoints: Vec<f64>,
}

impl TargetFunction {
    /// An analytic function on `domain`. Attach known constants with the
    /// `with_*` builders.
    pub fn from_fn(
        name: impl Into<String>,
        domain: Interval,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            domain,
            kind: FunctionKind::Catalog,
            repr: Repr::Closure(Arc::new(eval)),
            lipschitz_constant: None,
            sup_norm_hint: None,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz_constant = Some(l);
        self
    }

    pub fn with_sup_norm(mut self, s: f64) -> Self {
        self.sup_norm_hint = Some(s);
        self
    }

    /// Points inside the domain where `f` has a kink or a jump. Quadrature
    /// pieces are split there.
    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.retain(|p| *p > self.domain.a && *p < self.domain.b);
        points.sort_by(f64::total_cmp);
        points.dedup();
        self.breakpoints = points;
        self
    }

    /// Piecewise-linear interpolant through `(xs[i], ys[i])` on
    /// `[xs[0], xs[last]]`. The Lipschitz constant is the largest slope and
    /// the sup norm the largest `|y|`, both exact for the interpolant.
    pub fn sampled(name: impl Into<String>, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Parse(format!(
                "{} abscissae but {} ordinates",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::TooFewPoints(xs.len()));
        }
        if let Some(i) = xs.iter().chain(&ys).position(|v| !v.is_finite()) {
            return Err(Error::Parse(format!(
                "non-finite value in row {}",
                i % xs.len() + 1
            )));
        }
        if let Some(i) = xs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotoneAbscissae { row: i + 2 });
        }
        let lipschitz = xs
            .windows(2)
            .zip(ys.windows(2))
            .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
            .fold(0.0, f64::max);
        let sup = ys.iter().fold(0.0_f64, |m, y| m.max(y.abs()));
        let domain = Interval::new(xs[0], xs[xs.len() - 1])?;
        let breakpoints = xs[1..xs.len() - 1].to_vec();
        Ok(Self {
            name: name.into(),
            domain,
            kind: FunctionKind::Sampled,
            repr: Repr::Sampled {
                xs: xs.into(),
                ys: ys.into(),
            },
            lipschitz_constant: Some(lipschitz),
            sup_norm_hint: Some(sup),
            breakpoints,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn lipschitz_constant(&self) -> Option<f64> {
        self.lipschitz_constant
    }

    pub fn sup_norm_hint(&self) -> Option<f64> {
        self.sup_norm_hint
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Breakpoints strictly inside `(lo, hi)`.
    pub fn breakpoints_between(&self, lo: f64, hi: f64) -> &[f64] {
        let start = self.breakpoints.partition_point(|&p| p <= lo);
        let end = self.breakpoints.partition_point(|&p| p < hi);
        &self.breakpoints[start..end.max(start)]
    }

    /// `f(x)` for `x ∈ [a, b]`.
    ///
    /// Abscissae within rounding of the domain are clamped onto it; anything
    /// further out is a caller bug.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let Interval { a, b } = self.domain;
        debug_assert!(
            x >= a - self.domain.slack() && x <= b + self.domain.slack(),
            "{} evaluated at {x} outside [{a}, {b}]",
            self.name
        );
        let x = x.clamp(a, b);
        match &self.repr {
            Repr::Closure(f) => f(x),
            Repr::Sampled { xs, ys } => {
                let i = xs.partition_point(|&p| p <= x).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[i - 1], xs[i]);
                let t = (x - x0) / (x1 - x0);
                if t == 0.0 {
                    ys[i - 1]
                } else if t == 1.0 {
                    ys[i]
                } else {
                    ys[i - 1] + t * (ys[i] - ys[i - 1])
                }
            }
        }
    }

    /// `‖f‖_∞`: the exact hint when present, otherwise the maximum over a
    /// [`SUP_NORM_GRID`]-point grid.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm_hint.unwrap_or_else(|| {
            self.domain
                .grid(SUP_NORM_GRID)
                .into_iter()
                .map(|x| self.eval(x).abs())
                .fold(0.0, f64::max)
        })
    }
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFunction")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("kind", &self.kind)
            .field("lipschitz_constant", &self.lipschitz_constant)
            .field("sup_norm_hint", &self.sup_norm_hint)
            .finish()
    }
}

pub const CATALOG_NAMES: [&str; 6] = [
    "const1",
    "identity",
    "sin_pi",
    "abs_shift",
    "square",
    "step_half",
];

/// Catalog members, all on `[0, 1]`.
///
/// | name        | f(x)            | L   | ‖f‖ |
/// |-------------|-----------------|-----|-----|
/// | `const1`    | 1               | 0   | 1   |
/// | `identity`  | x               | 1   | 1   |
/// | `sin_pi`    | sin(πx)         | π   | 1   |
/// | `abs_shift` | \|x − 1/2\|     | 1   | 1/2 |
/// | `square`    | x²              | 2   | 1   |
/// | `step_half` | 1 on [1/2, 1]   | –   | 1   |
pub fn resolve_catalog_function(name: &str) -> Result<TargetFunction> {
    use std::f64::consts::PI;
    let unit = Interval::unit();
    let f = match name {
        "const1" => TargetFunction::from_fn(name, unit, |_| 1.0)
            .with_lipschitz(0.0)
            .with_sup_norm(1.0),
        "identity" => TargetFunction::from_fn(name, unit, |x| x)
            .with_lipschitz(1.0)
            .with_sup_norm(1.0),
        "sin_pi" => TargetFunction::from_fn(name, unit, |x| (PI * x).sin())
            .with_lipschitz(PI)
            .with_sup_norm(1.0),
        "abs_shift" => TargetFunction::from_fn(name, unit, |x| (x - 0.5).abs())
            .with_lipschitz(1.0)
            .with_sup_norm(0.5)
            .with_breakpoints(vec![0.5]),
        "square" => TargetFunction::from_fn(name, unit, |x| x * x)
            .with_lipschitz(2.0)
            .with_sup_norm(1.0),
        "step_half" => TargetFunction::from_fn(name, unit, |x| if x >= 0.5 { 1.0 } else { 0.0 })
            .with_sup_norm(1.0)
            .with_breakpoints(vec![0.5]),
        other => return Err(Error::UnknownFunction(other.to_string())),
    };
    Ok(f)
}

/// Reads a sampled function from a CSV file with header `x,y`.
pub fn load_sampled_function(path: impl AsRef<Path>) -> Result<TargetFunction> {
    load_sampled_columns(path, "x", "y")
}

/// Reads a sampled function from two named columns of a headed CSV file.
pub fn load_sampled_columns(
    path: impl AsRef<Path>,
    x_column: &str,
    y_column: &str,
) -> Result<TargetFunction> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(io) => Error::Io(format!("{}: {io}", path.display())),
            _ => Error::Parse(e.to_string()),
        })?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing column `{name}` in {}", path.display())))
    };
    let (ix, iy) = (column(x_column)?, column(y_column)?);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> Result<f64> {
            let raw = record.get(i).unwrap_or("");
            raw.parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {}: cannot parse `{raw}`", row + 1)))
        };
        xs.push(field(ix)?);
        ys.push(field(iy)?);
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    TargetFunction::sampled(name, xs, ys)
}

/// A catalog name, or a path to a CSV file with header `x,y`.
pub fn resolve_function_spec(spec: &str) -> Result<TargetFunction> {
    if CATALOG_NAMES.contains(&spec) {
        return resolve_catalog_function(spec);
    }
    if spec.ends_with(".csv") || Path::new(spec).exists() {
        return load_sampled_function(spec);
    }
    Err(Error::UnknownFunction(spec.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::io::Write;

    fn write_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        file.write_all(contents.as_bytes()).unwrap();
        file
    }

    #[test]
    fn catalog_constants() {
        let c = resolve_catalog_function("const1").unwrap();
        assert_eq!(c.eval(0.3), 1.0);
        assert_eq!(c.lipschitz_constant(), Some(0.0));
        assert_eq!(c.sup_norm(), 1.0);

        let s = resolve_catalog_function("sin_pi").unwrap();
        assert_eq!(s.lipschitz_constant(), Some(std::f64::consts::PI));
        assert_eq!(s.sup_norm_hint(), Some(1.0));
        assert_abs_diff_eq!(s.eval(0.5), 1.0, epsilon = 1e-15);

        let step = resolve_catalog_function("step_half").unwrap();
        assert_eq!(step.lipschitz_constant(), None);
        assert_eq!(step.eval(0.5), 1.0);
        assert_eq!(step.eval(0.4999), 0.0);

        for name in CATALOG_NAMES {
            let f = resolve_catalog_function(name).unwrap();
            assert_eq!(f.domain(), Interval::unit());
            let grid_sup = f
                .domain()
                .grid(SUP_NORM_GRID)
                .iter()
                .map(|&x| f.eval(x).abs())
                .fold(0.0, f64::max);
            assert_abs_diff_eq!(grid_sup, f.sup_norm(), epsilon = 1e-7);
        }
    }

    #[test]
    fn unknown_catalog_name() {
        assert_eq!(
            resolve_catalog_function("cosh").unwrap_err(),
            Error::UnknownFunction("cosh".into())
        );
    }

    #[test]
    fn two_row_csv_is_identity() {
        let file = write_csv("x,y\n0,0\n1,1\n");
        let f = load_sampled_function(file.path()).unwrap();
        assert_eq!(f.kind(), FunctionKind::Sampled);
        assert_eq!(f.domain(), Interval::unit());
        assert_eq!(f.lipschitz_constant(), Some(1.0));
        for x in [0.0, 0.25, 0.7, 1.0] {
            assert_abs_diff_eq!(f.eval(x), x, epsilon = 1e-15);
        }
    }

    #[test]
    fn decreasing_abscissae_rejected() {
        let file = write_csv("x,y\n0,0\n0.5,1\n0.4,2\n");
        assert_eq!(
            load_sampled_function(file.path()).unwrap_err(),
            Error::NonMonotoneAbscissae { row: 3 }
        );
    }

    #[test]
    fn too_few_rows_and_garbage() {
        let file = write_csv("x,y\n0,0\n");
        assert_eq!(
            load_sampled_function(file.path()).unwrap_err(),
            Error::TooFewPoints(1)
        );
        let file = write_csv("x,y\n0,0\n1,abc\n");
        assert!(matches!(
            load_sampled_function(file.path()),
            Err(Error::Parse(_))
        ));
        let file = write_csv("a,b\n0,0\n1,1\n");
        assert!(matches!(
            load_sampled_function(file.path()),
            Err(Error::Parse(_))
        ));
        let file = write_csv("x,y\n0,0\n1,NaN\n");
        assert!(matches!(
            load_sampled_function(file.path()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn sampled_sine_lipschitz() {
        use std::f64::consts::PI;
        let mut body = String::from("x,y\n");
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            body.push_str(&format!("{x},{}\n", (PI * x).sin()));
        }
        let file = write_csv(&body);
        let f = load_sampled_function(file.path()).unwrap();
        let l = f.lipschitz_constant().unwrap();
        assert!((l - PI).abs() / PI < 0.02, "L = {l}");
        assert_eq!(f.breakpoints().len(), 999);
    }

    #[test]
    fn interpolation_hits_nodes_exactly() {
        let xs = vec![0.0, 0.1, 0.35, 1.0];
        let ys = vec![0.3, -1.25, 7.0, 2.0];
        let f = TargetFunction::sampled("t", xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(f.eval(*x), *y);
        }
        assert_abs_diff_eq!(f.eval(0.05), -0.475, epsilon = 1e-15);
    }

    #[test]
    fn breakpoints_between_is_open() {
        let f =
            TargetFunction::sampled("t", vec![0.0, 0.25, 0.5, 0.75, 1.0], vec![0.0; 5]).unwrap();
        assert_eq!(f.breakpoints_between(0.25, 0.75), &[0.5]);
        assert_eq!(f.breakpoints_between(0.2, 0.8), &[0.25, 0.5, 0.75]);
        assert!(f.breakpoints_between(0.3, 0.4).is_empty());
    }

    #[test]
    fn function_spec_resolution() {
        assert_eq!(resolve_function_spec("square").unwrap().name(), "square");
        assert!(matches!(
            resolve_function_spec("nope"),
            Err(Error::UnknownFunction(_))
        ));
        assert!(matches!(
            resolve_function_spec("/does/not/exist.csv"),
            Err(Error::Io(_))
        ));
    }
}
