//! Finite-difference oracles, check reports and the invariant suites.
//!
//! Every error metric is relative to a per-probe local scale. For second
//! differences this is the largest of the individual `∂²/∂t²`, `∂²/∂xₖ²`
//! stencil values, so cancellation in `□f = 0` does not inflate the error.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{SpacetimePoint, Vec3};
use crate::wavelet::FieldValue;

pub use crate::suites::{run_suite, SuiteOptions, DEFAULT_SEED, SUITES};

/// Central-difference stencil: base step and whether to apply one level of
/// Richardson extrapolation (`(4 D(h/2) - D(h)) / 3`). Order is fixed at 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilSpec {
    pub h: f64,
    pub richardson: bool,
}

impl StencilSpec {
    pub fn new(h: f64, richardson: bool) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::OutOfRange(format!("stencil step must be > 0, got {h}")));
        }
        Ok(Self { h, richardson })
    }

    /// Default stencil for a wavelet with `|a| = a` and imaginary time `b`:
    /// `h = 1e-3 (a + |b|)` with Richardson extrapolation.
    pub fn for_wavelet(a: f64, b: f64) -> Self {
        Self { h: 1e-3 * (a + b.abs()), richardson: true }
    }
}

/// A finite-difference value with the local scale used for relative errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdEstimate<T> {
    pub value: T,
    pub scale: f64,
}

/// Real or complex sample values the difference operators accept.
pub trait Sample: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(self) -> f64;
}

impl Sample for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Sample for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

fn sample<T: Sample, P: fmt::Debug + Copy>(f: &impl Fn(P) -> Result<T>, at: P) -> Result<T> {
    match f(at) {
        Ok(v) if v.magnitude().is_finite() => Ok(v),
        Ok(_) => Err(Error::StencilHitsSingularity(format!("non-finite value at {at:?}"))),
        Err(e) => Err(Error::StencilHitsSingularity(format!("{at:?}: {e}"))),
    }
}

fn richardson<T: Sample>(spec: StencilSpec, d: impl Fn(f64) -> Result<T>) -> Result<T> {
    let coarse = d(spec.h)?;
    if !spec.richardson {
        return Ok(coarse);
    }
    let fine = d(0.5 * spec.h)?;
    Ok((fine * 4.0 - coarse) * (1.0 / 3.0))
}

/// Second differences along `t, x1, x2, x3`.
fn second_differences<T: Sample>(
    f: &impl Fn(SpacetimePoint) -> Result<T>,
    x: SpacetimePoint,
    h: f64,
) -> Result<[T; 4]> {
    let center = sample(f, x)? * 2.0;
    let inv = 1.0 / (h * h);
    let along = |dr: Vec3, dt: f64| -> Result<T> {
        let plus = sample(f, x.shifted(dr * h, dt * h))?;
        let minus = sample(f, x.shifted(dr * -h, -dt * h))?;
        Ok((plus + minus - center) * inv)
    };
    Ok([
        along(Vec3::ZERO, 1.0)?,
        along(Vec3::unit(0), 0.0)?,
        along(Vec3::unit(1), 0.0)?,
        along(Vec3::unit(2), 0.0)?,
    ])
}

/// `□f = ∂²f/∂t² - Δf` by central differences (3-point in time, 7-point
/// Laplacian). The scale is the largest single second-difference magnitude.
pub fn fd_dalembertian<T: Sample>(
    f: impl Fn(SpacetimePoint) -> Result<T>,
    x: SpacetimePoint,
    spec: StencilSpec,
) -> Result<FdEstimate<T>> {
    let parts = |h: f64| -> Result<[T; 4]> { second_differences(&f, x, h) };
    let coarse = parts(spec.h)?;
    let d = if spec.richardson {
        let fine = parts(0.5 * spec.h)?;
        std::array::from_fn(|k| (fine[k] * 4.0 - coarse[k]) * (1.0 / 3.0))
    } else {
        coarse
    };
    let scale = d.iter().map(|v| v.magnitude()).fold(0.0, f64::max);
    Ok(FdEstimate { value: d[0] - d[1] - d[2] - d[3], scale })
}

/// Spatial Laplacian by the 7-point stencil.
pub fn fd_laplacian<T: Sample>(
    f: impl Fn(Vec3) -> Result<T>,
    r: Vec3,
    spec: StencilSpec,
) -> Result<FdEstimate<T>> {
    let g = |x: SpacetimePoint| f(x.r);
    let est = fd_dalembertian(g, SpacetimePoint::new(r, 0.0), spec)?;
    Ok(FdEstimate { value: est.value * -1.0, scale: est.scale })
}

fn gradient<T: Sample>(f: &impl Fn(Vec3) -> Result<T>, r: Vec3, spec: StencilSpec) -> Result<[T; 3]> {
    let component = |k: usize| {
        richardson(spec, |h| {
            let plus = sample(f, r + Vec3::unit(k) * h)?;
            let minus = sample(f, r - Vec3::unit(k) * h)?;
            Ok((plus - minus) * (0.5 / h))
        })
    };
    Ok([component(0)?, component(1)?, component(2)?])
}

/// Central-difference gradient of a real spatial field.
pub fn fd_gradient(f: impl Fn(Vec3) -> Result<f64>, r: Vec3, spec: StencilSpec) -> Result<Vec3> {
    gradient(&f, r, spec).map(Vec3::from_array)
}

/// Central-difference gradient of a complex spatial field.
pub fn fd_gradient_complex(
    f: impl Fn(Vec3) -> Result<FieldValue>,
    r: Vec3,
    spec: StencilSpec,
) -> Result<[FieldValue; 3]> {
    gradient(&f, r, spec)
}

/// Central-difference time derivative.
pub fn fd_time_derivative(
    f: impl Fn(SpacetimePoint) -> Result<FieldValue>,
    x: SpacetimePoint,
    spec: StencilSpec,
) -> Result<FieldValue> {
    richardson(spec, |h| {
        let plus = sample(&f, x.shifted(Vec3::ZERO, h))?;
        let minus = sample(&f, x.shifted(Vec3::ZERO, -h))?;
        Ok((plus - minus) * (0.5 / h))
    })
}

/// One line of a report: the largest normalized error over `samples` probes.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub samples: usize,
    pub max_rel_error: f64,
    pub threshold: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, errors: &[f64], threshold: f64) -> Self {
        // NaN (a failed evaluation) must win the maximum
        let max_rel_error = errors
            .iter()
            .copied()
            .fold(0.0, |m: f64, e| if e.is_nan() || m.is_nan() { f64::NAN } else { m.max(e) });
        Self { name: name.into(), samples: errors.len(), max_rel_error, threshold }
    }

    pub fn passed(&self) -> bool {
        self.max_rel_error <= self.threshold
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{:.5e}\t{:.5e}\t{}",
            self.name,
            self.samples,
            self.max_rel_error,
            self.threshold,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Outcome of one suite, serialized as a `# suite=... seed=...` header
/// followed by one tab-separated line per check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# suite={} seed={}", self.suite, self.seed)?;
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
