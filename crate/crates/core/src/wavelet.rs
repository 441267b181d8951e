//! Pulsed-beam wavelets obtained by extending the retarded propagator to
//! complex spacetime.
//!
//! The basic wavelet depends on the complex spatial vector only through the
//! complex distance `ρ̃` and on time through `t̃ = t - ib`:
//!
//! ```text
//! Ψ(ρ̃, t̃) = 1 / (2πi ρ̃ (t̃ - ρ̃))
//! ```
//!
//! Averaging over the upper and lower hemispheroidal cuts gives `Ψ_A`, equal
//! to `Ψ₁ = 1/(2πi(t̃² - ρ̃²))` inside `S_α` and to `Ψ₂ = Ψ` outside, with the
//! bounded jump `Ψ_J = Ψ₂ - Ψ₁` across the spheroid.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    branch_distance, complex_distance, region_classify, rho_squared, BranchCut,
    ComplexDistance, Region, SourceVector, SpacetimePoint, Vec3,
};
use crate::quadrature::{adaptive_quadrature_breaks, midpoint};

pub type FieldValue = Complex64;

const TWO_PI_I: Complex64 = Complex64::new(0.0, TAU);

/// Poles closer than this (relative to the local scale) are reported as singular.
const POLE_TOL: f64 = 1e-14;

/// Complex time `t̃ = t - ib`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexTime {
    pub t: f64,
    pub b: f64,
}

impl ComplexTime {
    pub const fn new(t: f64, b: f64) -> Self {
        Self { t, b }
    }

    pub fn value(self) -> Complex64 {
        Complex64::new(self.t, -self.b)
    }
}

/// Complex spacetime point `z = (r0 + ia, t0 + ib)` from which a wavelet is
/// launched. Only timelike imaginary parts (`|b| > |a|`) are representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionCenter {
    r0: Vec3,
    t0: f64,
    a: SourceVector,
    b: f64,
}

impl EmissionCenter {
    pub fn new(r0: Vec3, t0: f64, a: SourceVector, b: f64) -> Result<Self> {
        if !(b.is_finite() && b.abs() > a.magnitude()) {
            return Err(Error::NotTimelike { a: a.magnitude(), b: b.abs() });
        }
        if !r0.is_finite() || !t0.is_finite() {
            return Err(Error::OutOfRange("emission point must be finite".into()));
        }
        Ok(Self { r0, t0, a, b })
    }

    /// Center at the spacetime origin.
    pub fn at_origin(a: SourceVector, b: f64) -> Result<Self> {
        Self::new(Vec3::ZERO, 0.0, a, b)
    }

    pub fn r0(&self) -> Vec3 {
        self.r0
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn a(&self) -> &SourceVector {
        &self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn translated(&self, dr: Vec3, dt: f64) -> Self {
        Self { r0: self.r0 + dr, t0: self.t0 + dt, ..*self }
    }

    /// Same center with a different imaginary time.
    pub fn with_b(&self, b: f64) -> Result<Self> {
        Self::new(self.r0, self.t0, self.a, b)
    }

    /// Observer position relative to `r0` and the complex time since `t0`.
    pub fn local(&self, x: SpacetimePoint) -> (Vec3, ComplexTime) {
        (x.r - self.r0, ComplexTime::new(x.t - self.t0, self.b))
    }

    /// Unit vector along which the beam propagates (`sign(b)·â`).
    pub fn beam_direction(&self) -> Vec3 {
        self.a.axis() * self.b.signum()
    }
}

/// Cauchy kernel `1/(2πi t̃)`.
pub fn cauchy_kernel(tt: ComplexTime) -> Result<FieldValue> {
    let z = tt.value();
    if z.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    Ok((TWO_PI_I * z).inv())
}

fn check_pole(v: Complex64, scale: f64, what: &str) -> Result<()> {
    if v.norm() <= POLE_TOL * scale || !v.is_finite() {
        return Err(Error::SingularPoint(format!("{what} vanishes ({v})")));
    }
    Ok(())
}

/// The basic wavelet `Ψ(ρ̃, t̃) = 1/(2πi ρ̃ (t̃ - ρ̃))`.
pub fn psi(rho: ComplexDistance, tt: ComplexTime) -> Result<FieldValue> {
    let r = rho.value();
    let t = tt.value();
    let scale = 1.0 + t.norm();
    check_pole(r, scale, "complex distance")?;
    check_pole(t - r, scale + r.norm(), "t̃ - ρ̃")?;
    Ok((TWO_PI_I * r * (t - r)).inv())
}

/// `∂Ψ/∂ρ̃ = -(t̃ - 2ρ̃) / (2πi ρ̃² (t̃ - ρ̃)²)`.
pub fn psi_prime(rho: ComplexDistance, tt: ComplexTime) -> Result<FieldValue> {
    let r = rho.value();
    let t = tt.value();
    let f = psi(rho, tt)?;
    // Ψ = 1/(2πi(ρ̃t̃ - ρ̃²)), so Ψ' = -2πi(t̃ - 2ρ̃)Ψ²
    Ok(-(TWO_PI_I * (t - 2.0 * r)) * f * f)
}

/// Interior (branch-averaged) field from `ρ̃²` directly; analytic on the
/// whole interior of `S_α`, including the branch circle.
pub fn psi_interior_from_sq(rho_sq: Complex64, tt: ComplexTime) -> Result<FieldValue> {
    let t = tt.value();
    let d = t * t - rho_sq;
    check_pole(d, 1.0 + t.norm_sqr() + rho_sq.norm(), "t̃² - ρ̃²")?;
    Ok((TWO_PI_I * d).inv())
}

/// `Ψ₁ = 1/(2πi(t̃² - ρ̃²))`, independent of the branch of `ρ̃`.
pub fn psi_interior(rho: ComplexDistance, tt: ComplexTime) -> Result<FieldValue> {
    let r = rho.value();
    psi_interior_from_sq(r * r, tt)
}

/// `∂Ψ₁/∂(ρ̃²) = 1/(2πi(t̃² - ρ̃²)²)`.
pub fn psi_interior_sq_derivative(rho_sq: Complex64, tt: ComplexTime) -> Result<FieldValue> {
    let f = psi_interior_from_sq(rho_sq, tt)?;
    Ok(TWO_PI_I * f * f)
}

/// Jump field `Ψ_J = Ψ₂ - Ψ₁ = t̃ / (2πi ρ̃ (t̃² - ρ̃²))`.
pub fn psi_jump(rho: ComplexDistance, tt: ComplexTime) -> Result<FieldValue> {
    let r = rho.value();
    let t = tt.value();
    let scale = 1.0 + t.norm();
    check_pole(r, scale, "complex distance")?;
    let d = t * t - r * r;
    check_pole(d, scale * scale + r.norm_sqr(), "t̃² - ρ̃²")?;
    Ok(t / (TWO_PI_I * r * d))
}

/// `∂Ψ_J/∂ρ̃ = -t̃ (t̃² - 3ρ̃²) / (2πi ρ̃² (t̃² - ρ̃²)²)`.
pub fn psi_jump_prime(rho: ComplexDistance, tt: ComplexTime) -> Result<FieldValue> {
    let r = rho.value();
    let t = tt.value();
    let jump = psi_jump(rho, tt)?;
    let d = t * t - r * r;
    // Ψ_J = t̃/(2πi)·u⁻¹ with u = ρ̃t̃² - ρ̃³, u' = t̃² - 3ρ̃²
    Ok(-jump * (t * t - 3.0 * r * r) / (r * d))
}

/// `∂ⁿΨ/∂tⁿ = n! (-1)ⁿ / (2πi ρ̃ (t̃ - ρ̃)ⁿ⁺¹)` for `n ≤ 3`.
pub fn psi_time_derivative(rho: ComplexDistance, tt: ComplexTime, n: u32) -> Result<FieldValue> {
    if n > 3 {
        return Err(Error::OutOfRange(format!("time derivative order {n} > 3")));
    }
    let base = psi(rho, tt)?;
    let inv = (tt.value() - rho.value()).inv();
    let fact: f64 = (1..=n).product::<u32>() as f64;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(base * inv.powu(n) * (fact * sign))
}

/// Translated eigenwavelet `Ψ(ρ̃_B(r - r0), (t - t0) - ib)`.
pub fn wavelet(x: SpacetimePoint, z: &EmissionCenter, cut: BranchCut) -> Result<FieldValue> {
    let (r, tt) = z.local(x);
    psi(branch_distance(r, z.a(), cut)?, tt)
}

/// Branch-averaged regularized field `Ψ_A` for the hemispheroidal cuts of
/// parameter `alpha`.
pub fn psi_avg(x: SpacetimePoint, z: &EmissionCenter, alpha: f64) -> Result<FieldValue> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::OutOfRange(format!("alpha must be > 0, got {alpha}")));
    }
    let (r, tt) = z.local(x);
    match region_classify(r, z.a(), alpha) {
        Region::OnSpheroid => Err(Error::SingularPoint(format!(
            "observer {r} lies on the spheroid p = {alpha} where Ψ_A jumps"
        ))),
        Region::Exterior => psi(complex_distance(r, z.a())?, tt),
        _ => psi_interior_from_sq(rho_squared(r, z.a()), tt),
    }
}

/// Interior field `Ψ₁` at a spacetime point.
pub fn interior_field(x: SpacetimePoint, z: &EmissionCenter) -> Result<FieldValue> {
    let (r, tt) = z.local(x);
    psi_interior_from_sq(rho_squared(r, z.a()), tt)
}

/// Jump field `Ψ_J` at a spacetime point (standard branch).
pub fn jump_field(x: SpacetimePoint, z: &EmissionCenter) -> Result<FieldValue> {
    let (r, tt) = z.local(x);
    psi_jump(complex_distance(r, z.a())?, tt)
}

/// Axis-aligned spacetime box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimeBox {
    pub lo: SpacetimePoint,
    pub hi: SpacetimePoint,
}

impl SpacetimeBox {
    pub fn new(lo: SpacetimePoint, hi: SpacetimePoint) -> Self {
        Self { lo, hi }
    }

    /// Cube of half-width `hs` in space and `ht` in time about `center`.
    pub fn around(center: SpacetimePoint, hs: f64, ht: f64) -> Self {
        let d = Vec3::new(hs, hs, hs);
        Self::new(center.shifted(-d, -ht), center.shifted(d, ht))
    }

    fn ranges(&self) -> [(f64, f64); 4] {
        [
            (self.lo.r.x1, self.hi.r.x1),
            (self.lo.r.x2, self.hi.r.x2),
            (self.lo.r.x3, self.hi.r.x3),
            (self.lo.t, self.hi.t),
        ]
    }
}

/// Real source density `g(x)` with compact support in a spacetime box.
pub trait SourceDensity: Sync {
    fn support(&self) -> SpacetimeBox;
    fn eval(&self, x: SpacetimePoint) -> f64;
}

/// [`SourceDensity`] backed by a closure.
pub struct FnSource<F> {
    support: SpacetimeBox,
    f: F,
}

impl<F: Fn(SpacetimePoint) -> f64 + Sync> FnSource<F> {
    pub fn new(support: SpacetimeBox, f: F) -> Self {
        Self { support, f }
    }
}

impl<F: Fn(SpacetimePoint) -> f64 + Sync> SourceDensity for FnSource<F> {
    fn support(&self) -> SpacetimeBox {
        self.support
    }

    fn eval(&self, x: SpacetimePoint) -> f64 {
        (self.f)(x)
    }
}

/// Tensor-product quadrature resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Node counts along `x1, x2, x3, t`.
    pub nodes: [usize; 4],
    /// Number of node-doubling refinements; the error estimate is the change
    /// across the last one.
    pub refinements: usize,
}

impl QuadratureSpec {
    pub fn uniform(n: usize) -> Self {
        Self { nodes: [n; 4], refinements: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.iter().any(|&n| n < 2) {
            return Err(Error::OutOfRange("quadrature needs at least 2 nodes per axis".into()));
        }
        Ok(())
    }

    fn refined(&self, level: usize) -> [usize; 4] {
        self.nodes.map(|n| n << level)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub value: FieldValue,
    pub error: f64,
}

fn midpoint_convolution<S: SourceDensity + ?Sized>(
    g: &S,
    a: &SourceVector,
    b: f64,
    x: SpacetimePoint,
    cut: BranchCut,
    nodes: [usize; 4],
) -> Result<FieldValue> {
    let ranges = g.support().ranges();
    let axes: Vec<Vec<(f64, f64)>> =
        (0..4).map(|k| midpoint(nodes[k], ranges[k].0, ranges[k].1)).collect();
    let partials: Vec<Result<FieldValue>> = axes[0]
        .par_iter()
        .map(|&(x1, w1)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(x2, w2) in &axes[1] {
                for &(x3, w3) in &axes[2] {
                    for &(t, wt) in &axes[3] {
                        let src = SpacetimePoint::from_coords(x1, x2, x3, t);
                        let gv = g.eval(src);
                        if gv == 0.0 {
                            continue;
                        }
                        let z = EmissionCenter::new(src.r, src.t, *a, b)?;
                        let kernel = wavelet(x, &z, cut).map_err(|e| {
                            Error::SingularEncounter(format!("node {src:?}: {e}"))
                        })?;
                        acc += kernel * (gv * w1 * w2 * w3 * wt);
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    partials.into_iter().sum()
}

/// Extended causal field `f̃(x - iy) = ∫_W G̃(x - x' - iy) g(x') dx'` by
/// tensor midpoint quadrature over the support box of `g`.
pub fn extended_field<S: SourceDensity + ?Sized>(
    g: &S,
    a: &SourceVector,
    b: f64,
    x: SpacetimePoint,
    cut: BranchCut,
    spec: QuadratureSpec,
) -> Result<QuadratureEstimate> {
    spec.validate()?;
    if !(b.abs() > a.magnitude()) {
        return Err(Error::NotTimelike { a: a.magnitude(), b: b.abs() });
    }
    let mut prev = midpoint_convolution(g, a, b, x, cut, spec.nodes)?;
    let mut error = f64::INFINITY;
    for level in 1..=spec.refinements {
        let next = midpoint_convolution(g, a, b, x, cut, spec.refined(level))?;
        error = (next - prev).norm();
        prev = next;
    }
    Ok(QuadratureEstimate { value: prev, error })
}

/// Smooth test function on a finite integration window.
pub struct TestFunction<'a> {
    pub f: &'a dyn Fn(f64) -> f64,
    pub bounds: (f64, f64),
}

/// `|∫ [δ̃(t - ib) - δ̃(t + ib)] φ(t) dt - φ(0)|`, the distance of the Cauchy
/// kernel pairing from its `b → 0⁺` limit.
pub fn hyperfunction_limit_error(b: f64, phi: &TestFunction<'_>) -> Result<f64> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::OutOfRange(format!("b must be > 0, got {b}")));
    }
    let (lo, hi) = phi.bounds;
    let kernel = |t: f64| -> f64 {
        let minus = (TWO_PI_I * ComplexTime::new(t, b).value()).inv();
        let plus = (TWO_PI_I * ComplexTime::new(t, -b).value()).inv();
        (minus - plus).re * (phi.f)(t)
    };
    let mut breaks = vec![lo];
    for k in [-10.0 * b, -b, 0.0, b, 10.0 * b] {
        if k > lo && k < hi {
            breaks.push(k);
        }
    }
    breaks.push(hi);
    let (value, _) = adaptive_quadrature_breaks(kernel, &breaks, 1e-12)?;
    Ok((value - (phi.f)(0.0)).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamMetrics {
    /// Full width at half maximum of `|Ψ|` over polar angle, radians.
    /// Equal to `2π` when the beam never falls to half its peak.
    pub angular_fwhm: f64,
    /// Full width at half maximum of `|Ψ(t)|` on the beam axis.
    pub axial_pulse_width: f64,
    /// Time of the on-axis peak at `R_far`.
    pub peak_time: f64,
}

fn bisect_half(f: &dyn Fn(f64) -> f64, mut inside: f64, mut outside: f64, level: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if f(mid) >= level {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (hi - lo).abs() <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Full width at half maximum of a sampled unimodal-around-`k` profile.
/// Returns `None` when either half-level crossing lies outside the samples.
fn fwhm_from_samples(f: &dyn Fn(f64) -> f64, xs: &[f64], ys: &[f64], k: usize, peak: f64) -> Option<f64> {
    let half = 0.5 * peak;
    let right = (k..xs.len()).find(|&i| ys[i] < half)?;
    let left = (0..=k).rev().find(|&i| ys[i] < half)?;
    let xr = bisect_half(f, xs[right - 1], xs[right], half);
    let xl = bisect_half(f, xs[left + 1], xs[left], half);
    Some(xr - xl)
}

/// Angular focus and on-axis pulse width of the wavelet launched from `z`,
/// observed at distance `r_far` around the time `t_obs`.
pub fn beam_metrics(z: &EmissionCenter, t_obs: f64, r_far: f64) -> Result<BeamMetrics> {
    let a = z.a().magnitude();
    let b = z.b().abs();
    if !(r_far > a) {
        return Err(Error::OutOfRange(format!("R_far = {r_far} must exceed |a| = {a}")));
    }
    let dir = z.beam_direction();
    let (e1, _) = z.a().frame();
    let field = |r: Vec3, t: f64| -> f64 {
        wavelet(SpacetimePoint::new(z.r0() + r, z.t0() + t), z, BranchCut::StandardDisk)
            .map(|v| v.norm())
            .unwrap_or(f64::NAN)
    };

    // temporal profile on axis
    let on_axis = dir * r_far;
    let axial = |t: f64| field(on_axis, t);
    let window = 4.0 * (a + b);
    let step = ((b - a) / 8.0).min(window / 400.0);
    let n = (2.0 * window / step).ceil() as usize + 1;
    let ts: Vec<f64> = (0..n).map(|i| t_obs - window + i as f64 * step).collect();
    let ys: Vec<f64> = ts.par_iter().map(|&t| axial(t)).collect();
    let k = ys
        .iter()
        .enumerate()
        .filter(|(_, y)| y.is_finite())
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::PeakNotFound("field not finite on axis".into()))?;
    if k == 0 || k == n - 1 {
        return Err(Error::PeakNotFound(format!(
            "on-axis maximum at the edge of [{}, {}]; the pulse does not cross R_far = {r_far} near t = {t_obs}",
            ts[0],
            ts[n - 1]
        )));
    }
    let t_peak = golden_max(&axial, ts[k - 1], ts[k + 1]);
    let peak = axial(t_peak).max(ys[k]);
    let axial_pulse_width = fwhm_from_samples(&axial, &ts, &ys, k, peak)
        .ok_or_else(|| Error::PeakNotFound("on-axis pulse does not fall to half maximum".into()))?;

    // angular profile at the peak time, in the plane spanned by dir and e1
    let angular = |theta: f64| field((dir * theta.cos() + e1 * theta.sin()) * r_far, t_peak);
    let dtheta = (PI / 4000.0).min(((b - a) / a).sqrt() / 20.0);
    let m = (PI / dtheta).ceil() as usize;
    let thetas: Vec<f64> = (-(m as i64)..=m as i64).map(|i| i as f64 * PI / m as f64).collect();
    let vals: Vec<f64> = thetas.par_iter().map(|&th| angular(th)).collect();
    let j = vals
        .iter()
        .enumerate()
        .filter(|(_, y)| y.is_finite())
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::PeakNotFound("field not finite on the far sphere".into()))?;
    let angular_fwhm = fwhm_from_samples(&angular, &thetas, &vals, j, vals[j]).unwrap_or(TAU);

    Ok(BeamMetrics { angular_fwhm, axial_pulse_width, peak_time: t_peak })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(x: Complex64, y: Complex64, tol: f64) -> bool {
        (x - y).norm() <= tol * y.norm().max(1e-300)
    }

    #[test]
    fn cauchy_kernel_values() {
        let v = cauchy_kernel(ComplexTime::new(0.0, 1.0)).unwrap();
        assert!(close(v, c(1.0 / TAU, 0.0), 1e-15));
        let v = cauchy_kernel(ComplexTime::new(1.0, 0.0)).unwrap();
        assert!(close(v, c(0.0, -1.0 / TAU), 1e-15));
        assert_eq!(cauchy_kernel(ComplexTime::new(0.0, 0.0)), Err(Error::ZeroArgument));
        for (t, b) in [(0.3, 1.7), (-2.0, 0.1), (5.0, -3.0)] {
            let lhs = cauchy_kernel(ComplexTime::new(t, b)).unwrap();
            let rhs = -cauchy_kernel(ComplexTime::new(t, -b)).unwrap().conj();
            assert!(close(lhs, rhs, 1e-15));
            // the difference across the real axis is twice the real part
            let poisson = b / (PI * (t * t + b * b));
            assert!((2.0 * lhs.re - poisson).abs() <= 1e-15 * poisson.abs());
        }
    }

    #[test]
    fn psi_reference_value() {
        let rho = ComplexDistance::new(2.0, 1.0);
        let tt = ComplexTime::new(0.0, 2.0);
        // (2 - i)(-2 - i) = -5
        let oracle = (c(0.0, TAU) * c(2.0, -1.0) * c(-2.0, -1.0)).inv();
        let v = psi(rho, tt).unwrap();
        assert!(close(v, oracle, 1e-15));
        assert!(close(v, c(0.0, 1.0 / (10.0 * PI)), 1e-15));
    }

    #[test]
    fn psi_poles_are_rejected() {
        let tt = ComplexTime::new(0.0, 2.0);
        assert!(psi(ComplexDistance::new(0.0, 0.0), tt).is_err());
        assert!(psi(ComplexDistance::new(1.0, 2.0), ComplexTime::new(1.0, 2.0)).is_err());
    }

    #[test]
    fn interior_reference_value() {
        let rho = ComplexDistance::new(2.0, 1.0);
        let tt = ComplexTime::new(0.0, 2.0);
        let oracle = (c(0.0, TAU) * c(-7.0, 4.0)).inv();
        assert!(close(psi_interior(rho, tt).unwrap(), oracle, 1e-15));
    }

    #[test]
    fn jump_prime_matches_difference_quotient() {
        let tt = ComplexTime::new(0.7, 1.6);
        for (p, q) in [(2.0, 0.4), (1.2, -0.9), (3.5, 0.1)] {
            let rho = ComplexDistance::new(p, q);
            let h = 1e-5;
            let fwd = psi_jump(ComplexDistance::new(p + h, q), tt).unwrap();
            let bwd = psi_jump(ComplexDistance::new(p - h, q), tt).unwrap();
            let fd = (fwd - bwd) / (2.0 * h);
            assert!(close(psi_jump_prime(rho, tt).unwrap(), fd, 1e-6));
            let fwd = psi(ComplexDistance::new(p + h, q), tt).unwrap();
            let bwd = psi(ComplexDistance::new(p - h, q), tt).unwrap();
            assert!(close(psi_prime(rho, tt).unwrap(), (fwd - bwd) / (2.0 * h), 1e-6));
        }
    }

    #[test]
    fn printed_jump_derivative_differs() {
        // -t̃/(2πi ρ̃²(t̃²-ρ̃²)²) lacks the factor (t̃² - 3ρ̃²)
        let rho = ComplexDistance::new(2.0, 0.4);
        let tt = ComplexTime::new(0.7, 1.6);
        let (r, t) = (rho.value(), tt.value());
        let d = t * t - r * r;
        let printed = -t / (c(0.0, TAU) * r * r * d * d);
        let exact = psi_jump_prime(rho, tt).unwrap();
        assert!(close(exact, printed * (t * t - 3.0 * r * r), 1e-13));
        assert!(!close(exact, printed, 1e-2));
    }

    #[test]
    fn time_derivatives() {
        let rho = ComplexDistance::new(2.0, 1.0);
        let tt = ComplexTime::new(0.0, 2.0);
        assert_eq!(psi_time_derivative(rho, tt, 0).unwrap(), psi(rho, tt).unwrap());
        let oracle = -(c(0.0, TAU) * c(2.0, -1.0) * c(-2.0, -1.0) * c(-2.0, -1.0)).inv();
        assert!(close(psi_time_derivative(rho, tt, 1).unwrap(), oracle, 1e-14));
        let h = 1e-4;
        for n in 0..3u32 {
            let fwd = psi_time_derivative(rho, ComplexTime::new(h, 2.0), n).unwrap();
            let bwd = psi_time_derivative(rho, ComplexTime::new(-h, 2.0), n).unwrap();
            let fd = (fwd - bwd) / (2.0 * h);
            assert!(close(psi_time_derivative(rho, tt, n + 1).unwrap(), fd, 1e-6));
        }
        assert!(psi_time_derivative(rho, tt, 4).is_err());
    }

    #[test]
    fn wavelet_composes_distance_and_psi() {
        let a = SourceVector::along_x3(1.0).unwrap();
        let z = EmissionCenter::at_origin(a, 2.0).unwrap();
        let x = SpacetimePoint::from_coords(0.0, 0.0, 2.0, 0.0);
        let v = wavelet(x, &z, BranchCut::StandardDisk).unwrap();
        assert!(close(v, c(0.0, 1.0 / (10.0 * PI)), 1e-15));
        let shift = Vec3::new(0.3, -1.1, 2.5);
        let moved = wavelet(x.shifted(shift, 4.0), &z.translated(shift, 4.0), BranchCut::StandardDisk)
            .unwrap();
        assert!(close(moved, v, 1e-13));
    }

    #[test]
    fn timelike_guard() {
        let a = SourceVector::along_x3(1.0).unwrap();
        assert!(matches!(EmissionCenter::at_origin(a, 0.5), Err(Error::NotTimelike { .. })));
        assert!(EmissionCenter::at_origin(a, 1.0).is_err());
        assert!(EmissionCenter::at_origin(a, -1.5).is_ok());
    }

    #[test]
    fn avg_dispatches_by_region() {
        let a = SourceVector::along_x3(1.0).unwrap();
        let z = EmissionCenter::at_origin(a, 1.5).unwrap();
        let alpha = 2.0;
        let inside = SpacetimePoint::from_coords(0.3, 0.2, 0.9, 0.4);
        let (r, tt) = z.local(inside);
        let rho = complex_distance(r, &a).unwrap();
        assert!(close(psi_avg(inside, &z, alpha).unwrap(), psi_interior(rho, tt).unwrap(), 1e-14));
        // literal average of the two hemispheroidal branches
        let up = psi(branch_distance(r, &a, BranchCut::UpperSpheroid(alpha)).unwrap(), tt).unwrap();
        let lo = psi(branch_distance(r, &a, BranchCut::LowerSpheroid(alpha)).unwrap(), tt).unwrap();
        assert!(close(psi_avg(inside, &z, alpha).unwrap(), 0.5 * (up + lo), 1e-13));
        assert!(close(psi_interior(-rho, tt).unwrap(), psi_interior(rho, tt).unwrap(), 1e-15));

        let outside = SpacetimePoint::from_coords(1.0, 2.0, 3.0, 1.0);
        assert_eq!(
            psi_avg(outside, &z, alpha).unwrap(),
            wavelet(outside, &z, BranchCut::StandardDisk).unwrap()
        );
        let on = SpacetimePoint::from_coords(0.0, 0.0, alpha, 0.0);
        assert!(psi_avg(on, &z, alpha).is_err());
        // finite on the branch circle itself
        let circle = SpacetimePoint::from_coords(1.0, 0.0, 0.0, 0.3);
        assert!(psi_avg(circle, &z, alpha).unwrap().is_finite());
    }

    #[test]
    fn beam_metrics_on_axis_width() {
        // on axis ρ̃ = R - ia exactly, so |Ψ(t)| ∝ 1/|(t - R) - i(b - a)|
        // with half maximum at |t - R| = √3 (b - a)
        let a = SourceVector::along_x3(1.0).unwrap();
        for b in [1.1, 1.5, -1.5] {
            let z = EmissionCenter::at_origin(a, b).unwrap();
            let m = beam_metrics(&z, 50.0, 50.0).unwrap();
            assert_relative_eq!(m.axial_pulse_width, 2.0 * 3f64.sqrt() * (b.abs() - 1.0), max_relative = 1e-6);
            assert_relative_eq!(m.peak_time, 50.0, epsilon = 1e-6);
        }
        let z = EmissionCenter::at_origin(a, 1.5).unwrap();
        assert!(matches!(beam_metrics(&z, 5.0, 50.0), Err(Error::PeakNotFound(_))));
    }

    #[test]
    fn limit_error_for_gaussian() {
        let g = |t: f64| (-t * t).exp();
        let phi = TestFunction { f: &g, bounds: (-40.0, 40.0) };
        let e1 = hyperfunction_limit_error(1e-2, &phi).unwrap();
        let e2 = hyperfunction_limit_error(5e-3, &phi).unwrap();
        assert!(e1 <= 0.02);
        assert!(e2 < e1);
        assert!(hyperfunction_limit_error(0.0, &phi).is_err());
    }
}
