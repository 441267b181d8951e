//! Interpolated fields and their transitional (shell) sources.
//!
//! Two solutions `f₁`, `f₂` are blended as `f = h₁f₁ + h₂f₂` with
//! `h₁ + h₂ = 1`, `h₂ = 0` in `V₁ = {p < p₁}` and `h₂ = 1` in `V₂ = {p > p₂}`.
//! The source of `f` splits into the interpolated source `h₁g₁ + h₂g₂` and a
//! transitional source supported on the shell `p₁ ≤ p ≤ p₂`,
//!
//! ```text
//! g_T = 2 ḣ₂ ḟ_J - 2 ∇h₂·∇f_J + (□h₂) f_J,     f_J = f₂ - f₁.
//! ```
//!
//! With `f₁ = Ψ₁`, `f₂ = Ψ₂ = Ψ` and a static profile in `p`, the shell
//! carries a smooth equivalent source whose retarded field is `Ψ` outside
//! the shell. Throughout, `□f = 4π·(density)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    complex_distance, from_oblate, grad_p, grad_p_norm_sq, grad_rho, laplacian_p, raw_distance,
    rho_squared, ComplexDistance, OblatePoint, SpacetimePoint, Vec3,
};
use crate::quadrature::gauss_legendre;
use crate::wavelet::{
    psi, psi_interior_from_sq, psi_interior_sq_derivative, psi_jump, psi_jump_prime, psi_prime,
    psi_time_derivative, ComplexTime, EmissionCenter, FieldValue,
};

/// Relative tolerance for a point to count as lying on `S_α`.
pub const SURFACE_TOL: f64 = 1e-6;

const FOUR_PI: f64 = 4.0 * PI;

/// Quintic smoothstep transition `h₂(p)` from 0 at `p₁` to 1 at `p₂` (C²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionProfile {
    p1: f64,
    p2: f64,
}

impl TransitionProfile {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        if !(p1 > 0.0 && p1 < p2 && p2.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "transition profile needs 0 < p1 < p2, got p1={p1}, p2={p2}"
            )));
        }
        Ok(Self { p1, p2 })
    }

    /// Shell of the given width centered on `alpha`.
    pub fn centered(alpha: f64, width: f64) -> Result<Self> {
        Self::new(alpha - 0.5 * width, alpha + 0.5 * width)
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn width(&self) -> f64 {
        self.p2 - self.p1
    }

    /// Whether `p` lies strictly inside the transition, where `h₂` varies.
    pub fn in_transition(&self, p: f64) -> bool {
        p > self.p1 && p < self.p2
    }

    fn u(&self, p: f64) -> f64 {
        (p - self.p1) / (self.p2 - self.p1)
    }

    pub fn h2(&self, p: f64) -> f64 {
        if p <= self.p1 {
            0.0
        } else if p >= self.p2 {
            1.0
        } else {
            let u = self.u(p);
            u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
        }
    }

    pub fn h1(&self, p: f64) -> f64 {
        1.0 - self.h2(p)
    }

    pub fn h2_prime(&self, p: f64) -> f64 {
        if !self.in_transition(p) {
            return 0.0;
        }
        let u = self.u(p);
        30.0 * u * u * (u - 1.0) * (u - 1.0) / self.width()
    }

    pub fn h2_double_prime(&self, p: f64) -> f64 {
        if !self.in_transition(p) {
            return 0.0;
        }
        let u = self.u(p);
        let w = self.width();
        60.0 * u * (u - 1.0) * (2.0 * u - 1.0) / (w * w)
    }
}

/// `h₁Ψ₁ + h₂Ψ₂`, the smoothed regularized wavelet.
pub fn interpolated_field(x: SpacetimePoint, profile: &TransitionProfile, z: &EmissionCenter) -> Result<FieldValue> {
    let (r, tt) = z.local(x);
    let p = raw_distance(r, z.a()).p;
    let h2 = profile.h2(p);
    if h2 == 1.0 {
        return psi(complex_distance(r, z.a())?, tt);
    }
    let inner = psi_interior_from_sq(rho_squared(r, z.a()), tt)?;
    if h2 == 0.0 {
        return Ok(inner);
    }
    let outer = psi(complex_distance(r, z.a())?, tt)?;
    Ok(inner * (1.0 - h2) + outer * h2)
}

/// The three pieces of `4π·density` on the shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellSourceTerms {
    /// `-2 h₂' |∇p|² Ψ_J'`
    pub gradient: FieldValue,
    /// `-h₂'' |∇p|² Ψ_J`
    pub curvature: FieldValue,
    /// `-h₂' Δp Ψ_J`
    pub laplacian: FieldValue,
}

impl ShellSourceTerms {
    const ZERO: Self = Self {
        gradient: Complex64::new(0.0, 0.0),
        curvature: Complex64::new(0.0, 0.0),
        laplacian: Complex64::new(0.0, 0.0),
    };

    /// `□(h₁Ψ₁ + h₂Ψ₂) = 4π·density`.
    pub fn wave_operator(&self) -> FieldValue {
        self.gradient + self.curvature + self.laplacian
    }

    pub fn density(&self) -> FieldValue {
        self.wave_operator() / FOUR_PI
    }

    /// Magnitude of the largest term, the natural scale for relative errors.
    pub fn dominant(&self) -> f64 {
        self.gradient.norm().max(self.curvature.norm()).max(self.laplacian.norm())
    }
}

struct ShellGeometry {
    rho: ComplexDistance,
    grad_sq: f64,
    lap: f64,
    h2p: f64,
    h2pp: f64,
}

fn shell_geometry(r: Vec3, profile: &TransitionProfile, z: &EmissionCenter) -> Result<Option<ShellGeometry>> {
    let p = raw_distance(r, z.a()).p;
    if !profile.in_transition(p) {
        return Ok(None);
    }
    Ok(Some(ShellGeometry {
        rho: complex_distance(r, z.a())?,
        grad_sq: grad_p_norm_sq(r, z.a())?,
        lap: laplacian_p(r, z.a())?,
        h2p: profile.h2_prime(p),
        h2pp: profile.h2_double_prime(p),
    }))
}

fn terms_from(g: &ShellGeometry, tt: ComplexTime) -> Result<ShellSourceTerms> {
    let jump = psi_jump(g.rho, tt)?;
    let jump_p = psi_jump_prime(g.rho, tt)?;
    Ok(ShellSourceTerms {
        gradient: jump_p * (-2.0 * g.h2p * g.grad_sq),
        curvature: jump * (-g.h2pp * g.grad_sq),
        laplacian: jump * (-g.h2p * g.lap),
    })
}

/// Term-by-term shell source; all terms vanish exactly outside `(p₁, p₂)`.
pub fn shell_source_terms(x: SpacetimePoint, profile: &TransitionProfile, z: &EmissionCenter) -> Result<ShellSourceTerms> {
    let (r, tt) = z.local(x);
    match shell_geometry(r, profile, z)? {
        None => Ok(ShellSourceTerms::ZERO),
        Some(g) => terms_from(&g, tt),
    }
}

/// Smooth equivalent source density `δ̃_A^sm` with `□(h₁Ψ₁ + h₂Ψ₂) = 4π δ̃_A^sm`.
pub fn shell_source_density(x: SpacetimePoint, profile: &TransitionProfile, z: &EmissionCenter) -> Result<FieldValue> {
    Ok(shell_source_terms(x, profile, z)?.density())
}

/// Shell source density at a spacetime point; zero outside `p₁ < p < p₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellSourceSample {
    pub position: Vec3,
    pub time: f64,
    pub density: FieldValue,
}

pub fn sample_shell_source(x: SpacetimePoint, profile: &TransitionProfile, z: &EmissionCenter) -> Result<ShellSourceSample> {
    Ok(ShellSourceSample { position: x.r, time: x.t, density: shell_source_density(x, profile, z)? })
}

/// A complex field with its first derivatives.
pub trait FieldEvaluator: Sync {
    fn value(&self, x: SpacetimePoint) -> Result<FieldValue>;
    fn gradient(&self, x: SpacetimePoint) -> Result<[FieldValue; 3]>;
    fn time_derivative(&self, x: SpacetimePoint) -> Result<FieldValue>;
}

/// Inner and outer fields to be blended.
pub struct FieldPair<'a> {
    pub f1: &'a dyn FieldEvaluator,
    pub f2: &'a dyn FieldEvaluator,
}

/// A blending function `h₂(r, t)` with the derivatives the transitional
/// source needs.
pub trait TransitionField: Sync {
    fn h2(&self, x: SpacetimePoint) -> f64;
    fn grad_h2(&self, x: SpacetimePoint) -> Result<Vec3>;
    fn dt_h2(&self, x: SpacetimePoint) -> f64;
    /// `□h₂ = ∂²h₂/∂t² - Δh₂`.
    fn box_h2(&self, x: SpacetimePoint) -> Result<f64>;
}

/// Static profile `h₂(p(r - r0))` about an emission center.
pub struct ProfileField {
    pub profile: TransitionProfile,
    pub center: EmissionCenter,
}

impl ProfileField {
    fn p(&self, x: SpacetimePoint) -> (Vec3, f64) {
        let r = x.r - self.center.r0();
        (r, raw_distance(r, self.center.a()).p)
    }
}

impl TransitionField for ProfileField {
    fn h2(&self, x: SpacetimePoint) -> f64 {
        self.profile.h2(self.p(x).1)
    }

    fn grad_h2(&self, x: SpacetimePoint) -> Result<Vec3> {
        let (r, p) = self.p(x);
        if !self.profile.in_transition(p) {
            return Ok(Vec3::ZERO);
        }
        Ok(grad_p(r, self.center.a())? * self.profile.h2_prime(p))
    }

    fn dt_h2(&self, _x: SpacetimePoint) -> f64 {
        0.0
    }

    fn box_h2(&self, x: SpacetimePoint) -> Result<f64> {
        let (r, p) = self.p(x);
        if !self.profile.in_transition(p) {
            return Ok(0.0);
        }
        let a = self.center.a();
        Ok(-(self.profile.h2_double_prime(p) * grad_p_norm_sq(r, a)?
            + self.profile.h2_prime(p) * laplacian_p(r, a)?))
    }
}

/// `Ψ₁`, analytic inside `S_α` including the branch circle.
pub struct InteriorPsi(pub EmissionCenter);

/// `Ψ₂ = Ψ` on the standard branch.
pub struct ExteriorPsi(pub EmissionCenter);

impl FieldEvaluator for InteriorPsi {
    fn value(&self, x: SpacetimePoint) -> Result<FieldValue> {
        let (r, tt) = self.0.local(x);
        psi_interior_from_sq(rho_squared(r, self.0.a()), tt)
    }

    fn gradient(&self, x: SpacetimePoint) -> Result<[FieldValue; 3]> {
        let (r, tt) = self.0.local(x);
        let d = psi_interior_sq_derivative(rho_squared(r, self.0.a()), tt)?;
        // ∇(ρ̃²) = 2(r - ia)
        let av = self.0.a().vec().to_array();
        let rv = r.to_array();
        Ok(std::array::from_fn(|k| d * Complex64::new(2.0 * rv[k], -2.0 * av[k])))
    }

    fn time_derivative(&self, x: SpacetimePoint) -> Result<FieldValue> {
        let (r, tt) = self.0.local(x);
        let d = psi_interior_sq_derivative(rho_squared(r, self.0.a()), tt)?;
        Ok(-2.0 * tt.value() * d)
    }
}

impl FieldEvaluator for ExteriorPsi {
    fn value(&self, x: SpacetimePoint) -> Result<FieldValue> {
        let (r, tt) = self.0.local(x);
        psi(complex_distance(r, self.0.a())?, tt)
    }

    fn gradient(&self, x: SpacetimePoint) -> Result<[FieldValue; 3]> {
        let (r, tt) = self.0.local(x);
        let d = psi_prime(complex_distance(r, self.0.a())?, tt)?;
        Ok(grad_rho(r, self.0.a())?.map(|g| g * d))
    }

    fn time_derivative(&self, x: SpacetimePoint) -> Result<FieldValue> {
        let (r, tt) = self.0.local(x);
        psi_time_derivative(complex_distance(r, self.0.a())?, tt, 1)
    }
}

/// Transitional source `2ḣ₂ḟ_J - 2∇h₂·∇f_J + (□h₂) f_J` (not divided by 4π).
///
/// The fields are not evaluated where every derivative of `h₂` vanishes.
pub fn transitional_source_general(fp: &FieldPair<'_>, h: &dyn TransitionField, x: SpacetimePoint) -> Result<FieldValue> {
    let dh = h.dt_h2(x);
    let gh = h.grad_h2(x)?;
    let bh = h.box_h2(x)?;
    if dh == 0.0 && gh == Vec3::ZERO && bh == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let jump = fp.f2.value(x)? - fp.f1.value(x)?;
    let g1 = fp.f1.gradient(x)?;
    let g2 = fp.f2.gradient(x)?;
    let gh = gh.to_array();
    let grad_dot: Complex64 = (0..3).map(|k| (g2[k] - g1[k]) * gh[k]).sum();
    let mut out = jump * bh - 2.0 * grad_dot;
    if dh != 0.0 {
        let dj = fp.f2.time_derivative(x)? - fp.f1.time_derivative(x)?;
        out += 2.0 * dh * dj;
    }
    Ok(out)
}

/// Interpolated source `h₁g₁ + h₂g₂`.
pub fn interpolated_source(
    g1: &dyn Fn(SpacetimePoint) -> FieldValue,
    g2: &dyn Fn(SpacetimePoint) -> FieldValue,
    h: &dyn TransitionField,
    x: SpacetimePoint,
) -> FieldValue {
    let h2 = h.h2(x);
    let mut out = Complex64::new(0.0, 0.0);
    if h2 != 1.0 {
        out += g1(x) * (1.0 - h2);
    }
    if h2 != 0.0 {
        out += g2(x) * h2;
    }
    out
}

/// Coefficients of `δ(p - α)` and `δ'(p - α)` in the abrupt-transition source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceLayerDensity {
    pub single_layer: FieldValue,
    pub double_layer: FieldValue,
}

/// Single and double layer coefficients on `S_α` at `x` (divided by 4π).
pub fn abrupt_layer_coefficients(x: SpacetimePoint, alpha: f64, z: &EmissionCenter) -> Result<SurfaceLayerDensity> {
    let (r, tt) = z.local(x);
    let rho = complex_distance(r, z.a())?;
    let off = (rho.p - alpha).abs();
    if off > SURFACE_TOL * alpha {
        return Err(Error::OffSurface(off));
    }
    layer_coefficients_at(r, rho, tt, z)
}

/// Layer coefficient formulas evaluated at any point off the disk; used to
/// follow the coefficients along a coordinate line through `S_α`.
pub fn layer_coefficients_at(r: Vec3, rho: ComplexDistance, tt: ComplexTime, z: &EmissionCenter) -> Result<SurfaceLayerDensity> {
    let grad_sq = grad_p_norm_sq(r, z.a())?;
    let lap = laplacian_p(r, z.a())?;
    let jump = psi_jump(rho, tt)?;
    let jump_p = psi_jump_prime(rho, tt)?;
    Ok(SurfaceLayerDensity {
        single_layer: (jump_p * (-2.0 * grad_sq) - jump * lap) / FOUR_PI,
        double_layer: jump * (-grad_sq) / FOUR_PI,
    })
}

/// Node counts for the oblate shell quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShellGrid {
    /// Gauss-Legendre nodes across the shell in `p`.
    pub n_p: usize,
    /// Gauss-Legendre nodes in the polar angle `θ` (`q = a cos θ`).
    pub n_theta: usize,
    /// Trapezoid nodes in azimuth.
    pub n_phi: usize,
}

impl ShellGrid {
    pub const fn new(n_p: usize, n_theta: usize, n_phi: usize) -> Self {
        Self { n_p, n_theta, n_phi }
    }

    pub fn doubled(&self) -> Self {
        Self::new(2 * self.n_p, 2 * self.n_theta, 2 * self.n_phi)
    }

    pub fn halved(&self) -> Self {
        Self::new((self.n_p / 2).max(2), (self.n_theta / 2).max(2), (self.n_phi / 2).max(2))
    }

    pub fn node_count(&self) -> usize {
        self.n_p * self.n_theta * self.n_phi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuygensSample {
    pub probe: SpacetimePoint,
    /// `Ψ₂` outside the shell, `Ψ₁` inside it.
    pub analytic: FieldValue,
    pub reconstructed: FieldValue,
    pub rel_error: f64,
    /// Change in the reconstruction when the grid is halved.
    pub quadrature_error: f64,
}

struct ShellNode {
    r: Vec3,
    weight: f64,
    geometry: ShellGeometry,
}

fn shell_nodes(profile: &TransitionProfile, z: &EmissionCenter, grid: ShellGrid) -> Result<Vec<ShellNode>> {
    if grid.n_p < 2 || grid.n_theta < 2 || grid.n_phi < 2 {
        return Err(Error::OutOfRange("shell grid needs at least 2 nodes per axis".into()));
    }
    let a = z.a();
    let am = a.magnitude();
    let ps = gauss_legendre(grid.n_p, profile.p1(), profile.p2());
    let thetas = gauss_legendre(grid.n_theta, 0.0, PI);
    let dphi = TAU / grid.n_phi as f64;
    let mut nodes = Vec::with_capacity(grid.node_count());
    for &(p, wp) in &ps {
        for &(theta, wt) in &thetas {
            let (s, c) = theta.sin_cos();
            // dV = (p² + q²)/a dp dq dφ with q = a cos θ
            let jac = (p * p + am * am * c * c) * s;
            for j in 0..grid.n_phi {
                let phi = j as f64 * dphi;
                let local = from_oblate(OblatePoint::new(p, am * c, phi), a)?;
                let Some(geometry) = shell_geometry(local, profile, z)? else {
                    continue;
                };
                nodes.push(ShellNode { r: local + z.r0(), weight: wp * wt * dphi * jac, geometry });
            }
        }
    }
    Ok(nodes)
}

fn retarded_integral(nodes: &[ShellNode], z: &EmissionCenter, probe: SpacetimePoint) -> Result<FieldValue> {
    const CHUNK: usize = 4096;
    let partials: Vec<Result<FieldValue>> = nodes
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = Complex64::new(0.0, 0.0);
            for node in chunk {
                let dist = (probe.r - node.r).norm();
                if dist == 0.0 {
                    return Err(Error::SingularEncounter("probe coincides with a shell node".into()));
                }
                let emission = probe.t - dist - z.t0();
                let terms = terms_from(&node.geometry, ComplexTime::new(emission, z.b()))?;
                acc += terms.density() * (node.weight / dist);
            }
            Ok(acc)
        })
        .collect();
    partials.into_iter().sum()
}

/// Reconstructs the wavelet at `probes` from the retarded potential of the
/// shell source, `f(x) = ∫ δ̃_A^sm(r', t - |r - r'|) / |r - r'| d³r'`.
///
/// Probes must lie clear of the shell: `p < p₁ - m` or `p > p₂ + m` with
/// `m = 0.1 (p₂ - p₁)`.
pub fn huygens_reproduction(
    profile: &TransitionProfile,
    z: &EmissionCenter,
    probes: &[SpacetimePoint],
    grid: ShellGrid,
) -> Result<Vec<HuygensSample>> {
    let margin = 0.1 * profile.width();
    for probe in probes {
        let p = raw_distance(probe.r - z.r0(), z.a()).p;
        if p > profile.p1() - margin && p < profile.p2() + margin {
            return Err(Error::OutOfRange(format!(
                "probe at p = {p} is within {margin} of the shell [{}, {}]",
                profile.p1(),
                profile.p2()
            )));
        }
    }
    let fine = shell_nodes(profile, z, grid)?;
    let coarse = shell_nodes(profile, z, grid.halved())?;
    probes
        .iter()
        .map(|&probe| {
            let analytic = interpolated_field(probe, profile, z)?;
            let reconstructed = retarded_integral(&fine, z, probe)?;
            let rough = retarded_integral(&coarse, z, probe)?;
            Ok(HuygensSample {
                probe,
                analytic,
                reconstructed,
                rel_error: (reconstructed - analytic).norm() / analytic.norm(),
                quadrature_error: (reconstructed - rough).norm(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SourceVector;
    use crate::wavelet::{interior_field, psi_avg};

    fn center(b: f64) -> EmissionCenter {
        EmissionCenter::at_origin(SourceVector::along_x3(1.0).unwrap(), b).unwrap()
    }

    #[test]
    fn profile_shape() {
        let h = TransitionProfile::new(1.0, 3.0).unwrap();
        assert_eq!(h.h2(0.5), 0.0);
        assert_eq!(h.h2(1.0), 0.0);
        assert_eq!(h.h2(3.0), 1.0);
        assert_eq!(h.h2(7.0), 1.0);
        assert!((h.h2(2.0) - 0.5).abs() < 1e-15);
        assert!((h.h2_prime(2.0) - 1.875 / 2.0).abs() < 1e-15);
        assert!(TransitionProfile::new(2.0, 1.0).is_err());
        assert!(TransitionProfile::new(0.0, 1.0).is_err());
        let step = 1e-5;
        for p in [1.1, 1.7, 2.3, 2.95] {
            assert_eq!(h.h1(p) + h.h2(p), 1.0);
            let fd = (h.h2(p + step) - h.h2(p - step)) / (2.0 * step);
            assert!((fd - h.h2_prime(p)).abs() < 1e-8);
            let fd2 = (h.h2_prime(p + step) - h.h2_prime(p - step)) / (2.0 * step);
            assert!((fd2 - h.h2_double_prime(p)).abs() < 1e-8);
        }
    }

    #[test]
    fn interpolated_field_limits() {
        let z = center(1.3);
        let prof = TransitionProfile::new(1.8, 2.2).unwrap();
        let inside = SpacetimePoint::from_coords(0.4, 0.1, 0.7, 0.5);
        assert_eq!(interpolated_field(inside, &prof, &z).unwrap(), interior_field(inside, &z).unwrap());
        let outside = SpacetimePoint::from_coords(1.0, 2.0, 3.0, 3.5);
        assert_eq!(
            interpolated_field(outside, &prof, &z).unwrap(),
            psi_avg(outside, &z, 2.0).unwrap()
        );
        // thin transition reproduces Ψ_A off the spheroid
        let thin = TransitionProfile::centered(2.0, 1e-9).unwrap();
        for x in [inside, outside, SpacetimePoint::from_coords(1.0, 0.0, 0.0, 0.2)] {
            assert_eq!(interpolated_field(x, &thin, &z).unwrap(), psi_avg(x, &z, 2.0).unwrap());
        }
    }

    #[test]
    fn density_vanishes_off_shell() {
        let z = center(1.3);
        let prof = TransitionProfile::new(1.8, 2.2).unwrap();
        for x in [
            SpacetimePoint::from_coords(0.0, 0.0, 0.5, 0.0),
            SpacetimePoint::from_coords(0.0, 0.0, 1.8, 1.0),
            SpacetimePoint::from_coords(0.0, 0.0, 2.2, 1.0),
            SpacetimePoint::from_coords(3.0, 0.0, 2.2, 2.0),
            SpacetimePoint::from_coords(1.0, 0.0, 0.0, 0.0),
        ] {
            assert_eq!(shell_source_density(x, &prof, &z).unwrap(), Complex64::new(0.0, 0.0));
        }
        let on = SpacetimePoint::from_coords(0.0, 0.0, 2.0, 1.0);
        assert_ne!(shell_source_density(on, &prof, &z).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn general_source_specializes() {
        let z = center(1.3);
        let prof = TransitionProfile::new(1.8, 2.2).unwrap();
        let (f1, f2) = (InteriorPsi(z), ExteriorPsi(z));
        let pair = FieldPair { f1: &f1, f2: &f2 };
        let h = ProfileField { profile: prof, center: z };
        for x in [
            SpacetimePoint::from_coords(0.3, 0.4, 1.9, 1.0),
            SpacetimePoint::from_coords(-1.5, 0.7, 0.2, 2.5),
            SpacetimePoint::from_coords(0.0, 0.0, 0.3, 0.0),
        ] {
            let general = transitional_source_general(&pair, &h, x).unwrap();
            let direct = FOUR_PI * shell_source_density(x, &prof, &z).unwrap();
            assert!((general - direct).norm() <= 1e-13 * direct.norm().max(1e-300));
        }
        let same = FieldPair { f1: &f2, f2: &f2 };
        let x = SpacetimePoint::from_coords(0.3, 0.4, 1.9, 1.0);
        assert_eq!(transitional_source_general(&same, &h, x).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn interpolated_source_partition() {
        let z = center(1.3);
        let h = ProfileField { profile: TransitionProfile::new(1.8, 2.2).unwrap(), center: z };
        let g = |x: SpacetimePoint| Complex64::new(x.r.x1 + x.t, x.r.x3);
        for x in [
            SpacetimePoint::from_coords(0.0, 0.0, 2.0, 0.3),
            SpacetimePoint::from_coords(0.0, 0.0, 0.5, 0.3),
            SpacetimePoint::from_coords(0.0, 0.0, 5.0, 0.3),
        ] {
            let v = interpolated_source(&g, &g, &h, x);
            assert!((v - g(x)).norm() < 1e-15);
        }
        // g1 lives in V2 and g2 in V1: the interpolated source vanishes
        let g1 = |x: SpacetimePoint| {
            if raw_distance(x.r, z.a()).p > 2.2 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        };
        let g2 = |x: SpacetimePoint| {
            if raw_distance(x.r, z.a()).p < 1.8 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        };
        for x3 in [0.5, 1.9, 2.1, 4.0] {
            let x = SpacetimePoint::from_coords(0.0, 0.0, x3, 0.0);
            assert_eq!(interpolated_source(&g1, &g2, &h, x), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn layer_coefficients_on_surface() {
        let z = center(1.3);
        let on = SpacetimePoint::from_coords(0.0, 0.0, 2.0, 1.0);
        let layers = abrupt_layer_coefficients(on, 2.0, &z).unwrap();
        assert!(layers.single_layer.is_finite() && layers.double_layer.is_finite());
        let off = SpacetimePoint::from_coords(0.0, 0.0, 2.1, 1.0);
        assert!(matches!(abrupt_layer_coefficients(off, 2.0, &z), Err(Error::OffSurface(_))));
    }

    #[test]
    fn probes_inside_the_shell_are_rejected() {
        let z = center(1.3);
        let prof = TransitionProfile::new(1.8, 2.2).unwrap();
        let probe = SpacetimePoint::from_coords(0.0, 0.0, 2.0, 1.0);
        assert!(huygens_reproduction(&prof, &z, &[probe], ShellGrid::new(4, 4, 4)).is_err());
    }
}
