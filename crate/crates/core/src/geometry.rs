//! Complex distance and the oblate spheroidal geometry built on it.
//!
//! For a real observer `r` and an imaginary source displacement `a`, the
//! complex distance is the square root of `(r - ia)·(r - ia) = r² - a² - 2i a·r`,
//! written `ρ̃ = p - iq`. Its branch points form the circle `C` of radius `a`
//! in the plane orthogonal to `a`; the standard branch (`p ≥ 0`) is cut along
//! the disk `D` spanning `C`. Level sets of `p` are confocal oblate spheroids
//! and level sets of `q` are the orthogonal hyperboloids, so `(p, q, φ)` is an
//! oblate spheroidal coordinate system with the `a`-axis as symmetry axis.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative size of the guard band around the branch circle `C`.
pub const SINGULAR_TOL: f64 = 1e-9;

/// Relative width of the classification band around the disk and circle.
pub const DISK_BAND: f64 = 1e-6;

/// Relative width of the classification band around a spheroid `S_α`.
pub const SPHEROID_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2 + self.x3 * other.x3
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.x2 * other.x3 - self.x3 * other.x2,
            self.x3 * other.x1 - self.x1 * other.x3,
            self.x1 * other.x2 - self.x2 * other.x1,
        )
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Vec3::new(v[0], v[1], v[2])
    }

    /// Unit vector along the given axis index (0, 1 or 2).
    pub fn unit(axis: usize) -> Self {
        let mut v = [0.0; 3];
        v[axis] = 1.0;
        Vec3::from_array(v)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x1, -self.x2, -self.x3)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x1 * s, self.x2 * s, self.x3 * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x1, self.x2, self.x3)
    }
}

/// A spacetime event `(r, t)` in units with wave speed 1.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpacetimePoint {
    pub r: Vec3,
    pub t: f64,
}

impl SpacetimePoint {
    pub const fn new(r: Vec3, t: f64) -> Self {
        Self { r, t }
    }

    pub fn from_coords(x1: f64, x2: f64, x3: f64, t: f64) -> Self {
        Self::new(Vec3::new(x1, x2, x3), t)
    }

    pub fn shifted(self, dr: Vec3, dt: f64) -> Self {
        Self::new(self.r + dr, self.t + dt)
    }
}

/// Imaginary spatial displacement `a` of a complex source point, together
/// with an orthonormal frame `(e1, e2, axis)` used for azimuths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceVector {
    vec: Vec3,
    mag: f64,
    axis: Vec3,
    e1: Vec3,
    e2: Vec3,
}

impl SourceVector {
    pub fn new(vec: Vec3) -> Result<Self> {
        if !vec.is_finite() {
            return Err(Error::OutOfRange(format!("source vector {vec} is not finite")));
        }
        let mag = vec.norm();
        if mag == 0.0 {
            return Err(Error::ZeroSourceVector);
        }
        let axis = vec * (1.0 / mag);
        let helper = if axis.x1.abs() < 0.9 { Vec3::unit(0) } else { Vec3::unit(1) };
        let e1 = helper - axis * helper.dot(axis);
        let e1 = e1 * (1.0 / e1.norm());
        let e2 = axis.cross(e1);
        Ok(Self { vec, mag, axis, e1, e2 })
    }

    /// Source vector along `+x3` with the given magnitude.
    pub fn along_x3(mag: f64) -> Result<Self> {
        Self::new(Vec3::new(0.0, 0.0, mag))
    }

    pub fn vec(&self) -> Vec3 {
        self.vec
    }

    pub fn magnitude(&self) -> f64 {
        self.mag
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    /// Frame vectors orthogonal to the axis; `e1 × e2 = axis`.
    pub fn frame(&self) -> (Vec3, Vec3) {
        (self.e1, self.e2)
    }

    /// Axial coordinate `z = a·r / a`.
    pub fn axial(&self, r: Vec3) -> f64 {
        r.dot(self.axis)
    }

    /// Cylindrical radius about the `a`-axis.
    pub fn radial(&self, r: Vec3) -> f64 {
        let z = self.axial(r);
        (r.norm_sq() - z * z).max(0.0).sqrt()
    }

    /// Euclidean distance from `r` to the branch circle `C`.
    pub fn distance_to_circle(&self, r: Vec3) -> f64 {
        (self.radial(r) - self.mag).hypot(self.axial(r))
    }

    /// Euclidean distance from `r` to the closed disk `D`.
    pub fn distance_to_disk(&self, r: Vec3) -> f64 {
        let rho = self.radial(r);
        let z = self.axial(r);
        if rho <= self.mag {
            z.abs()
        } else {
            (rho - self.mag).hypot(z)
        }
    }

    /// Reflection of `r` through the plane orthogonal to `a` (maps `q → -q`).
    pub fn reflect(&self, r: Vec3) -> Vec3 {
        r - self.axis * (2.0 * self.axial(r))
    }
}

/// Complex distance `ρ̃ = p - iq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexDistance {
    pub p: f64,
    pub q: f64,
}

impl ComplexDistance {
    pub const fn new(p: f64, q: f64) -> Self {
        Self { p, q }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z.re, -z.im)
    }

    pub fn value(self) -> Complex64 {
        Complex64::new(self.p, -self.q)
    }

    /// `|ρ̃|² = p² + q²`.
    pub fn modulus_sq(self) -> f64 {
        self.p * self.p + self.q * self.q
    }
}

impl Neg for ComplexDistance {
    type Output = ComplexDistance;
    fn neg(self) -> ComplexDistance {
        ComplexDistance::new(-self.p, -self.q)
    }
}

impl From<ComplexDistance> for Complex64 {
    fn from(d: ComplexDistance) -> Complex64 {
        d.value()
    }
}

/// Membrane bounded by `C` across which `ρ̃` reverses sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchCut {
    /// The flat disk `D` (standard branch, `p ≥ 0`).
    StandardDisk,
    /// Upper hemispheroid `p = α, z > 0` plus apron.
    UpperSpheroid(f64),
    /// Lower hemispheroid `p = α, z < 0` plus apron.
    LowerSpheroid(f64),
}

impl BranchCut {
    pub fn validate(self) -> Result<Self> {
        match self {
            BranchCut::StandardDisk => Ok(self),
            BranchCut::UpperSpheroid(alpha) | BranchCut::LowerSpheroid(alpha) => {
                if alpha.is_finite() && alpha > 0.0 {
                    Ok(self)
                } else {
                    Err(Error::OutOfRange(format!(
                        "spheroidal cut needs finite alpha > 0, got {alpha}"
                    )))
                }
            }
        }
    }
}

/// Oblate spheroidal coordinates about the `a`-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OblatePoint {
    pub p: f64,
    pub q: f64,
    pub phi: f64,
}

impl OblatePoint {
    pub const fn new(p: f64, q: f64, phi: f64) -> Self {
        Self { p, q, phi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Inside `S_α` on the `z ≥ 0` side.
    InteriorUpper,
    /// Inside `S_α` on the `z < 0` side.
    InteriorLower,
    /// Within the guard band of the spheroid `S_α` itself.
    OnSpheroid,
    Exterior,
    /// Within the guard band of the open disk `D`.
    OnDisk,
    /// Within the guard band of the branch circle `C`.
    NearCircle,
}

/// `(r - ia)·(r - ia)`, the square of the complex distance. Entire in `r`.
pub fn rho_squared(r: Vec3, a: &SourceVector) -> Complex64 {
    Complex64::new(r.norm_sq() - a.mag * a.mag, -2.0 * a.vec.dot(r))
}

/// Standard-branch complex distance without the guard around `C`.
///
/// Uses the cancellation-free square root: whichever of `p`, `|q|` is larger
/// is taken from the root, the other from `pq = a·r`. On the disk (`a·r = 0`,
/// `r < a`) this yields `q = +√(a² - r²)`, the limit from the `z > 0` side.
pub(crate) fn raw_distance(r: Vec3, a: &SourceVector) -> ComplexDistance {
    let u = r.norm_sq() - a.mag * a.mag;
    let w = a.vec.dot(r);
    let m = u.hypot(2.0 * w);
    if u >= 0.0 {
        let p = (0.5 * (m + u)).sqrt();
        let q = if p > 0.0 { w / p } else { 0.0 };
        ComplexDistance::new(p, q)
    } else {
        let qa = (0.5 * (m - u)).sqrt();
        let q = if w >= 0.0 { qa } else { -qa };
        ComplexDistance::new(w.abs() / qa, q)
    }
}

fn guard_circle(r: Vec3, a: &SourceVector) -> Result<()> {
    if !r.is_finite() {
        return Err(Error::OutOfRange(format!("observer {r} is not finite")));
    }
    let d = a.distance_to_circle(r);
    if d < SINGULAR_TOL * (a.mag + r.norm()) {
        return Err(Error::SingularPoint(format!(
            "observer {r} is {d:e} from the branch circle"
        )));
    }
    Ok(())
}

/// Standard complex distance `ρ̃ = √(r² - a² - 2i a·r)` with `p ≥ 0`.
pub fn complex_distance(r: Vec3, a: &SourceVector) -> Result<ComplexDistance> {
    guard_circle(r, a)?;
    Ok(raw_distance(r, a))
}

/// Whether `r` lies in the volume swept out when deforming `D` into `cut`.
pub fn in_swept_volume(r: Vec3, a: &SourceVector, cut: BranchCut) -> bool {
    match cut {
        BranchCut::StandardDisk => false,
        BranchCut::UpperSpheroid(alpha) => {
            a.axial(r) >= 0.0 && raw_distance(r, a).p < alpha
        }
        BranchCut::LowerSpheroid(alpha) => {
            a.axial(r) < 0.0 && raw_distance(r, a).p < alpha
        }
    }
}

/// Complex distance on the branch selected by `cut`: `-ρ̃` inside the
/// swept volume, `ρ̃` elsewhere.
pub fn branch_distance(r: Vec3, a: &SourceVector, cut: BranchCut) -> Result<ComplexDistance> {
    let cut = cut.validate()?;
    let rho = complex_distance(r, a)?;
    Ok(if in_swept_volume(r, a, cut) { -rho } else { rho })
}

pub fn to_oblate(r: Vec3, a: &SourceVector) -> Result<OblatePoint> {
    let ComplexDistance { p, q } = complex_distance(r, a)?;
    let phi = r.dot(a.e2).atan2(r.dot(a.e1)).rem_euclid(TAU);
    Ok(OblatePoint::new(p, q, phi))
}

pub fn from_oblate(o: OblatePoint, a: &SourceVector) -> Result<Vec3> {
    let am = a.mag;
    if !(o.p >= 0.0 && o.p.is_finite()) || !(o.q.abs() <= am) || !o.phi.is_finite() {
        return Err(Error::OutOfRange(format!(
            "oblate point (p={}, q={}, phi={}) outside p >= 0, |q| <= {am}",
            o.p, o.q, o.phi
        )));
    }
    let rho = ((am * am + o.p * o.p) * (am * am - o.q * o.q)).max(0.0).sqrt() / am;
    let z = o.p * o.q / am;
    let (s, c) = o.phi.sin_cos();
    Ok(a.axis * z + (a.e1 * c + a.e2 * s) * rho)
}

fn guard_differentiable(r: Vec3, a: &SourceVector) -> Result<ComplexDistance> {
    let rho = complex_distance(r, a)?;
    let band = DISK_BAND * a.mag;
    if a.axial(r).abs() <= band && a.radial(r) < a.mag {
        return Err(Error::SingularPoint(format!(
            "observer {r} lies on the branch disk where p is not differentiable"
        )));
    }
    Ok(rho)
}

/// `∇p = (p r + q a) / (p² + q²)`.
pub fn grad_p(r: Vec3, a: &SourceVector) -> Result<Vec3> {
    let rho = guard_differentiable(r, a)?;
    Ok((r * rho.p + a.vec * rho.q) * (1.0 / rho.modulus_sq()))
}

/// `∇q = (p a - q r) / (p² + q²)`, from `∇ρ̃ = (r - ia)/ρ̃`.
pub fn grad_q(r: Vec3, a: &SourceVector) -> Result<Vec3> {
    let rho = guard_differentiable(r, a)?;
    Ok((a.vec * rho.p - r * rho.q) * (1.0 / rho.modulus_sq()))
}

/// Complex gradient `∇ρ̃ = (r - ia)/ρ̃ = ∇p - i∇q`.
pub fn grad_rho(r: Vec3, a: &SourceVector) -> Result<[Complex64; 3]> {
    let rho = guard_differentiable(r, a)?;
    let inv = rho.value().inv();
    let av = a.vec.to_array();
    let rv = r.to_array();
    Ok(std::array::from_fn(|k| Complex64::new(rv[k], -av[k]) * inv))
}

/// `Δp = 2p / (p² + q²)`.
pub fn laplacian_p(r: Vec3, a: &SourceVector) -> Result<f64> {
    let rho = guard_differentiable(r, a)?;
    Ok(2.0 * rho.p / rho.modulus_sq())
}

/// `|∇p|² = (p² + a²) / (p² + q²)`.
pub fn grad_p_norm_sq(r: Vec3, a: &SourceVector) -> Result<f64> {
    let rho = guard_differentiable(r, a)?;
    Ok((rho.p * rho.p + a.mag * a.mag) / rho.modulus_sq())
}

/// Classifies `r` relative to the circle, the disk and the spheroid `S_α`.
///
/// Bands are tested in order: circle, spheroid, disk.
pub fn region_classify(r: Vec3, a: &SourceVector, alpha: f64) -> Region {
    if a.distance_to_circle(r) <= DISK_BAND * a.mag {
        return Region::NearCircle;
    }
    let p = raw_distance(r, a).p;
    if (p - alpha).abs() <= SPHEROID_BAND * alpha {
        return Region::OnSpheroid;
    }
    let z = a.axial(r);
    if z.abs() <= DISK_BAND * a.mag && a.radial(r) < a.mag {
        return Region::OnDisk;
    }
    match (p < alpha, z >= 0.0) {
        (true, true) => Region::InteriorUpper,
        (true, false) => Region::InteriorLower,
        (false, _) => Region::Exterior,
    }
}

/// Volume density `(p² + q²)/a` for integration in `dp dq dφ`.
pub fn volume_element(o: OblatePoint, a: &SourceVector) -> f64 {
    (o.p * o.p + o.q * o.q) / a.mag
}

/// Points of the spheroid `S_p` on a midpoint grid in `q` and a uniform
/// grid in `φ`.
pub fn sample_spheroid(p: f64, n_q: usize, n_phi: usize, a: &SourceVector) -> Result<Vec<Vec3>> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::OutOfRange(format!("spheroid level p must be > 0, got {p}")));
    }
    let am = a.mag;
    let mut pts = Vec::with_capacity(n_q * n_phi);
    for i in 0..n_q {
        let q = -am + (i as f64 + 0.5) * 2.0 * am / n_q as f64;
        for j in 0..n_phi {
            let phi = TAU * j as f64 / n_phi as f64;
            pts.push(from_oblate(OblatePoint::new(p, q, phi), a)?);
        }
    }
    Ok(pts)
}

/// Points of the hyperboloid sheet `H_q` with `p` on a midpoint grid in
/// `(0, p_max)`.
pub fn sample_hyperboloid(
    q: f64,
    p_max: f64,
    n_p: usize,
    n_phi: usize,
    a: &SourceVector,
) -> Result<Vec<Vec3>> {
    let am = a.mag;
    if !(q != 0.0 && q.abs() < am) {
        return Err(Error::OutOfRange(format!(
            "hyperboloid level needs 0 < q² < a², got q={q}, a={am}"
        )));
    }
    if !(p_max > 0.0 && p_max.is_finite()) {
        return Err(Error::OutOfRange(format!("p_max must be > 0, got {p_max}")));
    }
    let mut pts = Vec::with_capacity(n_p * n_phi);
    for i in 0..n_p {
        let p = (i as f64 + 0.5) * p_max / n_p as f64;
        for j in 0..n_phi {
            let phi = TAU * j as f64 / n_phi as f64;
            pts.push(from_oblate(OblatePoint::new(p, q, phi), a)?);
        }
    }
    Ok(pts)
}
