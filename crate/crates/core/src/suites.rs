//! Seeded batteries of invariant checks behind `run_suite`.
//!
//! Probes are drawn sequentially from a `ChaCha8` stream seeded by the
//! caller, then evaluated in parallel with results kept in probe order, so a
//! report depends only on the suite name and the seed.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    complex_distance, from_oblate, grad_p, grad_p_norm_sq, grad_q, grad_rho, laplacian_p,
    raw_distance, BranchCut, ComplexDistance, OblatePoint, SourceVector, SpacetimePoint, Vec3,
};
use crate::shell::{
    huygens_reproduction, interpolated_field, shell_source_terms, transitional_source_general,
    ExteriorPsi, FieldPair, InteriorPsi, ProfileField, ShellGrid, TransitionProfile,
};
use crate::verify::{fd_dalembertian, fd_gradient, fd_gradient_complex, fd_laplacian, Check, CheckReport, StencilSpec};
use crate::wavelet::{
    hyperfunction_limit_error, psi, psi_avg, psi_interior, psi_interior_sq_derivative, psi_jump,
    psi_prime, wavelet, ComplexTime, EmissionCenter, TestFunction,
};

pub const DEFAULT_SEED: u64 = 1;

pub const SUITES: [&str; 8] =
    ["identities", "gradients", "wave-operator", "jumps", "farfield", "limits", "shell", "huygens"];

/// Coarse grid of the Huygens refinement pair; the check grid is its double.
pub const HUYGENS_BASE_GRID: ShellGrid = ShellGrid::new(8, 16, 16);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Replaces every check's threshold when set.
    pub threshold: Option<f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, threshold: None }
    }
}

pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = match name {
        "identities" => identities(&mut rng)?,
        "gradients" => gradients(&mut rng)?,
        "wave-operator" => wave_operator(&mut rng)?,
        "jumps" => jumps(&mut rng)?,
        "farfield" => farfield(&mut rng)?,
        "limits" => limits()?,
        "shell" => shell(&mut rng)?,
        "huygens" => huygens()?,
        other => return Err(Error::UnknownSuite(other.to_string())),
    };
    if let Some(t) = opts.threshold {
        for c in &mut checks {
            c.threshold = t;
        }
    }
    Ok(CheckReport { suite: name.to_string(), seed: opts.seed, checks })
}

fn or_nan(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::NAN)
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v * (1.0 / n);
        }
    }
}

fn cube(rng: &mut ChaCha8Rng, half: f64) -> Vec3 {
    Vec3::new(rng.random_range(-half..half), rng.random_range(-half..half), rng.random_range(-half..half))
}

fn source_vector(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> SourceVector {
    let mag = rng.random_range(lo..hi);
    SourceVector::new(unit_vector(rng) * mag).expect("nonzero by construction")
}

/// Imaginary time with `|b| ∈ [lo, hi)·a` and a random sign.
fn imaginary_time(rng: &mut ChaCha8Rng, a: f64, lo: f64, hi: f64) -> f64 {
    let b = a * rng.random_range(lo..hi);
    if rng.random_bool(0.5) { b } else { -b }
}

fn random_center(rng: &mut ChaCha8Rng, b_lo: f64) -> EmissionCenter {
    let a = source_vector(rng, 0.5, 2.0);
    let b = imaginary_time(rng, a.magnitude(), b_lo, 3.0);
    let r0 = cube(rng, 1.0);
    let t0 = rng.random_range(-1.0..1.0);
    EmissionCenter::new(r0, t0, a, b).expect("timelike by construction")
}

/// Observer off the branch set: at least `margin·a` from the disk.
fn observer(rng: &mut ChaCha8Rng, a: &SourceVector, half: f64, margin: f64) -> Vec3 {
    loop {
        let r = cube(rng, half * a.magnitude());
        if a.distance_to_disk(r) > margin * a.magnitude() {
            return r;
        }
    }
}

fn identities(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let probes: Vec<(Vec3, SourceVector)> = (0..10_000)
        .map(|_| {
            let a = source_vector(rng, 0.2, 3.0);
            (observer(rng, &a, 4.0, 1e-6), a)
        })
        .collect();
    let rows: Vec<[f64; 3]> = probes
        .par_iter()
        .map(|(r, a)| match complex_distance(*r, a) {
            Ok(ComplexDistance { p, q }) => {
                let (r2, a2) = (r.norm_sq(), a.magnitude().powi(2));
                let scale = r2 + a2;
                let bounds = [-p, p * p - r2, q * q - a2].into_iter().fold(0.0, f64::max);
                [
                    ((p * p - q * q) - (r2 - a2)).abs() / scale,
                    (p * q - a.vec().dot(*r)).abs() / (r.norm() * a.magnitude()),
                    bounds / scale,
                ]
            }
            Err(_) => [f64::NAN; 3],
        })
        .collect();

    let algebra: Vec<(ComplexDistance, ComplexTime)> = (0..1_000)
        .map(|_| {
            let a = source_vector(rng, 0.5, 2.0);
            let r = observer(rng, &a, 4.0, 1e-3);
            let rho = complex_distance(r, &a).expect("off the branch set");
            let b = imaginary_time(rng, a.magnitude(), 1.05, 3.0);
            (rho, ComplexTime::new(rng.random_range(-6.0..6.0), b))
        })
        .collect();
    let closed: Vec<[f64; 2]> = algebra
        .par_iter()
        .map(|&(rho, tt)| {
            let eval = || -> Result<[f64; 2]> {
                let plus = psi(rho, tt)?;
                let minus = psi(-rho, tt)?;
                let inner = psi_interior(rho, tt)?;
                let even = ((plus + minus) * 0.5 - inner).norm() / plus.norm().max(minus.norm());
                let jump = ((plus - inner) - psi_jump(rho, tt)?).norm() / plus.norm().max(inner.norm());
                Ok([even, jump])
            };
            eval().unwrap_or([f64::NAN; 2])
        })
        .collect();

    let col = |rows: &[[f64; 3]], k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
    Ok(vec![
        Check::new("p2-q2", &col(&rows, 0), 1e-12),
        Check::new("pq", &col(&rows, 1), 1e-12),
        Check::new("distance-bounds", &col(&rows, 2), 1e-12),
        Check::new("psi-even-part", &closed.iter().map(|r| r[0]).collect::<Vec<_>>(), 1e-13),
        Check::new("psi-jump", &closed.iter().map(|r| r[1]).collect::<Vec<_>>(), 1e-13),
    ])
}

fn gradients(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let probes: Vec<(Vec3, SourceVector)> = (0..1_000)
        .map(|_| {
            let a = source_vector(rng, 0.5, 2.0);
            loop {
                let r = observer(rng, &a, 3.0, 0.05);
                if a.distance_to_circle(r) > 0.05 * a.magnitude() {
                    return (r, a);
                }
            }
        })
        .collect();
    let rows: Vec<[f64; 5]> = probes
        .par_iter()
        .map(|(r, a)| {
            let eval = || -> Result<[f64; 5]> {
                let spec = StencilSpec::new(1e-3 * (a.magnitude() + r.norm()), true)?;
                let p_of = |r: Vec3| complex_distance(r, a).map(|c| c.p);
                let gp = grad_p(*r, a)?;
                let fd = fd_gradient(p_of, *r, spec)?;
                let lap = laplacian_p(*r, a)?;
                let fd_lap = fd_laplacian(p_of, *r, spec)?;
                let norm_sq = grad_p_norm_sq(*r, a)?;
                let gr = grad_rho(*r, a)?;
                let fd_rho = fd_gradient_complex(|r| complex_distance(r, a).map(|c| c.value()), *r, spec)?;
                let rho_err = (0..3).map(|k| (gr[k] - fd_rho[k]).norm_sqr()).sum::<f64>().sqrt();
                let rho_norm = gr.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
                let gq = grad_q(*r, a)?;
                Ok([
                    (fd - gp).norm() / gp.norm(),
                    (fd_lap.value - lap).abs() / lap.abs().max(fd_lap.scale),
                    (fd.norm_sq() - norm_sq).abs() / norm_sq,
                    rho_err / rho_norm,
                    gp.dot(gq).abs() / (gp.norm() * gq.norm()),
                ])
            };
            eval().unwrap_or([f64::NAN; 5])
        })
        .collect();
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
    Ok(vec![
        Check::new("grad-p", &col(0), 1e-6),
        Check::new("laplacian-p", &col(1), 1e-6),
        Check::new("grad-p-norm", &col(2), 1e-6),
        Check::new("grad-rho", &col(3), 1e-6),
        Check::new("grad-orthogonal", &col(4), 1e-10),
    ])
}

fn wave_operator(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut plain = Vec::with_capacity(200);
    for _ in 0..200 {
        let z = random_center(rng, 1.2);
        let r = observer(rng, z.a(), 4.0, 0.5);
        let t = r.norm() + rng.random_range(-2.0..2.0) * z.b().abs();
        plain.push((z, SpacetimePoint::new(z.r0() + r, z.t0() + t)));
    }
    let mut averaged = Vec::with_capacity(200);
    while averaged.len() < 200 {
        let z = random_center(rng, 1.2);
        let alpha = z.a().magnitude() * rng.random_range(1.2..3.0);
        let r = cube(rng, 4.0 * z.a().magnitude());
        if (raw_distance(r, z.a()).p - alpha).abs() <= 0.05 * alpha {
            continue;
        }
        let t = r.norm() + rng.random_range(-2.0..2.0) * z.b().abs();
        averaged.push((z, alpha, SpacetimePoint::new(z.r0() + r, z.t0() + t)));
    }
    let e_plain: Vec<f64> = plain
        .par_iter()
        .map(|(z, x)| {
            let spec = StencilSpec::for_wavelet(z.a().magnitude(), z.b());
            or_nan(
                fd_dalembertian(|x| wavelet(x, z, BranchCut::StandardDisk), *x, spec)
                    .map(|e| e.value.norm() / e.scale),
            )
        })
        .collect();
    let e_avg: Vec<f64> = averaged
        .par_iter()
        .map(|(z, alpha, x)| {
            let spec = StencilSpec::for_wavelet(z.a().magnitude(), z.b());
            or_nan(fd_dalembertian(|x| psi_avg(x, z, *alpha), *x, spec).map(|e| e.value.norm() / e.scale))
        })
        .collect();
    Ok(vec![Check::new("box-psi", &e_plain, 1e-4), Check::new("box-psi-avg", &e_avg, 1e-4)])
}

/// Largest `|Ψ|` and `|Ψ_A|` on the ring `|ρ̃| = delta` about the branch
/// circle, over a window of times.
pub fn circle_ring_maxima(z: &EmissionCenter, alpha: f64, delta: f64) -> Result<(f64, f64)> {
    let a = z.a();
    let b = z.b().abs();
    let mut max_psi = 0.0f64;
    let mut max_avg = 0.0f64;
    for i in 0..32 {
        let beta = -0.5 * PI + PI * (i as f64 + 0.5) / 32.0;
        for j in 0..4 {
            let phi = TAU * j as f64 / 4.0;
            let r = from_oblate(OblatePoint::new(delta * beta.cos(), delta * beta.sin(), phi), a)?;
            for k in 0..=40 {
                let t = -3.0 * b + 6.0 * b * k as f64 / 40.0;
                let x = SpacetimePoint::new(z.r0() + r, z.t0() + t);
                max_psi = max_psi.max(wavelet(x, z, BranchCut::StandardDisk)?.norm());
                max_avg = max_avg.max(psi_avg(x, z, alpha)?.norm());
            }
        }
    }
    Ok((max_psi, max_avg))
}

/// `|Ψ_A(p+ε) - Ψ_A(p-ε) - Ψ_J(p)| / (C ε)` at a point of `S_α` given in
/// oblate coordinates, with `C = 2(|∂Ψ₂/∂ρ̃| + |∂Ψ₁/∂ρ̃|)`.
pub fn straddle_jump_error(z: &EmissionCenter, o: OblatePoint, t: f64, eps: f64) -> Result<f64> {
    let a = z.a();
    let at = |p: f64| -> Result<SpacetimePoint> {
        let r = from_oblate(OblatePoint::new(p, o.q, o.phi), a)?;
        Ok(SpacetimePoint::new(z.r0() + r, z.t0() + t))
    };
    let alpha = o.p;
    let outer = psi_avg(at(alpha + eps)?, z, alpha)?;
    let inner = psi_avg(at(alpha - eps)?, z, alpha)?;
    let rho = ComplexDistance::new(o.p, o.q);
    let tt = ComplexTime::new(t, z.b());
    let jump = psi_jump(rho, tt)?;
    let rv = rho.value();
    let d1 = 2.0 * rv * psi_interior_sq_derivative(rv * rv, tt)?;
    let c = 2.0 * (psi_prime(rho, tt)?.norm() + d1.norm());
    Ok((outer - inner - jump).norm() / (c * eps))
}

/// `|Ψ_A(z=+ε) - Ψ_A(z=-ε)| / (4 |∇Ψ₁| ε)` across the plane of the disk at
/// cylindrical radius `radius`.
pub fn plane_continuity_error(z: &EmissionCenter, alpha: f64, radius: f64, phi: f64, t: f64, eps: f64) -> Result<f64> {
    let a = z.a();
    let (e1, e2) = a.frame();
    let base = (e1 * phi.cos() + e2 * phi.sin()) * radius;
    let x = |s: f64| SpacetimePoint::new(z.r0() + base + a.axis() * s, z.t0() + t);
    let jump = (psi_avg(x(eps), z, alpha)? - psi_avg(x(-eps), z, alpha)?).norm();
    let grad = InteriorPsi(*z).gradient_norm(x(0.0))?;
    Ok(jump / (4.0 * grad * eps))
}

impl InteriorPsi {
    fn gradient_norm(&self, x: SpacetimePoint) -> Result<f64> {
        use crate::shell::FieldEvaluator;
        Ok(self.gradient(x)?.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt())
    }
}

fn jumps(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let a = SourceVector::new(unit_vector(rng))?;
    let b = imaginary_time(rng, 1.0, 1.2, 3.0);
    let z = EmissionCenter::new(cube(rng, 1.0), 0.0, a, b)?;
    let a = z.a().magnitude();
    let alpha = a * rng.random_range(1.3..3.0);

    let surface: Vec<(OblatePoint, f64)> = (0..200)
        .map(|_| {
            let q = a * rng.random_range(-0.999..0.999);
            let phi = rng.random_range(0.0..TAU);
            (OblatePoint::new(alpha, q, phi), rng.random_range(-3.0..3.0) + alpha)
        })
        .collect();
    let straddle: Vec<f64> = surface
        .par_iter()
        .flat_map_iter(|&(o, t)| [1e-4, 1e-5].map(|eps| or_nan(straddle_jump_error(&z, o, t, eps))))
        .collect();

    let outer = (alpha * alpha + a * a).sqrt();
    let plane: Vec<(bool, f64, f64, f64)> = (0..200)
        .map(|i| {
            let on_disk = i % 2 == 0;
            let radius = if on_disk {
                a * rng.random_range(0.0..0.999)
            } else {
                rng.random_range(1.001 * a..0.999 * outer)
            };
            (on_disk, radius, rng.random_range(0.0..TAU), rng.random_range(-3.0..3.0))
        })
        .collect();
    let cont: Vec<(bool, f64)> = plane
        .par_iter()
        .flat_map_iter(|&(on_disk, radius, phi, t)| {
            [1e-4, 1e-5].map(|eps| (on_disk, or_nan(plane_continuity_error(&z, alpha, radius, phi, t, eps))))
        })
        .collect();
    let pick = |disk: bool| cont.iter().filter(|c| c.0 == disk).map(|c| c.1).collect::<Vec<_>>();

    let (psi_far, avg_far) = circle_ring_maxima(&z, alpha, 1e-1 * a)?;
    let (psi_near, avg_near) = circle_ring_maxima(&z, alpha, 1e-3 * a)?;
    Ok(vec![
        Check::new("straddle-jump", &straddle, 1.0),
        Check::new("apron-continuity", &pick(false), 1.0),
        Check::new("disk-continuity", &pick(true), 1.0),
        // growth of max|Ψ| must be at least 50x, growth of max|Ψ_A| at most 10x
        Check::new("circle-growth-psi", &[50.0 * psi_far / psi_near], 1.0),
        Check::new("circle-growth-psi-avg", &[avg_near / avg_far / 10.0], 1.0),
    ])
}

fn farfield(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let errors: Vec<f64> = (0..100)
        .map(|_| {
            let a = source_vector(rng, 0.5, 2.0);
            let am = a.magnitude();
            let dir = unit_vector(rng);
            let r = 100.0 * am;
            let cos = dir.dot(a.axis());
            or_nan(complex_distance(dir * r, &a).map(|rho| {
                (rho.value() - Complex64::new(r, -am * cos)).norm() / (am * am / r)
            }))
        })
        .collect();
    Ok(vec![Check::new("far-distance", &errors, 1.0)])
}

fn limits() -> Result<Vec<Check>> {
    let gaussian = |t: f64| (-t * t).exp();
    let phi = TestFunction { f: &gaussian, bounds: (-12.0, 12.0) };
    let e1 = hyperfunction_limit_error(1e-2, &phi)?;
    let e2 = hyperfunction_limit_error(5e-3, &phi)?;
    Ok(vec![
        Check::new("poisson-pairing", &[e1], 0.02),
        // halving b should halve the error: ratio within [1.6, 2.4]
        Check::new("poisson-rate", &[(e1 / e2 - 2.0).abs()], 0.4),
    ])
}

fn shell(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let a = SourceVector::new(unit_vector(rng))?;
    let b = imaginary_time(rng, 1.0, 1.2, 2.0);
    let z = EmissionCenter::new(cube(rng, 1.0), rng.random_range(-1.0..1.0), a, b)?;
    let p1 = rng.random_range(1.5..2.0);
    let profile = TransitionProfile::new(p1, p1 + rng.random_range(0.3..0.6))?;
    let w = profile.width();

    let at = |rng: &mut ChaCha8Rng, p: f64| -> Result<SpacetimePoint> {
        let o = OblatePoint::new(p, rng.random_range(-0.999..0.999), rng.random_range(0.0..TAU));
        let r = from_oblate(o, &a)?;
        Ok(SpacetimePoint::new(z.r0() + r, z.t0() + rng.random_range(-2.0..4.0)))
    };
    let inside = (0..100)
        .map(|_| {
            let p = rng.random_range(profile.p1() + 0.02 * w..profile.p2() - 0.02 * w);
            at(rng, p)
        })
        .collect::<Result<Vec<_>>>()?;
    let outside = (0..100)
        .map(|i| {
            let p = if i % 2 == 0 {
                rng.random_range(0.05..profile.p1())
            } else {
                rng.random_range(profile.p2()..3.0 * profile.p2())
            };
            at(rng, p)
        })
        .collect::<Result<Vec<_>>>()?;

    let spec = StencilSpec::for_wavelet(1.0, b);
    let (f1, f2) = (InteriorPsi(z), ExteriorPsi(z));
    let pair = FieldPair { f1: &f1, f2: &f2 };
    let h = ProfileField { profile, center: z };
    let rows: Vec<[f64; 2]> = inside
        .par_iter()
        .map(|&x| {
            let eval = || -> Result<[f64; 2]> {
                let terms = shell_source_terms(x, &profile, &z)?;
                let fd = fd_dalembertian(|x| interpolated_field(x, &profile, &z), x, spec)?;
                let boxed = (fd.value - terms.wave_operator()).norm() / fd.scale;
                let general = transitional_source_general(&pair, &h, x)?;
                let special = (general - terms.wave_operator()).norm() / terms.dominant();
                Ok([boxed, special])
            };
            eval().unwrap_or([f64::NAN; 2])
        })
        .collect();
    let support: Vec<f64> = outside
        .par_iter()
        .map(|&x| match shell_source_terms(x, &profile, &z) {
            Ok(t) if t.wave_operator() == Complex64::new(0.0, 0.0) => 0.0,
            Ok(_) => 1.0,
            Err(_) => f64::NAN,
        })
        .collect();
    Ok(vec![
        Check::new("shell-box", &rows.iter().map(|r| r[0]).collect::<Vec<_>>(), 1e-3),
        Check::new("shell-specialization", &rows.iter().map(|r| r[1]).collect::<Vec<_>>(), 1e-13),
        // count of nonzero densities outside the shell
        Check::new("shell-support", &support, 0.0),
    ])
}

/// Exterior and interior probes of the standard Huygens configuration
/// (`a = 1` along `x3`, `b = 1.3`, shell `[1.8, 2.2]`).
pub fn huygens_probes() -> (Vec<SpacetimePoint>, Vec<SpacetimePoint>) {
    let exterior = [0.0f64, 0.3, 0.5, 1.0, 1.2, 1.6, 2.2, 2.8]
        .iter()
        .enumerate()
        .map(|(k, &theta)| {
            let r = 3.0 + 0.5 * (k % 3) as f64;
            SpacetimePoint::new(Vec3::new(r * theta.sin(), 0.0, r * theta.cos()), r - 0.2 + 0.1 * k as f64)
        })
        .collect();
    let interior = vec![
        SpacetimePoint::from_coords(0.3, 0.2, 0.5, 1.0),
        SpacetimePoint::from_coords(0.0, 0.0, 0.0, 2.5),
    ];
    (exterior, interior)
}

fn huygens() -> Result<Vec<Check>> {
    let z = EmissionCenter::at_origin(SourceVector::along_x3(1.0)?, 1.3)?;
    let profile = TransitionProfile::centered(2.0, 0.4)?;
    let (exterior, interior) = huygens_probes();
    let probes: Vec<SpacetimePoint> = exterior.iter().chain(&interior).copied().collect();
    let coarse = huygens_reproduction(&profile, &z, &probes, HUYGENS_BASE_GRID)?;
    let fine = huygens_reproduction(&profile, &z, &probes, HUYGENS_BASE_GRID.doubled())?;
    let n = exterior.len();
    let errs = |s: &[crate::shell::HuygensSample]| s.iter().map(|x| x.rel_error).collect::<Vec<_>>();
    let ratio: Vec<f64> = coarse.iter().zip(&fine).map(|(c, f)| f.rel_error / c.rel_error).collect();
    Ok(vec![
        Check::new("huygens-exterior", &errs(&fine[..n]), 0.05),
        Check::new("huygens-interior", &errs(&fine[n..]), 0.05),
        // refined over coarse error at each probe
        Check::new("huygens-refinement", &ratio, 1.0),
    ])
}
