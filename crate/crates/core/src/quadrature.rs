//! One-dimensional quadrature rules.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

/// Subdivision budget of [`adaptive_quadrature_1d`].
pub const MAX_SUBINTERVALS: usize = 20_000;

// Gauss-Kronrod 7/15 abscissae (non-negative half) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        lo,
        hi,
        value: kronrod * h,
        error: ((kronrod - gauss) * h).abs(),
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on `[lo, hi]`.
///
/// Bisects the segment with the largest error estimate until the summed
/// estimate drops below `tol`. Returns `(value, error_estimate)`.
pub fn adaptive_quadrature_1d<F: Fn(f64) -> f64>(f: F, bounds: (f64, f64), tol: f64) -> Result<(f64, f64)> {
    adaptive_quadrature_breaks(f, &[bounds.0, bounds.1], tol)
}

/// As [`adaptive_quadrature_1d`], starting from the segments delimited by
/// the sorted `breaks` (useful when the location of a sharp feature is known).
pub fn adaptive_quadrature_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> Result<(f64, f64)> {
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::OutOfRange("quadrature breakpoints must be increasing".into()));
    }
    let mut heap: BinaryHeap<Segment> = breaks.windows(2).map(|w| gk15(&f, w[0], w[1])).collect();
    let totals = |heap: &BinaryHeap<Segment>| {
        heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
    };
    loop {
        let (value, error) = totals(&heap);
        if !value.is_finite() {
            return Err(Error::SingularEncounter("integrand is not finite".into()));
        }
        if error <= tol {
            return Ok((value, error));
        }
        if heap.len() >= MAX_SUBINTERVALS {
            return Err(Error::MaxDepthExceeded { value, error });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(worst.lo < mid && mid < worst.hi) {
            // segment can no longer be split in floating point
            return Err(Error::MaxDepthExceeded { value, error });
        }
        heap.push(gk15(&f, worst.lo, mid));
        heap.push(gk15(&f, mid, worst.hi));
    }
}

/// Gauss-Legendre nodes and weights mapped onto `[lo, hi]`.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let Some(n) = NonZeroUsize::new(n) else {
        return Vec::new();
    };
    let rule = GaussLegendre::new(n);
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (c + h * x, h * w))
        .collect()
}

/// Midpoint nodes (equal weights) on `[lo, hi]`.
pub fn midpoint(n: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let h = (hi - lo) / n as f64;
    (0..n).map(|i| (lo + (i as f64 + 0.5) * h, h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn linear_integrand() {
        let (v, e) = adaptive_quadrature_1d(|t| t, (0.0, 1.0), 1e-12).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!(e <= 1e-12);
    }

    #[test]
    fn poisson_kernel_mass() {
        let b = 0.01;
        let (v, _) =
            adaptive_quadrature_1d(|t| b / (PI * (t * t + b * b)), (-50.0, 50.0), 1e-11).unwrap();
        let exact = 2.0 / PI * (50.0f64 / b).atan();
        assert!((v - exact).abs() < 1e-10, "{v} vs {exact}");
        assert!((v - 0.99987).abs() < 1e-5);
    }

    #[test]
    fn tight_tolerance_converges() {
        let (v, e) = adaptive_quadrature_1d(|t| (-t * t).exp(), (-8.0, 8.0), 1e-12).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-12);
        assert!(e <= 1e-12);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let err = adaptive_quadrature_1d(|t| 1.0 / t.abs().sqrt().max(1e-300), (-1.0, 1.0), 1e-300)
            .unwrap_err();
        assert!(matches!(err, Error::MaxDepthExceeded { .. }));
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let nodes = gauss_legendre(5, -1.0, 3.0);
        let v: f64 = nodes.iter().map(|&(x, w)| w * x.powi(9)).sum();
        assert!((v - (3f64.powi(10) - 1.0) / 10.0).abs() < 1e-9);
        assert!(gauss_legendre(0, 0.0, 1.0).is_empty());
    }
}
