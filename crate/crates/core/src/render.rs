//! Field slices on the plane `x2 = const` and their CSV / PGM encodings.
//!
//! CSV rows are `x1,x3,t,re,im,abs` with `x3` as the outer loop; singular
//! cells carry `nan`. PGM output is binary P5 with 16-bit big-endian samples,
//! `+x3` pointing up, and the singular marker `65535`; the affine or log map
//! used for the gray levels is recorded in a `.meta` sidecar.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::SpacetimePoint;
use crate::wavelet::FieldValue;

/// Gray level reserved for cells where the field is singular.
pub const SINGULAR_MARKER: u16 = 65535;
const MAX_LEVEL: f64 = 65534.0;

/// `lo:hi:n`, `n` equally spaced samples including both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl AxisRange {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::OutOfRange(format!("axis range {lo}:{hi} must be nonempty")));
        }
        if n < 2 {
            return Err(Error::OutOfRange(format!("axis resolution must be >= 2, got {n}")));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n).map(|i| if i + 1 == self.n { self.hi } else { self.lo + i as f64 * step }).collect()
    }
}

impl FromStr for AxisRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || Error::OutOfRange(format!("axis range '{s}' is not lo:hi:n"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo = parts[0].parse().map_err(|_| bad())?;
        let hi = parts[1].parse().map_err(|_| bad())?;
        let n = parts[2].parse().map_err(|_| bad())?;
        Self::new(lo, hi, n)
    }
}

/// Sampling plane `x2 = x2`, the `x1 × x3` lattice and the list of times.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub x2: f64,
    pub x1: AxisRange,
    pub x3: AxisRange,
    pub times: Vec<f64>,
}

impl GridSpec {
    pub fn new(x2: f64, x1: AxisRange, x3: AxisRange, times: Vec<f64>) -> Result<Self> {
        if !x2.is_finite() {
            return Err(Error::OutOfRange(format!("x2 = {x2} is not finite")));
        }
        if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::OutOfRange("time list must be nonempty and finite".into()));
        }
        Ok(Self { x2, x1, x3, times })
    }

    /// Parses `x1min:x1max:n1,x3min:x3max:n3`.
    pub fn parse(grid: &str, x2: f64, times: Vec<f64>) -> Result<Self> {
        let (a, b) = grid
            .split_once(',')
            .ok_or_else(|| Error::OutOfRange(format!("grid '{grid}' is not x1min:x1max:n1,x3min:x3max:n3")))?;
        Self::new(x2, a.parse()?, b.parse()?, times)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Abs,
    Abs2,
    Re,
    Im,
}

impl Quantity {
    pub fn of(self, v: FieldValue) -> f64 {
        match self {
            Quantity::Abs => v.norm(),
            Quantity::Abs2 => v.norm_sqr(),
            Quantity::Re => v.re,
            Quantity::Im => v.im,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Abs => "abs",
            Quantity::Abs2 => "abs2",
            Quantity::Re => "re",
            Quantity::Im => "im",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    Linear,
    /// `log10 |quantity|`.
    Log,
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scaling::Linear => "linear",
            Scaling::Log => "log",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Pgm,
    Both,
}

impl OutputFormat {
    fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    fn pgm(self) -> bool {
        matches!(self, OutputFormat::Pgm | OutputFormat::Both)
    }
}

/// Field values on one time slice; `values[i3 * n1 + i1]`, `None` where the
/// field is singular.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub t: f64,
    pub x2: f64,
    pub x1: Vec<f64>,
    pub x3: Vec<f64>,
    pub values: Vec<Option<FieldValue>>,
}

impl Slice {
    pub fn get(&self, i1: usize, i3: usize) -> Option<FieldValue> {
        self.values[i3 * self.x1.len() + i1]
    }
}

/// Evaluates `field` on the grid at time `t`, one row of constant `x3` per
/// task; rows are assembled in order.
pub fn sample_slice<F>(field: &F, grid: &GridSpec, t: f64) -> Slice
where
    F: Fn(SpacetimePoint) -> Result<FieldValue> + Sync + ?Sized,
{
    let x1 = grid.x1.values();
    let x3 = grid.x3.values();
    let rows: Vec<Vec<Option<FieldValue>>> = x3
        .par_iter()
        .map(|&x3| {
            x1.iter()
                .map(|&x1| {
                    field(SpacetimePoint::from_coords(x1, grid.x2, x3, t))
                        .ok()
                        .filter(|v| v.is_finite())
                })
                .collect()
        })
        .collect();
    Slice { t, x2: grid.x2, x1, x3, values: rows.concat() }
}

pub fn write_csv<W: Write>(slice: &Slice, mut w: W) -> io::Result<()> {
    writeln!(w, "x1,x3,t,re,im,abs")?;
    for (i3, &x3) in slice.x3.iter().enumerate() {
        for (i1, &x1) in slice.x1.iter().enumerate() {
            match slice.get(i1, i3) {
                Some(v) => writeln!(w, "{x1},{x3},{},{},{},{}", slice.t, v.re, v.im, v.norm())?,
                None => writeln!(w, "{x1},{x3},{},nan,nan,nan", slice.t)?,
            }
        }
    }
    w.flush()
}

/// Gray-level map of a slice: the levels and the range they encode.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayMap {
    pub levels: Vec<u16>,
    pub min: f64,
    pub max: f64,
}

/// Maps the chosen quantity of every cell to `0..=65534`, rows ordered from
/// the largest `x3` down.
pub fn gray_levels(slice: &Slice, quantity: Quantity, scaling: Scaling) -> GrayMap {
    let scaled = |v: FieldValue| -> Option<f64> {
        let q = quantity.of(v);
        let s = match scaling {
            Scaling::Linear => q,
            Scaling::Log => q.abs().log10(),
        };
        s.is_finite().then_some(s)
    };
    let n1 = slice.x1.len();
    let n3 = slice.x3.len();
    let mut cells = Vec::with_capacity(n1 * n3);
    for i3 in (0..n3).rev() {
        for i1 in 0..n1 {
            cells.push(slice.get(i1, i3).and_then(scaled));
        }
    }
    let (min, max) = cells
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = max - min;
    let levels = cells
        .iter()
        .map(|c| match c {
            None => SINGULAR_MARKER,
            Some(_) if !(span > 0.0) => 0,
            Some(v) => ((v - min) / span * MAX_LEVEL).round().clamp(0.0, MAX_LEVEL) as u16,
        })
        .collect();
    GrayMap { levels, min, max }
}

pub fn write_pgm<W: Write>(slice: &Slice, map: &GrayMap, mut w: W) -> io::Result<()> {
    write!(w, "P5\n{} {}\n65535\n", slice.x1.len(), slice.x3.len())?;
    let bytes: Vec<u8> = map.levels.iter().flat_map(|l| l.to_be_bytes()).collect();
    w.write_all(&bytes)?;
    w.flush()
}

pub fn write_meta<W: Write>(slice: &Slice, map: &GrayMap, quantity: Quantity, scaling: Scaling, mut w: W) -> io::Result<()> {
    writeln!(w, "min={}", map.min)?;
    writeln!(w, "max={}", map.max)?;
    writeln!(w, "scaling={scaling}")?;
    writeln!(w, "quantity={}", quantity.name())?;
    writeln!(w, "singular_marker={SINGULAR_MARKER}")?;
    writeln!(w, "t={}", slice.t)?;
    writeln!(w, "x2={}", slice.x2)?;
    writeln!(w, "x1={}:{}:{}", slice.x1[0], slice.x1[slice.x1.len() - 1], slice.x1.len())?;
    writeln!(w, "x3={}:{}:{}", slice.x3[0], slice.x3[slice.x3.len() - 1], slice.x3.len())?;
    writeln!(w, "rows=x3_descending")?;
    w.flush()
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes `<prefix>_t<index>.csv` and/or `<prefix>_t<index>.pgm` with its
/// `.meta` sidecar; returns the paths written.
pub fn write_slice_files(
    slice: &Slice,
    prefix: &str,
    index: usize,
    format: OutputFormat,
    quantity: Quantity,
    scaling: Scaling,
) -> io::Result<Vec<PathBuf>> {
    let stem = format!("{prefix}_t{index}");
    let mut written = Vec::new();
    if format.csv() {
        let path = PathBuf::from(format!("{stem}.csv"));
        write_csv(slice, create(&path)?)?;
        written.push(path);
    }
    if format.pgm() {
        let map = gray_levels(slice, quantity, scaling);
        let path = PathBuf::from(format!("{stem}.pgm"));
        write_pgm(slice, &map, create(&path)?)?;
        written.push(path);
        let meta = PathBuf::from(format!("{stem}.meta"));
        write_meta(slice, &map, quantity, scaling, create(&meta)?)?;
        written.push(meta);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BranchCut, SourceVector};
    use crate::wavelet::{wavelet, EmissionCenter};
    use num_complex::Complex64;

    #[test]
    fn parses_grid() {
        let g = GridSpec::parse("-1:1:3,0:2:2", 0.5, vec![0.0]).unwrap();
        assert_eq!(g.x1.values(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(g.x3.values(), vec![0.0, 2.0]);
        assert!(GridSpec::parse("-1:1:1,0:2:2", 0.0, vec![0.0]).is_err());
        assert!(GridSpec::parse("1:-1:3,0:2:2", 0.0, vec![0.0]).is_err());
        assert!(GridSpec::parse("-1:1:3", 0.0, vec![0.0]).is_err());
        assert!(GridSpec::parse("-1:1:3,0:2:2", 0.0, vec![]).is_err());
    }

    #[test]
    fn csv_and_pgm_encoding() {
        let grid = GridSpec::parse("0:1:2,0:1:2", 0.0, vec![1.0]).unwrap();
        let field = |x: SpacetimePoint| -> Result<FieldValue> {
            if x.r.x1 == 1.0 && x.r.x3 == 1.0 {
                Err(Error::SingularPoint("corner".into()))
            } else {
                Ok(Complex64::new(x.r.x1 + 2.0 * x.r.x3, -1.0))
            }
        };
        let slice = sample_slice(&field, &grid, 1.0);
        let mut csv = Vec::new();
        write_csv(&slice, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1,x3,t,re,im,abs");
        assert_eq!(lines[1], "0,0,1,0,-1,1");
        assert_eq!(lines[4], "1,1,1,nan,nan,nan");

        let map = gray_levels(&slice, Quantity::Re, Scaling::Linear);
        // top row is x3 = 1: (0,1) -> 2 = max, (1,1) singular
        assert_eq!(map.levels, vec![65534, SINGULAR_MARKER, 0, 32767]);
        let mut pgm = Vec::new();
        write_pgm(&slice, &map, &mut pgm).unwrap();
        assert!(pgm.starts_with(b"P5\n2 2\n65535\n"));
        assert_eq!(pgm.len(), 13 + 8);
        assert_eq!(&pgm[13..15], &[0xff, 0xfe]);
    }

    #[test]
    fn slices_are_mirror_symmetric() {
        let z = EmissionCenter::at_origin(SourceVector::along_x3(1.0).unwrap(), 1.1).unwrap();
        let field = |x| wavelet(x, &z, BranchCut::StandardDisk);
        let grid = GridSpec::parse("-2:2:21,-1:3:17", 0.0, vec![1.5]).unwrap();
        let slice = sample_slice(&field, &grid, 1.5);
        for i3 in 0..17 {
            for i1 in 0..21 {
                let (l, r) = (slice.get(i1, i3), slice.get(20 - i1, i3));
                match (l, r) {
                    (Some(l), Some(r)) => assert!((l.norm() - r.norm()).abs() <= 1e-12 * l.norm()),
                    (None, None) => {}
                    _ => panic!("singular mask not symmetric at ({i1}, {i3})"),
                }
            }
        }
    }
}
