//! Temporal envelopes sampled on a uniform grid.

use std::io::Read;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::C64;

/// Default number of grid points.
pub const GRID_POINTS: usize = 512;
/// Half-span of the default grid in envelope widths.
pub const GRID_HALF_WIDTHS: f64 = 4.0;

/// Uniform time grid, microseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start_us: f64,
    pub step_us: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(start_us: f64, end_us: f64, len: usize) -> Result<Self> {
        if len < 2 || !(end_us > start_us) {
            return Err(Error::InvalidArgument(format!(
                "invalid grid [{start_us}, {end_us}] with {len} points"
            )));
        }
        Ok(Self {
            start_us,
            step_us: (end_us - start_us) / (len - 1) as f64,
            len,
        })
    }

    /// Grid covering the support of every shape.
    pub fn covering(shapes: &[EnvelopeShape], len: usize) -> Result<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in shapes {
            let (a, b) = s.support()?;
            lo = lo.min(a);
            hi = hi.max(b);
        }
        Self::new(lo, hi, len)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start_us + self.step_us * k as f64
    }

    pub fn end_us(&self) -> f64 {
        self.time(self.len - 1)
    }

    /// Trapezoid weight of point `k`.
    pub fn weight(&self, k: usize) -> f64 {
        if k == 0 || k + 1 == self.len {
            self.step_us / 2.0
        } else {
            self.step_us
        }
    }

    /// Index of the grid point nearest to `t`, or `None` outside the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.start_us) / self.step_us;
        let k = x.round();
        if k < 0.0 || k > (self.len - 1) as f64 || (x - k).abs() > 1e-6 {
            None
        } else {
            Some(k as usize)
        }
    }
}

/// Named envelope shapes. `width_us` is the standard deviation of `|f|^2`
/// for the Gaussian, the full length of the square pulse and the 1/e
/// intensity decay time of the exponential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvelopeShape {
    Gaussian {
        width_us: f64,
        #[serde(default)]
        offset_us: f64,
    },
    Square {
        width_us: f64,
        #[serde(default)]
        offset_us: f64,
    },
    ExponentialDecay {
        width_us: f64,
        #[serde(default)]
        offset_us: f64,
    },
    /// CSV with header `time_us,re,im` on a uniform grid.
    Samples { path: PathBuf },
}

impl EnvelopeShape {
    pub fn gaussian(width_us: f64) -> Self {
        Self::Gaussian {
            width_us,
            offset_us: 0.0,
        }
    }

    fn width(&self) -> Result<f64> {
        let w = match self {
            Self::Gaussian { width_us, .. }
            | Self::Square { width_us, .. }
            | Self::ExponentialDecay { width_us, .. } => *width_us,
            Self::Samples { .. } => return Ok(1.0),
        };
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "envelope width must be positive, got {w}"
            )));
        }
        Ok(w)
    }

    /// Time interval outside of which the envelope is negligible.
    pub fn support(&self) -> Result<(f64, f64)> {
        let w = self.width()?;
        Ok(match self {
            Self::Gaussian { offset_us, .. } => (
                offset_us - GRID_HALF_WIDTHS * w,
                offset_us + GRID_HALF_WIDTHS * w,
            ),
            Self::Square { offset_us, .. } => (offset_us - 0.5 * w, offset_us + 0.5 * w),
            Self::ExponentialDecay { offset_us, .. } => {
                (*offset_us, offset_us + 2.0 * GRID_HALF_WIDTHS * w)
            }
            Self::Samples { path } => {
                let samples = read_samples(std::fs::File::open(path)?)?;
                (samples[0].0, samples[samples.len() - 1].0)
            }
        })
    }

    fn amplitude(&self, t: f64) -> f64 {
        match *self {
            Self::Gaussian {
                width_us,
                offset_us,
            } => (-(t - offset_us).powi(2) / (4.0 * width_us * width_us)).exp(),
            Self::Square {
                width_us,
                offset_us,
            } => {
                if (t - offset_us).abs() <= 0.5 * width_us + 1e-12 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::ExponentialDecay {
                width_us,
                offset_us,
            } => {
                if t >= offset_us - 1e-12 {
                    (-(t - offset_us) / (2.0 * width_us)).exp()
                } else {
                    0.0
                }
            }
            Self::Samples { .. } => unreachable!("sampled envelopes are interpolated"),
        }
    }

    /// Samples the shape on `grid` and normalizes it.
    pub fn sample(&self, grid: &TimeGrid) -> Result<Envelope> {
        self.width()?;
        let values: Vec<C64> = match self {
            Self::Samples { path } => {
                let samples = read_samples(std::fs::File::open(path)?)?;
                (0..grid.len)
                    .map(|k| interpolate(&samples, grid.time(k)))
                    .collect()
            }
            _ => (0..grid.len)
                .map(|k| C64::new(self.amplitude(grid.time(k)), 0.0))
                .collect(),
        };
        Envelope::normalized(*grid, values)
    }
}

fn read_samples<R: Read>(reader: R) -> Result<Vec<(f64, C64)>> {
    #[derive(Deserialize)]
    struct Row {
        time_us: f64,
        re: f64,
        im: f64,
    }
    let mut rows = Vec::new();
    for row in csv::Reader::from_reader(reader).deserialize() {
        let r: Row = row?;
        rows.push((r.time_us, C64::new(r.re, r.im)));
    }
    if rows.len() < 2 {
        return Err(Error::InvalidArgument(
            "envelope CSV needs at least two samples".into(),
        ));
    }
    let step = rows[1].0 - rows[0].0;
    if !(step > 0.0) || rows.windows(2).any(|w| ((w[1].0 - w[0].0) - step).abs() > 1e-9 * step.max(1.0)) {
        return Err(Error::InvalidArgument(
            "envelope CSV samples must lie on a uniform increasing grid".into(),
        ));
    }
    Ok(rows)
}

fn interpolate(samples: &[(f64, C64)], t: f64) -> C64 {
    let (t0, t1) = (samples[0].0, samples[samples.len() - 1].0);
    if t < t0 || t > t1 {
        return C64::new(0.0, 0.0);
    }
    let step = samples[1].0 - t0;
    let x = (t - t0) / step;
    let k = (x.floor() as usize).min(samples.len() - 2);
    let f = x - k as f64;
    samples[k].1 * (1.0 - f) + samples[k + 1].1 * f
}

/// Complex amplitude `f(t)` with unit squared norm on its grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    grid: TimeGrid,
    values: Vec<C64>,
}

impl Envelope {
    pub fn new(grid: TimeGrid, values: Vec<C64>) -> Result<Self> {
        let e = Self::raw(grid, values)?;
        let n = e.norm_squared();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "envelope squared norm is {n}, expected 1"
            )));
        }
        Ok(e)
    }

    pub fn normalized(grid: TimeGrid, values: Vec<C64>) -> Result<Self> {
        let e = Self::raw(grid, values)?;
        let n = e.norm_squared();
        if !(n > 0.0) {
            return Err(Error::InvalidArgument("envelope vanishes on its grid".into()));
        }
        let s = 1.0 / n.sqrt();
        Ok(Self {
            values: e.values.into_iter().map(|v| v * s).collect(),
            grid,
        })
    }

    fn raw(grid: TimeGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len {
            return Err(Error::InvalidArgument(format!(
                "{} samples for a grid of {}",
                values.len(),
                grid.len
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn norm_squared(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| self.grid.weight(k) * v.norm_sqr())
            .sum()
    }

    /// `int conj(self(t)) other(t) exp(-i dw t) dt`.
    pub fn overlap(&self, other: &Envelope, dw: f64) -> Result<C64> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument(
                "envelopes live on different grids".into(),
            ));
        }
        Ok((0..self.grid.len)
            .map(|k| {
                let t = self.grid.time(k);
                self.values[k].conj() * other.values[k] * C64::from_polar(self.grid.weight(k), -dw * t)
            })
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TimeGrid {
        TimeGrid::covering(&[EnvelopeShape::gaussian(0.05)], GRID_POINTS).unwrap()
    }

    #[test]
    fn sampled_shapes_are_normalized() {
        let g = TimeGrid::new(-0.3, 0.6, 512).unwrap();
        for s in [
            EnvelopeShape::gaussian(0.05),
            EnvelopeShape::Square { width_us: 0.1, offset_us: 0.0 },
            EnvelopeShape::ExponentialDecay { width_us: 0.05, offset_us: 0.0 },
        ] {
            let e = s.sample(&g).unwrap();
            assert!((e.norm_squared() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_overlap_matches_closed_form() {
        let sigma = 0.05;
        let e = EnvelopeShape::gaussian(sigma).sample(&grid()).unwrap();
        let dw = 2.0 * std::f64::consts::PI / 0.2;
        let o = e.overlap(&e, dw).unwrap();
        let expected = (-dw * dw * sigma * sigma / 2.0).exp();
        // The grid truncates the tails at four widths.
        assert!((o.re - expected).abs() < 1e-3, "{o} vs {expected}");
        assert!(o.im.abs() < 1e-9);
    }

    #[test]
    fn unnormalized_values_rejected() {
        let g = TimeGrid::new(0.0, 1.0, 3).unwrap();
        assert!(Envelope::new(g, vec![C64::new(1.0, 0.0); 3]).is_ok());
        assert!(Envelope::new(g, vec![C64::new(2.0, 0.0); 3]).is_err());
    }

    #[test]
    fn csv_samples_are_interpolated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let mut text = String::from("time_us,re,im\n");
        for k in 0..201 {
            let t = -0.2 + 0.002 * k as f64;
            text += &format!("{t},{},0\n", (-t * t / (4.0 * 0.05 * 0.05)).exp());
        }
        std::fs::write(&path, text).unwrap();
        let g = grid();
        let from_csv = EnvelopeShape::Samples { path }.sample(&g).unwrap();
        let direct = EnvelopeShape::gaussian(0.05).sample(&g).unwrap();
        assert!(from_csv.overlap(&direct, 0.0).unwrap().re > 0.999);
    }
}
