//! Seedable sampling of homogeneous Poisson point processes on a square
//! window (2D) or a segment (1D).
//!
//! Every window draws from its own ChaCha8 stream keyed by
//! `(seed, window_index)`, so windows can be generated in any order on any
//! number of workers and still reproduce the same points bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_gamma_unchecked;

/// Smallest expected number of points per 2D window. Below this the
/// boundary swallows essentially every cell.
pub const MIN_EXPECTED_POINTS_2D: f64 = 100.0;

/// Means at or above this use transformed rejection instead of inversion.
const INVERSION_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig2D {
    /// Points per unit area.
    pub lambda: f64,
    /// Window area; the window is `[0, sqrt(area)]^2`.
    pub area: f64,
    pub windows: u64,
    pub seed: u64,
    pub shards: usize,
}

impl SimConfig2D {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!(
                "lambda must be finite and > 0, got {}",
                self.lambda
            )));
        }
        if !(self.area > 0.0) || !self.area.is_finite() {
            return Err(Error::Config(format!(
                "area must be finite and > 0, got {}",
                self.area
            )));
        }
        let expected = self.lambda * self.area;
        if expected < MIN_EXPECTED_POINTS_2D {
            return Err(Error::Config(format!(
                "expected points per window lambda*area = {expected} is below {MIN_EXPECTED_POINTS_2D}"
            )));
        }
        if self.windows == 0 {
            return Err(Error::Config("windows must be >= 1".into()));
        }
        if self.shards == 0 {
            return Err(Error::Config("shards must be >= 1".into()));
        }
        Ok(())
    }

    pub fn side(&self) -> f64 {
        self.area.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig1D {
    /// Points per unit length.
    pub lambda: f64,
    pub length: f64,
    pub windows: u64,
    pub seed: u64,
    pub shards: usize,
}

impl SimConfig1D {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!(
                "lambda must be finite and > 0, got {}",
                self.lambda
            )));
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::Config(format!(
                "length must be finite and > 0, got {}",
                self.length
            )));
        }
        if self.windows == 0 {
            return Err(Error::Config("windows must be >= 1".into()));
        }
        if self.shards == 0 {
            return Err(Error::Config("shards must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

/// Generator seeds of one simulation window.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet2D {
    pub points: Vec<Point>,
}

impl PointSet2D {
    pub fn new(points: Vec<Point>) -> Self {
        PointSet2D { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl FromIterator<Point> for PointSet2D {
    fn from_iter<I: IntoIterator<Item = Point>>(iter: I) -> Self {
        PointSet2D {
            points: iter.into_iter().collect(),
        }
    }
}

/// Random stream for one window. Streams for distinct window indices never
/// overlap.
pub fn window_rng(seed: u64, window_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(window_index);
    rng
}

/// Draws `k ~ Poisson(mean)`.
///
/// Sequential-search inversion below a mean of 30, Hörmann's PTRS
/// transformed rejection above.
pub fn poisson_sample<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::Config(format!(
            "Poisson mean must be finite and > 0, got {mean}"
        )));
    }
    if mean < INVERSION_LIMIT {
        Ok(poisson_inversion(mean, rng))
    } else {
        Ok(poisson_ptrs(mean, rng))
    }
}

fn poisson_inversion<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        let next = cdf + p;
        if next == cdf {
            // remaining mass is below f64 resolution
            break;
        }
        cdf = next;
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.024_83 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * loglam - ln_gamma_unchecked(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Points of window `window_index`: `N ~ Poisson(lambda * area)` seeds,
/// uniform on `[0, sqrt(area)]^2`.
pub fn sample_window_2d(config: &SimConfig2D, window_index: u64) -> Result<PointSet2D> {
    config.validate()?;
    let mut rng = window_rng(config.seed, window_index);
    let n = poisson_sample(config.lambda * config.area, &mut rng)?;
    let side = config.side();
    let points = (0..n)
        .map(|_| {
            let x = rng.random::<f64>() * side;
            let y = rng.random::<f64>() * side;
            Point::new(x, y)
        })
        .collect();
    Ok(PointSet2D { points })
}

/// Sorted positions of window `window_index` on `[0, length]`.
pub fn sample_line_1d(config: &SimConfig1D, window_index: u64) -> Result<Vec<f64>> {
    config.validate()?;
    let mut rng = window_rng(config.seed, window_index);
    let n = poisson_sample(config.lambda * config.length, &mut rng)?;
    let mut xs: Vec<f64> = (0..n)
        .map(|_| rng.random::<f64>() * config.length)
        .collect();
    xs.sort_unstable_by(f64::total_cmp);
    Ok(xs)
}
