//! Mergeable binned empirical CDF with exact running moments.
//!
//! Bins are right-closed: bin `k` holds samples in `(k w, (k + 1) w]`
//! (bin 0 also takes 0), so the ECDF at each grid point `(k + 1) w` is the
//! exact proportion of samples `<=` that point. Running sums are kept as
//! fixed-point integers, which makes `merge` exactly associative and
//! commutative: any partition of a stream merges to bit-identical state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bin count.
pub const DEFAULT_BINS: usize = 4096;

/// Fixed-point scale for running sums (2^56).
const SUM_SCALE: f64 = 72_057_594_037_927_936.0;
/// Largest accepted sample value; keeps squared terms well inside i128.
pub const MAX_VALUE: f64 = 65_536.0;

/// Uniform grid on `[0, upper]` with `bins` bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub upper: f64,
    pub bins: usize,
}

impl Grid {
    pub fn new(upper: f64, bins: usize) -> Result<Self> {
        if !(upper > 0.0) || !upper.is_finite() {
            return Err(Error::Config(format!(
                "grid upper bound must be finite and > 0, got {upper}"
            )));
        }
        if bins == 0 {
            return Err(Error::Config("grid needs at least one bin".into()));
        }
        Ok(Grid { upper, bins })
    }

    pub fn width(&self) -> f64 {
        self.upper / self.bins as f64
    }

    /// Right edge of bin `k`.
    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.bins {
            self.upper
        } else {
            (k + 1) as f64 * self.width()
        }
    }

    /// Left edge of bin `k`.
    pub fn left(&self, k: usize) -> f64 {
        if k == 0 { 0.0 } else { self.point(k - 1) }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.bins).map(|k| self.point(k))
    }

    /// Bin containing `x`, for `0 <= x <= upper`.
    fn bin_of(&self, x: f64) -> usize {
        let k = (x / self.width()).ceil() as usize;
        k.saturating_sub(1).min(self.bins - 1)
    }
}

/// Exact fixed-point running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedSum(#[serde(with = "i128_string")] i128);

impl FixedSum {
    fn add(&mut self, v: f64) {
        self.0 += (v * SUM_SCALE).round() as i128;
    }

    fn merge(&mut self, other: FixedSum) {
        self.0 += other.0;
    }

    pub fn value(&self) -> f64 {
        self.0 as f64 / SUM_SCALE
    }
}

mod i128_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &i128, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<i128, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfAccumulator {
    pub grid: Grid,
    pub counts: Vec<u64>,
    pub overflow: u64,
    pub n: u64,
    pub sum: FixedSum,
    pub sum_sq: FixedSum,
}

impl EcdfAccumulator {
    pub fn new(grid: Grid) -> Self {
        EcdfAccumulator {
            grid,
            counts: vec![0; grid.bins],
            overflow: 0,
            n: 0,
            sum: FixedSum::default(),
            sum_sq: FixedSum::default(),
        }
    }

    pub fn with_upper(upper: f64) -> Result<Self> {
        Ok(Self::new(Grid::new(upper, DEFAULT_BINS)?))
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn add(&mut self, value: f64) -> Result<()> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::Data(format!(
                "sample {value} rejected: values must be finite and >= 0 (n = {})",
                self.n
            )));
        }
        if value > MAX_VALUE {
            return Err(Error::Data(format!(
                "sample {value} exceeds accumulator range {MAX_VALUE}"
            )));
        }
        if value > self.grid.upper {
            self.overflow += 1;
        } else {
            self.counts[self.grid.bin_of(value)] += 1;
        }
        self.n += 1;
        self.sum.add(value);
        self.sum_sq.add(value * value);
        Ok(())
    }

    pub fn extend<I: IntoIterator<Item = f64>>(&mut self, values: I) -> Result<()> {
        values.into_iter().try_for_each(|v| self.add(v))
    }

    /// Proportion of samples at or below the right edge of the bin holding `x`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::EmptyData("ECDF evaluated with no samples"));
        }
        if x.is_nan() {
            return Err(Error::Data("ECDF evaluated at NaN".into()));
        }
        if x < 0.0 {
            return Ok(0.0);
        }
        if x >= self.grid.upper {
            return Ok((self.n - self.overflow) as f64 / self.n as f64);
        }
        let k = self.grid.bin_of(x);
        let below: u64 = self.counts[..=k].iter().sum();
        Ok(below as f64 / self.n as f64)
    }

    /// ECDF at every grid point.
    pub fn ecdf_values(&self) -> Result<Vec<f64>> {
        if self.n == 0 {
            return Err(Error::EmptyData("ECDF evaluated with no samples"));
        }
        let n = self.n as f64;
        let mut cum = 0u64;
        Ok(self
            .counts
            .iter()
            .map(|&c| {
                cum += c;
                cum as f64 / n
            })
            .collect())
    }

    pub fn merge(&mut self, other: &EcdfAccumulator) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Config(format!(
                "cannot merge accumulators with different grids ({:?} vs {:?})",
                self.grid, other.grid
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.overflow += other.overflow;
        self.n += other.n;
        self.sum.merge(other.sum);
        self.sum_sq.merge(other.sum_sq);
        Ok(())
    }

    /// `(mean, raw second moment)` from the running sums.
    pub fn moments(&self) -> Result<(f64, f64)> {
        if self.n == 0 {
            return Err(Error::EmptyData("moments of an empty accumulator"));
        }
        let n = self.n as f64;
        Ok((self.sum.value() / n, self.sum_sq.value() / n))
    }

    pub fn variance(&self) -> Result<f64> {
        let (m1, m2) = self.moments()?;
        Ok((m2 - m1 * m1).max(0.0))
    }

    pub fn overflow_fraction(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.overflow as f64 / self.n as f64
        }
    }
}

/// Largest gap between two accumulators' ECDFs over their shared grid
/// (two-sample Kolmogorov–Smirnov statistic, grid-restricted).
pub fn ks_two_sample(a: &EcdfAccumulator, b: &EcdfAccumulator) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::Config("two-sample KS needs identical grids".into()));
    }
    let ea = a.ecdf_values()?;
    let eb = b.ecdf_values()?;
    Ok(ea
        .iter()
        .zip(&eb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Largest gap between an accumulator's ECDF and a reference CDF over the grid.
pub fn ks_one_sample(acc: &EcdfAccumulator, cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let e = acc.ecdf_values()?;
    Ok(acc
        .grid
        .points()
        .zip(&e)
        .map(|(x, ex)| (ex - cdf(x)).abs())
        .fold(0.0, f64::max))
}

/// Asymptotic two-sample KS rejection threshold `c(alpha) sqrt((n + m) / (n m))`.
pub fn ks_two_sample_threshold(alpha: f64, n: u64, m: u64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

/// Dvoretzky–Kiefer–Wolfowitz band half-width at level `alpha` for `n` samples.
pub fn dkw_bound(alpha: f64, n: u64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}
