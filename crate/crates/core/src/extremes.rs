//! Per-cell extreme generator-to-vertex distances and the Monte-Carlo
//! drivers that stream them into accumulators.
//!
//! Distances are normalized by the intensity: `sqrt(lambda) * r` in the
//! plane and `lambda * y / 2` for half-gaps on the line.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::TheoryCdf;
use crate::empirics::{DEFAULT_BINS, EcdfAccumulator, Grid, ks_one_sample};
use crate::error::{Error, Result};
use crate::geometry::{Triangulation, VoronoiCell, Window, triangulate, voronoi_cells_in_window};
use crate::rng_ppp::{PointSet2D, SimConfig1D, SimConfig2D, sample_line_1d, sample_window_2d};

/// Overflow fraction above which a run report flags its grid as too short.
pub const OVERFLOW_WARNING: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremesRecord {
    pub r_min_norm: f64,
    pub r_max_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneDRecord {
    pub d_min_norm: f64,
    pub d_max_norm: f64,
}

/// Smallest and largest normalized distance from the cell's generator to
/// its vertices.
pub fn cell_extremes(
    cell: &VoronoiCell,
    points: &PointSet2D,
    lambda: f64,
) -> Result<ExtremesRecord> {
    if !cell.interior || cell.vertices.is_empty() {
        return Err(Error::Contract(format!(
            "cell_extremes called on non-interior cell of generator {}",
            cell.generator
        )));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(
            "cell_extremes",
            format!("lambda = {lambda} must be finite and > 0"),
        ));
    }
    let g = points.points[cell.generator];
    let (lo, hi) = cell
        .vertices
        .iter()
        .map(|v| g.dist(*v))
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        });
    let s = lambda.sqrt();
    Ok(ExtremesRecord {
        r_min_norm: s * lo,
        r_max_norm: s * hi,
    })
}

/// Records for every point of a sorted line realization except the two
/// end points, whose cells are unbounded.
pub fn line_records(sorted: &[f64], lambda: f64) -> Vec<OneDRecord> {
    sorted
        .windows(3)
        .map(|w| {
            let left = 0.5 * lambda * (w[1] - w[0]);
            let right = 0.5 * lambda * (w[2] - w[1]);
            OneDRecord {
                d_min_norm: left.min(right),
                d_max_norm: left.max(right),
            }
        })
        .collect()
}

/// Accumulator upper bounds, in normalized units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Caps2D {
    pub r_min: f64,
    pub r_max: f64,
    pub r_bar: f64,
}

impl Default for Caps2D {
    fn default() -> Self {
        Caps2D {
            r_min: 1.5,
            r_max: 3.0,
            r_bar: 2.5,
        }
    }
}

/// Shared upper bound of the 1D accumulators, so both ECDFs sit on one grid.
pub const CAP_1D: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions2D {
    pub caps: Caps2D,
    pub bins: usize,
    /// Keep every (r_min, r_max) pair, in window order.
    pub keep_records: bool,
}

impl Default for RunOptions2D {
    fn default() -> Self {
        RunOptions2D {
            caps: Caps2D::default(),
            bins: DEFAULT_BINS,
            keep_records: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport2D {
    pub windows: u64,
    /// Generators over all windows, interior or not.
    pub total_cells: u64,
    pub interior_cells: u64,
    pub interior_fraction: f64,
    pub mean_vertex_count: f64,
    /// Windows that produced no interior cell.
    pub empty_windows: Vec<u64>,
    pub overflow_r_min: f64,
    pub overflow_r_max: f64,
    pub overflow_r_bar: f64,
    pub grid_warning: bool,
}

#[derive(Debug, Clone)]
pub struct Run2D {
    pub r_min: EcdfAccumulator,
    pub r_max: EcdfAccumulator,
    /// Every normalized generator-vertex distance of interior cells.
    pub r_bar: EcdfAccumulator,
    pub report: RunReport2D,
    pub records: Option<Vec<ExtremesRecord>>,
    pub wall_time: Duration,
}

struct WindowTally {
    r_min: EcdfAccumulator,
    r_max: EcdfAccumulator,
    r_bar: EcdfAccumulator,
    cells: u64,
    interior: u64,
    vertices: u64,
    empty: Vec<u64>,
    records: Vec<ExtremesRecord>,
}

impl WindowTally {
    fn new(grids: [Grid; 3]) -> Self {
        WindowTally {
            r_min: EcdfAccumulator::new(grids[0]),
            r_max: EcdfAccumulator::new(grids[1]),
            r_bar: EcdfAccumulator::new(grids[2]),
            cells: 0,
            interior: 0,
            vertices: 0,
            empty: Vec::new(),
            records: Vec::new(),
        }
    }

    fn merge(mut self, other: WindowTally) -> Result<Self> {
        self.r_min.merge(&other.r_min)?;
        self.r_max.merge(&other.r_max)?;
        self.r_bar.merge(&other.r_bar)?;
        self.cells += other.cells;
        self.interior += other.interior;
        self.vertices += other.vertices;
        self.empty.extend(other.empty);
        self.records.extend(other.records);
        Ok(self)
    }
}

/// Points, triangulation and window-filtered cells of one window.
pub fn window_tessellation(
    config: &SimConfig2D,
    window_index: u64,
) -> Result<(Triangulation, Vec<VoronoiCell>)> {
    let points = sample_window_2d(config, window_index)?;
    let wrap = |e: Error| Error::Geometry {
        window: window_index,
        source: Box::new(e),
    };
    let tri = triangulate(points).map_err(wrap)?;
    let cells = voronoi_cells_in_window(&tri, Window::new(config.side())).map_err(wrap)?;
    Ok((tri, cells))
}

fn process_window(
    config: &SimConfig2D,
    idx: u64,
    grids: [Grid; 3],
    keep: bool,
) -> Result<WindowTally> {
    let mut t = WindowTally::new(grids);
    let (tri, cells) = window_tessellation(config, idx)?;
    let s = config.lambda.sqrt();
    t.cells = tri.points.len() as u64;
    for cell in cells.iter().filter(|c| c.interior) {
        let g = tri.points.points[cell.generator];
        for v in &cell.vertices {
            t.r_bar.add(s * g.dist(*v))?;
        }
        let rec = cell_extremes(cell, &tri.points, config.lambda)?;
        t.r_min.add(rec.r_min_norm)?;
        t.r_max.add(rec.r_max_norm)?;
        t.interior += 1;
        t.vertices += cell.vertices.len() as u64;
        if keep {
            t.records.push(rec);
        }
    }
    if t.interior == 0 {
        t.empty.push(idx);
    }
    Ok(t)
}

fn thread_pool(shards: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(shards)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {shards} worker threads: {e}")))
}

/// Prefers the error of the lowest window so failures report consistently.
fn combine<T>(
    a: Result<(u64, T)>,
    b: Result<(u64, T)>,
    merge: impl Fn(T, T) -> Result<T>,
) -> Result<(u64, T)> {
    match (a, b) {
        (Ok((i, x)), Ok((_, y))) => Ok((i, merge(x, y)?)),
        (Err(e), Ok(_)) | (Ok(_), Err(e)) => Err(e),
        (Err(e1), Err(e2)) => {
            let w = |e: &Error| {
                if let Error::Geometry { window, .. } = e {
                    *window
                } else {
                    u64::MAX
                }
            };
            Err(if w(&e2) < w(&e1) { e2 } else { e1 })
        }
    }
}

pub fn run_2d_experiment(config: &SimConfig2D) -> Result<Run2D> {
    run_2d_experiment_with(config, &RunOptions2D::default())
}

/// Simulates `config.windows` windows on `config.shards` workers. Window
/// tallies merge exactly, so the result does not depend on the shard count.
pub fn run_2d_experiment_with(config: &SimConfig2D, opts: &RunOptions2D) -> Result<Run2D> {
    config.validate()?;
    let start = Instant::now();
    let grids = [
        Grid::new(opts.caps.r_min, opts.bins)?,
        Grid::new(opts.caps.r_max, opts.bins)?,
        Grid::new(opts.caps.r_bar, opts.bins)?,
    ];
    let pool = thread_pool(config.shards)?;
    let keep = opts.keep_records;
    // indexed reduction keeps records and empty-window lists in window order
    let (_, tally) = pool.install(|| {
        (0..config.windows)
            .into_par_iter()
            .map(|i| process_window(config, i, grids, keep).map(|t| (i, t)))
            .reduce(
                || Ok((0, WindowTally::new(grids))),
                |a, b| combine(a, b, WindowTally::merge),
            )
    })?;

    let interior_fraction = if tally.cells == 0 {
        0.0
    } else {
        tally.interior as f64 / tally.cells as f64
    };
    let mean_vertex_count = if tally.interior == 0 {
        0.0
    } else {
        tally.vertices as f64 / tally.interior as f64
    };
    let (o_min, o_max, o_bar) = (
        tally.r_min.overflow_fraction(),
        tally.r_max.overflow_fraction(),
        tally.r_bar.overflow_fraction(),
    );
    let report = RunReport2D {
        windows: config.windows,
        total_cells: tally.cells,
        interior_cells: tally.interior,
        interior_fraction,
        mean_vertex_count,
        empty_windows: tally.empty,
        overflow_r_min: o_min,
        overflow_r_max: o_max,
        overflow_r_bar: o_bar,
        grid_warning: o_min >= OVERFLOW_WARNING
            || o_max >= OVERFLOW_WARNING
            || o_bar >= OVERFLOW_WARNING,
    };
    Ok(Run2D {
        r_min: tally.r_min,
        r_max: tally.r_max,
        r_bar: tally.r_bar,
        report,
        records: keep.then_some(tally.records),
        wall_time: start.elapsed(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport1D {
    pub windows: u64,
    pub points: u64,
    /// Points with two bounded neighbors (all but the ends of each line).
    pub interior_points: u64,
    pub overflow_d_min: f64,
    pub overflow_d_max: f64,
    pub grid_warning: bool,
    /// Largest gap between each ECDF and its closed form over the grid.
    pub sup_distance_min: f64,
    pub sup_distance_max: f64,
}

#[derive(Debug, Clone)]
pub struct Run1D {
    pub d_min: EcdfAccumulator,
    pub d_max: EcdfAccumulator,
    pub report: RunReport1D,
    pub wall_time: Duration,
}

pub fn run_1d_experiment(config: &SimConfig1D) -> Result<Run1D> {
    run_1d_experiment_with(config, CAP_1D, DEFAULT_BINS)
}

pub fn run_1d_experiment_with(config: &SimConfig1D, cap: f64, bins: usize) -> Result<Run1D> {
    config.validate()?;
    let start = Instant::now();
    let grid = Grid::new(cap, bins)?;
    let empty = || (EcdfAccumulator::new(grid), EcdfAccumulator::new(grid), 0u64);
    let pool = thread_pool(config.shards)?;
    let (_, (d_min, d_max, points)) = pool.install(|| {
        (0..config.windows)
            .into_par_iter()
            .map(|i| -> Result<_> {
                let xs = sample_line_1d(config, i)?;
                let (mut lo, mut hi, _) = empty();
                for r in line_records(&xs, config.lambda) {
                    lo.add(r.d_min_norm)?;
                    hi.add(r.d_max_norm)?;
                }
                Ok((i, (lo, hi, xs.len() as u64)))
            })
            .reduce(
                || Ok((0, empty())),
                |a, b| {
                    combine(a, b, |mut x, y| {
                        x.0.merge(&y.0)?;
                        x.1.merge(&y.1)?;
                        Ok((x.0, x.1, x.2 + y.2))
                    })
                },
            )
    })?;
    let (o_min, o_max) = (d_min.overflow_fraction(), d_max.overflow_fraction());
    let sup = |acc: &EcdfAccumulator, t: TheoryCdf| {
        if acc.is_empty() {
            Ok(f64::NAN)
        } else {
            ks_one_sample(acc, |x| t.eval_unchecked(x))
        }
    };
    let report = RunReport1D {
        windows: config.windows,
        points,
        interior_points: d_min.n,
        overflow_d_min: o_min,
        overflow_d_max: o_max,
        grid_warning: o_min >= OVERFLOW_WARNING || o_max >= OVERFLOW_WARNING,
        sup_distance_min: sup(&d_min, TheoryCdf::Min1d)?,
        sup_distance_max: sup(&d_max, TheoryCdf::Max1d)?,
    };
    Ok(Run1D {
        d_min,
        d_max,
        report,
        wall_time: start.elapsed(),
    })
}
