//! Command-line front end: `simulate-2d`, `simulate-1d`, `fit`, `theory`
//! and `moments`.
//!
//! Data goes to `--out-dir` (or to standard output when it is absent);
//! progress and summaries go to standard error. Exit status: 0 success,
//! 2 usage, 3 data, 4 non-convergence, 5 geometry failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::distributions::{Family, GGParams, TheoryCdf, gg_moment, rescale_cdf};
use crate::empirics::{DEFAULT_BINS, EcdfAccumulator, ks_one_sample};
use crate::error::{Error, Result};
use crate::extremes::{
    CAP_1D, Caps2D, RunOptions2D, RunReport1D, RunReport2D, run_1d_experiment_with,
    run_2d_experiment_with, window_tessellation,
};
use crate::files::{
    CsvText, OutputDir, RunManifest, ecdf_1d_csv, ecdf_csv, ecdf_table, fit_params_csv,
    fit_table_csv, fmt_sig, read_accumulator, read_json, read_raw_column, records_csv,
    tessellation_csv, to_json, unix_ms, write_manifest,
};
use crate::fitting::{FitData, FitOptions, GOF_TAIL, RankedFit, rank_families_with};
use crate::rng_ppp::{SimConfig1D, SimConfig2D};

/// Seed used when neither `--seed`, `PVX_SEED` nor a config file gives one.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "pvx",
    version,
    about = "Extreme generator-to-vertex distances of Poisson-Voronoi cells"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate planar windows and accumulate r_min, r_max and vertex distances.
    #[command(name = "simulate-2d")]
    Simulate2d(Simulate2dArgs),
    /// Simulate line windows and accumulate the half-gap extremes.
    #[command(name = "simulate-1d")]
    Simulate1d(Simulate1dArgs),
    /// Fit distribution families to an accumulator or a raw column.
    Fit(FitArgs),
    /// Tabulate the closed-form reference CDFs.
    Theory(TheoryArgs),
    /// Raw moments of a Generalized Gamma distribution.
    Moments(MomentsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonSimArgs {
    /// JSON file with any of the simulation flags; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Intensity (points per unit area or length).
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub windows: Option<u64>,
    #[arg(long, env = "PVX_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub shards: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct Simulate2dArgs {
    #[command(flatten)]
    pub common: CommonSimArgs,
    /// Window area; the window is [0, sqrt(area)]^2.
    #[arg(long)]
    pub area: Option<f64>,
    /// Also write the tessellation of this window as CSV.
    #[arg(long)]
    pub dump_window: Option<u64>,
    /// Also write every (r_min, r_max) pair.
    #[arg(long)]
    pub raw_pairs: bool,
}

#[derive(Debug, Clone, Args)]
pub struct Simulate1dArgs {
    #[command(flatten)]
    pub common: CommonSimArgs,
    #[arg(long)]
    pub length: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// `*.json` accumulator from a simulate command, or a CSV/plain column of values.
    #[arg(long)]
    pub input: PathBuf,
    /// Column name for CSV input with a header.
    #[arg(long)]
    pub column: Option<String>,
    /// Comma-separated family tags: gg, gamma, lognormal, rayleigh, weibull.
    #[arg(long, default_value = "gg,gamma,lognormal,rayleigh,weibull")]
    pub families: String,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct TheoryArgs {
    /// Comma-separated names: edge1d, max1d, min1d, vertex2d.
    #[arg(long, default_value = "edge1d,max1d,min1d,vertex2d")]
    pub which: String,
    /// Evaluation grid as lo:hi:count.
    #[arg(long, default_value = "0:3:301")]
    pub grid: String,
    /// Express the CDFs in physical units for this intensity.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda: f64,
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub c: f64,
    /// Comma-separated moment orders.
    #[arg(long, default_value = "1,2")]
    pub orders: String,
}

/// Optional simulation settings read from `--config`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub lambda: Option<f64>,
    pub area: Option<f64>,
    pub length: Option<f64>,
    pub windows: Option<u64>,
    pub seed: Option<u64>,
    pub shards: Option<usize>,
    pub bins: Option<usize>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Errors are reported on standard error.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Simulate2d(a) => simulate_2d(&a, stdout),
        Command::Simulate1d(a) => simulate_1d(&a, stdout),
        Command::Fit(a) => fit(&a, stdout),
        Command::Theory(a) => theory(&a, stdout),
        Command::Moments(a) => moments(&a, stdout),
    }
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<()> {
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| Error::io("<stdout>", e))
}

fn load_config_file(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => read_json(p).map_err(|e| match e {
            Error::Data(m) => Error::Config(m),
            other => other,
        }),
        None => Ok(ConfigFile::default()),
    }
}

fn default_shards() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

struct Resolved {
    lambda: f64,
    windows: u64,
    seed: u64,
    shards: usize,
    bins: usize,
}

fn resolve_common(c: &CommonSimArgs, file: &ConfigFile, default_windows: u64) -> Resolved {
    Resolved {
        lambda: c.lambda.or(file.lambda).unwrap_or(1.0),
        windows: c.windows.or(file.windows).unwrap_or(default_windows),
        seed: c.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        shards: c.shards.or(file.shards).unwrap_or_else(default_shards),
        bins: c.bins.or(file.bins).unwrap_or(DEFAULT_BINS),
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub second: f64,
}

fn moments_of(acc: &EcdfAccumulator) -> Result<Option<Moments>> {
    if acc.is_empty() {
        return Ok(None);
    }
    let (mean, second) = acc.moments()?;
    Ok(Some(Moments { mean, second }))
}

/// Configuration echo kept in `report.json`: everything that determines
/// the data, so not the worker count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config2DEcho {
    pub lambda: f64,
    pub area: f64,
    pub windows: u64,
    pub seed: u64,
    pub bins: usize,
    pub caps: Caps2D,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report2D {
    pub command: String,
    pub config: Config2DEcho,
    pub run: RunReport2D,
    pub r_min: Option<Moments>,
    pub r_max: Option<Moments>,
    pub r_bar: Option<Moments>,
    /// Largest gap between the vertex-distance ECDF and its closed form.
    pub r_bar_sup_distance: Option<f64>,
}

fn simulate_2d(args: &Simulate2dArgs, stdout: &mut dyn Write) -> Result<()> {
    let file = load_config_file(args.common.config.as_deref())?;
    let r = resolve_common(&args.common, &file, 10);
    let config = SimConfig2D {
        lambda: r.lambda,
        area: args.area.or(file.area).unwrap_or(1e5),
        windows: r.windows,
        seed: r.seed,
        shards: r.shards,
    };
    config.validate()?;
    if r.bins == 0 {
        return Err(Error::Config("bins must be >= 1".into()));
    }
    if let Some(w) = args.dump_window
        && w >= config.windows
    {
        return Err(Error::Usage(format!(
            "--dump-window {w} is not below --windows {}",
            config.windows
        )));
    }
    let opts = RunOptions2D {
        caps: Caps2D::default(),
        bins: r.bins,
        keep_records: args.raw_pairs,
    };
    let started = unix_ms();
    let clock = Instant::now();
    eprintln!(
        "simulate-2d: {} windows, lambda={}, area={}, seed={}, {} workers",
        config.windows,
        fmt_sig(config.lambda),
        fmt_sig(config.area),
        config.seed,
        config.shards
    );
    let run = run_2d_experiment_with(&config, &opts)?;
    let r_bar_sup = if run.r_bar.is_empty() {
        None
    } else {
        Some(ks_one_sample(&run.r_bar, |x| {
            TheoryCdf::Vertex2d.eval_unchecked(x)
        })?)
    };
    let report = Report2D {
        command: "simulate-2d".into(),
        config: Config2DEcho {
            lambda: config.lambda,
            area: config.area,
            windows: config.windows,
            seed: config.seed,
            bins: r.bins,
            caps: opts.caps,
        },
        run: run.report.clone(),
        r_min: moments_of(&run.r_min)?,
        r_max: moments_of(&run.r_max)?,
        r_bar: moments_of(&run.r_bar)?,
        r_bar_sup_distance: r_bar_sup,
    };
    let rep = &run.report;
    eprintln!(
        "simulate-2d: {} interior of {} cells ({:.4}), mean vertex count {:.4}, vertex-distance sup gap {}, {:.1} s",
        rep.interior_cells,
        rep.total_cells,
        rep.interior_fraction,
        rep.mean_vertex_count,
        r_bar_sup.map_or("n/a".into(), fmt_sig),
        run.wall_time.as_secs_f64()
    );
    if rep.grid_warning {
        eprintln!(
            "warning: accumulator overflow above 1e-4; the grid caps are too small for this run"
        );
    }
    if !rep.empty_windows.is_empty() {
        eprintln!(
            "warning: {} windows produced no interior cell",
            rep.empty_windows.len()
        );
    }
    let series = [
        ("r_min", &run.r_min, None),
        ("r_max", &run.r_max, None),
        ("r_bar", &run.r_bar, Some(TheoryCdf::Vertex2d)),
    ];

    let Some(out_dir) = &args.common.out_dir else {
        return match args.common.format {
            Format::Json => emit(stdout, &to_json(&report)?),
            Format::Csv => {
                let mut csv = CsvText::new(&["quantity", "r", "ecdf"]);
                for (name, acc, _) in series {
                    if acc.is_empty() {
                        continue;
                    }
                    for (x, e) in acc.grid.points().zip(acc.ecdf_values()?) {
                        csv.row_str(&[name.to_string(), fmt_sig(x), fmt_sig(e)]);
                    }
                }
                emit(stdout, &csv.into_string())
            }
        };
    };
    let mut out = OutputDir::create(out_dir)?;
    for (name, acc, theory) in series {
        if !acc.is_empty() {
            match args.common.format {
                Format::Csv => out.write(&format!("{name}.csv"), &ecdf_csv(acc, "r", theory)?)?,
                Format::Json => {
                    out.write_json(&format!("{name}.json"), &ecdf_table(acc, name, theory)?)?
                }
            };
        }
        out.write_json(&format!("{name}.acc.json"), acc)?;
    }
    out.write_json("report.json", &report)?;
    if let Some(records) = &run.records {
        out.write("raw_pairs.csv", &records_csv(records))?;
    }
    if let Some(w) = args.dump_window {
        let (tri, cells) = window_tessellation(&config, w)?;
        for (name, text) in tessellation_csv(&tri, &cells) {
            out.write(&name, &text)?;
        }
    }
    let manifest = RunManifest {
        tool: "pvx".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "simulate-2d".into(),
        config: serde_json::to_value(&config).map_err(|e| Error::Data(e.to_string()))?,
        seed: Some(config.seed),
        shards: Some(config.shards),
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        wall_time_s: clock.elapsed().as_secs_f64(),
        outputs: Vec::new(),
    };
    let path = write_manifest(&out, manifest)?;
    eprintln!(
        "simulate-2d: wrote {} files and {}",
        out.files().len(),
        path.display()
    );
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config1DEcho {
    pub lambda: f64,
    pub length: f64,
    pub windows: u64,
    pub seed: u64,
    pub bins: usize,
    pub cap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report1D {
    pub command: String,
    pub config: Config1DEcho,
    pub run: RunReport1D,
    pub d_min: Option<Moments>,
    pub d_max: Option<Moments>,
}

fn simulate_1d(args: &Simulate1dArgs, stdout: &mut dyn Write) -> Result<()> {
    let file = load_config_file(args.common.config.as_deref())?;
    let r = resolve_common(&args.common, &file, 1);
    let config = SimConfig1D {
        lambda: r.lambda,
        length: args.length.or(file.length).unwrap_or(1e6),
        windows: r.windows,
        seed: r.seed,
        shards: r.shards,
    };
    config.validate()?;
    if r.bins == 0 {
        return Err(Error::Config("bins must be >= 1".into()));
    }
    let started = unix_ms();
    let clock = Instant::now();
    eprintln!(
        "simulate-1d: {} windows, lambda={}, length={}, seed={}, {} workers",
        config.windows,
        fmt_sig(config.lambda),
        fmt_sig(config.length),
        config.seed,
        config.shards
    );
    let run = run_1d_experiment_with(&config, CAP_1D, r.bins)?;
    if run.d_min.is_empty() {
        return Err(Error::EmptyData("no window had three or more points"));
    }
    eprintln!(
        "simulate-1d: {} interior points; sup|ecdf_min - theory_min| = {}, sup|ecdf_max - theory_max| = {}",
        run.report.interior_points,
        fmt_sig(run.report.sup_distance_min),
        fmt_sig(run.report.sup_distance_max)
    );
    if run.report.grid_warning {
        eprintln!("warning: accumulator overflow above 1e-4");
    }
    let report = Report1D {
        command: "simulate-1d".into(),
        config: Config1DEcho {
            lambda: config.lambda,
            length: config.length,
            windows: config.windows,
            seed: config.seed,
            bins: r.bins,
            cap: CAP_1D,
        },
        run: run.report.clone(),
        d_min: moments_of(&run.d_min)?,
        d_max: moments_of(&run.d_max)?,
    };
    let Some(out_dir) = &args.common.out_dir else {
        return match args.common.format {
            Format::Csv => emit(stdout, &ecdf_1d_csv(&run.d_min, &run.d_max)?),
            Format::Json => emit(stdout, &to_json(&report)?),
        };
    };
    let mut out = OutputDir::create(out_dir)?;
    match args.common.format {
        Format::Csv => out.write("ecdf_1d.csv", &ecdf_1d_csv(&run.d_min, &run.d_max)?)?,
        Format::Json => out.write_json(
            "ecdf_1d.json",
            &[
                ecdf_table(&run.d_min, "d_min", Some(TheoryCdf::Min1d))?,
                ecdf_table(&run.d_max, "d_max", Some(TheoryCdf::Max1d))?,
            ],
        )?,
    };
    out.write_json("d_min.acc.json", &run.d_min)?;
    out.write_json("d_max.acc.json", &run.d_max)?;
    out.write_json("report.json", &report)?;
    let manifest = RunManifest {
        tool: "pvx".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "simulate-1d".into(),
        config: serde_json::to_value(&config).map_err(|e| Error::Data(e.to_string()))?,
        seed: Some(config.seed),
        shards: Some(config.shards),
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        wall_time_s: clock.elapsed().as_secs_f64(),
        outputs: Vec::new(),
    };
    write_manifest(&out, manifest)?;
    Ok(())
}

pub fn parse_families(list: &str) -> Result<Vec<Family>> {
    let mut out: Vec<Family> = Vec::new();
    for tag in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let f: Family = tag.parse()?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    if out.is_empty() {
        return Err(Error::Usage(
            "--families needs at least one family tag".into(),
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub command: String,
    pub input: String,
    pub grouped: bool,
    pub n: u64,
    pub level: f64,
    /// GoF metrics use grid points whose ECDF lies in this band.
    pub gof_band: [f64; 2],
    pub fits: Vec<RankedFit>,
}

fn fit(args: &FitArgs, stdout: &mut dyn Write) -> Result<()> {
    let families = parse_families(&args.families)?;
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(Error::Usage(format!(
            "--level {} must lie in (0, 1)",
            args.level
        )));
    }
    let opts = FitOptions {
        level: args.level,
        ..FitOptions::default()
    };
    let is_json = args.input.extension().is_some_and(|e| e == "json");
    let acc;
    let raw;
    let data = if is_json {
        acc = read_accumulator(&args.input)?;
        FitData::Grouped(&acc)
    } else {
        raw = read_raw_column(&args.input, args.column.as_deref())?;
        FitData::Raw(&raw)
    };
    let n = match data {
        FitData::Grouped(a) => a.n,
        FitData::Raw(x) => x.len() as u64,
    };
    eprintln!(
        "fit: {} samples from {}, families {}",
        n,
        args.input.display(),
        args.families
    );
    let ranked = rank_families_with(data, &families, &opts)?;
    if families.len() == 1
        && let Some(msg) = &ranked[0].error
    {
        // a lone family keeps its error semantics (exit status)
        let prepared = crate::fitting::fit_mle_with(families[0], data, &opts);
        return Err(prepared.err().unwrap_or_else(|| Error::Data(msg.clone())));
    }
    for r in &ranked {
        match &r.fit {
            Some(f) => eprintln!(
                "fit: {:<18} rmse {}  max|diff| {}",
                r.family.display_name(),
                fmt_sig(f.rmse),
                fmt_sig(f.max_abs_variation)
            ),
            None => eprintln!(
                "fit: {:<18} failed: {}",
                r.family.display_name(),
                r.error.as_deref().unwrap_or("")
            ),
        }
    }
    let report = FitReport {
        command: "fit".into(),
        input: args.input.display().to_string(),
        grouped: is_json,
        n,
        level: args.level,
        gof_band: [GOF_TAIL, 1.0 - GOF_TAIL],
        fits: ranked,
    };
    let Some(out_dir) = &args.out_dir else {
        return match args.format {
            Format::Csv => emit(stdout, &fit_table_csv(&report.fits)),
            Format::Json => emit(stdout, &to_json(&report)?),
        };
    };
    let started = unix_ms();
    let mut out = OutputDir::create(out_dir)?;
    out.write_json("fit_report.json", &report)?;
    out.write("fit_table.csv", &fit_table_csv(&report.fits))?;
    out.write("fit_params.csv", &fit_params_csv(&report.fits))?;
    let manifest = RunManifest {
        tool: "pvx".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "fit".into(),
        config: serde_json::json!({
            "input": args.input.display().to_string(),
            "column": args.column,
            "families": args.families,
            "level": args.level,
        }),
        seed: None,
        shards: None,
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        wall_time_s: 0.0,
        outputs: Vec::new(),
    };
    write_manifest(&out, manifest)?;
    Ok(())
}

/// Parses `lo:hi:count` into evenly spaced points.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || {
        Error::Usage(format!(
            "--grid '{spec}' must look like lo:hi:count with 0 <= lo <= hi and count >= 1"
        ))
    };
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo >= 0.0) || !(hi >= lo) || !hi.is_finite() || count == 0 {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo + i as f64 * step
            }
        })
        .collect())
}

fn theory(args: &TheoryArgs, stdout: &mut dyn Write) -> Result<()> {
    let names: Vec<TheoryCdf> = args
        .which
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if names.is_empty() {
        return Err(Error::Usage("--which needs at least one name".into()));
    }
    let grid = parse_grid(&args.grid)?;
    let curves = names
        .iter()
        .map(|t| {
            let t = *t;
            rescale_cdf(move |x| t.eval_unchecked(x), args.lambda)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut header = vec!["x"];
    header.extend(names.iter().map(|t| t.name()));
    let mut csv = CsvText::new(&header);
    for &x in &grid {
        let mut row = vec![x];
        row.extend(curves.iter().map(|f| f(x)));
        csv.row(&row);
    }
    emit(stdout, &csv.into_string())
}

fn moments(args: &MomentsArgs, stdout: &mut dyn Write) -> Result<()> {
    let p = GGParams::new(args.a, args.b, args.c)?;
    let mut text = String::from("order,moment\n");
    for tok in args
        .orders
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
    {
        let m: f64 = tok
            .parse()
            .map_err(|_| Error::Usage(format!("--orders: '{tok}' is not a number")))?;
        text.push_str(&format!("{tok},{:.6}\n", gg_moment(m, p)?));
    }
    emit(stdout, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let code = run(std::iter::once("pvx").chain(args.iter().copied()), &mut out);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn moments_command() {
        let (code, out) = run_capture(&[
            "moments",
            "--a",
            "2",
            "--b",
            "3.141592653589793",
            "--c",
            "4",
            "--orders",
            "0,1",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out, "order,moment\n0,1.000000\n1,0.750000\n");
        let (code, _) = run_capture(&["moments", "--a", "-1", "--b", "1", "--c", "1"]);
        assert_eq!(code, 3);
    }

    #[test]
    fn theory_command() {
        let (code, out) = run_capture(&["theory", "--which", "vertex2d", "--grid", "0:1:3"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "x,vertex2d");
        assert_eq!(lines[1], "0,0");
        let (code, _) = run_capture(&["theory", "--which", "nope"]);
        assert_eq!(code, 2);
        let (code, _) = run_capture(&["theory", "--grid", "3:1:5"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_capture(&["simulate-2d", "--lambda", "abc"]).0, 2);
        assert_eq!(run_capture(&["simulate-2d", "--area", "10"]).0, 2);
        assert_eq!(run_capture(&["bogus"]).0, 2);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(
            parse_grid("0:1:5").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(parse_grid("2:2:1").unwrap(), vec![2.0]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("-1:1:3").is_err());
    }

    #[test]
    fn family_list_parsing() {
        assert_eq!(
            parse_families("gg, rayleigh,gg").unwrap(),
            vec![Family::GeneralizedGamma, Family::Rayleigh]
        );
        let err = parse_families("gg,pareto").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("weibull"));
    }
}
