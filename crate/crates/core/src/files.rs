//! Output and input file formats.
//!
//! CSV: comma separated, header row, LF line endings, numbers with 9
//! significant digits. JSON: UTF-8, keys in declaration order, pretty
//! printed with a trailing newline. Every emitted file is listed with its
//! SHA-256 in a run manifest; timestamps and wall times live only there.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::distributions::TheoryCdf;
use crate::empirics::EcdfAccumulator;
use crate::error::{Error, Result};
use crate::extremes::ExtremesRecord;
use crate::fitting::RankedFit;
use crate::geometry::{Triangulation, VoronoiCell};

/// Formats `x` with 9 significant digits in the shortest of fixed or
/// exponent notation, like C's `%.9g`.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa.to_string()),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Builds CSV text row by row.
#[derive(Debug, Clone, Default)]
pub struct CsvText(String);

impl CsvText {
    pub fn new(header: &[&str]) -> Self {
        let mut t = CsvText(String::new());
        t.row_str(header);
        t
    }

    pub fn row_str<S: AsRef<str>>(&mut self, fields: &[S]) {
        let line: Vec<&str> = fields.iter().map(|s| s.as_ref()).collect();
        self.0.push_str(&line.join(","));
        self.0.push('\n');
    }

    pub fn row(&mut self, values: &[f64]) {
        let fields: Vec<String> = values.iter().map(|&v| fmt_sig(v)).collect();
        self.row_str(&fields);
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Data(format!("JSON encoding failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// `(grid point, ECDF)` rows, with a closed-form column when `theory` is given.
pub fn ecdf_csv(acc: &EcdfAccumulator, label: &str, theory: Option<TheoryCdf>) -> Result<String> {
    let ecdf = acc.ecdf_values()?;
    let mut header = vec![label, "ecdf"];
    if theory.is_some() {
        header.push("theory");
    }
    let mut csv = CsvText::new(&header);
    for (x, e) in acc.grid.points().zip(ecdf) {
        match theory {
            Some(t) => csv.row(&[x, e, t.eval_unchecked(x)]),
            None => csv.row(&[x, e]),
        }
    }
    Ok(csv.into_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfTable {
    pub quantity: String,
    pub n: u64,
    pub grid: Vec<f64>,
    pub ecdf: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theory: Option<Vec<f64>>,
}

pub fn ecdf_table(
    acc: &EcdfAccumulator,
    quantity: &str,
    theory: Option<TheoryCdf>,
) -> Result<EcdfTable> {
    let grid: Vec<f64> = acc.grid.points().collect();
    Ok(EcdfTable {
        quantity: quantity.into(),
        n: acc.n,
        theory: theory.map(|t| grid.iter().map(|&x| t.eval_unchecked(x)).collect()),
        ecdf: acc.ecdf_values()?,
        grid,
    })
}

/// Both 1D ECDFs on their shared grid next to the closed forms.
pub fn ecdf_1d_csv(d_min: &EcdfAccumulator, d_max: &EcdfAccumulator) -> Result<String> {
    if d_min.grid != d_max.grid {
        return Err(Error::Config("1D accumulators must share a grid".into()));
    }
    let (emin, emax) = (d_min.ecdf_values()?, d_max.ecdf_values()?);
    let mut csv = CsvText::new(&["d", "ecdf_min", "theory_min", "ecdf_max", "theory_max"]);
    for (k, x) in d_min.grid.points().enumerate() {
        csv.row(&[
            x,
            emin[k],
            TheoryCdf::Min1d.eval_unchecked(x),
            emax[k],
            TheoryCdf::Max1d.eval_unchecked(x),
        ]);
    }
    Ok(csv.into_string())
}

pub fn records_csv(records: &[ExtremesRecord]) -> String {
    let mut csv = CsvText::new(&["r_min_norm", "r_max_norm"]);
    for r in records {
        csv.row(&[r.r_min_norm, r.r_max_norm]);
    }
    csv.into_string()
}

/// Points, triangles and cell vertex lists of one tessellation, in long
/// format for external plotting.
pub fn tessellation_csv(tri: &Triangulation, cells: &[VoronoiCell]) -> [(String, String); 3] {
    let mut pts = CsvText::new(&["index", "x", "y", "hull"]);
    for (i, p) in tri.points.points.iter().enumerate() {
        pts.row_str(&[
            i.to_string(),
            fmt_sig(p.x),
            fmt_sig(p.y),
            u8::from(tri.hull[i]).to_string(),
        ]);
    }
    let mut tris = CsvText::new(&["index", "a", "b", "c"]);
    for (i, t) in tri.triangles.iter().enumerate() {
        tris.row_str(&[
            i.to_string(),
            t[0].to_string(),
            t[1].to_string(),
            t[2].to_string(),
        ]);
    }
    let mut cs = CsvText::new(&["generator", "interior", "order", "x", "y"]);
    for c in cells {
        for (k, v) in c.vertices.iter().enumerate() {
            cs.row_str(&[
                c.generator.to_string(),
                u8::from(c.interior).to_string(),
                k.to_string(),
                fmt_sig(v.x),
                fmt_sig(v.y),
            ]);
        }
    }
    [
        ("tess_points.csv".into(), pts.into_string()),
        ("tess_triangles.csv".into(), tris.into_string()),
        ("tess_cells.csv".into(), cs.into_string()),
    ]
}

/// Ranking table, one row per family sorted as given.
pub fn fit_table_csv(ranked: &[RankedFit]) -> String {
    let mut csv = CsvText::new(&[
        "rank",
        "family",
        "rmse",
        "max_abs_variation",
        "log_likelihood",
        "aic",
        "bic",
        "n",
        "converged",
        "parameters",
        "error",
    ]);
    for (i, r) in ranked.iter().enumerate() {
        let mut row = vec![(i + 1).to_string(), r.family.tag().to_string()];
        match &r.fit {
            Some(f) => {
                let params: Vec<String> = r
                    .family
                    .param_names()
                    .iter()
                    .zip(f.params.values())
                    .map(|(n, v)| format!("{n}={}", fmt_sig(v)))
                    .collect();
                row.extend([
                    fmt_sig(f.rmse),
                    fmt_sig(f.max_abs_variation),
                    fmt_sig(f.log_likelihood),
                    fmt_sig(f.aic),
                    fmt_sig(f.bic),
                    f.n.to_string(),
                    f.converged.to_string(),
                    params.join(";"),
                    String::new(),
                ]);
            }
            None => {
                row.extend(std::iter::repeat_n(String::new(), 8));
                row.push(
                    r.error
                        .clone()
                        .unwrap_or_default()
                        .replace([',', '\n'], " "),
                );
            }
        }
        csv.row_str(&row);
    }
    csv.into_string()
}

/// Parameter estimates with interval bounds, one row per parameter.
pub fn fit_params_csv(ranked: &[RankedFit]) -> String {
    let mut csv = CsvText::new(&["family", "parameter", "estimate", "ci_lower", "ci_upper"]);
    for r in ranked {
        let Some(f) = &r.fit else { continue };
        for (k, (name, v)) in r
            .family
            .param_names()
            .iter()
            .zip(f.params.values())
            .enumerate()
        {
            let (lo, hi) = match &f.ci {
                Some(ci) => (fmt_sig(ci[k].lower), fmt_sig(ci[k].upper)),
                None => (String::new(), String::new()),
            };
            csv.row_str(&[
                r.family.tag().to_string(),
                name.to_string(),
                fmt_sig(v),
                lo,
                hi,
            ]);
        }
    }
    csv.into_string()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Writes files under one directory and remembers their checksums.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(OutputDir {
            root,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.written.push(OutputFile {
            path: name.into(),
            bytes: contents.len() as u64,
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        self.write(name, &to_json(value)?)
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.written
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Full configuration echo, including worker count.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub shards: Option<usize>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputFile>,
}

pub fn unix_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Writes `manifest.json` listing every file written so far.
pub fn write_manifest(dir: &OutputDir, mut manifest: RunManifest) -> Result<PathBuf> {
    manifest.outputs = dir.files().to_vec();
    let path = dir.root.join("manifest.json");
    fs::write(&path, to_json(&manifest)?).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Data(format!(
            "{}: line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

pub fn read_accumulator(path: &Path) -> Result<EcdfAccumulator> {
    let acc: EcdfAccumulator = read_json(path)?;
    let total: u64 = acc.counts.iter().sum::<u64>() + acc.overflow;
    if acc.counts.len() != acc.grid.bins || total != acc.n {
        return Err(Error::Data(format!(
            "{}: inconsistent accumulator ({} bins for a {}-bin grid, counts sum {total} vs n = {})",
            path.display(),
            acc.counts.len(),
            acc.grid.bins,
            acc.n
        )));
    }
    Ok(acc)
}

/// Reads one numeric column of a CSV or plain list. A non-numeric first
/// row is taken as a header; `column` selects by header name, otherwise the
/// first column is used.
pub fn read_raw_column(path: &Path, column: Option<&str>) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut idx = 0usize;
    let mut values = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(row as u64 + 1, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if row == 0 && rec.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            if let Some(name) = column {
                idx = rec.iter().position(|h| h == name).ok_or_else(|| {
                    Error::Data(format!(
                        "{}: no column named '{name}' in header",
                        path.display()
                    ))
                })?;
            }
            continue;
        }
        let field = rec.get(idx).ok_or_else(|| {
            Error::Data(format!(
                "{}: line {line}: missing column {}",
                path.display(),
                idx + 1
            ))
        })?;
        let v: f64 = field.parse().map_err(|_| {
            Error::Data(format!(
                "{}: line {line}: '{field}' is not a number",
                path.display()
            ))
        })?;
        values.push(v);
    }
    if column.is_some() && values.is_empty() {
        return Err(Error::Data(format!("{}: no values found", path.display())));
    }
    Ok(values)
}

/// Renders `name=value` pairs for log lines.
pub fn describe(pairs: &[(&str, f64)]) -> String {
    let mut s = String::new();
    for (i, (k, v)) in pairs.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{k}={}", fmt_sig(*v));
    }
    s
}
