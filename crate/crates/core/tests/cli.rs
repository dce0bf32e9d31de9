//! The `pvx` command line: file contracts, exit codes and determinism.

use std::path::Path;
use std::process::Command;

use serde_json::Value;
use voronoi_extremes::cli::run;

const BIN: &str = env!("CARGO_BIN_EXE_pvx");

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn pvx(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = run(std::iter::once("pvx").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn checksums(dir: &Path) -> Vec<(String, String)> {
    let manifest = read_json(&dir.join("manifest.json"));
    manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| {
            (
                o["path"].as_str().unwrap().to_string(),
                o["sha256"].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

#[test]
fn simulate_2d_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, shards) in [(&a, "1"), (&b, "3")] {
        let args = [
            "simulate-2d",
            "--area",
            "2e4",
            "--windows",
            "3",
            "--seed",
            "42",
            "--shards",
            shards,
            "--out-dir",
            dir.to_str().unwrap(),
        ];
        assert_eq!(pvx(&args).0, 0);
    }
    let (ca, cb) = (checksums(&a), checksums(&b));
    assert_eq!(ca, cb);
    let names: Vec<&str> = ca.iter().map(|(p, _)| p.as_str()).collect();
    for want in [
        "r_min.csv",
        "r_max.csv",
        "r_bar.csv",
        "r_min.acc.json",
        "report.json",
    ] {
        assert!(names.contains(&want), "missing {want} in {names:?}");
    }
    let csv = std::fs::read_to_string(a.join("r_bar.csv")).unwrap();
    assert!(csv.starts_with("r,ecdf,theory\n") && !csv.contains('\r'));
    assert_eq!(csv.lines().count(), 4097);
}

#[test]
fn simulate_2d_json_report() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    let args = [
        "simulate-2d",
        "--area",
        "1e4",
        "--windows",
        "2",
        "--format",
        "json",
        "--out-dir",
        dir.to_str().unwrap(),
    ];
    assert_eq!(pvx(&args).0, 0);
    let report = read_json(&dir.join("report.json"));
    assert_eq!(report["command"], "simulate-2d");
    assert_eq!(report["config"]["windows"], 2);
    assert!(report["config"].get("shards").is_none());
    assert!(report["run"]["interior_cells"].as_u64().unwrap() > 0);
    assert!(report["r_bar_sup_distance"].as_f64().unwrap() < 0.05);
    let table = read_json(&dir.join("r_min.json"));
    assert_eq!(table["quantity"], "r_min");

    let (code, stdout) = pvx(&[
        "simulate-2d",
        "--area",
        "1e4",
        "--windows",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let value: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(value["config"]["area"], 1e4);
}

#[test]
fn simulate_1d_columns_and_summary() {
    let (code, stdout) = pvx(&["simulate-1d", "--length", "1e4"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("d,ecdf_min,theory_min,ecdf_max,theory_max\n"));
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("line");
    assert_eq!(
        pvx(&[
            "simulate-1d",
            "--length",
            "1e5",
            "--out-dir",
            dir.to_str().unwrap()
        ])
        .0,
        0
    );
    let report = read_json(&dir.join("report.json"));
    assert!(report["run"]["sup_distance_min"].as_f64().unwrap() < 0.02);
    assert!(dir.join("ecdf_1d.csv").exists() && dir.join("d_max.acc.json").exists());
}

#[test]
fn fit_on_bundled_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("fit");
    let input = fixture("r_min.acc.json");
    assert_eq!(
        pvx(&[
            "fit",
            "--input",
            &input,
            "--families",
            "gg",
            "--out-dir",
            dir.to_str().unwrap()
        ])
        .0,
        0
    );
    let report = read_json(&dir.join("fit_report.json"));
    let params = &report["fits"][0]["fit"]["params"];
    assert_eq!(params["family"], "generalized-gamma");
    for (key, want) in [("a", 2.176), ("b", 8.446), ("c", 4.005)] {
        let got = params[key].as_f64().unwrap();
        assert!(
            (got / want - 1.0).abs() <= 0.03,
            "{key} = {got}, reference {want}"
        );
    }
    let table = std::fs::read_to_string(dir.join("fit_params.csv")).unwrap();
    assert!(table.starts_with("family,parameter,estimate,ci_lower,ci_upper\n"));
}

#[test]
fn fit_single_family_and_ranking_table() {
    let input = fixture("r_max.acc.json");
    let (code, stdout) = pvx(&["fit", "--input", &input, "--families", "rayleigh"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 2, "{stdout}");
    assert!(stdout.lines().nth(1).unwrap().starts_with("1,rayleigh,"));
}

#[test]
fn fit_reads_raw_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("values.csv");
    let text: String = std::iter::once("id,value\n".to_string())
        .chain((1..=2000).map(|i| format!("{i},{}\n", 1.0 + (i % 17) as f64 / 10.0)))
        .collect();
    std::fs::write(&path, text).unwrap();
    let (code, stdout) = pvx(&[
        "fit",
        "--input",
        path.to_str().unwrap(),
        "--column",
        "value",
        "--families",
        "gamma,lognormal",
    ]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 3);
}

#[test]
fn usage_and_data_errors() {
    let input = fixture("r_min.acc.json");
    let out = Command::new(BIN)
        .args(["fit", "--input", &input, "--families", "gg,pareto"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    for tag in ["gg", "gamma", "lognormal", "rayleigh", "weibull"] {
        assert!(stderr.contains(tag), "{stderr}");
    }

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "1.0\n2.0\nbanana\n").unwrap();
    let out = Command::new(BIN)
        .args(["fit", "--input", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let broken = tmp.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"grid\": [1, 2\n").unwrap();
    let out = Command::new(BIN)
        .args(["fit", "--input", broken.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    assert_eq!(pvx(&["simulate-2d", "--windows", "x"]).0, 2);
    assert_eq!(pvx(&["simulate-2d", "--lambda", "-1"]).0, 2);
    assert_eq!(pvx(&["simulate-1d", "--unknown-flag"]).0, 2);
    assert_eq!(pvx(&["--version"]).0, 0);
}

#[test]
fn config_file_and_seed_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"area": 1e4, "windows": 1}"#).unwrap();
    let by_flag = Command::new(BIN)
        .args([
            "simulate-2d",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "5",
        ])
        .output()
        .unwrap();
    let by_env = Command::new(BIN)
        .args(["simulate-2d", "--config", cfg.to_str().unwrap()])
        .env("PVX_SEED", "5")
        .output()
        .unwrap();
    let other = Command::new(BIN)
        .args(["simulate-2d", "--config", cfg.to_str().unwrap()])
        .env("PVX_SEED", "6")
        .output()
        .unwrap();
    assert!(by_flag.status.success() && by_env.status.success());
    assert_eq!(by_flag.stdout, by_env.stdout);
    assert_ne!(by_flag.stdout, other.stdout);

    std::fs::write(&cfg, r#"{"area": 1e4, "colour": "red"}"#).unwrap();
    assert_eq!(
        pvx(&["simulate-2d", "--config", cfg.to_str().unwrap()]).0,
        2
    );
}

#[test]
fn theory_and_moments() {
    let (code, out) = pvx(&["theory", "--which", "vertex2d,min1d", "--grid", "0:1:5"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next().unwrap(), "x,vertex2d,min1d");
    assert_eq!(out.lines().nth(1).unwrap(), "0,0,0");

    let (code, out) = pvx(&[
        "moments", "--a", "2.176", "--b", "8.446", "--c", "4.005", "--orders", "1,2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "order,moment\n1,0.464228\n2,0.241945\n");
    let (_, out) = pvx(&[
        "moments", "--a", "1.719", "--b", "5.528", "--c", "9.482", "--orders", "1",
    ]);
    assert_eq!(out, "order,moment\n1,0.977084\n");
}

/// The full default-size run: about 1000 windows of area 1e5.
#[test]
#[ignore = "takes several minutes"]
fn thousand_windows_exceed_a_million_cells() {
    let (code, out) = pvx(&[
        "simulate-2d",
        "--windows",
        "1000",
        "--area",
        "1e5",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert!(report["run"]["interior_cells"].as_u64().unwrap() >= 1_000_000);
}
