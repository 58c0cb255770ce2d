use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nullflow::conformal_geometry::area;
use nullflow::exact_solutions::{ancient_profile, AncientKind};
use nullflow::flow_engine::roundness;
use nullflow::sphere_field::write_snapshot;
use nullflow::{ConformalFactor, SnapshotFormat, SphericalGrid};
use serde_json::Value;

fn nullflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nullflow")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}\nstderr: {}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("an error JSON line");
    serde_json::from_str(line).unwrap()
}

/// Rows of a CSV artifact as header → value maps, after the provenance line.
fn read_csv(path: &Path) -> (String, Vec<std::collections::HashMap<String, String>>) {
    let text = fs::read_to_string(path).unwrap();
    let (first, body) = text.split_once('\n').unwrap();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let headers = r.headers().unwrap().clone();
    let rows = r
        .records()
        .map(|rec| headers.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_owned(), v.to_owned())).collect())
        .collect();
    (first.to_owned(), rows)
}

fn num(row: &std::collections::HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

#[test]
fn stcmc_sphere_is_already_a_mots() {
    let dir = tempfile::tempdir().unwrap();
    let out = nullflow(&["simulate", "--initial", "stcmc:1", "--nlat", "16", "--t-end", "0.2", "--output-dir", "run"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("run/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["summary"]["outcome"]["kind"], "converges-to-mots");
    let c = &summary["certificates"];
    assert!(c["max_abs_h2_final"].as_f64().unwrap() < 1e-10);
    assert!(c["roundness_final"].as_f64().unwrap() < 1e-10);
    assert!((summary["summary"]["area_final"].as_f64().unwrap() - 4.0 * PI).abs() < 1e-10);
}

#[test]
fn random_data_at_two_pi_shrinks_on_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = nullflow(&["simulate", "--initial", "random:7", "--area", "2pi", "--nlat", "24", "--output-dir", "run"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["outcome"]["kind"], "shrinks-to-tip");
    let t_obs = report["outcome"]["t_max_observed"].as_f64().unwrap();
    let t_pred = 0.5 * 2f64.ln();
    assert!((t_obs - t_pred).abs() < 0.02 * t_pred, "T_max = {t_obs}");
}

#[test]
fn king_rosenau_stays_non_round() {
    let dir = tempfile::tempdir().unwrap();
    let out = nullflow(
        &["simulate", "--initial", "ancient:king-rosenau,2", "--nlat", "24", "--t-end", "2", "--output-dir", "run"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_ne!(stdout_json(&out)["outcome"]["kind"], "converges-to-mots");
    // As t → ∞ the shape tends to the King–Rosenau profile at Ricci gap t̂₀ − ½.
    let grid = SphericalGrid::new(24, 48).unwrap();
    let limit = ancient_profile(AncientKind::KingRosenau, -1.5, &grid).unwrap();
    let floor = 0.9 * area(&limit) * roundness(&limit);
    let (_, rows) = read_csv(&dir.path().join("run/timeseries.csv"));
    for r in &rows {
        let scale_free = num(r, "area") * num(r, "roundness");
        assert!(scale_free > floor, "A·(R_max − R_min) = {scale_free} at t = {}", r["t"]);
    }
}

#[test]
fn artifacts_carry_hash_and_version_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |o: &'static str| ["simulate", "--initial", "random:3", "--nlat", "16", "--t-end", "0.2", "--output-dir", o];
    assert!(nullflow(&args("a"), dir.path()).status.success());
    assert!(nullflow(&args("b"), dir.path()).status.success());
    let a = fs::read(dir.path().join("a/timeseries.csv")).unwrap();
    let b = fs::read(dir.path().join("b/timeseries.csv")).unwrap();
    assert_eq!(a, b);
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a/summary.json")).unwrap()).unwrap();
    let hash = summary["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert_eq!(summary["version"], env!("CARGO_PKG_VERSION"));
    let (first, _) = read_csv(&dir.path().join("a/timeseries.csv"));
    assert_eq!(first, format!("# nullflow {} config_sha256={hash}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "model": {"kind": "minkowski"},
        "grid": {"nlat": 16, "nlon": 32},
        "initial": {"kind": "constant", "b": 1.0},
        "flow": {"t_end": 0.3, "record_every": 1},
        "output_dir": "from-file"
    }"#;
    fs::write(dir.path().join("run.json"), cfg).unwrap();
    let out = nullflow(&["simulate", "--config", "run.json", "--t-end", "0.1", "--output-dir", "from-flag"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("from-file").exists());
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("from-flag/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["model"]["kind"], "minkowski");
    assert!((summary["summary"]["t_final"].as_f64().unwrap() - 0.1).abs() < 1e-12);
    // Minkowski: A(t) = A₀ − 8πt.
    let a = summary["summary"]["area_final"].as_f64().unwrap();
    assert!((a - (4.0 * PI - 0.8 * PI)).abs() < 1e-9, "{a}");
}

#[test]
fn snapshot_initial_data_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let grid = SphericalGrid::new(16, 32).unwrap();
    let omega = ConformalFactor::constant(&grid, 1.2).unwrap().omega();
    fs::create_dir(dir.path().join("cfg")).unwrap();
    write_snapshot(&omega, fs::File::create(dir.path().join("cfg/omega.txt")).unwrap(), SnapshotFormat::Text).unwrap();
    fs::write(
        dir.path().join("cfg/run.json"),
        r#"{"initial": {"kind": "snapshot", "path": "omega.txt"}, "flow": {"t_end": 0.05}}"#,
    )
    .unwrap();
    let out = nullflow(&["simulate", "--config", "cfg/run.json", "--output-dir", "run"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    let b = (1.0 + (0.1f64).exp() * (1.44 - 1.0)).sqrt();
    assert!((report["area_final"].as_f64().unwrap() - 4.0 * PI * b * b).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_two_with_json() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["verify", "no-such-suite"],
        vec!["simulate"],
        vec!["simulate", "--initial", "snapshot:missing.txt"],
        vec!["simulate", "--initial", "constant:1", "--nlat", "16", "--dt", "-1"],
        vec!["simulate", "--initial", "bogus:1"],
        vec!["sweep", "--initial", "constant:1"],
        vec!["frobnicate"],
    ] {
        let out = nullflow(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(stderr_json(&out)["error"]["kind"], "usage", "{args:?}");
    }
}

#[test]
fn verify_reports_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = nullflow(&["verify", "kruskal", "--output", "report.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let doc = stdout_json(&out);
    assert_eq!(doc["passed"], true);
    let checks = doc["reports"][0]["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"].as_str().unwrap().contains("degenerate")));
    assert!(checks.iter().all(|c| c["passed"] == true));
    let saved: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(saved, doc);
}

#[test]
fn sweep_trichotomy_and_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let out = nullflow(
        &[
            "sweep", "--initial", "random:7", "--nlat", "16", "--scheme", "imex", "--t-end", "10", "--areas",
            "2pi,4pi,8pi,2pi", "--output-dir", "sw", "--per-cell",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (first, rows) = read_csv(&dir.path().join("sw/sweep.csv"));
    assert!(first.starts_with("# nullflow "));
    let outcomes: Vec<&str> = rows.iter().map(|r| r["outcome"].as_str()).collect();
    assert_eq!(outcomes, ["shrinks-to-tip", "converges-to-mots", "expands-to-infinity", "shrinks-to-tip"]);
    let strip = |r: &std::collections::HashMap<String, String>| {
        let mut r = r.clone();
        r.remove("cell");
        let mut v: Vec<_> = r.into_iter().collect();
        v.sort();
        v
    };
    assert_eq!(strip(&rows[0]), strip(&rows[3]));
    for i in 0..4 {
        assert!(dir.path().join(format!("sw/cell-{i:03}/timeseries.csv")).exists());
    }
    let text1 = fs::read(dir.path().join("sw/sweep.csv")).unwrap();
    let again = nullflow(
        &[
            "sweep", "--initial", "random:7", "--nlat", "16", "--scheme", "imex", "--t-end", "10", "--areas",
            "2pi,4pi,8pi,2pi", "--output", "again.csv", "--threads", "1",
        ],
        dir.path(),
    );
    assert!(again.status.success());
    assert_eq!(text1, fs::read(dir.path().join("again.csv")).unwrap());
}

#[test]
fn sweep_anti_de_sitter_always_shrinks() {
    let dir = tempfile::tempdir().unwrap();
    let out = nullflow(
        &[
            "sweep", "--initial", "random:11", "--nlat", "16", "--model", "anti-de-sitter", "--t-end", "10", "--b0",
            "0.5,1,2,4", "--output", "ads.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_csv(&dir.path().join("ads.csv"));
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r["outcome"], "shrinks-to-tip");
        // AdS: T_max = ½ ln(1 + A₀/4π).
        let want = 0.5 * (1.0 + num(r, "area0") / (4.0 * PI)).ln();
        assert!((num(r, "t_max_observed") - want).abs() < 0.02 * want);
    }
}

#[test]
fn sweep_isolates_failing_cells() {
    let dir = tempfile::tempdir().unwrap();
    // A vanishing area falls below the stop floor and fails on its own.
    let out = nullflow(
        &["sweep", "--initial", "constant:1", "--nlat", "16", "--t-end", "0.1", "--areas", "4pi,1e-9", "--output", "t.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let (_, rows) = read_csv(&dir.path().join("t.csv"));
    assert_eq!(rows[0]["outcome"], "converges-to-mots");
    assert_eq!(rows[0]["error"], "");
    assert_eq!(rows[1]["outcome"], "error");
    assert!(!rows[1]["error"].is_empty());
}

#[test]
fn exact_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let out = nullflow(&["exact", "sphere", "--b0", "2", "--t-end", "0.5", "--samples", "6", "--output", "s.csv"], dir.path());
    assert!(out.status.success());
    let (first, rows) = read_csv(&dir.path().join("s.csv"));
    assert!(first.contains("config_sha256="));
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let t = num(r, "t");
        assert!((num(r, "b") - (1.0 + 3.0 * (2.0 * t).exp()).sqrt()).abs() < 1e-13);
    }

    let out = nullflow(&["exact", "stcmc", "--b", "1", "--a", "0,0,0.75", "--samples", "3"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    // At the south pole x·a = −0.75: ω = 1/(1.25 + 0.75).
    assert!((last[1] - 0.5).abs() < 1e-15);

    let out = nullflow(&["exact", "ancient", "--solution", "shrinking-sphere", "--t-hat-offset", "1", "--samples", "2"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // Area 8π(½ + (t̂₀ − ½)e^{2t}) = 8π at t = 0, so ω = √2.
    for line in text.lines().skip(2) {
        let omega: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((omega - 2f64.sqrt()).abs() < 1e-15);
    }
}

#[test]
fn kruskal_export_and_degenerate_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let out = nullflow(&["kruskal", "--samples", "11", "--output", "ds.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert!(summary["ode_residual"].as_f64().unwrap() < 1e-9);
    let (_, rows) = read_csv(&dir.path().join("ds.csv"));
    assert_eq!(rows.len(), 11);
    for r in &rows {
        let x = num(r, "r");
        assert!((num(r, "f") - 2.0 * (x - 1.0) / (x + 1.0)).abs() < 1e-9, "r = {x}");
    }

    let out = nullflow(&["kruskal", "--profile", "laurent", "--terms", "0:1,1:-2,2:1", "--bracket", "0.5,2", "--list"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_json(&out)["error"]["message"].as_str().unwrap().contains("degenerate"));

    let out = nullflow(&["kruskal", "--profile", "reissner-nordstrom", "--horizon", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shipped_configs_run() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(&configs).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let dir = tempfile::tempdir().unwrap();
        let out = nullflow(
            &["simulate", "--config", path.to_str().unwrap(), "--t-end", "0.01", "--output-dir", "run"],
            dir.path(),
        );
        assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
        n += 1;
    }
    assert!(n >= 3);
}
