use std::path::Path;
use std::process::{Command, Output};

use tomokit::fock::DensityJson;
use tomokit::formats::{PhaseGrid, Table};
use tomokit::photon_number::PhotonTomogram;
use tomokit::symplectic::SymplecticTomogram;

fn tomokit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tomokit"))
        .args(args)
        .current_dir(dir)
        .env_remove("TOMOKIT_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_table(path: &Path) -> Table {
    Table::from_csv_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn symplectic_vacuum_tomogram() {
    let dir = tempfile::tempdir().unwrap();
    let o = tomokit(
        dir.path(),
        &["tomogram", "--scheme", "symplectic", "--state", "vacuum", "--angles", "64", "--xrange", "-6:6:241", "--out", "t.csv"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_table(&dir.path().join("t.csv"));
    assert_eq!(t.columns, ["X", "mu", "nu", "w"]);
    assert_eq!(t.rows.len(), 64 * 241);
    let worst = t
        .rows
        .iter()
        .map(|r| (r[3] - (-r[0] * r[0]).exp() / std::f64::consts::PI.sqrt()).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst}");
    // parses back into the same samples
    let tomo = SymplecticTomogram::from_table(&t).unwrap();
    assert_eq!(tomo.slices.len(), 64);
    let meta = json(&dir.path().join("t.meta.json"));
    assert_eq!(meta["source"]["state"], "vacuum");
    assert!(meta["truncation"]["leakage"].is_number());
}

#[test]
fn photon_tomogram_columns_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = tomokit(
        dir.path(),
        &["tomogram", "--scheme", "photon", "--state", "thermal:0.5", "--nmax", "20", "--alpha-grid", "21", "--out", "p.csv"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_table(&dir.path().join("p.csv"));
    assert_eq!(t.columns, ["n", "re_alpha", "im_alpha", "omega"]);
    assert_eq!(t.rows.len(), 21 * 21 * 21);
    let tomo = PhotonTomogram::from_table(&t).unwrap();
    assert_eq!(tomo.n_max, 20);
    let again = tomo.to_table().to_csv_string().unwrap();
    assert_eq!(again, std::fs::read_to_string(dir.path().join("p.csv")).unwrap());
}

#[test]
fn photon_reconstruction_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = tomokit(dir.path(), &["tomogram", "--scheme", "photon", "--state", "vacuum", "--out", "v.csv"]);
    assert_eq!(code(&o), 0);
    let o = tomokit(dir.path(), &["reconstruct", "--input", "v.csv", "--out", "rho.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&dir.path().join("rho.report.json"));
    assert!(report["fidelity"].as_f64().unwrap() >= 0.99, "{report}");
    let rho: DensityJson = serde_json::from_value(json(&dir.path().join("rho.json"))).unwrap();
    assert_eq!(rho.dim, 24);
    rho.into_operator().unwrap();
}

#[test]
fn photon_reconstruction_divergence_is_a_contract_violation() {
    let dir = tempfile::tempdir().unwrap();
    let o = tomokit(dir.path(), &["tomogram", "--scheme", "photon", "--state", "vacuum", "--out", "v.csv"]);
    assert_eq!(code(&o), 0);
    let o = tomokit(dir.path(), &["reconstruct", "--input", "v.csv", "--s", "0.5"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverges"));
}

#[test]
fn symplectic_reconstruction_error_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = tomokit(
        dir.path(),
        &["tomogram", "--scheme", "symplectic", "--state", "vacuum", "--angles", "180", "--xrange", "-8:8:256", "--out", "s.csv"],
    );
    assert_eq!(code(&o), 0);
    let o = tomokit(dir.path(), &["reconstruct", "--input", "s.csv", "--grid", "-8:8:256", "--out", "w.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&dir.path().join("w.report.json"));
    assert!(report["max_abs_error"].as_f64().unwrap() <= 1e-3, "{report}");
    let header = std::fs::read_to_string(dir.path().join("w.header.json")).unwrap();
    let payload = std::fs::read_to_string(dir.path().join("w.csv")).unwrap();
    let grid = PhaseGrid::from_parts(&header, &payload).unwrap();
    assert_eq!(grid.values.len(), 256 * 256);
}

#[test]
fn missing_column_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "n,re_alpha,omega\n0,0,1\n").unwrap();
    let o = tomokit(dir.path(), &["reconstruct", "--input", "bad.csv"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("im_alpha"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = tomokit(dir.path(), &["tomogram", "--scheme", "photon", "--state", "thermal:-1"]);
    assert_eq!(code(&o), 2);
    let o = tomokit(dir.path(), &["tomogram", "--scheme", "other", "--state", "vacuum"]);
    assert_eq!(code(&o), 2);
    let o = tomokit(dir.path(), &["tomogram", "--state", "vacuum"]);
    assert_eq!(code(&o), 2);
    let o = tomokit(dir.path(), &["verify", "nonsense"]);
    assert_eq!(code(&o), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_tomokit"))
        .args(["tomogram", "--scheme", "symplectic", "--state", "vacuum"])
        .current_dir(dir.path())
        .env("TOMOKIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn narrow_x_range_is_a_contract_violation() {
    let dir = tempfile::tempdir().unwrap();
    let o = tomokit(dir.path(), &["tomogram", "--scheme", "symplectic", "--state", "vacuum", "--xrange", "-1:1:41"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("job.json"),
        r#"{"scheme": "symplectic", "state": "coherent:0.5", "angles": 4, "xrange": "-7:7:71", "out": "a.csv"}"#,
    )
    .unwrap();
    let o = tomokit(dir.path(), &["--config", "job.json", "tomogram", "--angles", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_table(&dir.path().join("a.csv")).rows.len(), 3 * 71);
    std::fs::write(dir.path().join("typo.json"), r#"{"angels": 4}"#).unwrap();
    let o = tomokit(dir.path(), &["--config", "typo.json", "tomogram", "--scheme", "symplectic", "--state", "vacuum"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("angels"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["tomogram", "--scheme", "photon", "--state", "coherent:0.4,0.2", "--nmax", "10", "--alpha-grid", "9", "--out"];
    let mut a = args.to_vec();
    a.push("x.csv");
    let mut b = args.to_vec();
    b.push("y.csv");
    assert_eq!(code(&tomokit(dir.path(), &a)), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_tomokit"))
        .args(&b)
        .current_dir(dir.path())
        .env("TOMOKIT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(dir.path().join("x.csv")).unwrap(), std::fs::read(dir.path().join("y.csv")).unwrap());
}

#[test]
fn gaussian_input_uses_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("g.json"),
        r#"{"mean_q": 0.0, "mean_p": 0.0, "sigma_qq": 1.0, "sigma_pp": 1.0, "sigma_pq": 0.0}"#,
    )
    .unwrap();
    let o = tomokit(
        dir.path(),
        &["tomogram", "--scheme", "photon", "--gaussian", "g.json", "--nmax", "5", "--alpha-grid", "3", "--alpha-radius", "1"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let tomo = PhotonTomogram::from_table(&read_table(&dir.path().join("tomogram.csv"))).unwrap();
    // thermal nbar = 0.5 at alpha = 0
    assert!((tomo.get(1, 1, 0) - 2.0 / 3.0).abs() < 1e-14);
}

#[test]
fn wigner_grid_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = tomokit(dir.path(), &["wigner", "--state", "fock:1", "--qrange", "-4:4:41", "--prange", "-4:4:41"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let header = std::fs::read_to_string(dir.path().join("wigner.header.json")).unwrap();
    let payload = std::fs::read_to_string(dir.path().join("wigner.csv")).unwrap();
    let grid = PhaseGrid::from_parts(&header, &payload).unwrap();
    assert!((grid.get(20, 20) + 2.0).abs() < 1e-12);
    assert_eq!(grid.payload_csv(), payload);
}

#[test]
fn verify_kernels_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = tomokit(dir.path(), &["verify", "kernels", "--seed", "3", "--out", "r.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = json(&dir.path().join("r.json"));
    assert_eq!(r["passed"], true);
    assert_eq!(r["seed"], 3);
}

#[test]
fn verify_homogeneity_reports_each_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let o = tomokit(dir.path(), &["verify", "homogeneity"]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    for l in ["lambda=-2", "lambda=0.5", "lambda=3"] {
        assert!(stdout.contains(l), "{l}");
    }
}
