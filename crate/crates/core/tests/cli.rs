use std::path::Path;
use std::process::{Command, Output};

use qlock::cli::parse_json;
use qlock::specalg::Constants;

fn qlock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlock"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn fig3_preset_matches_golden_csv() {
    let out = qlock(&["--preset", "fig3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let golden = std::fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/fig3.csv")).unwrap();
    assert!(out.stdout == golden, "fig3 output drifted from tests/data/fig3.csv");
}

#[test]
fn minimal_config_three_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[grid]\nmin = 0.5\nmax = 2.0\npoints = 3\n\n[scenario.free]\nid = \"free\"\nxi_a = 1.0\n",
    );
    let out = qlock(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "omega,free,free_a0,free_a90");
    // xi_a = 1 still gives the normalized free curve
    let row: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], 1.0);
    assert!((row[1] - 1.0).abs() < 1e-11);
}

#[test]
fn missing_sensor_coupling_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[scenario.lock]\nid = \"cavity-locking\"\n");
    let out = qlock(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("xi_b") && err.contains("lock"), "{err}");
}

#[test]
fn unknown_key_and_empty_run_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[scenario.a]\nid = \"free\"\ngain_db = 3\n");
    let out = qlock(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gain_db"));

    let cfg = write_config(dir.path(), "[grid]\npoints = 10\n");
    let out = qlock(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no scenarios"));

    let out = qlock(&["--scenario", "free", "--grid", "2:1:5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = qlock(&["--scenario", "free", "--grid", "1:2:2", "--out", "/nonexistent-dir/out.csv"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn si_optics_config_sets_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
units = "si"
format = "json"

[grid]
min = 10.0
max = 1000.0
points = 5

[scenario.virgo]
id = "free"
wavelength = 1.064e-6
finesse_a = 600.0
power_a = 15e3
mass = 20.0
"#,
    );
    let out = qlock(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = parse_json(&stdout(&out)).unwrap();
    let b = &doc.budgets[0];

    // xi = (4 pi / lambda) alpha sqrt(2F/pi), |alpha|^2 = P / (hbar omega_L)
    let c = Constants::SI;
    let pi = std::f64::consts::PI;
    let photon = c.hbar * 2.0 * pi * c.c / 1.064e-6;
    let xi = 4.0 * pi / 1.064e-6 * (15e3 / photon).sqrt() * (1200.0 / pi).sqrt();
    assert!((b.meta.xi_a - xi).abs() < 1e-12 * xi);
    let w = b.omega[2];
    let want = 1.0 / (4.0 * xi * xi) + c.hbar * c.hbar * xi * xi / (w.powi(4) * 400.0);
    assert!((b.total[2] - want).abs() < 1e-10 * want);
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["--preset", "fig3", "--grid", "0.2:5:37:log"];
    let a = qlock(&args);
    let b = qlock(&args);
    assert_eq!(a.status.code(), Some(0));
    assert!(a.stdout == b.stdout);
}

#[test]
fn json_round_trip_preserves_totals() {
    let out = qlock(&["--preset", "fig3", "--grid", "0.1:10:25:log", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let doc = parse_json(&text).unwrap();
    assert!(doc.generator.starts_with("qlock "));
    assert_eq!(doc.budgets.len(), 7);
    let again = qlock::cli::emit_json(&doc.budgets).unwrap();
    let doc2 = parse_json(&again).unwrap();
    for (x, y) in doc.budgets.iter().zip(&doc2.budgets) {
        for (s, t) in x.total.iter().zip(&y.total) {
            assert!((s - t).abs() <= 1e-12 * s.abs());
        }
    }
    let d = doc.budgets.iter().find(|b| b.name == "d").unwrap();
    assert_eq!(d.gain.as_ref().map(Vec::len), Some(25));
}

#[test]
fn normalized_output_is_scaled_si_output() {
    let (xi_a, mass) = (3.0e8f64, 0.5);
    let sql = (2.0 * Constants::SI.hbar * xi_a * xi_a / mass).sqrt();
    let dir = tempfile::tempdir().unwrap();
    let section = format!(
        "[scenario.lock]\nid = \"locking\"\nxi_a = {xi_a:e}\nxi_b = {:e}\nmass = {mass}\n",
        xi_a / 3.0
    );
    let si_cfg = dir.path().join("si.toml");
    std::fs::write(
        &si_cfg,
        format!(
            "units = \"si\"\nformat = \"json\"\n[grid]\nmin = {:e}\nmax = {:e}\npoints = 9\n{section}",
            0.1 * sql,
            10.0 * sql
        ),
    )
    .unwrap();
    let norm_cfg = dir.path().join("norm.toml");
    std::fs::write(&norm_cfg, format!("format = \"json\"\n[grid]\npoints = 9\n{section}")).unwrap();

    let si = qlock(&["--config", si_cfg.to_str().unwrap()]);
    let norm = qlock(&["--config", norm_cfg.to_str().unwrap()]);
    assert_eq!(si.status.code(), Some(0), "{}", stderr(&si));
    assert_eq!(norm.status.code(), Some(0), "{}", stderr(&norm));
    let si = parse_json(&stdout(&si)).unwrap().budgets.remove(0);
    let norm = parse_json(&stdout(&norm)).unwrap().budgets.remove(0);

    // normalized ħ = 1 changes the couplings' SQL frequency but not the shape
    let scale = 2.0 * xi_a * xi_a;
    for i in 0..9 {
        assert!((si.omega[i] / sql - norm.omega[i]).abs() <= 1e-10 * norm.omega[i]);
        assert!((si.total[i] * scale - norm.total[i]).abs() <= 1e-10 * norm.total[i]);
    }
}

#[test]
fn loss_sweep_on_backaction_cancellation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[grid]
points = 50

[scenario.lossless]
id = "backaction-cancel"
xi_b = 0.7071067811865476
loss = 0.0

[scenario.lossy]
id = "backaction-cancel"
xi_b = 0.7071067811865476
loss = 0.01
"#,
    );
    let out = qlock(&["--config", &cfg, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = parse_json(&stdout(&out)).unwrap();
    assert_eq!(doc.budgets.len(), 2);
    assert!(doc.budgets[0].total.iter().all(|s| (s - 1.0).abs() < 1e-9));
    assert!(doc.budgets[1].total.iter().zip(&doc.budgets[0].total).all(|(l, z)| l > z));
}

#[test]
fn verify_runs_grid_oracle() {
    let out = qlock(&["--scenario", "locking", "--xi-b", "0.1414", "--gain", "optimized", "--grid", "0.3:3:3:log", "--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let err = stderr(&out);
    assert_eq!(err.lines().filter(|l| l.starts_with("verify locking")).count(), 3, "{err}");
}

#[test]
fn version_and_flag_errors() {
    let out = qlock(&["--version"]);
    assert_eq!(stdout(&out).trim(), format!("qlock {}", env!("CARGO_PKG_VERSION")));
    for bad in [
        vec!["--scenario", "nope"],
        vec!["--scenario", "locking", "--gain", "huge"],
        vec!["--scenario", "free", "--angle", "fixed=0"],
        vec!["--scenario", "free", "--units", "cgs"],
        vec!["--preset", "fig4"],
        vec!["--scenario", "cavity-locking", "--gain", "infinite"],
    ] {
        let out = qlock(&bad);
        assert_eq!(out.status.code(), Some(2), "{bad:?}: {}", stderr(&out));
    }
}
