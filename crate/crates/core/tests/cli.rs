use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nvmem::dissipation::{analytic_populations, RateParams};

fn nvmem(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nvmem"))
        .args(args)
        .current_dir(dir)
        .env("NVMEM_THREADS", "2")
        .output()
        .expect("spawn nvmem")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn columns(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let row: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        cols.resize(row.len(), Vec::new());
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
    }
    cols
}

fn sequences() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("sequences")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

#[test]
fn run_rabi_prints_headline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("defaults.toml");
    let o = nvmem(dir.path(), &["run", "rabi", "-c", cfg.to_str().unwrap(), "-o", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    let (key, value) = line.trim().split_once(": ").unwrap();
    assert_eq!(key, "rabi_frequency_hz");
    let f: f64 = value.parse().unwrap();
    assert!((f / 4.3e6 - 1.0).abs() < 0.02, "{f}");
    assert!(dir.path().join("out/rabi.csv").exists());
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/rabi.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["experiment"], "rabi");
    assert_eq!(meta["params_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn unknown_experiment_lists_names() {
    let dir = tempfile::tempdir().unwrap();
    let o = nvmem(dir.path(), &["run", "teleport"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("teleport") && e.contains("init-tomography") && e.contains("extended-dd"), "{e}");
}

#[test]
fn init_tomography_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = nvmem(dir.path(), &["run", "init-tomography", "-o", "."]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = RateParams::reference();
    let total = columns(&dir.path().join("init-tomography_total.csv"));
    let up = columns(&dir.path().join("init-tomography_up.csv"));
    assert!(total[0].len() > 10);
    for i in 0..total[0].len() {
        let p = analytic_populations(&r, total[0][i]).unwrap();
        assert!((total[1][i] - p.bright()).abs() < 1e-6);
        assert!((up[1][i] - p.0[0]).abs() < 1e-6);
    }
}

#[test]
fn config_errors_have_location() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[register]\nt1_e = \"3.3 parsecs\"\n").unwrap();
    let o = nvmem(dir.path(), &["run", "rabi", "-c", "bad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.toml:2:"), "{}", stderr(&o));
}

#[test]
fn trajectories_need_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = nvmem(dir.path(), &["run", "cpmg", "--ensemble", "20"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn parse_check_cases() {
    let dir = tempfile::tempdir().unwrap();
    let golden = sequences().join("transfer.seq");
    let o = nvmem(dir.path(), &["parse-check", golden.to_str().unwrap()]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).trim().ends_with("events"));

    fs::write(dir.path().join("empty.seq"), "").unwrap();
    let o = nvmem(dir.path(), &["parse-check", "empty.seq"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0 events");

    fs::write(dir.path().join("overlap.seq"), "mw1 pi @0ns\nrf1 pi @10ns\n").unwrap();
    let o = nvmem(dir.path(), &["parse-check", "overlap.seq"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("overlap.seq:2:"), "{}", stderr(&o));

    fs::write(dir.path().join("typo.seq"), "laser 1us\nrf3 pi\n").unwrap();
    let o = nvmem(dir.path(), &["parse-check", "typo.seq"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("typo.seq:2:"), "{}", stderr(&o));
}

#[test]
fn fit_cosine_synthetic_and_malformed() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("x,y\n");
    for i in 0..80 {
        let x = i as f64 * 1e-7;
        csv += &format!("{x},{}\n", 0.3 * (2.0 * std::f64::consts::PI * 1.5e5 * x + 0.4).cos() + 0.5);
    }
    fs::write(dir.path().join("fringe.csv"), csv).unwrap();
    let o = nvmem(dir.path(), &["fit", "cosine", "fringe.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["converged"], true);

    fs::write(dir.path().join("broken.csv"), "x,y\n1,2\n3,banana\n").unwrap();
    let o = nvmem(dir.path(), &["fit", "cosine", "broken.csv"]);
    assert_eq!(o.status.code(), Some(2));

    let o = nvmem(dir.path(), &["fit", "spline", "fringe.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn emitted_tomography_refits_to_reference_rates() {
    let dir = tempfile::tempdir().unwrap();
    let o = nvmem(dir.path(), &["run", "init-tomography", "-o", "."]);
    assert!(o.status.success());
    let o = nvmem(
        dir.path(),
        &["fit", "rates", "init-tomography_total.csv", "init-tomography_up.csv"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = RateParams::reference();
    let params = v["params"].as_array().unwrap();
    for (p, want) in params.iter().zip([r.alpha, r.beta, r.gamma]) {
        let got = p["value"].as_f64().unwrap();
        assert!((got / want - 1.0).abs() < 1e-3, "{got} vs {want}");
    }
}

#[test]
fn emitted_rabi_and_storage_refit() {
    let dir = tempfile::tempdir().unwrap();
    assert!(nvmem(dir.path(), &["run", "rabi", "-o", "."]).status.success());
    let o = nvmem(dir.path(), &["fit", "cosine", "rabi.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = nvmem(dir.path(), &["run", "cpmg", "-o", ".", "--seed", "3", "--ensemble", "200"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .find(|n| n.starts_with("cpmg") && n.ends_with(".csv"))
        .unwrap();
    let o = nvmem(dir.path(), &["fit", "exponential", &csv, "--offset", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = nvmem(d.path(), &["run", "cpmg", "-o", ".", "--seed", "11", "--ensemble", "300"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let mut n = 0;
    for e in fs::read_dir(a.path()).unwrap() {
        let name = e.unwrap().file_name();
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name:?} differs");
        n += 1;
    }
    assert!(n >= 2);
}

fn write_sweep(dir: &Path, values: &str) {
    fs::write(
        dir.join("sweep.toml"),
        format!(
            "seed = 1\n[sweep]\nexperiment = \"rabi\"\nparameter = \"rf_rabi\"\nmetric = \"rabi_frequency_hz\"\nvalues = {values}\n"
        ),
    )
    .unwrap();
}

#[test]
fn sweep_empty_and_two_points() {
    let dir = tempfile::tempdir().unwrap();
    write_sweep(dir.path(), "[]");
    let o = nvmem(dir.path(), &["sweep", "-c", "sweep.toml", "-o", "."]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("sweep_rabi_rf_rabi.csv")).unwrap();
    let body: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, ["x,y"]);

    write_sweep(dir.path(), "[\"2MHz\", \"4MHz\"]");
    let o = nvmem(dir.path(), &["sweep", "-c", "sweep.toml", "-o", "."]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cols = columns(&dir.path().join("sweep_rabi_rf_rabi.csv"));
    assert_eq!(cols[0], [2e6, 4e6]);
    assert!((cols[1][0] / 2e6 - 1.0).abs() < 0.02);
    assert!((cols[1][1] / 4e6 - 1.0).abs() < 0.02);
}

#[test]
fn power_table_sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("power_scan.toml");
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = Command::new(env!("CARGO_BIN_EXE_nvmem"))
            .args(["sweep", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()])
            .env("NVMEM_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).starts_with("10 rows"));
        outputs.push(fs::read(out.join("sweep_purification_laser_power.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let cols = columns(&dir.path().join("t1/sweep_purification_laser_power.csv"));
    assert!(cols[0].windows(2).all(|w| w[1] > w[0]));
    assert!(cols[1].iter().all(|&p| (0.5..=1.0).contains(&p)));
}

#[test]
fn missing_sweep_section_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = nvmem(dir.path(), &["sweep"]);
    assert_eq!(o.status.code(), Some(2));
}
