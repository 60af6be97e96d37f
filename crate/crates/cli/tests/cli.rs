//! End-to-end checks of the `pcavity` binary: exit codes, file outputs,
//! idempotence, and thread-count independence.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use ndarray::Array2;
use pcavity_core::fdtd::{Snapshot, Symmetry};
use pcavity_core::io;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pcavity"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn pcavity");
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn repo_config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn json_of(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn output_digests(out_dir: &Path) -> BTreeMap<String, String> {
    let manifest = json_of(&out_dir.join("manifest.json"));
    manifest["outputs"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| (k.clone(), v.as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn lattice_produces_reference_pattern_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("one");
    let out2 = dir.path().join("two");
    let cfg = repo_config("fig1a.toml");
    for out in [&out1, &out2] {
        run_ok(&[
            "lattice",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let summary = json_of(&out1.join("lattice.json"));
    assert_eq!(summary["n_holes"], 800); // 32 rows x 25 cols
    let fx = summary["footprint_x_nm"].as_f64().unwrap();
    let fy = summary["footprint_y_nm"].as_f64().unwrap();
    assert!((fx - 8000.0).abs() / 8000.0 < 0.2, "footprint x {fx}");
    assert!((fy - 11000.0).abs() / 11000.0 < 0.2, "footprint y {fy}");

    let holes = io::read_holes_csv(&out1.join("holes.csv")).unwrap();
    assert_eq!(holes.len(), 800);
    assert!(holes.min_radius_nm() >= 70.0 - 1e-6);
    assert!(holes.max_radius_nm() <= 110.0 + 1e-6);

    // identical config -> identical digests
    assert_eq!(output_digests(&out1), output_digests(&out2));
}

#[test]
fn missing_config_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(repo_config("fig1a.toml")).unwrap();
    std::fs::write(&cfg_path, text.replace("a_nm = 305.0\n", "")).unwrap();
    let out = bin()
        .args([
            "lattice",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("a_nm"), "stderr: {stderr}");
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.toml");
    let mut text = std::fs::read_to_string(repo_config("fig1a.toml")).unwrap();
    text.push_str("\n[lattice.bogus]\nx = 1\n");
    std::fs::write(&cfg_path, &text).unwrap();
    let out = bin()
        .args([
            "lattice",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cfl_violation_exits_2_before_stepping() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfl.toml");
    let text = std::fs::read_to_string(repo_config("vacuum_smoke.toml")).unwrap();
    std::fs::write(&cfg_path, text.replace("courant = 0.5", "courant = 0.8")).unwrap();
    let out = bin()
        .args([
            "simulate",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("stability"), "stderr: {stderr}");
}

#[test]
fn vacuum_smoke_run_passes_energy_self_check() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("smoke");
    run_ok(&[
        "simulate",
        "--config",
        &repo_config("vacuum_smoke.toml"),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let info = json_of(&out_dir.join("run.json"));
    assert_eq!(info["energy_self_check"]["passed"], true);
    assert_eq!(
        info["energy_self_check"]["kind"],
        "closed-box-conservation"
    );
}

#[test]
fn simulate_digests_are_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let digests: Vec<BTreeMap<String, String>> = ["1", "8"]
        .iter()
        .map(|threads| {
            let out_dir = dir.path().join(format!("t{threads}"));
            run_ok(&[
                "simulate",
                "--config",
                &repo_config("vacuum_smoke.toml"),
                "--out",
                out_dir.to_str().unwrap(),
                "--threads",
                threads,
            ]);
            output_digests(&out_dir)
        })
        .collect();
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn laser_ll_curve_has_monotone_photon_column() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("ll");
    run_ok(&[
        "laser",
        "ll",
        "--config",
        &repo_config("laser_defaults.toml"),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(out_dir.join("ll_curve.csv")).unwrap();
    let s_col: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(s_col.len() >= 50);
    for w in s_col.windows(2) {
        assert!(w[1] > w[0], "S not monotone: {} -> {}", w[0], w[1]);
    }
    // thread-count independence of the rayon-parallel curve
    let out_t1 = dir.path().join("ll_t1");
    run_ok(&[
        "laser",
        "ll",
        "--config",
        &repo_config("laser_defaults.toml"),
        "--out",
        out_t1.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    assert_eq!(
        output_digests(&out_dir)["ll_curve.csv"],
        output_digests(&out_t1)["ll_curve.csv"]
    );
}

#[test]
fn laser_steady_reports_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("steady");
    run_ok(&[
        "laser",
        "steady",
        "--pump-uw",
        "800.0",
        "--config",
        &repo_config("laser_defaults.toml"),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let report = json_of(&out_dir.join("steady.json"));
    assert!(report["n_cm3"].as_f64().unwrap() > 0.0);
    assert!(report["s_photons"].as_f64().unwrap() > 0.0);
}

#[test]
fn fit_lorentzian_on_shipped_spectrum_reports_q_13000() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("fit");
    run_ok(&[
        "fit",
        "lorentzian",
        "--config",
        &repo_config("fit_example.toml"),
        "--data",
        &fixture("spectrum_1298p5.csv"),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let report = json_of(&out_dir.join("lorentzian.json"));
    let q = report["q_loaded"].as_f64().unwrap();
    assert!((1.25e4..1.35e4).contains(&q), "q_loaded {q}");
    assert!((report["fwhm_nm"].as_f64().unwrap() - 0.100).abs() < 1e-4);
}

#[test]
fn fit_threshold_no_kink_is_an_error_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("line.csv");
    let mut text = String::from("pump_uW,line_arb,background_arb\n");
    for k in 0..30 {
        let p = 50.0 + 20.0 * k as f64;
        text.push_str(&format!("{p},{},{}\n", 0.3 * p, 0.3 * p));
    }
    std::fs::write(&data, text).unwrap();
    let out = bin()
        .args([
            "fit",
            "threshold",
            "--data",
            data.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no threshold"));
}

#[test]
fn fit_polarization_recovers_angle() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("pol.csv");
    let mut text = String::from("angle_deg,power_arb\n");
    for k in 0..19 {
        let deg = 10.0 * k as f64;
        let th = (deg - 10.0_f64).to_radians();
        let p = 20.0 * th.cos().powi(2) + 1.0 * th.sin().powi(2);
        text.push_str(&format!("{deg},{p:.9}\n"));
    }
    std::fs::write(&data, text).unwrap();
    let out_dir = dir.path().join("out");
    run_ok(&[
        "fit",
        "polarization",
        "--data",
        data.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let report = json_of(&out_dir.join("polarization.json"));
    assert!((report["theta0_deg"].as_f64().unwrap() - 10.0).abs() < 0.01);
    assert!((report["extinction_ratio"].as_f64().unwrap() - 20.0).abs() < 0.01);
}

#[test]
fn modes_lightcone_on_odd_snapshot_reports_zero_dc() {
    // snapshot fixture constructed as an odd function of x
    let dir = tempfile::tempdir().unwrap();
    let n = 64;
    let mk_odd = || {
        Array2::from_shape_fn((n, n), |(j, i)| {
            let x = i as f64 - (n as f64 - 1.0) / 2.0;
            let y = j as f64 - (n as f64 - 1.0) / 2.0;
            x * (-(x * x + y * y) / 60.0).exp()
        })
    };
    let snap = Snapshot {
        step: 100,
        t_norm: 5.0,
        dx_norm: 1.0 / 16.0,
        hz: Array2::zeros((n, n)),
        ex: mk_odd(),
        ey: Array2::zeros((n, n)),
        unfolded: true,
    };
    let base = dir.path().join("snap_fixture");
    io::write_snapshot(&base, &snap, Some(0.25), (Symmetry::None, Symmetry::None)).unwrap();
    let out_dir = dir.path().join("out");
    run_ok(&[
        "modes",
        "lightcone",
        "--snapshot",
        base.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let report = json_of(&out_dir.join("lightcone.json"));
    let dc = report["dc_power_raw_arb"].as_f64().unwrap();
    let total = report["total_power_arb"].as_f64().unwrap();
    assert!(dc <= 1e-18 * total, "dc {dc} vs total {total}");
}

#[test]
fn simulate_then_modes_pipeline_on_tiny_cavity() {
    // a small full pipeline: simulate a tiny graded cavity, then run every
    // modes subcommand off the run directory
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("tiny.toml");
    std::fs::write(&cfg_path, TINY_CAVITY_TOML).unwrap();
    let run_dir = dir.path().join("run");
    run_ok(&[
        "simulate",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        run_dir.to_str().unwrap(),
    ]);

    let res_dir = dir.path().join("res");
    run_ok(&[
        "modes",
        "resonances",
        "--run",
        run_dir.to_str().unwrap(),
        "--out",
        res_dir.to_str().unwrap(),
    ]);
    let report = json_of(&res_dir.join("resonances.json"));
    let dom = &report["dominant"];
    let freq = dom["freq"].as_f64().unwrap();
    assert!((0.18..0.32).contains(&freq), "dominant frequency {freq}");

    let vol_dir = dir.path().join("vol");
    run_ok(&[
        "modes",
        "volume",
        "--run",
        run_dir.to_str().unwrap(),
        "--freq",
        &freq.to_string(),
        "--out",
        vol_dir.to_str().unwrap(),
    ]);
    let vol = json_of(&vol_dir.join("mode_volume.json"));
    assert_eq!(vol["localized"], true);

    let lc_dir = dir.path().join("lc");
    run_ok(&[
        "modes",
        "lightcone",
        "--run",
        run_dir.to_str().unwrap(),
        "--freq",
        &freq.to_string(),
        "--out",
        lc_dir.to_str().unwrap(),
    ]);
    let lc = json_of(&lc_dir.join("lightcone.json"));
    let dc = lc["dc_power_raw_arb"].as_f64().unwrap();
    let total = lc["total_power_arb"].as_f64().unwrap();
    assert!(dc <= 1e-15 * total, "odd run must have no Ex DC: {dc} vs {total}");

    let env_dir = dir.path().join("env");
    run_ok(&[
        "modes",
        "envelope",
        "--run",
        run_dir.to_str().unwrap(),
        "--out",
        env_dir.to_str().unwrap(),
    ]);
    let env = json_of(&env_dir.join("envelope.json"));
    assert!(env["sigma_x_nm"].as_f64().unwrap() > 0.0);

    // overlap consumes the envelope report
    let fit_cfg = dir.path().join("fit.toml");
    std::fs::write(&fit_cfg, "[fit]\nbeam_sigma_nm = 1596.0\n").unwrap();
    let ov_dir = dir.path().join("ov");
    run_ok(&[
        "fit",
        "overlap",
        "--config",
        fit_cfg.to_str().unwrap(),
        "--envelope",
        env_dir.join("envelope.json").to_str().unwrap(),
        "--out",
        ov_dir.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(ov_dir.join("overlap.csv")).unwrap();
    let first: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((first - 1.0).abs() < 1e-9, "zero displacement is 1.0");
}

const TINY_CAVITY_TOML: &str = r#"
[lattice]
a_nm = 305.0
n_rows = 12
n_cols = 9
r_over_a_center = 0.22950819672131148
r_over_a_edge_x = 0.36065573770491804
r_over_a_edge_y = 0.36065573770491804
d_nm = 252.0
n_slab = 3.4
n_clad = 1.0

[raster]
cells_per_a = 12
pad_a = 2.0

[sim]
n_steps = 12000
symmetry_x = "odd"
symmetry_y = "even"
track_energy = true
snapshot_stride = 12
snapshot_window_start = 11880

[[sim.sources]]
x_nm = 167.75
y_nm = 137.25
center_freq_norm = 0.2424
bandwidth_norm = 0.02

[[sim.probes]]
x_nm = 167.75
y_nm = 137.25

[[sim.probes]]
x_nm = 350.75
y_nm = 289.75
"#;
