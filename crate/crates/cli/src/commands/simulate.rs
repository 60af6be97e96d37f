//! `pcavity simulate`: run the configured FDTD job and write probe records,
//! snapshots, the energy series, and a run descriptor for later analysis.

use std::path::Path;

use ndarray::Array2;
use pcavity_core::fdtd::{self, SimConfig, Symmetry};
use pcavity_core::geometry::DielectricGrid;
use pcavity_core::io;
use serde::{Deserialize, Serialize};

use crate::manifest::ManifestBuilder;
use crate::{CliError, GlobalOpts};

/// Everything `modes` needs to interpret a finished run.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunInfo {
    pub unit_a_nm: f64,
    pub dt_norm: f64,
    pub n_steps: usize,
    pub source_end_step: usize,
    /// Center frequency of the strongest source, for downstream defaults.
    pub center_freq_norm: Option<f64>,
    pub symmetry: (Symmetry, Symmetry),
    pub n_clad: f64,
    /// Base name of the full (unfolded) grid files.
    pub grid_full_base: String,
    /// Base name of the simulated (possibly halved) grid files.
    pub grid_sim_base: String,
    pub probes: Vec<ProbeInfo>,
    pub snapshot_bases: Vec<String>,
    pub energy_file: Option<String>,
    pub energy_self_check: Option<EnergySelfCheck>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProbeInfo {
    pub index: usize,
    pub x_nm: f64,
    pub y_nm: f64,
    pub file: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EnergySelfCheck {
    /// "closed-box-conservation" or "absorbing-decline".
    pub kind: String,
    pub passed: bool,
    /// Relative drift (closed box) or final/initial energy ratio (absorbing).
    pub metric: f64,
}

pub fn run(global: &GlobalOpts) -> Result<(), CliError> {
    let (cfg, cfg_path) = super::load_config(global)?;
    let out = super::ensure_out(global)?;
    let mut manifest =
        ManifestBuilder::new(&out, "simulate").with_config(Some(&cfg_path))?;

    let sim_section = cfg.sim()?;
    let vacuum = sim_section.vacuum_nx.is_some();
    let (full_grid, unit_a_nm, n_clad) = if vacuum {
        let nx = sim_section.vacuum_nx.unwrap();
        let ny = sim_section
            .vacuum_ny
            .ok_or_else(|| CliError::Config("vacuum_ny required with vacuum_nx".into()))?;
        let dx = sim_section
            .vacuum_dx_nm
            .ok_or_else(|| CliError::Config("vacuum_dx_nm required with vacuum_nx".into()))?;
        let unit = sim_section
            .unit_a_nm
            .ok_or_else(|| CliError::Config("unit_a_nm required for vacuum runs".into()))?;
        let grid = DielectricGrid {
            eps: Array2::from_elem((ny, nx), 1.0),
            dx_nm: dx,
            origin_nm: (
                -(nx as f64) * dx / 2.0 + dx / 2.0,
                -(ny as f64) * dx / 2.0 + dx / 2.0,
            ),
            n_eff: 1.0,
            provenance: None,
        };
        (grid, unit, 1.0)
    } else {
        let (_, grid) = super::build_grid_from_config(&cfg, global.max_mem)?;
        let spec = cfg.lattice()?.to_spec();
        let unit = sim_section.unit_a_nm.unwrap_or(spec.a_nm);
        (grid, unit, spec.n_clad)
    };

    let mut config: SimConfig = sim_section.to_sim_config(unit_a_nm);
    config.max_snapshot_bytes = config
        .max_snapshot_bytes
        .min(global.max_mem.saturating_mul(1024 * 1024));

    // validate before stepping; a CFL violation is a config error
    if !config.is_cfl_stable() {
        return Err(CliError::Config(format!(
            "courant {} exceeds the 2D stability bound 1/sqrt(2)",
            config.courant
        )));
    }

    // halve the domain at mirror walls
    let mut sim_grid = full_grid.clone();
    if config.symmetry_x != Symmetry::None {
        sim_grid = sim_grid.half_x();
    }
    if config.symmetry_y != Symmetry::None {
        sim_grid = sim_grid.half_y();
    }

    config
        .validate(&sim_grid)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let output = fdtd::run(&sim_grid, &config).map_err(|e| CliError::Compute(e.to_string()))?;

    // persist grids
    let grid_full_base = "grid_full".to_string();
    let grid_sim_base = "grid_sim".to_string();
    io::write_grid(&out.join(&grid_full_base), &full_grid)?;
    io::write_grid(&out.join(&grid_sim_base), &sim_grid)?;
    for base in [&grid_full_base, &grid_sim_base] {
        manifest.add(&out.join(base).with_extension("f64"));
        manifest.add(&out.join(base).with_extension("json"));
    }

    // probe records
    let mut probes = Vec::new();
    for (k, rec) in output.records.iter().enumerate() {
        let file = format!("probe_{k}.csv");
        io::write_record_csv(&out.join(&file), rec)?;
        manifest.add(&out.join(&file));
        probes.push(ProbeInfo {
            index: k,
            x_nm: rec.position_nm.0,
            y_nm: rec.position_nm.1,
            file,
        });
    }

    // snapshots
    let center_freq = config
        .sources
        .iter()
        .max_by(|a, b| a.amplitude.abs().partial_cmp(&b.amplitude.abs()).unwrap())
        .map(|s| s.center_freq);
    let mut snapshot_bases = Vec::new();
    for snap in &output.snapshots {
        let base = format!("snap_{:08}", snap.step);
        io::write_snapshot(
            &out.join(&base),
            snap,
            center_freq,
            (config.symmetry_x, config.symmetry_y),
        )?;
        for suffix in ["_hz.f64", "_ex.f64", "_ey.f64"] {
            manifest.add(&out.join(format!("{base}{suffix}")));
        }
        manifest.add(&out.join(&base).with_extension("json"));
        snapshot_bases.push(base);
    }

    // energy series and self-check
    let mut energy_file = None;
    let mut energy_self_check = None;
    if !output.energy.is_empty() {
        let path = out.join("energy.csv");
        write_energy_csv(&path, &output.energy, output.dt)?;
        manifest.add(&path);
        energy_file = Some("energy.csv".to_string());
        energy_self_check = Some(energy_check(&config, &output)?);
    }

    let info = RunInfo {
        unit_a_nm,
        dt_norm: output.dt,
        n_steps: config.n_steps,
        source_end_step: output.source_end_step,
        center_freq_norm: center_freq,
        symmetry: (config.symmetry_x, config.symmetry_y),
        n_clad,
        grid_full_base,
        grid_sim_base,
        probes,
        snapshot_bases,
        energy_file,
        energy_self_check,
    };
    let info_path = out.join("run.json");
    crate::report::write_json(&info_path, &info)?;
    manifest.add(&info_path);
    if global.verbose {
        eprintln!(
            "simulate: {} steps on {}x{}, {} probes, {} snapshots",
            config.n_steps,
            sim_grid.nx(),
            sim_grid.ny(),
            info.probes.len(),
            info.snapshot_bases.len()
        );
    }
    manifest.write()
}

fn write_energy_csv(path: &Path, energy: &[f64], dt: f64) -> Result<(), CliError> {
    let mut text = String::from("step,t_normalized,energy_sim_units\n");
    for (k, &u) in energy.iter().enumerate() {
        text.push_str(&format!("{},{:.9},{:.17e}\n", k + 1, (k + 1) as f64 * dt, u));
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", path.display())))
}

/// Built-in energy sanity check: closed boxes must conserve after the
/// sources end, absorbing boxes must decline.
fn energy_check(config: &SimConfig, output: &fdtd::RunOutput) -> Result<EnergySelfCheck, CliError> {
    let start = (output.source_end_step + 10).min(output.energy.len().saturating_sub(2));
    let u0 = output.energy[start];
    let u_end = *output.energy.last().unwrap();
    let check = if config.pml.is_none() {
        let drift = if u0 > 0.0 { (u_end - u0).abs() / u0 } else { 0.0 };
        EnergySelfCheck {
            kind: "closed-box-conservation".into(),
            passed: drift < 1e-3,
            metric: drift,
        }
    } else {
        let ratio = if u0 > 0.0 { u_end / u0 } else { 0.0 };
        EnergySelfCheck {
            kind: "absorbing-decline".into(),
            passed: ratio <= 1.0 + 1e-9,
            metric: ratio,
        }
    };
    if !check.passed {
        return Err(CliError::Compute(format!(
            "energy self-check '{}' failed with metric {:.3e}",
            check.kind, check.metric
        )));
    }
    Ok(check)
}
