//! `pcavity modes ...`: analysis of finished simulation runs.

use std::path::Path;

use ndarray::Array2;
use pcavity_core::fdtd::{FieldComponent, Snapshot, Symmetry};
use pcavity_core::geometry::DielectricGrid;
use pcavity_core::io;
use pcavity_core::modes::{
    envelope_gaussian_fit, harmonic_inversion, light_cone_fraction, mode_volume,
    HarmonicInversionOptions, ResonanceEstimate,
};
use serde::Serialize;

use super::simulate::RunInfo;
use crate::manifest::ManifestBuilder;
use crate::{CliError, GlobalOpts, ModesCmd};

pub fn run(global: &GlobalOpts, cmd: &ModesCmd) -> Result<(), CliError> {
    match cmd {
        ModesCmd::Resonances {
            run,
            band_lo,
            band_hi,
            max_modes,
        } => resonances(global, run, (*band_lo, *band_hi), *max_modes),
        ModesCmd::Volume { run, freq } => volume(global, run, *freq),
        ModesCmd::Lightcone {
            run,
            snapshot,
            freq,
            component,
            taper,
        } => lightcone(global, run.as_deref(), snapshot.as_deref(), *freq, component, *taper),
        ModesCmd::Envelope { run, window_cells } => envelope(global, run, *window_cells),
    }
}

fn read_run_info(run_dir: &Path) -> Result<RunInfo, CliError> {
    crate::report::read_json(&run_dir.join("run.json"))
}

/// Best snapshot of a run: the one with the largest electric-field energy,
/// which matches the cycle-extremum requirement when the run stored
/// snapshots across a mode period.
fn best_snapshot(run_dir: &Path, info: &RunInfo) -> Result<(Snapshot, String), CliError> {
    if info.snapshot_bases.is_empty() {
        return Err(CliError::Config(
            "the run stored no snapshots; re-run simulate with snapshot_stride > 0".into(),
        ));
    }
    let mut best: Option<(f64, Snapshot, String)> = None;
    for base in &info.snapshot_bases {
        let (snap, _) = io::read_snapshot(&run_dir.join(base))?;
        let e: f64 = snap.ex.iter().map(|v| v * v).sum::<f64>()
            + snap.ey.iter().map(|v| v * v).sum::<f64>();
        if best.as_ref().is_none_or(|(b, _, _)| e > *b) {
            best = Some((e, snap, base.clone()));
        }
    }
    let (_, snap, base) = best.unwrap();
    Ok((snap, base))
}

fn unfolded(snap: &Snapshot, info: &RunInfo) -> Snapshot {
    if snap.unfolded || (info.symmetry.0 == Symmetry::None && info.symmetry.1 == Symmetry::None) {
        snap.clone()
    } else {
        snap.unfold(info.symmetry.0, info.symmetry.1)
    }
}

// ---- resonances ----

#[derive(Serialize)]
struct ProbeModes {
    probe_index: usize,
    x_nm: f64,
    y_nm: f64,
    warning: Option<String>,
    modes: Vec<ResonanceEstimate>,
}

#[derive(Serialize)]
struct ResonanceReport {
    band_norm: (f64, f64),
    max_modes: usize,
    per_probe: Vec<ProbeModes>,
    /// Largest-amplitude mode of the first probe, the conventional pick.
    dominant: Option<ResonanceEstimate>,
}

fn resonances(
    global: &GlobalOpts,
    run_dir: &Path,
    band: (f64, f64),
    max_modes: usize,
) -> Result<(), CliError> {
    let out = super::ensure_out(global)?;
    let mut manifest = ManifestBuilder::new(&out, "modes resonances")
        .with_config(global.config.as_deref())?;
    let info = read_run_info(run_dir)?;
    let opts = HarmonicInversionOptions::default();
    let mut per_probe = Vec::new();
    for probe in &info.probes {
        let record = io::read_record_csv(
            &run_dir.join(&probe.file),
            info.dt_norm,
            info.source_end_step,
            FieldComponent::Hz,
        )?;
        let ext = harmonic_inversion(&record, band, max_modes, &opts)
            .map_err(|e| CliError::Compute(e.to_string()))?;
        per_probe.push(ProbeModes {
            probe_index: probe.index,
            x_nm: probe.x_nm,
            y_nm: probe.y_nm,
            warning: ext.warning,
            modes: ext.modes,
        });
    }
    let dominant = per_probe
        .first()
        .and_then(|p| p.modes.first())
        .cloned();

    // CSV twin of the JSON report
    let csv_path = out.join("resonances.csv");
    let mut text =
        String::from("probe_index,freq_norm,q_factor,amplitude_arb,phase_rad,confidence,q_capped\n");
    for p in &per_probe {
        for m in &p.modes {
            text.push_str(&format!(
                "{},{:.9},{:.6},{:.9e},{:.9},{:.9e},{}\n",
                p.probe_index, m.freq, m.q, m.amplitude, m.phase_rad, m.confidence, m.q_capped
            ));
        }
    }
    std::fs::write(&csv_path, text)
        .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", csv_path.display())))?;
    manifest.add(&csv_path);

    let report = ResonanceReport {
        band_norm: band,
        max_modes,
        per_probe,
        dominant,
    };
    let path = out.join("resonances.json");
    crate::report::write_json(&path, &report)?;
    manifest.add(&path);
    manifest.write()
}

// ---- volume ----

#[derive(Serialize)]
struct VolumeReport {
    snapshot: String,
    freq_norm: f64,
    area_nm2: f64,
    v_eff_air_per_nm: f64,
    v_eff_material_per_nm: f64,
    peak_x_nm: f64,
    peak_y_nm: f64,
    localized: bool,
    n_material: f64,
    lambda_nm: f64,
    /// 2D figures only; pseudo-3D promotion needs an explicit height.
    dimensionality_note: String,
}

fn volume(global: &GlobalOpts, run_dir: &Path, freq: Option<f64>) -> Result<(), CliError> {
    let out = super::ensure_out(global)?;
    let mut manifest =
        ManifestBuilder::new(&out, "modes volume").with_config(global.config.as_deref())?;
    let info = read_run_info(run_dir)?;
    let freq = freq
        .or(info.center_freq_norm)
        .ok_or_else(|| CliError::Config("give --freq (run has no source center)".into()))?;
    let (snap, base) = best_snapshot(run_dir, &info)?;
    let snap = unfolded(&snap, &info);
    let grid = io::read_grid(&run_dir.join(&info.grid_full_base))?;
    let result = mode_volume(&snap, &grid, freq).map_err(|e| CliError::Compute(e.to_string()))?;
    let report = VolumeReport {
        snapshot: base,
        freq_norm: freq,
        area_nm2: result.area_nm2,
        v_eff_air_per_nm: result.v_eff_air_per_nm,
        v_eff_material_per_nm: result.v_eff_material_per_nm,
        peak_x_nm: result.peak_location_nm.0,
        peak_y_nm: result.peak_location_nm.1,
        localized: result.localized,
        n_material: result.n_material,
        lambda_nm: result.lambda_nm,
        dimensionality_note:
            "2D effective-index reduction; per-nm figures require an explicit slab height for 3D"
                .into(),
    };
    let path = out.join("mode_volume.json");
    crate::report::write_json(&path, &report)?;
    manifest.add(&path);
    manifest.write()
}

// ---- lightcone ----

#[derive(Serialize)]
struct LightconeReport {
    snapshot: String,
    component: String,
    freq_norm: f64,
    n_clad: f64,
    taper_fraction: f64,
    light_cone_radius_2pi_over_a: f64,
    fraction_in_cone: f64,
    dc_power_arb: f64,
    dc_power_raw_arb: f64,
    total_power_arb: f64,
}

fn lightcone(
    global: &GlobalOpts,
    run_dir: Option<&Path>,
    snapshot: Option<&Path>,
    freq: Option<f64>,
    component: &str,
    taper: f64,
) -> Result<(), CliError> {
    let out = super::ensure_out(global)?;
    let mut manifest =
        ManifestBuilder::new(&out, "modes lightcone").with_config(global.config.as_deref())?;

    let (snap, sidecar, base, n_clad) = match (run_dir, snapshot) {
        (Some(dir), None) => {
            let info = read_run_info(dir)?;
            let (snap, base) = best_snapshot(dir, &info)?;
            let (_, sidecar) = io::read_snapshot(&dir.join(&base))?;
            let snap = unfolded(&snap, &info);
            (snap, sidecar, base, info.n_clad)
        }
        (None, Some(path)) => {
            let (snap, sidecar) = io::read_snapshot(path)?;
            let unfolded_snap = if snap.unfolded {
                snap
            } else {
                snap.unfold(sidecar.symmetry.0, sidecar.symmetry.1)
            };
            let base = path.to_string_lossy().into_owned();
            (unfolded_snap, sidecar, base, 1.0)
        }
        _ => {
            return Err(CliError::Config(
                "give exactly one of --run or --snapshot".into(),
            ))
        }
    };
    let freq = freq.or(sidecar.center_freq_norm).ok_or_else(|| {
        CliError::Config("give --freq (snapshot carries no center frequency)".into())
    })?;
    let field: &Array2<f64> = match component {
        "ex" => &snap.ex,
        "ey" => &snap.ey,
        "hz" => &snap.hz,
        other => {
            return Err(CliError::Config(format!(
                "unknown component '{other}', expected ex, ey, or hz"
            )))
        }
    };
    let map = light_cone_fraction(field, snap.dx_norm, freq, n_clad, taper)
        .map_err(|e| CliError::Compute(e.to_string()))?;

    // power map as flat binary + sidecar, same convention as grids
    let power_grid = DielectricGrid {
        eps: map.power.clone(),
        dx_nm: map.kx[1] - map.kx[0],
        origin_nm: (map.kx[0], map.ky[0]),
        n_eff: 1.0,
        provenance: None,
    };
    let map_base = out.join("fourier_power");
    io::write_grid(&map_base, &power_grid)?;
    manifest.add(&map_base.with_extension("f64"));
    manifest.add(&map_base.with_extension("json"));

    let report = LightconeReport {
        snapshot: base,
        component: component.to_string(),
        freq_norm: freq,
        n_clad,
        taper_fraction: taper,
        light_cone_radius_2pi_over_a: map.light_cone_radius,
        fraction_in_cone: map.fraction_in_cone,
        dc_power_arb: map.dc_power,
        dc_power_raw_arb: map.dc_power_raw,
        total_power_arb: map.total_power,
    };
    let path = out.join("lightcone.json");
    crate::report::write_json(&path, &report)?;
    manifest.add(&path);
    manifest.write()
}

// ---- envelope ----

#[derive(Serialize)]
struct EnvelopeReport {
    snapshot: String,
    window_cells: usize,
    sigma_x_nm: f64,
    sigma_y_nm: f64,
    center_x_nm: f64,
    center_y_nm: f64,
    r_squared: f64,
    poor_fit: bool,
}

fn envelope(
    global: &GlobalOpts,
    run_dir: &Path,
    window_cells: Option<usize>,
) -> Result<(), CliError> {
    let out = super::ensure_out(global)?;
    let mut manifest =
        ManifestBuilder::new(&out, "modes envelope").with_config(global.config.as_deref())?;
    let info = read_run_info(run_dir)?;
    let (snap, base) = best_snapshot(run_dir, &info)?;
    let snap = unfolded(&snap, &info);
    let grid = io::read_grid(&run_dir.join(&info.grid_full_base))?;
    if snap.shape() != grid.eps.dim() {
        return Err(CliError::Compute(format!(
            "snapshot {:?} does not match the full grid {:?}",
            snap.shape(),
            grid.eps.dim()
        )));
    }
    let density = Array2::from_shape_fn(grid.eps.dim(), |(j, i)| {
        grid.eps[(j, i)] * (snap.ex[(j, i)].powi(2) + snap.ey[(j, i)].powi(2))
    });
    let window = window_cells
        .unwrap_or(((info.unit_a_nm / grid.dx_nm).round() as usize).max(1));
    let fit = envelope_gaussian_fit(&density, &grid, window)
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let report = EnvelopeReport {
        snapshot: base,
        window_cells: window,
        sigma_x_nm: fit.sigma_x_nm,
        sigma_y_nm: fit.sigma_y_nm,
        center_x_nm: fit.center_nm.0,
        center_y_nm: fit.center_nm.1,
        r_squared: fit.r_squared,
        poor_fit: fit.poor_fit,
    };
    let path = out.join("envelope.json");
    crate::report::write_json(&path, &report)?;
    manifest.add(&path);
    manifest.write()
}

/// Parse an envelope report back into the core type (used by `fit overlap`).
pub fn read_envelope_report(path: &Path) -> Result<pcavity_core::modes::EnvelopeFit, CliError> {
    #[derive(serde::Deserialize)]
    struct Raw {
        sigma_x_nm: f64,
        sigma_y_nm: f64,
        center_x_nm: f64,
        center_y_nm: f64,
        r_squared: f64,
        poor_fit: bool,
        #[serde(flatten)]
        _rest: serde_json::Value,
    }
    let raw: Raw = crate::report::read_json(path)?;
    Ok(pcavity_core::modes::EnvelopeFit {
        sigma_x_nm: raw.sigma_x_nm,
        sigma_y_nm: raw.sigma_y_nm,
        center_nm: (raw.center_x_nm, raw.center_y_nm),
        r_squared: raw.r_squared,
        poor_fit: raw.poor_fit,
    })
}
