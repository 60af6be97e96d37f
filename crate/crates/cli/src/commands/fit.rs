//! `pcavity fit ...`: fits of measured data files.

use std::path::Path;

use pcavity_core::io;
use pcavity_core::modes::EnvelopeFit;
use pcavity_core::spectra::{
    deconvolve_resolution, fit_lorentzian, fit_threshold, polarization_fit, pump_overlap_scan,
    ResolutionModel, SignalColumn,
};
use serde::Serialize;

use crate::manifest::ManifestBuilder;
use crate::{CliError, FitCmd, GlobalOpts};

#[derive(Serialize)]
struct LorentzianReport {
    lambda0_nm: f64,
    fwhm_nm: f64,
    fwhm_deconvolved_nm: Option<f64>,
    instrument_fwhm_nm: Option<f64>,
    amplitude_arb: f64,
    offset_arb: f64,
    q_loaded: f64,
    q_deconvolved: Option<f64>,
    residual_rms_arb: f64,
    r_squared: f64,
    resolution_limited: bool,
    asymmetric: bool,
}

#[derive(Serialize)]
struct ThresholdFitReport {
    which: String,
    p_threshold_uw: f64,
    below_slope: f64,
    below_intercept: f64,
    above_slope: f64,
    above_intercept: f64,
    split_index: usize,
    n_points: usize,
}

#[derive(Serialize)]
struct PolarizationReport {
    p_max_arb: f64,
    p_min_arb: f64,
    theta0_deg: f64,
    extinction_ratio: f64,
    residual_rms_arb: f64,
    clamped_p_min: bool,
    theta0_undetermined: bool,
}

#[derive(Serialize)]
struct OverlapReport {
    sigma_mode_x_nm: f64,
    sigma_mode_y_nm: f64,
    beam_sigma_nm: f64,
    n_displacements: usize,
    curve_file: String,
}

pub fn run(global: &GlobalOpts, cmd: &FitCmd) -> Result<(), CliError> {
    match cmd {
        FitCmd::Lorentzian { data } => lorentzian(global, data),
        FitCmd::Threshold { data } => threshold(global, data),
        FitCmd::Polarization { data } => polarization(global, data),
        FitCmd::Overlap { envelope } => overlap(global, envelope.as_deref()),
    }
}

fn open_err(path: &Path, e: &io::IoError) -> CliError {
    // missing or unreadable input files are usage errors, not compute bugs
    match e {
        io::IoError::Io { .. } => CliError::Config(format!("cannot read {}: {e}", path.display())),
        _ => CliError::Compute(e.to_string()),
    }
}

fn lorentzian(global: &GlobalOpts, data: &Path) -> Result<(), CliError> {
    let out = super::ensure_out(global)?;
    let mut manifest =
        ManifestBuilder::new(&out, "fit lorentzian").with_config(global.config.as_deref())?;
    let spectrum = io::read_spectrum_csv(data).map_err(|e| open_err(data, &e))?;
    let fit_cfg = global
        .config
        .as_ref()
        .map(|p| pcavity_core::config::PipelineConfig::from_path(p))
        .transpose()?
        .and_then(|c| c.fit.clone());
    let window = match &fit_cfg {
        Some(f) => (
            f.window_min_nm
                .unwrap_or_else(|| spectrum.wavelength_nm[0]),
            f.window_max_nm
                .unwrap_or_else(|| *spectrum.wavelength_nm.last().unwrap()),
        ),
        None => (
            spectrum.wavelength_nm[0],
            *spectrum.wavelength_nm.last().unwrap(),
        ),
    };
    let fit = fit_lorentzian(&spectrum, window).map_err(|e| CliError::Compute(e.to_string()))?;
    let instrument = fit_cfg.as_ref().and_then(|f| f.instrument_fwhm_nm);
    let deconv = instrument.map(|i| {
        deconvolve_resolution(fit.fwhm_nm, i, ResolutionModel::GaussianQuadrature)
    });
    let report = LorentzianReport {
        lambda0_nm: fit.lambda0_nm,
        fwhm_nm: fit.fwhm_nm,
        fwhm_deconvolved_nm: deconv.as_ref().map(|d| d.fwhm_nm),
        instrument_fwhm_nm: instrument,
        amplitude_arb: fit.amplitude,
        offset_arb: fit.offset,
        q_loaded: fit.q_loaded,
        q_deconvolved: deconv
            .as_ref()
            .filter(|d| d.fwhm_nm > 0.0)
            .map(|d| fit.lambda0_nm / d.fwhm_nm),
        residual_rms_arb: fit.residual,
        r_squared: fit.r_squared,
        resolution_limited: fit.resolution_limited
            || deconv.as_ref().is_some_and(|d| d.resolution_limited),
        asymmetric: fit.asymmetric,
    };
    let path = out.join("lorentzian.json");
    crate::report::write_json(&path, &report)?;
    manifest.add(&path);
    manifest.write()
}

fn threshold(global: &GlobalOpts, data: &Path) -> Result<(), CliError> {
    let out = super::ensure_out(global)?;
    let mut manifest =
        ManifestBuilder::new(&out, "fit threshold").with_config(global.config.as_deref())?;
    let ll = io::read_ll_csv(data).map_err(|e| open_err(data, &e))?;
    let which = global
        .config
        .as_ref()
        .map(|p| pcavity_core::config::PipelineConfig::from_path(p))
        .transpose()?
        .and_then(|c| c.fit.as_ref().and_then(|f| f.which))
        .unwrap_or(SignalColumn::Line);
    let fit = fit_threshold(&ll, which).map_err(|e| CliError::Compute(e.to_string()))?;
    let report = ThresholdFitReport {
        which: match which {
            SignalColumn::Line => "line".into(),
            SignalColumn::Background => "background".into(),
        },
        p_threshold_uw: fit.p_threshold_uw,
        below_slope: fit.below_slope,
        below_intercept: fit.below_intercept,
        above_slope: fit.above_slope,
        above_intercept: fit.above_intercept,
        split_index: fit.split_index,
        n_points: fit.n_points,
    };
    let path = out.join("threshold_fit.json");
    crate::report::write_json(&path, &report)?;
    manifest.add(&path);
    manifest.write()
}

fn polarization(global: &GlobalOpts, data: &Path) -> Result<(), CliError> {
    let out = super::ensure_out(global)?;
    let mut manifest =
        ManifestBuilder::new(&out, "fit polarization").with_config(global.config.as_deref())?;
    let (angles, powers) = io::read_polarization_csv(data).map_err(|e| open_err(data, &e))?;
    let fit =
        polarization_fit(&angles, &powers).map_err(|e| CliError::Compute(e.to_string()))?;
    let report = PolarizationReport {
        p_max_arb: fit.p_max,
        p_min_arb: fit.p_min,
        theta0_deg: fit.theta0_rad.to_degrees(),
        extinction_ratio: fit.extinction_ratio,
        residual_rms_arb: fit.residual_rms,
        clamped_p_min: fit.clamped_p_min,
        theta0_undetermined: fit.theta0_undetermined,
    };
    let path = out.join("polarization.json");
    crate::report::write_json(&path, &report)?;
    manifest.add(&path);
    manifest.write()
}

fn overlap(global: &GlobalOpts, envelope_path: Option<&Path>) -> Result<(), CliError> {
    let out = super::ensure_out(global)?;
    let mut manifest =
        ManifestBuilder::new(&out, "fit overlap").with_config(global.config.as_deref())?;
    let fit_cfg = global
        .config
        .as_ref()
        .map(|p| pcavity_core::config::PipelineConfig::from_path(p))
        .transpose()?
        .and_then(|c| c.fit.clone())
        .unwrap_or_default();
    let envelope: EnvelopeFit = match envelope_path {
        Some(p) => super::modes::read_envelope_report(p)?,
        None => {
            let (sx, sy) = match (fit_cfg.sigma_mode_x_nm, fit_cfg.sigma_mode_y_nm) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(CliError::Config(
                        "give --envelope or set sigma_mode_x_nm / sigma_mode_y_nm in [fit]"
                            .into(),
                    ))
                }
            };
            EnvelopeFit {
                sigma_x_nm: sx,
                sigma_y_nm: sy,
                center_nm: (0.0, 0.0),
                r_squared: 1.0,
                poor_fit: false,
            }
        }
    };
    let beam_sigma = fit_cfg
        .beam_sigma_nm
        .ok_or_else(|| CliError::Config("set beam_sigma_nm in [fit]".into()))?;
    let max_d = fit_cfg.max_displacement_nm.unwrap_or(4000.0);
    let n = fit_cfg.n_displacements.unwrap_or(41).max(2);
    let positions: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            (
                envelope.center_nm.0 + max_d * k as f64 / (n - 1) as f64,
                envelope.center_nm.1,
            )
        })
        .collect();
    let powers = pump_overlap_scan(&envelope, beam_sigma, &positions);

    let csv_path = out.join("overlap.csv");
    let mut text = String::from("displacement_nm,relative_power\n");
    for (k, p) in powers.iter().enumerate() {
        text.push_str(&format!(
            "{:.6},{:.9e}\n",
            max_d * k as f64 / (n - 1) as f64,
            p
        ));
    }
    std::fs::write(&csv_path, text)
        .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", csv_path.display())))?;
    manifest.add(&csv_path);

    let report = OverlapReport {
        sigma_mode_x_nm: envelope.sigma_x_nm,
        sigma_mode_y_nm: envelope.sigma_y_nm,
        beam_sigma_nm: beam_sigma,
        n_displacements: n,
        curve_file: "overlap.csv".into(),
    };
    let path = out.join("overlap.json");
    crate::report::write_json(&path, &report)?;
    manifest.add(&path);
    manifest.write()
}
