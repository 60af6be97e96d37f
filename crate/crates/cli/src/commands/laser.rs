//! `pcavity laser ...`: steady-state rate-equation modeling.

use pcavity_core::io;
use pcavity_core::laser::{ll_curve, steady_state, threshold, transparency_ratio};
use serde::Serialize;

use crate::manifest::ManifestBuilder;
use crate::{CliError, GlobalOpts, LaserCmd};

#[derive(Serialize)]
struct SteadyReport {
    pump_uw: f64,
    n_cm3: f64,
    s_photons: f64,
    emitted_arb: f64,
}

#[derive(Serialize)]
struct ThresholdReport {
    p_threshold_uw: f64,
    n_threshold_cm3: f64,
    n_transparency_cm3: f64,
    transparency_ratio: f64,
    tau_p_s: f64,
    q_factor: f64,
}

#[derive(Serialize)]
struct LlReport {
    n_points: usize,
    pump_min_uw: f64,
    pump_max_uw: f64,
    transition_pump_lo_uw: Option<f64>,
    transition_pump_hi_uw: Option<f64>,
    curve_file: String,
}

pub fn run(global: &GlobalOpts, cmd: &LaserCmd) -> Result<(), CliError> {
    let (cfg, cfg_path) = super::load_config(global)?;
    let out = super::ensure_out(global)?;
    let section = cfg.laser()?;
    let params = section.to_params()?;
    params
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    match cmd {
        LaserCmd::Steady { pump_uw } => {
            let mut manifest =
                ManifestBuilder::new(&out, "laser steady").with_config(Some(&cfg_path))?;
            let sol =
                steady_state(&params, *pump_uw).map_err(|e| CliError::Compute(e.to_string()))?;
            let path = out.join("steady.json");
            crate::report::write_json(
                &path,
                &SteadyReport {
                    pump_uw: sol.pump_uw,
                    n_cm3: sol.n_cm3,
                    s_photons: sol.s_photons,
                    emitted_arb: sol.emitted_arb,
                },
            )?;
            manifest.add(&path);
            manifest.write()
        }
        LaserCmd::Ll => {
            let mut manifest =
                ManifestBuilder::new(&out, "laser ll").with_config(Some(&cfg_path))?;
            let pumps = section.pump_grid_uw()?;
            let curve = ll_curve(&params, &pumps).map_err(|e| CliError::Compute(e.to_string()))?;
            let csv_path = out.join("ll_curve.csv");
            io::write_ll_curve_csv(&csv_path, &curve)?;
            manifest.add(&csv_path);
            let report = LlReport {
                n_points: curve.points.len(),
                pump_min_uw: pumps[0],
                pump_max_uw: *pumps.last().unwrap(),
                transition_pump_lo_uw: curve
                    .transition_range
                    .map(|(a, _)| curve.points[a].pump_uw),
                transition_pump_hi_uw: curve
                    .transition_range
                    .map(|(_, b)| curve.points[b].pump_uw),
                curve_file: "ll_curve.csv".into(),
            };
            let path = out.join("ll.json");
            crate::report::write_json(&path, &report)?;
            manifest.add(&path);
            manifest.write()
        }
        LaserCmd::Threshold => {
            let mut manifest =
                ManifestBuilder::new(&out, "laser threshold").with_config(Some(&cfg_path))?;
            let est = threshold(&params).map_err(|e| CliError::Compute(e.to_string()))?;
            let ratio =
                transparency_ratio(&params).map_err(|e| CliError::Compute(e.to_string()))?;
            let path = out.join("threshold.json");
            crate::report::write_json(
                &path,
                &ThresholdReport {
                    p_threshold_uw: est.p_threshold_uw,
                    n_threshold_cm3: est.n_threshold_cm3,
                    n_transparency_cm3: est.n_transparency_cm3,
                    transparency_ratio: ratio,
                    tau_p_s: params.tau_p_s(),
                    q_factor: params.q_factor,
                },
            )?;
            manifest.add(&path);
            manifest.write()
        }
    }
}
