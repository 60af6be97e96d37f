//! TOML run configuration shared by every CLI subcommand.
//!
//! One dialect for the whole pipeline: sections `[lattice]`, `[raster]`,
//! `[sim]`, `[laser]`, `[fit]`, each optional so a subcommand can demand the
//! ones it needs. Keys carry their units in the name (a_nm, tau_sp_s,
//! pump_min_uw); unknown keys are refused.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fdtd::{FieldComponent, PmlParams, SimConfig, SourceSpec, Symmetry};
use crate::geometry::{LatticeSpec, RasterParams, Smoothing};
use crate::laser::{GainModel, RateEqnParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config is missing the [{0}] section")]
    MissingSection(&'static str),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub lattice: Option<LatticeSection>,
    pub raster: Option<RasterSection>,
    pub sim: Option<SimSection>,
    pub laser: Option<LaserSection>,
    pub fit: Option<FitSection>,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn lattice(&self) -> Result<&LatticeSection, ConfigError> {
        self.lattice.as_ref().ok_or(ConfigError::MissingSection("lattice"))
    }

    pub fn raster(&self) -> Result<&RasterSection, ConfigError> {
        self.raster.as_ref().ok_or(ConfigError::MissingSection("raster"))
    }

    pub fn sim(&self) -> Result<&SimSection, ConfigError> {
        self.sim.as_ref().ok_or(ConfigError::MissingSection("sim"))
    }

    pub fn laser(&self) -> Result<&LaserSection, ConfigError> {
        self.laser.as_ref().ok_or(ConfigError::MissingSection("laser"))
    }

    pub fn fit(&self) -> Result<&FitSection, ConfigError> {
        self.fit.as_ref().ok_or(ConfigError::MissingSection("fit"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub a_nm: f64,
    pub n_rows: usize,
    pub n_cols: usize,
    pub r_over_a_center: f64,
    pub r_over_a_edge_x: f64,
    pub r_over_a_edge_y: f64,
    #[serde(default = "default_grade_exponent")]
    pub grade_exponent: f64,
    pub d_nm: f64,
    pub n_slab: f64,
    pub n_clad: f64,
    #[serde(default)]
    pub center_offset_x_nm: f64,
    #[serde(default)]
    pub center_offset_y_nm: f64,
}

fn default_grade_exponent() -> f64 {
    2.0
}

impl LatticeSection {
    pub fn to_spec(&self) -> LatticeSpec {
        LatticeSpec {
            a_nm: self.a_nm,
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            r_over_a_center: self.r_over_a_center,
            r_over_a_edge_x: self.r_over_a_edge_x,
            r_over_a_edge_y: self.r_over_a_edge_y,
            grade_exponent: self.grade_exponent,
            d_nm: self.d_nm,
            n_slab: self.n_slab,
            n_clad: self.n_clad,
            center_offset_nm: (self.center_offset_x_nm, self.center_offset_y_nm),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterSection {
    /// Cells per lattice constant; dx = a / cells_per_a.
    pub cells_per_a: f64,
    #[serde(default = "default_smoothing")]
    pub smoothing: Smoothing,
    /// Padding around the hole footprint, units of a.
    #[serde(default = "default_pad_a")]
    pub pad_a: f64,
    /// Normalized frequency a/lambda for the effective-index reduction.
    #[serde(default = "default_design_freq")]
    pub design_freq_norm: f64,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
}

fn default_smoothing() -> Smoothing {
    Smoothing::AreaAverage
}

fn default_pad_a() -> f64 {
    1.0
}

fn default_design_freq() -> f64 {
    0.25
}

fn default_max_cells() -> usize {
    1 << 25
}

impl RasterSection {
    pub fn to_params(&self, a_nm: f64) -> Result<RasterParams, ConfigError> {
        if !(self.cells_per_a >= 10.0) {
            return Err(ConfigError::Invalid(format!(
                "cells_per_a must be >= 10 (dx <= a/10), got {}",
                self.cells_per_a
            )));
        }
        Ok(RasterParams {
            dx_nm: a_nm / self.cells_per_a,
            smoothing: self.smoothing,
            pad_nm: self.pad_a * a_nm,
            design_freq: self.design_freq_norm,
            max_cells: self.max_cells,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub n_steps: usize,
    /// Normalization length for frequencies/time. Defaults to the lattice
    /// constant; required for vacuum-box runs without a [lattice] section.
    #[serde(default)]
    pub unit_a_nm: Option<f64>,
    /// Homogeneous test domain instead of a rasterized lattice.
    #[serde(default)]
    pub vacuum_nx: Option<usize>,
    #[serde(default)]
    pub vacuum_ny: Option<usize>,
    #[serde(default)]
    pub vacuum_dx_nm: Option<f64>,
    #[serde(default = "default_courant")]
    pub courant: f64,
    #[serde(default = "default_true")]
    pub pml_enabled: bool,
    #[serde(default = "default_pml_thickness")]
    pub pml_thickness_cells: usize,
    #[serde(default = "default_one")]
    pub pml_sigma_scale: f64,
    #[serde(default = "default_pml_order")]
    pub pml_grading_order: f64,
    #[serde(default)]
    pub symmetry_x: Symmetry,
    #[serde(default)]
    pub symmetry_y: Symmetry,
    #[serde(default = "default_probe_component")]
    pub probe_component: FieldComponent,
    #[serde(default)]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub snapshot_window_start: Option<usize>,
    #[serde(default)]
    pub snapshot_window_end: Option<usize>,
    #[serde(default)]
    pub track_energy: bool,
    #[serde(default = "default_snapshot_mb")]
    pub max_snapshot_mb: usize,
    #[serde(default)]
    pub sources: Vec<SourceItem>,
    #[serde(default)]
    pub probes: Vec<ProbeItem>,
}

fn default_courant() -> f64 {
    0.5
}

fn default_true() -> bool {
    true
}

fn default_pml_thickness() -> usize {
    12
}

fn default_one() -> f64 {
    1.0
}

fn default_pml_order() -> f64 {
    3.0
}

fn default_probe_component() -> FieldComponent {
    FieldComponent::Hz
}

fn default_snapshot_mb() -> usize {
    1024
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceItem {
    pub x_nm: f64,
    pub y_nm: f64,
    #[serde(default = "default_source_component")]
    pub component: FieldComponent,
    pub center_freq_norm: f64,
    /// Defaults to 20% of the center frequency.
    #[serde(default)]
    pub bandwidth_norm: Option<f64>,
    #[serde(default)]
    pub t0_steps: Option<usize>,
    #[serde(default = "default_one")]
    pub amplitude: f64,
}

fn default_source_component() -> FieldComponent {
    FieldComponent::Hz
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeItem {
    pub x_nm: f64,
    pub y_nm: f64,
}

impl SimSection {
    pub fn to_sim_config(&self, unit_a_nm: f64) -> SimConfig {
        let mut config = SimConfig::new(unit_a_nm, self.n_steps);
        config.courant = self.courant;
        config.pml = if self.pml_enabled {
            Some(PmlParams {
                thickness_cells: self.pml_thickness_cells,
                sigma_max_scale: self.pml_sigma_scale,
                grading_order: self.pml_grading_order,
            })
        } else {
            None
        };
        config.symmetry_x = self.symmetry_x;
        config.symmetry_y = self.symmetry_y;
        config.probe_component = self.probe_component;
        config.snapshot_stride = self.snapshot_stride;
        config.snapshot_window = match (self.snapshot_window_start, self.snapshot_window_end) {
            (Some(a), Some(b)) => Some((a, b)),
            (Some(a), None) => Some((a, self.n_steps)),
            (None, Some(b)) => Some((1, b)),
            (None, None) => None,
        };
        config.track_energy = self.track_energy;
        config.max_snapshot_bytes = self.max_snapshot_mb * 1024 * 1024;
        config.sources = self
            .sources
            .iter()
            .map(|s| SourceSpec {
                position_nm: (s.x_nm, s.y_nm),
                component: s.component,
                center_freq: s.center_freq_norm,
                bandwidth: s.bandwidth_norm.unwrap_or(0.2 * s.center_freq_norm),
                t0_steps: s.t0_steps,
                amplitude: s.amplitude,
            })
            .collect();
        config.probes = self.probes.iter().map(|p| (p.x_nm, p.y_nm)).collect();
        config
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSection {
    pub q_factor: f64,
    pub lambda0_nm: f64,
    pub beta: f64,
    pub gamma_confinement: f64,
    pub v_g_cm_per_s: f64,
    pub gain: GainSection,
    pub n_tr_cm3: f64,
    pub tau_sp_s: f64,
    pub tau_nr_s: f64,
    /// Either v_active_cm3 directly, or spot_area_um2 + active_thickness_nm.
    #[serde(default)]
    pub v_active_cm3: Option<f64>,
    #[serde(default)]
    pub spot_area_um2: Option<f64>,
    #[serde(default)]
    pub active_thickness_nm: Option<f64>,
    pub eta_pump: f64,
    pub lambda_pump_nm: f64,
    #[serde(default = "default_duty")]
    pub duty_cycle: f64,
    /// Pump grid for L-L curves.
    #[serde(default)]
    pub pump_min_uw: Option<f64>,
    #[serde(default)]
    pub pump_max_uw: Option<f64>,
    #[serde(default = "default_pump_points")]
    pub pump_points: usize,
    #[serde(default)]
    pub pump_log_spaced: bool,
}

fn default_duty() -> f64 {
    10.0 / 300.0
}

fn default_pump_points() -> usize {
    60
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "model")]
pub enum GainSection {
    Logarithmic { g0_per_cm: f64 },
    Linear { a_cm2: f64 },
}

impl LaserSection {
    pub fn to_params(&self) -> Result<RateEqnParams, ConfigError> {
        let v_active_cm3 = match (self.v_active_cm3, self.spot_area_um2, self.active_thickness_nm)
        {
            (Some(v), None, None) => v,
            (None, Some(area), Some(t)) => area * 1e-8 * t * 1e-7,
            _ => {
                return Err(ConfigError::Invalid(
                    "give either v_active_cm3 or both spot_area_um2 and active_thickness_nm"
                        .into(),
                ))
            }
        };
        Ok(RateEqnParams {
            q_factor: self.q_factor,
            lambda0_nm: self.lambda0_nm,
            beta: self.beta,
            gamma_confinement: self.gamma_confinement,
            v_g_cm_per_s: self.v_g_cm_per_s,
            gain: match self.gain {
                GainSection::Logarithmic { g0_per_cm } => GainModel::Logarithmic { g0_per_cm },
                GainSection::Linear { a_cm2 } => GainModel::Linear { a_cm2 },
            },
            n_tr_cm3: self.n_tr_cm3,
            tau_sp_s: self.tau_sp_s,
            tau_nr_s: self.tau_nr_s,
            v_active_cm3,
            eta_pump: self.eta_pump,
            lambda_pump_nm: self.lambda_pump_nm,
            duty_cycle: self.duty_cycle,
        })
    }

    pub fn pump_grid_uw(&self) -> Result<Vec<f64>, ConfigError> {
        let (lo, hi) = match (self.pump_min_uw, self.pump_max_uw) {
            (Some(a), Some(b)) if b > a && a >= 0.0 => (a, b),
            _ => {
                return Err(ConfigError::Invalid(
                    "pump_min_uw and pump_max_uw must be given with max > min >= 0".into(),
                ))
            }
        };
        let n = self.pump_points.max(2);
        let grid = if self.pump_log_spaced {
            if !(lo > 0.0) {
                return Err(ConfigError::Invalid(
                    "log-spaced pump grid needs pump_min_uw > 0".into(),
                ));
            }
            (0..n)
                .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
                .collect()
        } else {
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect()
        };
        Ok(grid)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Lorentzian fit window.
    #[serde(default)]
    pub window_min_nm: Option<f64>,
    #[serde(default)]
    pub window_max_nm: Option<f64>,
    /// Monochromator FWHM for resolution deconvolution.
    #[serde(default)]
    pub instrument_fwhm_nm: Option<f64>,
    /// Threshold fit column: "line" or "background".
    #[serde(default)]
    pub which: Option<crate::spectra::SignalColumn>,
    /// Pump-overlap prediction inputs.
    #[serde(default)]
    pub beam_sigma_nm: Option<f64>,
    #[serde(default)]
    pub max_displacement_nm: Option<f64>,
    #[serde(default)]
    pub n_displacements: Option<usize>,
    /// Mode-envelope sigmas when no envelope report is supplied.
    #[serde(default)]
    pub sigma_mode_x_nm: Option<f64>,
    #[serde(default)]
    pub sigma_mode_y_nm: Option<f64>,
}
