//! Fits of measured artifacts: sub-threshold spectra, L-L curves,
//! polarization scans, and pump-position overlap predictions.

mod lorentzian;
mod overlap;
mod polarization;
mod threshold;

pub use lorentzian::{deconvolve_resolution, fit_lorentzian, DeconvolvedWidth, LorentzianFit, ResolutionModel};
pub use overlap::pump_overlap_scan;
pub use polarization::{polarization_fit, PolarizationFit};
pub use threshold::{fit_threshold, SignalColumn, ThresholdFit};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("window holds {got} samples, need at least {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("peak sits at the window edge; widen the window")]
    PeakAtWindowEdge,
    #[error("fit failed: {0}")]
    Fit(#[from] crate::fitting::FitError),
    #[error("no threshold detected: {0}")]
    NoThreshold(String),
}

/// A measured (or synthetic) emission spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    /// Strictly ascending wavelengths.
    pub wavelength_nm: Vec<f64>,
    pub power: Vec<f64>,
    #[serde(default)]
    pub meta: SpectrumMeta,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub duty_cycle: Option<f64>,
    pub pump_uw: Option<f64>,
    /// Instrument resolution (monochromator FWHM).
    pub resolution_nm: Option<f64>,
}

impl Spectrum {
    pub fn validate(&self) -> Result<(), SpectraError> {
        if self.wavelength_nm.len() != self.power.len() {
            return Err(SpectraError::InvalidData(format!(
                "wavelength and power lengths differ: {} vs {}",
                self.wavelength_nm.len(),
                self.power.len()
            )));
        }
        for w in self.wavelength_nm.windows(2) {
            if w[1] <= w[0] {
                return Err(SpectraError::InvalidData(format!(
                    "wavelengths must be strictly ascending near {} nm",
                    w[0]
                )));
            }
        }
        if self.power.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(SpectraError::InvalidData(
                "power values must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Light-in/light-out data: laser-line power and off-resonance background
/// power against pump power.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LLData {
    /// Ascending pump powers.
    pub pump_uw: Vec<f64>,
    pub line_power: Vec<f64>,
    pub background_power: Vec<f64>,
}

impl LLData {
    pub fn validate(&self) -> Result<(), SpectraError> {
        if self.pump_uw.len() != self.line_power.len()
            || self.pump_uw.len() != self.background_power.len()
        {
            return Err(SpectraError::InvalidData(
                "pump, line, and background columns must have equal length".into(),
            ));
        }
        for w in self.pump_uw.windows(2) {
            if w[1] <= w[0] {
                return Err(SpectraError::InvalidData(
                    "pump powers must be strictly ascending".into(),
                ));
            }
        }
        Ok(())
    }
}
