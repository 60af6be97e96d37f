//! Resonance and mode-shape analysis of FDTD outputs: damped-sinusoid
//! extraction, ringdown fits, effective mode volume, Fourier-space
//! light-cone content, and Gaussian envelope fits.

mod envelope;
mod fourier;
mod harmonic;
mod ringdown;
mod volume;

pub use envelope::{envelope_gaussian_fit, EnvelopeFit};
pub use fourier::{light_cone_fraction, FourierMap};
pub use harmonic::{harmonic_inversion, HarmonicInversionOptions, ModeExtraction};
pub use ringdown::{ringdown_q, RingdownFit, SeriesKind};
pub use volume::{mode_volume, ModeVolumeResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModesError {
    #[error("record too short: {got} post-source samples, need {need} (10 periods of the lowest band frequency)")]
    RecordTooShort { got: usize, need: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("frequency {freq} is inconsistent with the grid: light-cone radius {radius} exceeds the Nyquist wavevector {nyquist} (units 2*pi/a)")]
    FreqInconsistent {
        freq: f64,
        radius: f64,
        nyquist: f64,
    },
    #[error("peak sits on the grid boundary; the mode is not localized")]
    PeakOnBoundary,
    #[error("shape mismatch between field ({field:?}) and grid ({grid:?})")]
    ShapeMismatch {
        field: (usize, usize),
        grid: (usize, usize),
    },
    #[error("envelope is not monotone (beating between modes); use harmonic inversion instead")]
    Beating,
    #[error(transparent)]
    Fit(#[from] crate::fitting::FitError),
}

/// One extracted damped-sinusoid mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResonanceEstimate {
    /// Normalized frequency a/lambda.
    pub freq: f64,
    pub q: f64,
    pub amplitude: f64,
    pub phase_rad: f64,
    /// Relative RMS residual of the joint reconstruction this mode belongs to.
    pub confidence: f64,
    /// Decay was too slow to resolve; `q` holds the documented cap and the
    /// mode lifetime exceeds the record.
    pub q_capped: bool,
}
