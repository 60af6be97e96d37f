//! Toolkit for graded square-lattice photonic-crystal microcavity lasers.
//!
//! The crate covers the full desk-scale pipeline for these devices:
//!
//! - [`geometry`] — graded hole lattices, dielectric rasterization, and the
//!   slab-to-2D effective-index reduction.
//! - [`fdtd`] — a 2D TE (Hz, Ex, Ey) Yee solver with CPML absorbing
//!   boundaries and symmetry-selective mirror walls.
//! - [`modes`] — resonance extraction (matrix-pencil harmonic inversion,
//!   ringdown fits), effective mode volume, Fourier-space light-cone
//!   analysis, and Gaussian envelope fits.
//! - [`laser`] — steady-state two-variable (carrier, photon) rate equations:
//!   L-L curves, threshold, and transparency/threshold carrier comparison.
//! - [`spectra`] — fits of measured artifacts: Lorentzian linewidths,
//!   two-segment L-L threshold extraction, polarization, pump-position
//!   overlap.
//! - [`config`] / [`io`] — TOML run configuration and the flat-binary /
//!   JSON-sidecar / CSV file formats shared by the CLI.
//!
//! All FDTD quantities are kept in normalized units (lattice constant a = 1,
//! c = 1); conversions to nm and physical frequencies happen only at the
//! reporting layer.

// validation deliberately writes `!(x > 0.0)` so NaN fails the check too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod fdtd;
pub mod fitting;
pub mod geometry;
pub mod io;
pub mod laser;
pub mod modes;
pub mod spectra;

pub use fdtd::{FieldComponent, FieldRecord, PmlParams, SimConfig, Snapshot, SourceSpec, Symmetry};
pub use geometry::{DielectricGrid, HoleList, LatticeSpec, Polarization, Smoothing};
pub use laser::{GainModel, RateEqnParams, SteadyStateSolution};
pub use modes::{EnvelopeFit, FourierMap, ModeVolumeResult, ResonanceEstimate};
pub use spectra::{LLData, LorentzianFit, Spectrum, ThresholdFit};
