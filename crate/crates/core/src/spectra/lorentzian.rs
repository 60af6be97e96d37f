//! Lorentzian lineshape fitting and instrument-resolution handling.

use serde::{Deserialize, Serialize};

use super::{SpectraError, Spectrum};
use crate::fitting::{levenberg_marquardt, r_squared};

/// Fitted Lorentzian `offset + A / (1 + (2 (x - x0) / fwhm)^2)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LorentzianFit {
    pub lambda0_nm: f64,
    pub fwhm_nm: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// Loaded quality factor lambda0 / FWHM.
    pub q_loaded: f64,
    /// RMS of the fit residual.
    pub residual: f64,
    pub r_squared: f64,
    /// FWHM is below twice the sample spacing, so the instrument sets it.
    pub resolution_limited: bool,
    /// Lineshape was visibly asymmetric; only the long-wavelength half of
    /// the peak was fitted.
    pub asymmetric: bool,
}

fn lorentz(x: f64, p: &[f64]) -> f64 {
    // p = [offset, amplitude, lambda0, fwhm]
    let t = 2.0 * (x - p[2]) / p[3];
    p[0] + p[1] / (1.0 + t * t)
}

/// Fit a single Lorentzian inside `window` (nm interval, inclusive).
pub fn fit_lorentzian(
    spec: &Spectrum,
    window: (f64, f64),
) -> Result<LorentzianFit, SpectraError> {
    spec.validate()?;
    let idx: Vec<usize> = (0..spec.wavelength_nm.len())
        .filter(|&i| spec.wavelength_nm[i] >= window.0 && spec.wavelength_nm[i] <= window.1)
        .collect();
    if idx.len() < 7 {
        return Err(SpectraError::TooFewSamples {
            got: idx.len(),
            need: 7,
        });
    }
    let xs: Vec<f64> = idx.iter().map(|&i| spec.wavelength_nm[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| spec.power[i]).collect();

    let (peak_k, &peak_y) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    if peak_k == 0 || peak_k == ys.len() - 1 {
        return Err(SpectraError::PeakAtWindowEdge);
    }
    let offset0 = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let amp0 = peak_y - offset0;
    let half = offset0 + amp0 / 2.0;

    // half-max crossings on each side of the peak
    let hwhm_left = {
        let mut k = peak_k;
        while k > 0 && ys[k] > half {
            k -= 1;
        }
        xs[peak_k] - xs[k]
    };
    let hwhm_right = {
        let mut k = peak_k;
        while k + 1 < ys.len() && ys[k] > half {
            k += 1;
        }
        xs[k] - xs[peak_k]
    };
    let fwhm0 = (hwhm_left + hwhm_right).max(xs[1] - xs[0]);

    // thermally broadened lines are asymmetric on the short-wavelength side;
    // in that case fit only the long-wavelength half of the peak
    let asymmetric = hwhm_left > 1.5 * hwhm_right || hwhm_right > 1.5 * hwhm_left;
    let (fx, fy): (Vec<f64>, Vec<f64>) = if asymmetric {
        let lam_peak = xs[peak_k];
        xs.iter()
            .zip(&ys)
            .filter(|(&x, _)| x >= lam_peak)
            .map(|(&x, &y)| (x, y))
            .unzip()
    } else {
        (xs.clone(), ys.clone())
    };
    if fx.len() < 5 {
        return Err(SpectraError::TooFewSamples {
            got: fx.len(),
            need: 5,
        });
    }

    let initial = [offset0, amp0, xs[peak_k], fwhm0];
    let fit = levenberg_marquardt(&fx, &fy, &initial, 200, lorentz)?;
    let [offset, amplitude, lambda0, fwhm] = [
        fit.params[0],
        fit.params[1],
        fit.params[2],
        fit.params[3].abs(),
    ];
    if !(fwhm > 0.0) || !lambda0.is_finite() {
        return Err(SpectraError::InvalidData(
            "fit produced a non-positive linewidth".into(),
        ));
    }
    let predicted: Vec<f64> = fx
        .iter()
        .map(|&x| lorentz(x, &[offset, amplitude, lambda0, fwhm]))
        .collect();
    let spacing = (fx[fx.len() - 1] - fx[0]) / (fx.len() - 1) as f64;
    Ok(LorentzianFit {
        lambda0_nm: lambda0,
        fwhm_nm: fwhm,
        amplitude,
        offset,
        q_loaded: lambda0 / fwhm,
        residual: (fit.sse / fx.len() as f64).sqrt(),
        r_squared: r_squared(&fy, &predicted),
        resolution_limited: fwhm < 2.0 * spacing,
        asymmetric,
    })
}

/// How to remove instrument broadening from a measured FWHM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResolutionModel {
    /// Widths add in quadrature; corrected = sqrt(m^2 - i^2).
    GaussianQuadrature,
    /// Pass the measured value through unchanged.
    None,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DeconvolvedWidth {
    pub fwhm_nm: f64,
    pub resolution_limited: bool,
}

/// Remove the instrument linewidth from a measured FWHM.
pub fn deconvolve_resolution(
    fwhm_measured_nm: f64,
    fwhm_instrument_nm: f64,
    model: ResolutionModel,
) -> DeconvolvedWidth {
    match model {
        ResolutionModel::None => DeconvolvedWidth {
            fwhm_nm: fwhm_measured_nm,
            resolution_limited: false,
        },
        ResolutionModel::GaussianQuadrature => {
            let m2 = fwhm_measured_nm * fwhm_measured_nm;
            let i2 = fwhm_instrument_nm * fwhm_instrument_nm;
            if m2 <= i2 {
                DeconvolvedWidth {
                    fwhm_nm: 0.0,
                    resolution_limited: true,
                }
            } else {
                DeconvolvedWidth {
                    fwhm_nm: (m2 - i2).sqrt(),
                    resolution_limited: false,
                }
            }
        }
    }
}
