//! Polarizer-angle fits of emitted power.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::SpectraError;

/// Fit of `P(theta) = p_max cos^2(theta - theta0) + p_min sin^2(theta - theta0)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolarizationFit {
    pub p_max: f64,
    pub p_min: f64,
    pub theta0_rad: f64,
    /// p_max / p_min; infinite for fully polarized data.
    pub extinction_ratio: f64,
    pub residual_rms: f64,
    /// p_min came out negative and was clamped to zero.
    pub clamped_p_min: bool,
    /// Data is unpolarized within the fit scatter; theta0 is meaningless.
    pub theta0_undetermined: bool,
}

/// Least-squares fit of a polarizer scan.
///
/// The model is linear in the basis {1, cos 2theta, sin 2theta}, so the fit
/// is a closed-form normal-equation solve.
pub fn polarization_fit(
    angles_rad: &[f64],
    powers: &[f64],
) -> Result<PolarizationFit, SpectraError> {
    if angles_rad.len() != powers.len() {
        return Err(SpectraError::InvalidData(
            "angle and power arrays must have equal length".into(),
        ));
    }
    let mut distinct: Vec<f64> = angles_rad.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if distinct.len() < 5 {
        return Err(SpectraError::TooFewSamples {
            got: distinct.len(),
            need: 5,
        });
    }
    let span = distinct[distinct.len() - 1] - distinct[0];
    if span < std::f64::consts::PI - 1e-9 {
        return Err(SpectraError::InvalidData(format!(
            "angles span {span:.3} rad; need at least pi"
        )));
    }

    // normal equations for P = c0 + a cos2t + b sin2t
    let mut m = Matrix3::zeros();
    let mut v = Vector3::zeros();
    for (&t, &p) in angles_rad.iter().zip(powers) {
        let basis = Vector3::new(1.0, (2.0 * t).cos(), (2.0 * t).sin());
        m += basis * basis.transpose();
        v += basis * p;
    }
    let sol = m
        .lu()
        .solve(&v)
        .ok_or_else(|| SpectraError::InvalidData("degenerate angle set".into()))?;
    let (c0, a, b) = (sol[0], sol[1], sol[2]);
    let r = a.hypot(b);
    let theta0 = 0.5 * b.atan2(a);

    let mut p_max = c0 + r;
    let mut p_min = c0 - r;
    let mut clamped = false;
    if p_min < 0.0 {
        p_min = 0.0;
        clamped = true;
    }
    let residual_rms = {
        let sse: f64 = angles_rad
            .iter()
            .zip(powers)
            .map(|(&t, &p)| {
                let e = c0 + a * (2.0 * t).cos() + b * (2.0 * t).sin() - p;
                e * e
            })
            .sum();
        (sse / powers.len() as f64).sqrt()
    };
    let scale = powers.iter().cloned().fold(0.0_f64, |acc, p| acc.max(p.abs()));
    let undetermined = r <= 1e-9 * scale.max(1e-300);
    if p_max < 0.0 {
        p_max = 0.0;
    }
    let extinction_ratio = if p_min > 0.0 { p_max / p_min } else { f64::INFINITY };
    Ok(PolarizationFit {
        p_max,
        p_min,
        theta0_rad: theta0,
        extinction_ratio,
        residual_rms,
        clamped_p_min: clamped,
        theta0_undetermined: undetermined,
    })
}
