//! Ringdown Q from the decay of the field energy, U(t) = U0 e^{-w t / Q}.

use serde::{Deserialize, Serialize};

use super::ModesError;
use crate::fitting::{fit_line, r_squared};

/// What the input series measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    /// A field-component record; samples are squared before enveloping.
    FieldAmplitude,
    /// An energy-like (already quadratic) series.
    Energy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RingdownFit {
    pub q: f64,
    pub r_squared: f64,
    pub n_envelope_points: usize,
    /// Energy decay rate per normalized time.
    pub decay_rate: f64,
}

/// Fraction of the peak envelope below which points are not fitted.
const FIT_FLOOR: f64 = 0.08;

/// Log-linear least squares on the energy envelope of a decaying record.
///
/// The envelope is the per-period mean of the (squared, for field records)
/// series, which cancels the in-period oscillation exactly for an
/// exponentially decaying mode. A non-monotone envelope (beating between
/// modes) is rejected; harmonic inversion handles that case.
pub fn ringdown_q(
    series: &[f64],
    dt: f64,
    freq: f64,
    kind: SeriesKind,
) -> Result<RingdownFit, ModesError> {
    if !(freq > 0.0) || !(dt > 0.0) {
        return Err(ModesError::InvalidInput(
            "freq and dt must be positive".into(),
        ));
    }
    let period_samples = ((1.0 / (freq * dt)).round() as usize).max(1);
    if series.len() < 10 * period_samples {
        return Err(ModesError::RecordTooShort {
            got: series.len(),
            need: 10 * period_samples,
        });
    }
    let energy: Vec<f64> = match kind {
        SeriesKind::FieldAmplitude => series.iter().map(|v| v * v).collect(),
        SeriesKind::Energy => series.to_vec(),
    };
    let n_windows = energy.len() / period_samples;
    let mut env = Vec::with_capacity(n_windows);
    let mut times = Vec::with_capacity(n_windows);
    for w in 0..n_windows {
        let seg = &energy[w * period_samples..(w + 1) * period_samples];
        let mean = seg.iter().sum::<f64>() / period_samples as f64;
        env.push(mean);
        times.push((w as f64 + 0.5) * period_samples as f64 * dt);
    }
    let peak = env.iter().cloned().fold(0.0_f64, f64::max);
    if !(peak > 0.0) {
        return Err(ModesError::InvalidInput("series is identically zero".into()));
    }

    let start = env.iter().position(|&v| v == peak).unwrap_or(0);

    // beating shows up as large envelope rises; check the whole tail above
    // a small level so a beat null cannot hide later growth
    let tail = &env[start..];
    let mut pairs = 0usize;
    let mut rises = 0usize;
    for w in tail.windows(2) {
        if w[0].max(w[1]) < 0.02 * peak {
            continue;
        }
        pairs += 1;
        if w[1] > 1.10 * w[0] {
            rises += 1;
        }
    }
    if rises * 4 > pairs {
        return Err(ModesError::Beating);
    }

    // restrict the fit to the span above the floor
    let mut end = env.len();
    for (k, &v) in env.iter().enumerate().skip(start) {
        if v < FIT_FLOOR * peak {
            end = k;
            break;
        }
    }
    let env = &env[start..end];
    let times = &times[start..end];
    if env.len() < 5 {
        return Err(ModesError::RecordTooShort {
            got: env.len(),
            need: 5,
        });
    }
    if env[env.len() - 1] > 0.9 * env[0] {
        return Err(ModesError::Beating);
    }

    let log_env: Vec<f64> = env.iter().map(|v| v.max(1e-300).ln()).collect();
    let (line, _) = fit_line(times, &log_env)?;
    let predicted: Vec<f64> = times.iter().map(|&t| line.at(t)).collect();
    let r2 = r_squared(&log_env, &predicted);
    let decay_rate = -line.slope;
    if !(decay_rate > 0.0) {
        return Err(ModesError::Beating);
    }
    let omega = 2.0 * std::f64::consts::PI * freq;
    Ok(RingdownFit {
        q: omega / decay_rate,
        r_squared: r2,
        n_envelope_points: env.len(),
        decay_rate,
    })
}
