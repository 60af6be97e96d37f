//! Soft additive point sources with Gaussian-modulated sinusoid waveforms.

use serde::{Deserialize, Serialize};

use super::{FdtdError, FieldComponent};

/// A soft dipole source added to one field component at one grid point.
///
/// Frequencies are normalized (a/lambda); the envelope time constant is
/// `tau = 1 / bandwidth`, so the source window is `t0 +- 4 / bandwidth` and
/// the waveform is negligible outside it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceSpec {
    pub position_nm: (f64, f64),
    pub component: FieldComponent,
    /// Center frequency, units a/lambda.
    pub center_freq: f64,
    /// Frequency width, same units; the default is 20% of the center.
    pub bandwidth: f64,
    /// Envelope center in steps; `None` places it at 4 tau so the waveform
    /// starts near zero.
    pub t0_steps: Option<usize>,
    pub amplitude: f64,
}

impl SourceSpec {
    pub fn gaussian(position_nm: (f64, f64), component: FieldComponent, center_freq: f64) -> Self {
        SourceSpec {
            position_nm,
            component,
            center_freq,
            bandwidth: 0.2 * center_freq,
            t0_steps: None,
            amplitude: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), FdtdError> {
        if !(self.center_freq > 0.0) {
            return Err(FdtdError::InvalidConfig(format!(
                "source center_freq must be positive, got {}",
                self.center_freq
            )));
        }
        if !(self.bandwidth > 0.0) {
            return Err(FdtdError::InvalidConfig(format!(
                "source bandwidth must be positive, got {}",
                self.bandwidth
            )));
        }
        Ok(())
    }

    /// Envelope time constant in normalized time.
    pub fn tau(&self) -> f64 {
        1.0 / self.bandwidth
    }

    /// Envelope center in normalized time for a given step size.
    pub fn t0(&self, dt: f64) -> f64 {
        match self.t0_steps {
            Some(steps) => steps as f64 * dt,
            None => 4.0 * self.tau(),
        }
    }

    /// Step index after which the waveform has effectively ended.
    pub fn end_step(&self, dt: f64) -> usize {
        ((self.t0(dt) + 4.0 * self.tau()) / dt).ceil() as usize
    }

    /// Waveform value at normalized time `t`. Exactly zero outside the
    /// window `t0 +- 4 tau`, so "source off" is sharp for energy audits.
    pub fn value(&self, t: f64, dt: f64) -> f64 {
        let tau = self.tau();
        let arg = t - self.t0(dt);
        if arg.abs() > 4.0 * tau {
            return 0.0;
        }
        self.amplitude
            * (-arg * arg / (2.0 * tau * tau)).exp()
            * (2.0 * std::f64::consts::PI * self.center_freq * arg).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn waveform_is_negligible_outside_window() {
        let s = SourceSpec::gaussian((0.0, 0.0), FieldComponent::Hz, 0.25);
        let dt = 0.02;
        let t_end = s.end_step(dt) as f64 * dt;
        assert!(s.value(0.0, dt).abs() < 4e-4 * s.amplitude);
        assert!(s.value(t_end, dt).abs() < 4e-4 * s.amplitude);
        let peak = s.value(s.t0(dt), dt).abs();
        assert!((peak - s.amplitude).abs() < 1e-12);
    }

    #[test]
    fn bad_bandwidth_rejected() {
        let mut s = SourceSpec::gaussian((0.0, 0.0), FieldComponent::Hz, 0.25);
        s.bandwidth = 0.0;
        assert!(s.validate().is_err());
    }
}
