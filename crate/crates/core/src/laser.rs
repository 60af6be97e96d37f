//! Steady-state two-variable laser rate equations.
//!
//! Carrier density N (cm^-3) and photon number S in the lasing mode obey
//!
//! ```text
//! 0 = eta P / (hw_p V_a)  -  N / tau_total  -  v_g g(N) S / V_a
//! 0 = Gamma v_g g(N) S  -  S / tau_p  +  beta Gamma N V_a / tau_sp
//! ```
//!
//! with the photon lifetime derived from the cavity quality factor,
//! `tau_p = Q lambda0 / (2 pi c)`. Pulsed pumping is treated
//! quasi-statically at the peak pump power, which is the regime where the
//! pulse is much longer than the carrier and photon timescales.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Planck constant (J s).
const PLANCK_J_S: f64 = 6.62607015e-34;
/// Speed of light (cm/s).
pub const C_CM_PER_S: f64 = 2.99792458e10;

#[derive(Debug, Error)]
pub enum LaserError {
    #[error("invalid rate-equation parameters: {0}")]
    InvalidParams(String),
    #[error("cavity loss exceeds material gain: {0}")]
    GainUnreachable(String),
    #[error("no steady-state bracket found: {0}")]
    NoBracket(String),
    #[error("photon number decreased between pump points {0} and {1}; solver inconsistency")]
    NonMonotone(usize, usize),
}

/// Material gain as a function of carrier density.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum GainModel {
    /// g(N) = g0 ln(N / N_tr), the usual quantum-well form.
    Logarithmic { g0_per_cm: f64 },
    /// g(N) = a (N - N_tr).
    Linear { a_cm2: f64 },
}

/// Rate-equation parameter set.
///
/// The default set ([`RateEqnParams::defaults`]) is a documented in-house
/// choice for a 1.3 um multi-quantum-well membrane cavity; none of the
/// coefficient values are measurements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateEqnParams {
    pub q_factor: f64,
    pub lambda0_nm: f64,
    /// Spontaneous-emission coupling into the lasing mode.
    pub beta: f64,
    pub gamma_confinement: f64,
    pub v_g_cm_per_s: f64,
    pub gain: GainModel,
    pub n_tr_cm3: f64,
    pub tau_sp_s: f64,
    pub tau_nr_s: f64,
    /// Active volume: pump-spot area times active-layer thickness.
    pub v_active_cm3: f64,
    /// Fraction of the external pump power absorbed in the active region.
    pub eta_pump: f64,
    pub lambda_pump_nm: f64,
    /// Pump pulse duty cycle (peak-power modeling only; kept for reporting).
    pub duty_cycle: f64,
}

impl RateEqnParams {
    /// Default parameter set: beta 1e-2, Gamma 0.2, logarithmic gain
    /// g0 = 1500 cm^-1, N_tr = 1.5e18 cm^-3, tau_sp = 2 ns, tau_nr = 1 ns,
    /// group index 4, 21 um^2 pump spot on a 40 nm active layer, 830 nm
    /// pump at 90% absorbed fraction.
    pub fn defaults() -> Self {
        RateEqnParams {
            q_factor: 1.0e4,
            lambda0_nm: 1298.5,
            beta: 1.0e-2,
            gamma_confinement: 0.2,
            v_g_cm_per_s: C_CM_PER_S / 4.0,
            gain: GainModel::Logarithmic { g0_per_cm: 1500.0 },
            n_tr_cm3: 1.5e18,
            tau_sp_s: 2.0e-9,
            tau_nr_s: 1.0e-9,
            v_active_cm3: 21.0e-8 * 40.0e-7, // 21 um^2 x 40 nm
            eta_pump: 0.9,
            lambda_pump_nm: 830.0,
            duty_cycle: 10.0 / 300.0,
        }
    }

    pub fn validate(&self) -> Result<(), LaserError> {
        let bad = |name: &str, v: f64| -> Result<(), LaserError> {
            if !(v > 0.0) || !v.is_finite() {
                return Err(LaserError::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
            Ok(())
        };
        bad("q_factor", self.q_factor)?;
        bad("lambda0_nm", self.lambda0_nm)?;
        bad("beta", self.beta)?;
        bad("gamma_confinement", self.gamma_confinement)?;
        bad("v_g_cm_per_s", self.v_g_cm_per_s)?;
        bad("n_tr_cm3", self.n_tr_cm3)?;
        bad("tau_sp_s", self.tau_sp_s)?;
        bad("tau_nr_s", self.tau_nr_s)?;
        bad("v_active_cm3", self.v_active_cm3)?;
        bad("eta_pump", self.eta_pump)?;
        bad("lambda_pump_nm", self.lambda_pump_nm)?;
        if self.beta > 1.0 {
            return Err(LaserError::InvalidParams(format!(
                "beta must be <= 1, got {}",
                self.beta
            )));
        }
        if self.eta_pump > 1.0 {
            return Err(LaserError::InvalidParams(format!(
                "eta_pump must be <= 1, got {}",
                self.eta_pump
            )));
        }
        let coeff = match self.gain {
            GainModel::Logarithmic { g0_per_cm } => g0_per_cm,
            GainModel::Linear { a_cm2 } => a_cm2,
        };
        bad("gain coefficient", coeff)?;
        Ok(())
    }

    /// Photon lifetime tau_p = Q lambda0 / (2 pi c).
    pub fn tau_p_s(&self) -> f64 {
        self.q_factor * (self.lambda0_nm * 1e-7) / (2.0 * std::f64::consts::PI * C_CM_PER_S)
    }

    /// Combined carrier lifetime from spontaneous and non-radiative decay.
    pub fn tau_total_s(&self) -> f64 {
        1.0 / (1.0 / self.tau_sp_s + 1.0 / self.tau_nr_s)
    }

    /// Pump photon energy (J).
    pub fn pump_photon_energy_j(&self) -> f64 {
        PLANCK_J_S * C_CM_PER_S / (self.lambda_pump_nm * 1e-7)
    }

    /// Carrier generation rate (cm^-3 s^-1) at external peak pump power in uW.
    pub fn pump_rate_cm3_s(&self, p_uw: f64) -> f64 {
        self.eta_pump * p_uw * 1e-6 / (self.pump_photon_energy_j() * self.v_active_cm3)
    }

    fn raw(&self) -> RateInputs {
        RateInputs {
            pump_rate: 0.0,
            tau_total: self.tau_total_s(),
            tau_sp: self.tau_sp_s,
            tau_p: self.tau_p_s(),
            beta: self.beta,
            gamma: self.gamma_confinement,
            v_g: self.v_g_cm_per_s,
            gain: self.gain,
            n_tr: self.n_tr_cm3,
            v_active: self.v_active_cm3,
        }
    }
}

/// Unit-agnostic inputs for the raw steady-state solve. Any consistent
/// (length, time) unit system gives identical solutions.
#[derive(Debug, Clone)]
pub struct RateInputs {
    /// Carrier generation rate per active volume.
    pub pump_rate: f64,
    pub tau_total: f64,
    pub tau_sp: f64,
    pub tau_p: f64,
    pub beta: f64,
    pub gamma: f64,
    pub v_g: f64,
    pub gain: GainModel,
    pub n_tr: f64,
    pub v_active: f64,
}

impl RateInputs {
    pub fn gain_at(&self, n: f64) -> f64 {
        match self.gain {
            GainModel::Logarithmic { g0_per_cm } => {
                if n <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    g0_per_cm * (n / self.n_tr).ln()
                }
            }
            GainModel::Linear { a_cm2 } => a_cm2 * (n - self.n_tr),
        }
    }

    /// Carrier density where modal gain equals cavity loss.
    pub fn n_at_gain_clamp(&self) -> Result<f64, LaserError> {
        let g_th = 1.0 / (self.gamma * self.v_g * self.tau_p);
        if !g_th.is_finite() || g_th < 0.0 {
            return Err(LaserError::GainUnreachable(format!(
                "required threshold gain {g_th} is not attainable"
            )));
        }
        Ok(match self.gain {
            GainModel::Logarithmic { g0_per_cm } => self.n_tr * (g_th / g0_per_cm).exp(),
            GainModel::Linear { a_cm2 } => self.n_tr + g_th / a_cm2,
        })
    }

    /// Photon number fed by spontaneous emission at carrier density `n`.
    fn photons_at(&self, n: f64) -> f64 {
        let loss = 1.0 / self.tau_p - self.gamma * self.v_g * self.gain_at(n);
        (self.beta * self.gamma * n * self.v_active / self.tau_sp) / loss
    }

    /// Residual of the carrier equation with S eliminated.
    fn carrier_residual(&self, n: f64) -> f64 {
        let s = self.photons_at(n);
        let stim = self.v_g * self.gain_at(n) * s / self.v_active;
        self.pump_rate - n / self.tau_total - stim
    }
}

/// Steady-state solution at one pump power.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SteadyStateSolution {
    /// External peak pump power.
    pub pump_uw: f64,
    pub n_cm3: f64,
    pub s_photons: f64,
    /// Emitted power, arbitrary units proportional to S / tau_p.
    pub emitted_arb: f64,
}

/// Solve the raw steady-state system; returns (N, S).
///
/// The photon equation is eliminated analytically, leaving one equation in N
/// on (0, N_clamp). A safeguarded Newton iteration (bisection fallback on a
/// maintained sign bracket) drives the relative residual below 1e-10. The
/// bracket keeps S >= 0 by construction.
pub fn solve_steady_raw(inp: &RateInputs) -> Result<(f64, f64), LaserError> {
    if inp.pump_rate == 0.0 {
        return Ok((0.0, 0.0));
    }
    if inp.pump_rate < 0.0 {
        return Err(LaserError::InvalidParams("negative pump".into()));
    }
    let n_max = inp.n_at_gain_clamp()?;
    let mut lo = n_max * 1e-14;
    let mut hi = n_max * (1.0 - 1e-14);
    let f_lo = inp.carrier_residual(lo);
    let f_hi = inp.carrier_residual(hi);
    if !(f_lo > 0.0) || !(f_hi < 0.0) {
        return Err(LaserError::NoBracket(format!(
            "residual at N extremes: f({lo:.3e}) = {f_lo:.3e}, f({hi:.3e}) = {f_hi:.3e}; \
             gain at clamp = {:.3e}, loss rate = {:.3e}",
            inp.gain_at(n_max),
            1.0 / inp.tau_p
        )));
    }

    let scale = inp.pump_rate;
    let mut n = (lo * hi).sqrt();
    for _ in 0..200 {
        let f = inp.carrier_residual(n);
        if f > 0.0 {
            lo = n;
        } else {
            hi = n;
        }
        if f.abs() <= 1e-12 * scale {
            break;
        }
        // damped Newton with numeric derivative; fall back to bisection when
        // the step leaves the bracket
        let h = (hi - lo).min(n * 1e-7).max(n_max * 1e-15);
        let df = (inp.carrier_residual(n + h) - f) / h;
        let newton = n - f / df;
        n = if df.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) < 1e-15 * n_max {
            break;
        }
    }
    let s = inp.photons_at(n);
    Ok((n, s.max(0.0)))
}

/// Steady state at one external pump power (uW).
pub fn steady_state(
    params: &RateEqnParams,
    p_uw: f64,
) -> Result<SteadyStateSolution, LaserError> {
    params.validate()?;
    let mut inputs = params.raw();
    inputs.pump_rate = params.pump_rate_cm3_s(p_uw);
    let (n, s) = solve_steady_raw(&inputs)?;
    Ok(SteadyStateSolution {
        pump_uw: p_uw,
        n_cm3: n,
        s_photons: s,
        emitted_arb: s / params.tau_p_s(),
    })
}

/// A light-in/light-out curve with the super-linear transition flagged.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LLCurve {
    pub points: Vec<SteadyStateSolution>,
    /// Index range of maximal log-log curvature (the threshold transition).
    pub transition_range: Option<(usize, usize)>,
}

/// Solve the steady state over an ascending pump grid.
pub fn ll_curve(params: &RateEqnParams, pump_grid_uw: &[f64]) -> Result<LLCurve, LaserError> {
    params.validate()?;
    for w in pump_grid_uw.windows(2) {
        if w[1] <= w[0] {
            return Err(LaserError::InvalidParams(
                "pump grid must be strictly ascending".into(),
            ));
        }
    }
    let points: Vec<SteadyStateSolution> = pump_grid_uw
        .par_iter()
        .map(|&p| steady_state(params, p))
        .collect::<Result<_, _>>()?;
    for (i, w) in points.windows(2).enumerate() {
        if w[1].s_photons < w[0].s_photons {
            return Err(LaserError::NonMonotone(i, i + 1));
        }
    }
    // curvature of log S vs log P flags the transition region
    let mut curv = vec![0.0; points.len()];
    for i in 1..points.len().saturating_sub(1) {
        let (x0, x1, x2) = (
            points[i - 1].pump_uw.ln(),
            points[i].pump_uw.ln(),
            points[i + 1].pump_uw.ln(),
        );
        let (y0, y1, y2) = (
            points[i - 1].s_photons.max(1e-300).ln(),
            points[i].s_photons.max(1e-300).ln(),
            points[i + 1].s_photons.max(1e-300).ln(),
        );
        let s01 = (y1 - y0) / (x1 - x0);
        let s12 = (y2 - y1) / (x2 - x1);
        curv[i] = (s12 - s01) / (0.5 * (x2 - x0));
    }
    let peak = curv
        .iter()
        .cloned()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let transition_range = peak.filter(|&(_, c)| c > 0.0).map(|(k, c)| {
        let mut a = k;
        let mut b = k;
        while a > 0 && curv[a - 1] > 0.5 * c {
            a -= 1;
        }
        while b + 1 < curv.len() && curv[b + 1] > 0.5 * c {
            b += 1;
        }
        (a, b)
    });
    Ok(LLCurve {
        points,
        transition_range,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub p_threshold_uw: f64,
    pub n_threshold_cm3: f64,
    pub n_transparency_cm3: f64,
}

/// Threshold from the gain-equals-loss condition.
///
/// N_th solves `Gamma v_g g(N_th) = 1 / tau_p` (closed form for both gain
/// models); the pump power follows from the carrier equation with the
/// stimulated term evaluated at S -> 0+.
pub fn threshold(params: &RateEqnParams) -> Result<ThresholdEstimate, LaserError> {
    params.validate()?;
    let inputs = params.raw();
    let n_th = inputs.n_at_gain_clamp()?;
    let rate = n_th / params.tau_total_s();
    let p_w = rate * params.pump_photon_energy_j() * params.v_active_cm3 / params.eta_pump;
    Ok(ThresholdEstimate {
        p_threshold_uw: p_w * 1e6,
        n_threshold_cm3: n_th,
        n_transparency_cm3: params.n_tr_cm3,
    })
}

/// Ratio of transparency to threshold carrier density, N_tr / N_th.
pub fn transparency_ratio(params: &RateEqnParams) -> Result<f64, LaserError> {
    let est = threshold(params)?;
    Ok(est.n_transparency_cm3 / est.n_threshold_cm3)
}
