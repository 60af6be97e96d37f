//! Harmonic inversion of probe records by least-squares matrix-pencil
//! decomposition into damped sinusoids A e^{-t/tau} cos(w t + phi).

use nalgebra::{Complex, DMatrix, DVector};

use super::{ModesError, ResonanceEstimate};
use crate::fdtd::FieldRecord;

#[derive(Debug, Clone)]
pub struct HarmonicInversionOptions {
    /// Samples taken from the start of the analysis window; the pencil SVD
    /// cost grows cubically with this.
    pub max_samples: usize,
    /// Singular values below this ratio of the largest are noise.
    pub sv_ratio: f64,
    /// Reported Q saturates here; beyond it the lifetime exceeds the record.
    pub q_cap: f64,
    /// Boxcar-decimate heavily oversampled records so the pencil window
    /// spans more of the decay. The factor is chosen from the band's upper
    /// edge; 1 disables.
    pub auto_decimate: bool,
}

impl Default for HarmonicInversionOptions {
    fn default() -> Self {
        HarmonicInversionOptions {
            max_samples: 1024,
            sv_ratio: 1e-8,
            q_cap: 1e9,
            auto_decimate: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModeExtraction {
    /// Modes inside the requested band, sorted by amplitude (descending).
    pub modes: Vec<ResonanceEstimate>,
    /// Set when the pencil was ill-conditioned and poles were discarded.
    pub warning: Option<String>,
}

/// Extract damped sinusoids from the post-source part of a probe record.
///
/// `band` is a normalized-frequency interval (a/lambda); only modes inside
/// it are returned, sorted by amplitude. Model order is selected by the
/// singular-value threshold in `opts`.
pub fn harmonic_inversion(
    record: &FieldRecord,
    band: (f64, f64),
    max_modes: usize,
    opts: &HarmonicInversionOptions,
) -> Result<ModeExtraction, ModesError> {
    if !(band.0 >= 0.0) || !(band.1 > band.0) {
        return Err(ModesError::InvalidInput(format!(
            "band ({}, {}) must be an ascending frequency interval",
            band.0, band.1
        )));
    }
    if max_modes == 0 {
        return Ok(ModeExtraction {
            modes: Vec::new(),
            warning: None,
        });
    }
    let samples = &record.samples[record.start_step.min(record.samples.len())..];
    // need ten periods of the lowest band frequency
    if band.0 > 0.0 {
        let need = (10.0 / (band.0 * record.dt)).ceil() as usize;
        if samples.len() < need {
            return Err(ModesError::RecordTooShort {
                got: samples.len(),
                need,
            });
        }
    }
    // keep the band's top frequency below 0.4 cycles per (decimated) sample
    let decim = if opts.auto_decimate {
        ((0.4 / (band.1 * record.dt)).floor() as usize).max(1)
    } else {
        1
    };
    let dt = record.dt * decim as f64;
    let decimated: Vec<f64>;
    let samples: &[f64] = if decim > 1 {
        decimated = samples
            .chunks_exact(decim)
            .map(|c| c.iter().sum::<f64>() / decim as f64)
            .collect();
        &decimated
    } else {
        samples
    };
    let k = samples.len().min(opts.max_samples);
    if k < 8 {
        return Err(ModesError::RecordTooShort { got: k, need: 8 });
    }
    let s = &samples[..k];
    let l = k / 2;

    // Hankel data matrix, (k - l) x (l + 1)
    let hankel = DMatrix::from_fn(k - l, l + 1, |r, c| s[r + c]);
    let svd = hankel.svd(false, true);
    let sv = &svd.singular_values;
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let sv0 = sv[0];
    if !(sv0 > 0.0) {
        return Ok(ModeExtraction {
            modes: Vec::new(),
            warning: None,
        });
    }
    let mut order = sv.iter().take_while(|&&x| x >= opts.sv_ratio * sv0).count();
    order = order.min(2 * max_modes).min(l);
    if order == 0 {
        return Ok(ModeExtraction {
            modes: Vec::new(),
            warning: None,
        });
    }

    // signal-subspace pencil: poles are eigenvalues of pinv(V1) V2
    let v = v_t.rows(0, order).transpose(); // (l + 1) x order
    let v1 = v.rows(0, l).into_owned();
    let v2 = v.rows(1, l).into_owned();
    let v1t_v1 = v1.transpose() * &v1;
    let v1t_v2 = v1.transpose() * &v2;
    let Some(a) = v1t_v1.lu().solve(&v1t_v2) else {
        return Ok(ModeExtraction {
            modes: Vec::new(),
            warning: Some("singular pencil; no modes extracted".into()),
        });
    };
    let eigs = a.complex_eigenvalues();

    // keep physically meaningful poles
    let mut warning = None;
    let mut poles: Vec<Complex<f64>> = Vec::new();
    for z in eigs.iter() {
        let m = z.norm();
        if !m.is_finite() || !(1e-8..=1.5).contains(&m) {
            warning = Some("ill-conditioned pencil; some poles discarded".into());
            continue;
        }
        poles.push(*z);
    }
    if poles.is_empty() {
        return Ok(ModeExtraction {
            modes: Vec::new(),
            warning,
        });
    }

    // complex amplitudes by least squares over the analysis window
    let m = poles.len();
    let mut vhv = DMatrix::<Complex<f64>>::zeros(m, m);
    let mut vhs = DVector::<Complex<f64>>::zeros(m);
    let mut powers: Vec<Complex<f64>> = vec![Complex::new(1.0, 0.0); m];
    for &sample in s.iter() {
        for r in 0..m {
            let pr = powers[r].conj();
            vhs[r] += pr * sample;
            for c in 0..m {
                vhv[(r, c)] += pr * powers[c];
            }
        }
        for (p, z) in powers.iter_mut().zip(&poles) {
            *p *= z;
        }
    }
    let amps = match vhv.lu().solve(&vhs) {
        Some(x) => x,
        None => {
            return Ok(ModeExtraction {
                modes: Vec::new(),
                warning: Some("amplitude solve failed; no modes extracted".into()),
            })
        }
    };

    // reconstruction residual over the window
    let mut recon = vec![0.0_f64; k];
    let mut powers: Vec<Complex<f64>> = vec![Complex::new(1.0, 0.0); m];
    for r in recon.iter_mut() {
        let mut acc = Complex::new(0.0, 0.0);
        for (p, a) in powers.iter().zip(amps.iter()) {
            acc += a * p;
        }
        *r = acc.re;
        for (p, z) in powers.iter_mut().zip(&poles) {
            *p *= z;
        }
    }
    let sig_pow: f64 = s.iter().map(|x| x * x).sum();
    let err_pow: f64 = s
        .iter()
        .zip(&recon)
        .map(|(x, r)| (x - r) * (x - r))
        .sum();
    let confidence = if sig_pow > 0.0 {
        (err_pow / sig_pow).sqrt()
    } else {
        0.0
    };

    let mut modes = Vec::new();
    for (z, a) in poles.iter().zip(amps.iter()) {
        if z.im <= 1e-12 {
            continue; // keep one of each conjugate pair
        }
        let omega = z.arg(); // rad/sample, positive
        let decay = -z.norm().ln(); // per sample
        let freq = omega / (2.0 * std::f64::consts::PI) / dt;
        if freq < band.0 || freq > band.1 {
            continue;
        }
        let (q, q_capped) = if decay > 0.0 {
            let q = omega / (2.0 * decay);
            if q > opts.q_cap {
                (opts.q_cap, true)
            } else {
                (q, false)
            }
        } else {
            (opts.q_cap, true)
        };
        modes.push(ResonanceEstimate {
            freq,
            q,
            amplitude: 2.0 * a.norm(),
            phase_rad: a.arg(),
            confidence,
            q_capped,
        });
    }
    modes.sort_by(|x, y| y.amplitude.partial_cmp(&x.amplitude).unwrap());
    modes.truncate(max_modes);
    Ok(ModeExtraction { modes, warning })
}
