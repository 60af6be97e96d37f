//! Fourier-space analysis: how much of a mode's in-plane momentum falls
//! inside the cladding light cone, where it can radiate vertically.

use ndarray::Array2;
use num_complex::Complex;
use rustfft::FftPlanner;

use super::ModesError;

/// 2D spatial power spectrum of one field component, with the light-cone
/// accounting. Axes are centered (ascending, DC in the middle), in units of
/// 2 pi / a.
#[derive(Debug, Clone)]
pub struct FourierMap {
    pub kx: Vec<f64>,
    pub ky: Vec<f64>,
    pub power: Array2<f64>,
    /// omega n_clad / c in the same units: freq * n_clad.
    pub light_cone_radius: f64,
    /// Power fraction with |k| < light_cone_radius.
    pub fraction_in_cone: f64,
    /// Power in the DC bin of the windowed transform.
    pub dc_power: f64,
    /// |sum of the raw field|^2 before windowing.
    pub dc_power_raw: f64,
    pub total_power: f64,
}

/// Tukey taper: flat center, cosine roll-off over `frac/2` at each end.
fn tukey(n: usize, frac: f64) -> Vec<f64> {
    if frac <= 0.0 {
        return vec![1.0; n];
    }
    let frac = frac.min(1.0);
    let edge = frac * (n as f64 - 1.0) / 2.0;
    (0..n)
        .map(|i| {
            let x = i as f64;
            let d = x.min(n as f64 - 1.0 - x);
            if d >= edge {
                1.0
            } else {
                0.5 * (1.0 - (std::f64::consts::PI * (1.0 - d / edge)).cos())
            }
        })
        .collect()
}

/// Power fraction of `field` inside the cladding light cone at normalized
/// frequency `freq`.
///
/// `dx_norm` is the cell size in units of a. The field is windowed by a
/// Tukey taper (`taper_frac` of each axis, 0 disables) before the transform
/// to suppress edge ringing; the raw-field DC power is reported separately.
pub fn light_cone_fraction(
    field: &Array2<f64>,
    dx_norm: f64,
    freq: f64,
    n_clad: f64,
    taper_frac: f64,
) -> Result<FourierMap, ModesError> {
    if !(dx_norm > 0.0) {
        return Err(ModesError::InvalidInput("dx_norm must be positive".into()));
    }
    if !(freq > 0.0) || !(n_clad >= 1.0) {
        return Err(ModesError::InvalidInput(
            "freq must be positive and n_clad >= 1".into(),
        ));
    }
    let (ny, nx) = field.dim();
    if nx < 4 || ny < 4 {
        return Err(ModesError::InvalidInput(format!(
            "field {ny}x{nx} too small for a spectrum"
        )));
    }
    let radius = freq * n_clad;
    let nyquist = 0.5 / dx_norm;
    if radius >= nyquist {
        return Err(ModesError::FreqInconsistent {
            freq,
            radius,
            nyquist,
        });
    }

    let raw_sum: f64 = field.iter().sum();
    let dc_power_raw = raw_sum * raw_sum;

    let wx = tukey(nx, taper_frac);
    let wy = tukey(ny, taper_frac);
    let mut data: Vec<Complex<f64>> = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            data.push(Complex::new(field[(j, i)] * wx[i] * wy[j], 0.0));
        }
    }

    let mut planner = FftPlanner::new();
    let fft_x = planner.plan_fft_forward(nx);
    let fft_y = planner.plan_fft_forward(ny);
    for row in data.chunks_mut(nx) {
        fft_x.process(row);
    }
    // transform columns via transpose, process, transpose back
    let mut tmp: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            tmp[i * ny + j] = data[j * nx + i];
        }
    }
    for col in tmp.chunks_mut(ny) {
        fft_y.process(col);
    }
    for i in 0..nx {
        for j in 0..ny {
            data[j * nx + i] = tmp[i * ny + j];
        }
    }

    // centered axes in units of 2 pi / a: k_m = m / (N dx)
    let centered = |n: usize, m: usize| -> isize {
        let m = m as isize;
        let n = n as isize;
        if m < n - n / 2 {
            m
        } else {
            m - n
        }
    };
    let kx: Vec<f64> = (0..nx)
        .map(|i| centered(nx, i) as f64 / (nx as f64 * dx_norm))
        .collect();
    let ky: Vec<f64> = (0..ny)
        .map(|j| centered(ny, j) as f64 / (ny as f64 * dx_norm))
        .collect();

    let mut total = 0.0;
    let mut in_cone = 0.0;
    let mut dc_power = 0.0;
    let mut power_unshifted = Array2::zeros((ny, nx));
    for j in 0..ny {
        for i in 0..nx {
            let p = data[j * nx + i].norm_sqr();
            power_unshifted[(j, i)] = p;
            total += p;
            let k = kx[i].hypot(ky[j]);
            if k < radius {
                in_cone += p;
            }
            if centered(nx, i) == 0 && centered(ny, j) == 0 {
                dc_power = p;
            }
        }
    }

    // shift to centered order (ascending k) for the exported map
    let shift_x = nx.div_ceil(2);
    let shift_y = ny.div_ceil(2);
    let mut power = Array2::zeros((ny, nx));
    for j in 0..ny {
        for i in 0..nx {
            power[((j + shift_y) % ny, (i + shift_x) % nx)] = power_unshifted[(j, i)];
        }
    }
    let mut kx_sorted = kx.clone();
    let mut ky_sorted = ky.clone();
    kx_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ky_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    Ok(FourierMap {
        kx: kx_sorted,
        ky: ky_sorted,
        power,
        light_cone_radius: radius,
        fraction_in_cone: if total > 0.0 { in_cone / total } else { 0.0 },
        dc_power,
        dc_power_raw,
        total_power: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_field_is_pure_dc() {
        let field = Array2::from_elem((32, 32), 2.5);
        let map = light_cone_fraction(&field, 1.0 / 16.0, 0.25, 1.0, 0.0).unwrap();
        assert_relative_eq!(map.fraction_in_cone, 1.0, max_relative = 1e-12);
        assert_relative_eq!(map.dc_power, map.total_power, max_relative = 1e-12);
        assert_relative_eq!(map.dc_power_raw, (2.5 * 32.0 * 32.0_f64).powi(2));
    }

    #[test]
    fn high_k_sine_is_outside_the_cone() {
        // field = sin(k0 x) with k0 at 4x the cone radius
        let n = 128;
        let dx = 1.0 / 16.0;
        let freq = 0.25;
        let k0_cycles = 4.0 * freq; // cycles per a, = 1 cycle per 16 cells... times dx
        let field = Array2::from_shape_fn((n, n), |(_, i)| {
            (2.0 * std::f64::consts::PI * k0_cycles * i as f64 * dx).sin()
        });
        let map = light_cone_fraction(&field, dx, freq, 1.0, 0.1).unwrap();
        assert!(
            map.fraction_in_cone < 0.05,
            "cone fraction {}",
            map.fraction_in_cone
        );
    }

    #[test]
    fn odd_field_has_vanishing_dc() {
        let n = 64;
        let field = Array2::from_shape_fn((n, n), |(j, i)| {
            let x = i as f64 - (n as f64 - 1.0) / 2.0;
            let y = j as f64 - (n as f64 - 1.0) / 2.0;
            x * (-(x * x + y * y) / 50.0).exp()
        });
        let map = light_cone_fraction(&field, 1.0 / 16.0, 0.25, 1.0, 0.0).unwrap();
        assert!(map.dc_power_raw < 1e-18 * map.total_power);
        assert!(map.dc_power < 1e-18 * map.total_power);
    }

    #[test]
    fn parseval_identity_without_taper() {
        let n = 48;
        let mut state = 123456789_u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let field = Array2::from_shape_fn((n, n), |_| next());
        let map = light_cone_fraction(&field, 1.0 / 16.0, 0.25, 1.0, 0.0).unwrap();
        let spatial: f64 = field.iter().map(|v| v * v).sum();
        let spectral = map.total_power / (n * n) as f64;
        assert_relative_eq!(spatial, spectral, max_relative = 1e-10);
    }

    #[test]
    fn cone_radius_beyond_nyquist_is_inconsistent() {
        let field = Array2::from_elem((32, 32), 1.0);
        // nyquist = 0.5/dx = 1.0; radius = freq*n_clad = 1.2
        assert!(matches!(
            light_cone_fraction(&field, 0.5, 1.2, 1.0, 0.0),
            Err(ModesError::FreqInconsistent { .. })
        ));
    }

    #[test]
    fn hermitian_symmetry_of_real_field_spectrum() {
        let n = 32;
        let field = Array2::from_shape_fn((n, n), |(j, i)| {
            ((i * 7 + j * 3) % 11) as f64 - 5.0
        });
        let map = light_cone_fraction(&field, 1.0 / 8.0, 0.2, 1.0, 0.0).unwrap();
        // centered power map of a real field: P(k) = P(-k)
        for j in 1..n {
            for i in 1..n {
                let p = map.power[(j, i)];
                let q = map.power[(n - j, n - i)];
                assert!(
                    (p - q).abs() <= 1e-9 * p.abs().max(q.abs()).max(1e-30),
                    "not Hermitian at ({j},{i})"
                );
            }
        }
    }
}
