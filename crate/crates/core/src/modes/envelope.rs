//! Gaussian fits to the envelope of the electric-field energy density.
//!
//! Cavity-mode densities oscillate at the lattice period; the physically
//! meaningful size is the envelope. Per axis, the envelope is the maximum
//! over the transverse coordinate followed by a running maximum over a
//! window of about one lattice constant, which bridges the nulls of the
//! Bloch-like oscillation.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::ModesError;
use crate::fitting::{levenberg_marquardt, r_squared};
use crate::geometry::DielectricGrid;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub sigma_x_nm: f64,
    pub sigma_y_nm: f64,
    pub center_nm: (f64, f64),
    /// Smaller of the two per-axis coefficients of determination.
    pub r_squared: f64,
    /// r^2 below 0.5: the envelope is not Gaussian-like.
    pub poor_fit: bool,
}

/// Fit `A exp(-x^2/2 sigma_x^2 - y^2/2 sigma_y^2)` to the density envelope.
///
/// `window_cells` is the running-maximum window (1 disables it); pass about
/// one lattice constant's worth of cells for lattice-periodic densities.
pub fn envelope_gaussian_fit(
    density: &Array2<f64>,
    grid: &DielectricGrid,
    window_cells: usize,
) -> Result<EnvelopeFit, ModesError> {
    if density.dim() != grid.eps.dim() {
        return Err(ModesError::ShapeMismatch {
            field: density.dim(),
            grid: grid.eps.dim(),
        });
    }
    if density.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(ModesError::InvalidInput(
            "density must be finite and non-negative".into(),
        ));
    }
    let (ny, nx) = density.dim();
    let mut peak = f64::NEG_INFINITY;
    let mut peak_idx = (0usize, 0usize);
    for j in 0..ny {
        for i in 0..nx {
            if density[(j, i)] > peak {
                peak = density[(j, i)];
                peak_idx = (j, i);
            }
        }
    }
    if !(peak > 0.0) {
        return Err(ModesError::InvalidInput("density is identically zero".into()));
    }
    if peak_idx.0 == 0 || peak_idx.0 == ny - 1 || peak_idx.1 == 0 || peak_idx.1 == nx - 1 {
        return Err(ModesError::PeakOnBoundary);
    }

    // transverse maximum per axis
    let env_x_raw: Vec<f64> = (0..nx)
        .map(|i| (0..ny).map(|j| density[(j, i)]).fold(0.0_f64, f64::max))
        .collect();
    let env_y_raw: Vec<f64> = (0..ny)
        .map(|j| (0..nx).map(|i| density[(j, i)]).fold(0.0_f64, f64::max))
        .collect();
    let env_x = running_max(&env_x_raw, window_cells);
    let env_y = running_max(&env_y_raw, window_cells);

    let xs: Vec<f64> = (0..nx).map(|i| grid.x_of(i)).collect();
    let ys: Vec<f64> = (0..ny).map(|j| grid.y_of(j)).collect();
    let (sigma_x, cx, r2x) = fit_axis(&xs, &env_x)?;
    let (sigma_y, cy, r2y) = fit_axis(&ys, &env_y)?;
    let r2 = r2x.min(r2y);
    Ok(EnvelopeFit {
        sigma_x_nm: sigma_x,
        sigma_y_nm: sigma_y,
        center_nm: (cx, cy),
        r_squared: r2,
        poor_fit: r2 < 0.5,
    })
}

fn running_max(v: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 {
        return v.to_vec();
    }
    let half = window / 2;
    (0..v.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(v.len());
            v[lo..hi].iter().cloned().fold(0.0_f64, f64::max)
        })
        .collect()
}

/// 1D Gaussian fit; returns (sigma, center, r^2).
fn fit_axis(xs: &[f64], env: &[f64]) -> Result<(f64, f64, f64), ModesError> {
    let (k_peak, &peak) = env
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    // moment-based initial width
    let total: f64 = env.iter().sum();
    let mean: f64 = xs.iter().zip(env).map(|(x, e)| x * e).sum::<f64>() / total;
    let var: f64 = xs
        .iter()
        .zip(env)
        .map(|(x, e)| (x - mean) * (x - mean) * e)
        .sum::<f64>()
        / total;
    let sigma0 = var.sqrt().max(xs[1] - xs[0]);
    let init = [peak, xs[k_peak], sigma0];
    let fit = levenberg_marquardt(xs, env, &init, 200, |x, p| {
        let d = (x - p[1]) / p[2];
        p[0] * (-0.5 * d * d).exp()
    })?;
    let params = fit.params;
    let predicted: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let d = (x - params[1]) / params[2];
            params[0] * (-0.5 * d * d).exp()
        })
        .collect();
    let r2 = r_squared(env, &predicted);
    Ok((params[2].abs(), params[1], r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::Array2;

    fn grid(n: usize, dx_nm: f64) -> DielectricGrid {
        DielectricGrid {
            eps: Array2::from_elem((n, n), 1.0),
            dx_nm,
            origin_nm: (
                -(n as f64) * dx_nm / 2.0 + dx_nm / 2.0,
                -(n as f64) * dx_nm / 2.0 + dx_nm / 2.0,
            ),
            n_eff: 1.0,
            provenance: None,
        }
    }

    fn gaussian_density(g: &DielectricGrid, sx: f64, sy: f64) -> Array2<f64> {
        let (ny, nx) = g.eps.dim();
        Array2::from_shape_fn((ny, nx), |(j, i)| {
            let x = g.x_of(i);
            let y = g.y_of(j);
            (-x * x / (2.0 * sx * sx) - y * y / (2.0 * sy * sy)).exp()
        })
    }

    #[test]
    fn exact_gaussian_recovered_to_1e6() {
        let g = grid(128, 50.0);
        let (sx, sy) = (1000.0, 600.0); // 1.0 um, 0.6 um
        let density = gaussian_density(&g, sx, sy);
        let fit = envelope_gaussian_fit(&density, &g, 1).unwrap();
        assert_relative_eq!(fit.sigma_x_nm, sx, max_relative = 1e-6);
        assert_relative_eq!(fit.sigma_y_nm, sy, max_relative = 1e-6);
        assert!(fit.center_nm.0.abs() < 1e-6 * sx);
        assert!(!fit.poor_fit);
        assert!(fit.r_squared > 0.999999);
    }

    #[test]
    fn bloch_modulated_gaussian_envelope_within_10_percent() {
        let g = grid(192, 25.0);
        let (sx, sy) = (800.0, 500.0);
        let a_nm = 300.0; // lattice period of the modulation
        let (ny, nx) = g.eps.dim();
        let density = Array2::from_shape_fn((ny, nx), |(j, i)| {
            let x = g.x_of(i);
            let y = g.y_of(j);
            let env = (-x * x / (2.0 * sx * sx) - y * y / (2.0 * sy * sy)).exp();
            let osc = (std::f64::consts::PI * x / a_nm).cos().powi(2)
                * (std::f64::consts::PI * y / a_nm).cos().powi(2);
            env * osc
        });
        let window = (a_nm / g.dx_nm).round() as usize; // 12 cells
        let fit = envelope_gaussian_fit(&density, &g, window).unwrap();
        assert!(
            (fit.sigma_x_nm - sx).abs() / sx < 0.10,
            "sigma_x {} vs {sx}",
            fit.sigma_x_nm
        );
        assert!(
            (fit.sigma_y_nm - sy).abs() / sy < 0.10,
            "sigma_y {} vs {sy}",
            fit.sigma_y_nm
        );
        // a pointwise Gaussian fit on the oscillatory density would be poor;
        // the envelope fit is not
        assert!(!fit.poor_fit);
    }

    #[test]
    fn isotropic_density_gives_equal_sigmas() {
        let g = grid(96, 40.0);
        let density = gaussian_density(&g, 700.0, 700.0);
        let fit = envelope_gaussian_fit(&density, &g, 1).unwrap();
        assert_relative_eq!(fit.sigma_x_nm, fit.sigma_y_nm, max_relative = 1e-9);
    }

    #[test]
    fn peak_on_boundary_rejected() {
        let g = grid(64, 40.0);
        let (ny, nx) = g.eps.dim();
        let density = Array2::from_shape_fn((ny, nx), |(_, i)| (i as f64) + 1.0);
        assert!(matches!(
            envelope_gaussian_fit(&density, &g, 1),
            Err(ModesError::PeakOnBoundary)
        ));
    }

    #[test]
    fn non_gaussian_envelope_flagged_poor() {
        let g = grid(96, 40.0);
        let (ny, nx) = g.eps.dim();
        // two well-separated blobs: badly non-Gaussian along x
        let density = Array2::from_shape_fn((ny, nx), |(j, i)| {
            let x = g.x_of(i);
            let y = g.y_of(j);
            let b1 = (-(x - 1200.0) * (x - 1200.0) / 2e4 - y * y / 2e4).exp();
            let b2 = (-(x + 1200.0) * (x + 1200.0) / 2e4 - y * y / 2e4).exp();
            b1 + 0.98 * b2
        });
        let fit = envelope_gaussian_fit(&density, &g, 1).unwrap();
        assert!(fit.poor_fit, "r^2 = {}", fit.r_squared);
    }
}
