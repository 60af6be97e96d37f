//! Effective mode volume from the electric-field energy density.

use serde::{Deserialize, Serialize};

use super::ModesError;
use crate::fdtd::Snapshot;
use crate::geometry::DielectricGrid;

/// Mode-size figures from a 2D run. The native quantity is the effective
/// area `A_eff = integral(eps |E|^2 dA) / max(eps |E|^2)`; the volume-style
/// numbers divide it by cubic half-wavelengths and therefore carry units of
/// 1/nm ("per unit length" of the missing third dimension). They are 2D
/// figures and are never silently promoted to 3D; use
/// [`ModeVolumeResult::pseudo_3d`] with an explicit effective height.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeVolumeResult {
    pub area_nm2: f64,
    /// A_eff / (lambda/2)^3, units 1/nm. 2D reduction figure.
    pub v_eff_air_per_nm: f64,
    /// A_eff / (lambda/2n)^3 = v_eff_air * n^3, units 1/nm.
    pub v_eff_material_per_nm: f64,
    pub peak_location_nm: (f64, f64),
    /// Peak energy density is interior to the grid.
    pub localized: bool,
    /// Index used for the material half-wavelength (the grid background).
    pub n_material: f64,
    pub lambda_nm: f64,
}

impl ModeVolumeResult {
    /// Promote to a pseudo-3D mode volume with an explicit effective slab
    /// height: V = A_eff * h. Returns (V in (lambda/2)^3, V in (lambda/2n)^3).
    pub fn pseudo_3d(&self, height_nm: f64) -> (f64, f64) {
        (
            self.v_eff_air_per_nm * height_nm,
            self.v_eff_material_per_nm * height_nm,
        )
    }
}

/// Effective mode volume of a snapshot taken at a field-energy extremum of
/// the cycle.
///
/// `freq` is the mode's normalized frequency a/lambda; the physical
/// wavelength follows from the grid pitch and the snapshot's normalized cell
/// size. A peak on the grid boundary marks a non-localized mode and is
/// flagged rather than trusted.
pub fn mode_volume(
    snapshot: &Snapshot,
    grid: &DielectricGrid,
    freq: f64,
) -> Result<ModeVolumeResult, ModesError> {
    if snapshot.shape() != grid.eps.dim() {
        return Err(ModesError::ShapeMismatch {
            field: snapshot.shape(),
            grid: grid.eps.dim(),
        });
    }
    if !(freq > 0.0) {
        return Err(ModesError::InvalidInput("freq must be positive".into()));
    }
    let (ny, nx) = grid.eps.dim();
    let mut total = 0.0;
    let mut peak = f64::NEG_INFINITY;
    let mut peak_idx = (0usize, 0usize);
    for j in 0..ny {
        for i in 0..nx {
            let eps = grid.eps[(j, i)];
            let ex = snapshot.ex[(j, i)];
            let ey = snapshot.ey[(j, i)];
            let d = eps * (ex * ex + ey * ey);
            total += d;
            if d > peak {
                peak = d;
                peak_idx = (j, i);
            }
        }
    }
    if !(peak > 0.0) {
        return Err(ModesError::InvalidInput(
            "electric field is identically zero".into(),
        ));
    }
    let cell_nm2 = grid.dx_nm * grid.dx_nm;
    let area_nm2 = total * cell_nm2 / peak;
    let (pj, pi) = peak_idx;
    let localized = pj > 0 && pj < ny - 1 && pi > 0 && pi < nx - 1;

    // lattice constant in nm recovered from the two pitches
    let a_nm = grid.dx_nm / snapshot.dx_norm;
    let lambda_nm = a_nm / freq;
    let n_material = grid
        .eps
        .iter()
        .cloned()
        .fold(1.0_f64, f64::max)
        .sqrt();
    let half_wavelength = lambda_nm / 2.0;
    let v_air = area_nm2 / half_wavelength.powi(3);
    Ok(ModeVolumeResult {
        area_nm2,
        v_eff_air_per_nm: v_air,
        v_eff_material_per_nm: v_air * n_material.powi(3),
        peak_location_nm: (grid.x_of(pi), grid.y_of(pj)),
        localized,
        n_material,
        lambda_nm,
    })
}
