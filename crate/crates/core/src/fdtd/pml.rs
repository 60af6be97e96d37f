//! Convolutional PML with polynomial-graded conductivity.

use serde::{Deserialize, Serialize};

use super::FdtdError;

/// Absorbing-layer controls: `thickness_cells` deep on each absorbing side,
/// conductivity graded as depth^grading_order up to
/// `sigma_max_scale * 0.8 (order + 1) / dx` (normalized units).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PmlParams {
    pub thickness_cells: usize,
    pub sigma_max_scale: f64,
    pub grading_order: f64,
}

impl Default for PmlParams {
    fn default() -> Self {
        PmlParams {
            thickness_cells: 12,
            sigma_max_scale: 1.0,
            grading_order: 3.0,
        }
    }
}

impl PmlParams {
    pub fn validate(&self) -> Result<(), FdtdError> {
        if self.thickness_cells < 8 {
            return Err(FdtdError::InvalidConfig(format!(
                "PML thickness must be >= 8 cells, got {}",
                self.thickness_cells
            )));
        }
        if !(2.0..=4.0).contains(&self.grading_order) {
            return Err(FdtdError::InvalidConfig(format!(
                "PML grading order must lie in [2, 4], got {}",
                self.grading_order
            )));
        }
        if !(self.sigma_max_scale > 0.0) {
            return Err(FdtdError::InvalidConfig(
                "PML sigma_max_scale must be positive".into(),
            ));
        }
        Ok(())
    }

    fn sigma_max(&self, dx: f64) -> f64 {
        self.sigma_max_scale * 0.8 * (self.grading_order + 1.0) / dx
    }
}

/// Per-axis recursion coefficients and auxiliary fields for the CPML update.
///
/// The psi arrays store the convolution accumulators in raw-difference units;
/// the field updates add them to the corresponding finite difference.
#[derive(Debug, Clone)]
pub struct PmlState {
    pub bx_int: Vec<f64>,
    pub cx_int: Vec<f64>,
    pub bx_half: Vec<f64>,
    pub cx_half: Vec<f64>,
    pub by_int: Vec<f64>,
    pub cy_int: Vec<f64>,
    pub by_half: Vec<f64>,
    pub cy_half: Vec<f64>,
    pub psi_ex_y: Vec<f64>,
    pub psi_ey_x: Vec<f64>,
    pub psi_hz_x: Vec<f64>,
    pub psi_hz_y: Vec<f64>,
}

impl PmlState {
    /// Build coefficients. `absorb_*_lo` disable the low-side layers where a
    /// mirror wall replaces absorption.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        params: &PmlParams,
        nx: usize,
        ny: usize,
        dx: f64,
        dt: f64,
        absorb_x_lo: bool,
        absorb_y_lo: bool,
    ) -> PmlState {
        let t = params.thickness_cells as f64;
        let m = params.grading_order;
        let smax = params.sigma_max(dx);
        let profile = |pos: f64, n: usize, absorb_lo: bool| -> (f64, f64) {
            let depth_lo = t - pos;
            let depth_hi = pos - (n as f64 - t);
            let mut depth = depth_hi.max(0.0);
            if absorb_lo {
                depth = depth.max(depth_lo);
            }
            if depth <= 0.0 {
                return (0.0, 0.0);
            }
            let sigma = smax * (depth / t).powf(m);
            let b = (-sigma * dt).exp();
            (b, b - 1.0)
        };
        let build = |n: usize, offset: f64, absorb_lo: bool| -> (Vec<f64>, Vec<f64>) {
            let mut bs = vec![0.0; n];
            let mut cs = vec![0.0; n];
            for (k, (b, c)) in bs.iter_mut().zip(cs.iter_mut()).enumerate() {
                let (bb, cc) = profile(k as f64 + offset, n, absorb_lo);
                *b = bb;
                *c = cc;
            }
            (bs, cs)
        };
        let (bx_int, cx_int) = build(nx, 0.0, absorb_x_lo);
        let (bx_half, cx_half) = build(nx, 0.5, absorb_x_lo);
        let (by_int, cy_int) = build(ny, 0.0, absorb_y_lo);
        let (by_half, cy_half) = build(ny, 0.5, absorb_y_lo);
        PmlState {
            bx_int,
            cx_int,
            bx_half,
            cx_half,
            by_int,
            cy_int,
            by_half,
            cy_half,
            psi_ex_y: vec![0.0; nx * ny],
            psi_ey_x: vec![0.0; nx * ny],
            psi_hz_x: vec![0.0; nx * ny],
            psi_hz_y: vec![0.0; nx * ny],
        }
    }
}
