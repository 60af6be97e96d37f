//! Predicted emitted power vs pump-beam position.
//!
//! Both the cavity-mode envelope and the pump beam are Gaussian, so their
//! overlap integral is itself a Gaussian in the displacement with combined
//! per-axis width sqrt(sigma_mode^2 + sigma_beam^2).

use crate::modes::EnvelopeFit;

/// Relative emitted power at each pump position (nm, cavity coordinates),
/// normalized to 1.0 at zero displacement from the envelope center.
pub fn pump_overlap_scan(
    envelope: &EnvelopeFit,
    beam_sigma_nm: f64,
    positions: &[(f64, f64)],
) -> Vec<f64> {
    let sx2 = envelope.sigma_x_nm * envelope.sigma_x_nm + beam_sigma_nm * beam_sigma_nm;
    let sy2 = envelope.sigma_y_nm * envelope.sigma_y_nm + beam_sigma_nm * beam_sigma_nm;
    positions
        .iter()
        .map(|&(x, y)| {
            let dx = x - envelope.center_nm.0;
            let dy = y - envelope.center_nm.1;
            (-dx * dx / (2.0 * sx2) - dy * dy / (2.0 * sy2)).exp()
        })
        .collect()
}
