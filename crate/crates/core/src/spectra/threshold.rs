//! Two-segment threshold extraction from L-L curves.
//!
//! The pump axis is split at every admissible index, straight lines are
//! fitted on both sides, and the split with the smallest total squared
//! residual wins. The threshold is where the above-threshold line,
//! extrapolated back, crosses the below-threshold line.

use serde::{Deserialize, Serialize};

use super::{LLData, SpectraError};
use crate::fitting::{fit_line, Line};

/// Which column of the L-L data to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalColumn {
    /// Power in the laser line.
    Line,
    /// Off-resonance background emission; its slope change is weak, so the
    /// crossing is clamped to the split interval.
    Background,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub below_slope: f64,
    pub below_intercept: f64,
    pub above_slope: f64,
    pub above_intercept: f64,
    pub p_threshold_uw: f64,
    /// Index ranges `[0, split)` and `[split, n)` used for the two lines.
    pub split_index: usize,
    pub n_points: usize,
    pub sse_total: f64,
}

const MIN_SEGMENT: usize = 4;

pub fn fit_threshold(data: &LLData, which: SignalColumn) -> Result<ThresholdFit, SpectraError> {
    data.validate()?;
    let ys: &[f64] = match which {
        SignalColumn::Line => &data.line_power,
        SignalColumn::Background => &data.background_power,
    };
    let xs: &[f64] = &data.pump_uw;
    let n = xs.len();
    if n < 2 * MIN_SEGMENT {
        return Err(SpectraError::TooFewSamples {
            got: n,
            need: 2 * MIN_SEGMENT,
        });
    }

    let (_, sse_single) = fit_line(xs, ys)?;
    let scale: f64 = ys.iter().map(|y| y * y).sum::<f64>().max(1e-300);

    let mut best: Option<(usize, Line, Line, f64)> = None;
    for split in MIN_SEGMENT..=(n - MIN_SEGMENT) {
        let (below, sse_b) = fit_line(&xs[..split], &ys[..split])?;
        let (above, sse_a) = fit_line(&xs[split..], &ys[split..])?;
        let total = sse_b + sse_a;
        if best.as_ref().is_none_or(|b| total < b.3) {
            best = Some((split, below, above, total));
        }
    }
    let (split, below, above, sse_total) = best.unwrap();

    // a split must beat the single line by more than 5% of its residual;
    // an already-perfect single line has no threshold at all
    if sse_single < 1e-20 * scale || sse_total > 0.95 * sse_single {
        return Err(SpectraError::NoThreshold(
            "no split improves on a single straight line".into(),
        ));
    }
    if above.slope <= below.slope {
        return Err(SpectraError::NoThreshold(
            "no upward slope change across the candidate split".into(),
        ));
    }
    let crossing = below
        .intersect_x(&above)
        .ok_or_else(|| SpectraError::NoThreshold("segments are parallel".into()))?;
    let p_threshold_uw = match which {
        SignalColumn::Line => crossing.clamp(xs[0], xs[n - 1]),
        // weak background kinks give ill-conditioned crossings; stay at the
        // observed slope-change abscissa
        SignalColumn::Background => crossing.clamp(xs[split - 1], xs[split]),
    };
    Ok(ThresholdFit {
        below_slope: below.slope,
        below_intercept: below.intercept,
        above_slope: above.slope,
        above_intercept: above.intercept,
        p_threshold_uw,
        split_index: split,
        n_points: n,
        sse_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Two-segment data with a knee: below-threshold slope `s0`, above `s1`.
    pub(crate) fn synth_ll(knee_uw: f64, s0: f64, s1: f64, n: usize, span: (f64, f64)) -> LLData {
        let pump_uw: Vec<f64> = (0..n)
            .map(|i| span.0 + (span.1 - span.0) * i as f64 / (n - 1) as f64)
            .collect();
        let y = |p: f64| {
            if p <= knee_uw {
                s0 * p
            } else {
                s0 * knee_uw + s1 * (p - knee_uw)
            }
        };
        let line_power: Vec<f64> = pump_uw.iter().map(|&p| y(p)).collect();
        let background_power = line_power.clone();
        LLData {
            pump_uw,
            line_power,
            background_power,
        }
    }

    #[test]
    fn clean_knee_at_360_recovered() {
        let data = synth_ll(360.0, 0.05, 1.0, 40, (50.0, 700.0));
        let fit = fit_threshold(&data, SignalColumn::Line).unwrap();
        assert!(
            (fit.p_threshold_uw - 360.0).abs() <= 1.0,
            "threshold {}",
            fit.p_threshold_uw
        );
        assert!(fit.above_slope > fit.below_slope);
    }

    #[test]
    fn straight_line_yields_no_threshold() {
        let pump_uw: Vec<f64> = (0..30).map(|i| 10.0 + 10.0 * i as f64).collect();
        let line_power: Vec<f64> = pump_uw.iter().map(|&p| 0.7 * p + 3.0).collect();
        let data = LLData {
            background_power: line_power.clone(),
            pump_uw,
            line_power,
        };
        assert!(matches!(
            fit_threshold(&data, SignalColumn::Line),
            Err(SpectraError::NoThreshold(_))
        ));
    }

    #[test]
    fn noisy_knees_recovered_within_10_percent() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for &knee in &[360.0, 120.0] {
            let span = (knee * 0.15, knee * 2.0);
            let mut errors = Vec::new();
            for _ in 0..100 {
                let mut data = synth_ll(knee, 0.05, 1.0, 40, span);
                for v in data.line_power.iter_mut() {
                    *v *= 1.0 + 0.05 * (rng.random::<f64>() * 2.0 - 1.0);
                }
                let fit = fit_threshold(&data, SignalColumn::Line).unwrap();
                errors.push((fit.p_threshold_uw - knee).abs() / knee);
            }
            errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = errors[errors.len() / 2];
            assert!(median < 0.10, "median error {median} for knee {knee}");
        }
    }

    #[test]
    fn background_mode_stays_at_the_split() {
        // weak slope change typical of background emission
        let data = synth_ll(365.0, 0.50, 0.65, 40, (50.0, 700.0));
        let fit = fit_threshold(&data, SignalColumn::Background).unwrap();
        assert!(
            (fit.p_threshold_uw - 365.0).abs() < 25.0,
            "threshold {}",
            fit.p_threshold_uw
        );
    }

    #[test]
    fn affine_power_rescale_leaves_threshold_unchanged() {
        let data = synth_ll(360.0, 0.05, 1.0, 40, (50.0, 700.0));
        let base = fit_threshold(&data, SignalColumn::Line).unwrap();
        let mut scaled = data.clone();
        for v in scaled.line_power.iter_mut() {
            *v = 17.5 * *v + 400.0;
        }
        let fit = fit_threshold(&scaled, SignalColumn::Line).unwrap();
        assert!(
            (fit.p_threshold_uw - base.p_threshold_uw).abs() <= 1e-9 * base.p_threshold_uw,
            "affine invariance violated: {} vs {}",
            fit.p_threshold_uw,
            base.p_threshold_uw
        );
    }

    #[test]
    fn pump_axis_scaling_scales_threshold() {
        let data = synth_ll(360.0, 0.05, 1.0, 40, (50.0, 700.0));
        let base = fit_threshold(&data, SignalColumn::Line).unwrap();
        let mut scaled = data.clone();
        for p in scaled.pump_uw.iter_mut() {
            *p *= 3.0;
        }
        let fit = fit_threshold(&scaled, SignalColumn::Line).unwrap();
        assert_relative_eq!(
            fit.p_threshold_uw,
            3.0 * base.p_threshold_uw,
            max_relative = 1e-9
        );
    }

    #[test]
    fn too_few_points_rejected() {
        let data = synth_ll(100.0, 0.1, 1.0, 6, (10.0, 200.0));
        assert!(matches!(
            fit_threshold(&data, SignalColumn::Line),
            Err(SpectraError::TooFewSamples { .. })
        ));
    }
}
