//! Small shared fitting utilities: Levenberg-Marquardt nonlinear least
//! squares with a forward-difference Jacobian, and straight-line OLS.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("fit did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("degenerate fit problem: {0}")]
    Degenerate(String),
}

/// Result of a nonlinear least-squares fit.
#[derive(Debug, Clone)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// Sum of squared residuals at the solution.
    pub sse: f64,
    pub iterations: usize,
}

/// Minimize sum((model(x_i, p) - y_i)^2) over p with Levenberg-Marquardt.
///
/// `model` evaluates the fit function at one abscissa. Convergence is on the
/// relative change of the SSE and of the parameter vector.
pub fn levenberg_marquardt<F>(
    xs: &[f64],
    ys: &[f64],
    initial: &[f64],
    max_iter: usize,
    model: F,
) -> Result<LmFit, FitError>
where
    F: Fn(f64, &[f64]) -> f64,
{
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let np = initial.len();
    if n < np {
        return Err(FitError::Degenerate(format!(
            "{n} points cannot constrain {np} parameters"
        )));
    }
    let residuals = |p: &[f64]| -> DVector<f64> {
        DVector::from_iterator(n, xs.iter().zip(ys).map(|(&x, &y)| model(x, p) - y))
    };
    let mut p = initial.to_vec();
    let mut r = residuals(&p);
    let mut sse = r.norm_squared();
    let mut lambda = 1e-3;

    for iter in 0..max_iter {
        // forward-difference Jacobian
        let mut jac = DMatrix::zeros(n, np);
        for k in 0..np {
            let h = 1e-7 * p[k].abs().max(1e-10);
            let mut pk = p.clone();
            pk[k] += h;
            let rk = residuals(&pk);
            for i in 0..n {
                jac[(i, k)] = (rk[i] - r[i]) / h;
            }
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;

        let mut improved = false;
        for _ in 0..15 {
            let mut damped = jtj.clone();
            for k in 0..np {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-30);
            }
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(pi, si)| pi - si).collect();
            let rt = residuals(&trial);
            let sse_t = rt.norm_squared();
            if sse_t.is_finite() && sse_t < sse {
                let rel_drop = (sse - sse_t) / sse.max(1e-300);
                let max_rel_step = p
                    .iter()
                    .zip(&trial)
                    .map(|(a, b)| (a - b).abs() / a.abs().max(1e-12))
                    .fold(0.0_f64, f64::max);
                p = trial;
                r = rt;
                sse = sse_t;
                lambda = (lambda * 0.3).max(1e-14);
                improved = true;
                if rel_drop < 1e-14 || max_rel_step < 1e-12 || sse < 1e-300 {
                    return Ok(LmFit {
                        params: p,
                        sse,
                        iterations: iter + 1,
                    });
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
        if !improved {
            // stuck: either converged at a minimum or genuinely failing
            if sse.is_finite() {
                return Ok(LmFit {
                    params: p,
                    sse,
                    iterations: iter + 1,
                });
            }
            return Err(FitError::NoConvergence(max_iter));
        }
    }
    Ok(LmFit {
        params: p,
        sse,
        iterations: max_iter,
    })
}

/// Straight line y = slope * x + intercept by ordinary least squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    /// Abscissa where two lines cross.
    pub fn intersect_x(&self, other: &Line) -> Option<f64> {
        let dm = self.slope - other.slope;
        if dm.abs() < 1e-300 {
            return None;
        }
        Some((other.intercept - self.intercept) / dm)
    }
}

/// OLS line fit; returns the line and its sum of squared residuals.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(Line, f64), FitError> {
    let n = xs.len();
    if n < 2 {
        return Err(FitError::Degenerate("need at least 2 points".into()));
    }
    let nf = n as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let det = nf * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(FitError::Degenerate("all abscissas identical".into()));
    }
    let slope = (nf * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / nf;
    let line = Line { slope, intercept };
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let e = line.at(x) - y;
            e * e
        })
        .sum();
    Ok((line, sse))
}

/// Coefficient of determination of predictions vs observations.
pub fn r_squared(ys: &[f64], predicted: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean) * (y - mean)).sum();
    let ss_res: f64 = ys
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p) * (y - p))
        .sum();
    if ss_tot <= 0.0 {
        return if ss_res <= 1e-30 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}
