//! Least-squares fits for the sweep scenarios.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

fn check_lengths(t: &[f64], y: &[f64], min: usize) -> Result<()> {
    if t.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} abscissae, {} values",
            t.len(),
            y.len()
        )));
    }
    if t.len() < min {
        return Err(Error::InvalidArgument(format!(
            "need at least {min} points, got {}",
            t.len()
        )));
    }
    Ok(())
}

/// Weighted linear least squares. Returns coefficients, their covariance and the weighted residual.
fn weighted_lstsq(design: &DMatrix<f64>, y: &[f64], w: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>, f64)> {
    let n = y.len();
    let mut a = design.clone();
    let mut b = DVector::from_column_slice(y);
    for i in 0..n {
        let s = w[i].max(0.0).sqrt();
        a.row_mut(i).scale_mut(s);
        b[i] *= s;
    }
    let normal = a.transpose() * &a;
    let inv = normal
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("singular fit design".into()))?;
    let coef = &inv * a.transpose() * &b;
    let resid = (&a * &coef - &b).norm_squared();
    Ok((coef, inv, resid))
}

/// Straight line `y = intercept + slope x` fitted with weights `w`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_sigma: f64,
    pub slope_sigma: f64,
}

pub fn fit_line(x: &[f64], y: &[f64], w: &[f64]) -> Result<LineFit> {
    check_lengths(x, y, 2)?;
    let design = DMatrix::from_fn(x.len(), 2, |i, j| if j == 0 { 1.0 } else { x[i] });
    let (coef, cov, _) = weighted_lstsq(&design, y, w)?;
    Ok(LineFit {
        intercept: coef[0],
        slope: coef[1],
        intercept_sigma: cov[(0, 0)].sqrt(),
        slope_sigma: cov[(1, 1)].sqrt(),
    })
}

/// `y = A exp(-t / tau)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExponentialFit {
    pub amplitude: f64,
    pub tau: f64,
    pub tau_sigma: f64,
}

impl ExponentialFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (-t / self.tau).exp()
    }

    /// Time at which the curve crosses `level`.
    pub fn crossing(&self, level: f64) -> f64 {
        self.tau * (self.amplitude / level).ln()
    }
}

/// Log-linear fit of an exponential decay. `sigma` are the standard errors of `y`;
/// points with non-positive values are skipped.
pub fn fit_exponential(t: &[f64], y: &[f64], sigma: &[f64]) -> Result<ExponentialFit> {
    check_lengths(t, y, 2)?;
    let (mut tx, mut ly, mut w) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..t.len() {
        if y[i] > 0.0 && sigma[i] > 0.0 {
            tx.push(t[i]);
            ly.push(y[i].ln());
            w.push((y[i] / sigma[i]).powi(2));
        }
    }
    let line = fit_line(&tx, &ly, &w)?;
    if line.slope >= 0.0 {
        return Err(Error::InvalidArgument("data do not decay".into()));
    }
    let tau = -1.0 / line.slope;
    Ok(ExponentialFit {
        amplitude: line.intercept.exp(),
        tau,
        tau_sigma: tau * tau * line.slope_sigma,
    })
}

/// `y = a + (b + b' t) cos(omega t) + (c + c' t) sin(omega t)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SinusoidFit {
    pub offset: f64,
    pub omega: f64,
    pub period: f64,
    pub cos: [f64; 2],
    pub sin: [f64; 2],
    pub residual: f64,
}

impl SinusoidFit {
    pub fn eval(&self, t: f64) -> f64 {
        let (s, c) = (self.omega * t).sin_cos();
        self.offset + (self.cos[0] + self.cos[1] * t) * c + (self.sin[0] + self.sin[1] * t) * s
    }
}

fn sinusoid_at(t: &[f64], y: &[f64], w: &[f64], omega: f64) -> Result<SinusoidFit> {
    let design = DMatrix::from_fn(t.len(), 5, |i, j| {
        let (s, c) = (omega * t[i]).sin_cos();
        match j {
            0 => 1.0,
            1 => c,
            2 => t[i] * c,
            3 => s,
            _ => t[i] * s,
        }
    });
    let (coef, _, residual) = weighted_lstsq(&design, y, w)?;
    Ok(SinusoidFit {
        offset: coef[0],
        omega,
        period: 2.0 * std::f64::consts::PI / omega,
        cos: [coef[1], coef[2]],
        sin: [coef[3], coef[4]],
        residual,
    })
}

/// Fits a slowly damped sinusoid with period in `[period_min, period_max]`.
///
/// The frequency is found by a grid scan of the residual followed by a
/// golden-section refinement; the remaining parameters are linear.
pub fn fit_sinusoid(t: &[f64], y: &[f64], w: &[f64], period_min: f64, period_max: f64) -> Result<SinusoidFit> {
    check_lengths(t, y, 6)?;
    if !(period_min > 0.0 && period_max > period_min) {
        return Err(Error::InvalidArgument("invalid period range".into()));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let (w_lo, w_hi) = (two_pi / period_max, two_pi / period_min);
    let steps = 400;
    let grid: Vec<f64> = (0..=steps)
        .map(|k| w_lo + (w_hi - w_lo) * k as f64 / steps as f64)
        .collect();
    let mut best = (f64::INFINITY, 0usize);
    for (k, &om) in grid.iter().enumerate() {
        let r = sinusoid_at(t, y, w, om)?.residual;
        if r < best.0 {
            best = (r, k);
        }
    }
    let mut a = grid[best.1.saturating_sub(1)];
    let mut b = grid[(best.1 + 1).min(steps)];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let resid = |om: f64| sinusoid_at(t, y, w, om).map(|f| f.residual);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (resid(x1)?, resid(x2)?);
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = resid(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = resid(x2)?;
        }
    }
    sinusoid_at(t, y, w, (a + b) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_recovers_exact_data() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = fit_line(&x, &y, &[1.0; 4]).unwrap();
        assert!((f.intercept - 2.0).abs() < 1e-12 && (f.slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn exponential_recovers_tau() {
        let t: Vec<f64> = (0..20).map(|k| k as f64 * 10.0).collect();
        let y: Vec<f64> = t.iter().map(|v| 0.4 * (-v / 75.0).exp()).collect();
        let f = fit_exponential(&t, &y, &[0.01; 20]).unwrap();
        assert!((f.tau - 75.0).abs() < 1e-9);
        assert!((f.crossing(0.4 / std::f64::consts::E) - 75.0).abs() < 1e-9);
    }

    #[test]
    fn sinusoid_recovers_period() {
        let t: Vec<f64> = (0..80).map(|k| k as f64 * 0.25).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|v| 0.5 + (0.4 - 0.001 * v) * (2.0 * std::f64::consts::PI * v / 5.28 + 0.3).cos())
            .collect();
        let f = fit_sinusoid(&t, &y, &vec![1.0; 80], 2.0, 12.0).unwrap();
        assert!((f.period - 5.28).abs() < 1e-6, "{}", f.period);
        assert!((f.eval(3.0) - y[12]).abs() < 1e-6);
    }

    #[test]
    fn mismatched_lengths_error() {
        assert!(fit_line(&[1.0], &[1.0, 2.0], &[1.0]).is_err());
    }
}
