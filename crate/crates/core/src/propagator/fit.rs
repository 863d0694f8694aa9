use super::PropagatorSample;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `c·t^{−p}`, fitted in log-log coordinates.
    Power,
    /// `c/log t`.
    InverseLog,
    /// `c·t/log t`.
    LinearOverLog,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub coefficient: f64,
    /// Decay exponent `p` (power model only).
    pub exponent: Option<f64>,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// Largest relative deviation of the data from the fitted curve.
    pub max_relative_residual: f64,
}

/// Least-squares fit of `y(t)` on the samples with `t` in `window`.
pub fn fit_series(t: &[f64], y: &[f64], model: DecayModel, window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(t, _)| **t >= window.0 * (1.0 - 1e-12) && **t <= window.1 * (1.0 + 1e-12))
        .map(|(a, b)| (*a, *b))
        .collect();
    if pts.len() < 8 {
        return Err(Error::Fit(format!("{} samples in window {window:?}, need 8", pts.len())));
    }
    let (t0, t1) = (pts[0].0, pts[pts.len() - 1].0);
    if (t1 / t0).log10() < 1.5 - 1e-9 {
        return Err(Error::Fit(format!("window [{t0}, {t1}] spans under 1.5 decades")));
    }
    let fitted = match model {
        DecayModel::Power => {
            if pts.iter().any(|p| !(p.1 > 0.0)) {
                return Err(Error::Fit("power fit needs positive data".into()));
            }
            let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            if sxx == 0.0 {
                return Err(Error::Fit("degenerate design matrix".into()));
            }
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let slope = sxy / sxx;
            let intercept = my - slope * mx;
            let predict: Vec<f64> = xs.iter().map(|x| intercept + slope * x).collect();
            let r2 = r_squared(&ys, &predict);
            let c = intercept.exp();
            let rel = pts
                .iter()
                .map(|(t, y)| (c * t.powf(slope) / y - 1.0).abs())
                .fold(0.0, f64::max);
            DecayFit {
                model,
                coefficient: c,
                exponent: Some(-slope),
                r_squared: r2,
                window: (t0, t1),
                samples: pts.len(),
                max_relative_residual: rel,
            }
        }
        DecayModel::InverseLog | DecayModel::LinearOverLog => {
            let basis = |t: f64| match model {
                DecayModel::InverseLog => 1.0 / t.ln(),
                _ => t / t.ln(),
            };
            let xs: Vec<f64> = pts.iter().map(|p| basis(p.0)).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let sxx: f64 = xs.iter().map(|x| x * x).sum();
            if sxx == 0.0 {
                return Err(Error::Fit("degenerate design matrix".into()));
            }
            let c = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / sxx;
            let predict: Vec<f64> = xs.iter().map(|x| c * x).collect();
            let rel = predict
                .iter()
                .zip(&ys)
                .map(|(p, y)| (p / y - 1.0).abs())
                .fold(0.0, f64::max);
            DecayFit {
                model,
                coefficient: c,
                exponent: None,
                r_squared: r_squared(&ys, &predict),
                window: (t0, t1),
                samples: pts.len(),
                max_relative_residual: rel,
            }
        }
    };
    Ok(fitted)
}

/// `1 − SS_res/SS_tot`, clamped to `[0, 1]`; exact constant data counts as a perfect fit.
fn r_squared(y: &[f64], predict: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(predict).map(|(a, b)| (a - b).powi(2)).sum();
    if ss_tot <= 1e-30 * mean.abs().max(1e-300).powi(2) * n {
        return if ss_res <= 1e-24 * mean.powi(2) * n { 1.0 } else { 0.0 };
    }
    (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
}

/// Fit the sup-proxies of a sweep.
pub fn decay_fit(samples: &[PropagatorSample], model: DecayModel, window: (f64, f64)) -> Result<DecayFit> {
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.sup_proxy).collect();
    fit_series(&t, &y, model, window)
}

/// `per_decade` logarithmically spaced times over `[t0, t1]`, endpoints included.
pub fn log_times(t0: f64, t1: f64, per_decade: usize) -> Vec<f64> {
    let decades = (t1 / t0).log10();
    let n = (decades * per_decade as f64).round() as usize;
    (0..=n)
        .map(|k| t0 * 10f64.powf(decades * k as f64 / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_recovery() {
        let t = log_times(10.0, 1e3, 16);
        let y: Vec<f64> = t.iter().map(|t| 3.0 / t).collect();
        let f = fit_series(&t, &y, DecayModel::Power, (10.0, 1e3)).unwrap();
        assert!((f.exponent.unwrap() - 1.0).abs() < 1e-6);
        assert!((f.coefficient - 3.0).abs() < 1e-6);
        assert!(f.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn inverse_log_recovery() {
        let t = log_times(1e2, 1e5, 16);
        let y: Vec<f64> = t.iter().map(|t| 2.0 / t.ln() + 0.1 / t).collect();
        let f = fit_series(&t, &y, DecayModel::InverseLog, (1e2, 1e5)).unwrap();
        assert!((f.coefficient - 2.0).abs() < 0.1, "{}", f.coefficient);
        assert!(f.r_squared > 0.9);
    }

    #[test]
    fn constant_data_has_zero_exponent() {
        let t = log_times(10.0, 1e3, 16);
        let y = vec![0.5; t.len()];
        let f = fit_series(&t, &y, DecayModel::Power, (10.0, 1e3)).unwrap();
        assert!(f.exponent.unwrap().abs() < 1e-12);
        assert!(f.r_squared >= 0.0 && f.r_squared <= 1.0);
    }

    #[test]
    fn short_window_is_rejected() {
        let t = log_times(10.0, 1e3, 16);
        let y: Vec<f64> = t.iter().map(|t| 1.0 / t).collect();
        assert!(fit_series(&t, &y, DecayModel::Power, (10.0, 100.0)).is_err());
        assert!(fit_series(&t[..4], &y[..4], DecayModel::Power, (10.0, 1e3)).is_err());
    }
}
