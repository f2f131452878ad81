//! Principal-eigenvalue estimation: the survival probability decays like
//! e^{−λ₀t}, so λ₀ is read off (a) a late-window regression of log survival
//! and (b) the asymptotic Fleming–Viot kill rate; the two are reconciled.

use super::fv::{fleming_viot_run, FvConfig};
use super::Init;
use crate::dynamics::{Domain, ProcessKind, SimConfig};
use crate::error::{Error, Result};
use crate::estimators::{linear_fit, survival_curve};
use crate::specfun::PhaseState;
use serde::{Deserialize, Serialize};

/// Exponential decay rate fitted on a late time window.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayFit {
    pub lambda0_hat: f64,
    pub window: (f64, f64),
    pub r2: f64,
    /// Standard error of the fitted rate (from regression residuals).
    pub stderr: f64,
}

/// Regression estimate of λ₀: fit log P(τ_∂ > t) against t on checkpoints
/// spread over the window; the rate is minus the slope.
pub fn lambda0_regression(
    kind: ProcessKind,
    start: PhaseState,
    window: (f64, f64),
    n_checkpoints: usize,
    config: &SimConfig,
) -> Result<DecayFit> {
    let (t_lo, t_hi) = window;
    if !(t_lo > 0.0 && t_lo < t_hi) {
        return Err(Error::Window(format!("need 0 < t_lo < t_hi, got ({t_lo}, {t_hi})")));
    }
    if n_checkpoints < 3 {
        return Err(Error::Config("need at least 3 checkpoints for a rate fit".into()));
    }
    let ts: Vec<f64> = (0..n_checkpoints)
        .map(|k| t_lo + (t_hi - t_lo) * k as f64 / (n_checkpoints - 1) as f64)
        .collect();
    let ests = survival_curve(kind, Domain::Strip, start, &ts, config)?;
    if ests.iter().any(|e| e.mean <= 0.0) {
        return Err(Error::Window(format!(
            "survival exhausted inside the window ({t_lo}, {t_hi}); raise n_paths or shrink t_hi"
        )));
    }
    let ys: Vec<f64> = ests.iter().map(|e| e.mean.ln()).collect();
    let (slope, _, r2) = linear_fit(&ts, &ys);
    if slope >= 0.0 {
        return Err(Error::Fit(format!("non-decaying survival on the window (slope {slope})")));
    }
    // slope SE from residual variance; checkpoints share paths, so this is an
    // optimistic but standard diagnostic
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let sxx: f64 = ts.iter().map(|t| (t - mt) * (t - mt)).sum();
    let my = ys.iter().sum::<f64>() / n;
    let intercept = my - slope * mt;
    let ss_res: f64 = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| {
            let r = y - (slope * t + intercept);
            r * r
        })
        .sum();
    let stderr = (ss_res / (n - 2.0) / sxx).sqrt();
    Ok(DecayFit { lambda0_hat: -slope, window, r2, stderr })
}

/// λ₀ by two independent routes, reconciled.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lambda0Estimate {
    /// Route (a): log-survival regression (no respawn).
    pub regression: DecayFit,
    /// Route (b): mean Fleming–Viot kill rate over the stationarity window.
    pub fv_kill_rate: f64,
    /// Relative drift of the kill rate across the stationarity window.
    pub fv_rate_drift: f64,
    /// |a − b| / a.
    pub rel_gap: f64,
}

pub fn lambda0_estimate(
    kind: ProcessKind,
    start: PhaseState,
    window: (f64, f64),
    n_checkpoints: usize,
    config: &SimConfig,
    fv: &FvConfig,
) -> Result<Lambda0Estimate> {
    let regression = lambda0_regression(kind, start, window, n_checkpoints, config)?;
    let series = fleming_viot_run(kind, &Init::Point(start), fv)?;
    let fv_kill_rate = series.final_quarter_rate();
    let rel_gap = (regression.lambda0_hat - fv_kill_rate).abs() / regression.lambda0_hat;
    Ok(Lambda0Estimate {
        regression,
        fv_kill_rate,
        fv_rate_drift: series.final_quarter_drift(),
        rel_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_recovers_decay_rate_ballpark() {
        // IBM with sigma=1 on the strip decays at lambda0 near 1; a coarse
        // run must land in a generous bracket and fit cleanly
        let config = SimConfig::new(0.02, 1.0, 40_000, 1717).unwrap();
        let fit = lambda0_regression(
            ProcessKind::Ibm { sigma: 1.0 },
            PhaseState::new(0.5, 0.0),
            (3.0, 6.0),
            4,
            &config,
        )
        .unwrap();
        assert!(fit.lambda0_hat > 0.6 && fit.lambda0_hat < 1.6, "{}", fit.lambda0_hat);
        assert!(fit.r2 > 0.98, "{}", fit.r2);
    }

    #[test]
    fn exhausted_window_is_a_window_error() {
        let config = SimConfig::new(0.05, 1.0, 200, 5).unwrap();
        let err = lambda0_regression(
            ProcessKind::Ibm { sigma: 1.0 },
            PhaseState::new(0.5, 0.0),
            (15.0, 25.0),
            4,
            &config,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Window(_)), "{err:?}");
    }
}
