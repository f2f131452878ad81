//! Log-log exponent fits: the t^{−1/4} long-time law on the half-line and
//! the q^{1/6} boundary Hölder exponent on the strip.

use super::{parallel_batches, Estimate};
use crate::dynamics::{path_rng, Domain, ExitOutcome, ProcessKind, SimConfig, Simulator};
use crate::error::{Error, Result};
use crate::specfun::PhaseState;
use serde::{Deserialize, Serialize};

/// 3Γ(1/4)/(2^{3/4}π^{3/2}), the prefactor of the long-time law
/// P(τ̂₀ > t) ~ C·h(q,p)/t^{1/4} (frozen 40-digit value).
pub const LONG_TIME_PREFACTOR: f64 = 1.1614620497037234399;

/// Unweighted least squares on (x, y); returns (slope, intercept, r²).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailFit {
    pub fit: FitResult,
    /// exp(intercept): the implied prefactor C in P ≈ C·t^slope.
    pub implied_prefactor: f64,
    /// Survival estimates per requested checkpoint.
    pub probs: Vec<(f64, Estimate)>,
}

/// Survival estimates at several checkpoints from a single simulation to the
/// last checkpoint (exit times are compared against every checkpoint).
pub fn survival_curve(
    kind: ProcessKind,
    domain: Domain,
    start: PhaseState,
    checkpoints: &[f64],
    config: &SimConfig,
) -> Result<Vec<Estimate>> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("checkpoints must be strictly increasing".into()));
    }
    let mut cfg = *config;
    cfg.t_horizon = *checkpoints.last().unwrap();
    let sim = Simulator::new(kind, domain, cfg)?;
    let batches = parallel_batches(cfg.n_paths, |s, e| {
        let mut counts = vec![0u64; checkpoints.len()];
        for i in s..e {
            let mut rng = path_rng(cfg.seed, i);
            match sim.run_path(start, &mut rng, false).expect("interior start") {
                (ExitOutcome::Survived { .. }, _) => {
                    for c in counts.iter_mut() {
                        *c += 1;
                    }
                }
                (ExitOutcome::Exited { exit_time, .. }, _) => {
                    for (k, &t) in checkpoints.iter().enumerate() {
                        if exit_time > t {
                            counts[k] += 1;
                        }
                    }
                }
            }
        }
        counts
    });
    let mut totals = vec![0u64; checkpoints.len()];
    for b in &batches {
        for (t, v) in totals.iter_mut().zip(b) {
            *t += v;
        }
    }
    Ok(totals
        .into_iter()
        .map(|c| Estimate::bernoulli(c, cfg.n_paths, 0.99))
        .collect())
}

/// Fit of log P(τ̂₀ > t) against log t on the half-line (killing at 0 only);
/// the target slope is −1/4 with prefactor [`LONG_TIME_PREFACTOR`]·h(q,p).
pub fn tail_exponent_fit(
    sigma: f64,
    start: PhaseState,
    t_list: &[f64],
    config: &SimConfig,
) -> Result<TailFit> {
    if t_list.len() < 3 {
        return Err(Error::Config("need at least 3 checkpoints for a tail fit".into()));
    }
    let ests = survival_curve(
        ProcessKind::Ibm { sigma },
        Domain::HalfLine,
        start,
        t_list,
        config,
    )?;
    if ests.iter().any(|e| e.mean <= 0.0) {
        return Err(Error::Fit("survival exhausted before the last checkpoint".into()));
    }
    let first = ests.first().unwrap();
    let last = ests.last().unwrap();
    if first.combined_se_distance(last) < 3.0 {
        return Err(Error::Fit(
            "insufficient decay: checkpoint survivals indistinguishable within CI".into(),
        ));
    }
    let xs: Vec<f64> = t_list.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = ests.iter().map(|e| e.mean.ln()).collect();
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(TailFit {
        fit: FitResult { slope, intercept, r2 },
        implied_prefactor: intercept.exp(),
        probs: t_list.iter().copied().zip(ests).collect(),
    })
}

/// Fit of log P(τ_∂ > t) against log q at p = 0 on the strip; the target
/// slope is the boundary Hölder exponent 1/6.
pub fn holder_exponent_fit(
    sigma: f64,
    t: f64,
    q_list: &[f64],
    config: &SimConfig,
) -> Result<FitResult> {
    if q_list.len() < 3 || q_list.iter().any(|&q| q <= 0.0 || q >= 1.0) {
        return Err(Error::Config(
            "need >= 3 interior positions for the boundary-exponent fit".into(),
        ));
    }
    let mut xs = Vec::with_capacity(q_list.len());
    let mut ys = Vec::with_capacity(q_list.len());
    for (idx, &q) in q_list.iter().enumerate() {
        let mut cfg = *config;
        cfg.seed = config.seed.wrapping_add(7_777_777 * idx as u64);
        let est = super::exit_prob_mc(
            ProcessKind::Ibm { sigma },
            PhaseState::new(q, 0.0),
            t,
            &cfg,
        )?;
        if est.mean <= 0.0 {
            return Err(Error::Fit(format!("no survivors at q={q}; raise n_paths")));
        }
        xs.push(q.ln());
        ys.push(est.mean.ln());
    }
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(FitResult { slope, intercept, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| -0.25 * x + 1.7).collect();
        let (s, i, r2) = linear_fit(&xs, &ys);
        assert!((s + 0.25).abs() < 1e-12);
        assert!((i - 1.7).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_slope_is_exactly_one_sixth() {
        // analytic twin of the MC fit: log H(q,0) vs log q for small q
        let qs = [1e-4, 1e-3, 1e-2, 1e-1];
        let xs: Vec<f64> = qs.iter().map(|q: &f64| q.ln()).collect();
        let ys: Vec<f64> = qs
            .iter()
            .map(|&q| crate::specfun::envelope_h_strip(q, 0.0).unwrap().ln())
            .collect();
        let (s, _, r2) = linear_fit(&xs, &ys);
        assert!((s - 1.0 / 6.0).abs() < 1e-9, "{s}");
        assert!(r2 > 0.999999);
    }
}
