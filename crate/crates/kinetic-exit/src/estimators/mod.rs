//! Monte Carlo estimation layer: survival probabilities, envelope ratio
//! scans, exact-in-law identity checks, and asymptotic-exponent fits.
//!
//! All estimators shard paths into fixed-size batches mapped in parallel and
//! folded in batch order, so results are a deterministic function of
//! (seed, config) regardless of worker count.

mod estimate;
mod fits;
mod identities;
mod scans;

pub use estimate::{normal_quantile, Estimate};
pub use fits::{
    holder_exponent_fit, linear_fit, survival_curve, tail_exponent_fit, FitResult, TailFit,
    LONG_TIME_PREFACTOR,
};
pub use identities::{
    identity_reflection, identity_sigma_rescale, identity_time_scaling, martingale_check,
    IdentityCheck,
};
pub use scans::{eta_ratio_scan, ratio_scan, standard_grid, RatioRow, RatioTable};

use crate::dynamics::{
    girsanov_log_weight_endpoint, Domain, ExitOutcome, PathWeight, ProcessKind, SimConfig,
    Simulator,
};
use crate::error::{Error, Result};
use crate::specfun::{ModelParams, PhaseState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub(crate) const BATCH: u64 = 8192;

/// Map fixed path-index batches in parallel, collect per-batch accumulators
/// in batch order (the fold over this vector is then worker-count-free).
pub(crate) fn parallel_batches<A, F>(n: u64, f: F) -> Vec<A>
where
    A: Send,
    F: Fn(u64, u64) -> A + Sync,
{
    let nb = n.div_ceil(BATCH);
    (0..nb)
        .into_par_iter()
        .map(|b| {
            let s = b * BATCH;
            f(s, ((b + 1) * BATCH).min(n))
        })
        .collect()
}

/// Survival probability at the horizon for an arbitrary killing domain.
pub fn survival_prob(
    kind: ProcessKind,
    domain: Domain,
    start: PhaseState,
    t: f64,
    config: &SimConfig,
) -> Result<Estimate> {
    let mut cfg = *config;
    cfg.t_horizon = t;
    let sim = Simulator::new(kind, domain, cfg)?;
    let counts = parallel_batches(cfg.n_paths, |s, e| {
        let mut alive = 0u64;
        for i in s..e {
            let mut rng = crate::dynamics::path_rng(cfg.seed, i);
            let (out, _) = sim
                .run_path(start, &mut rng, false)
                .expect("start validated by caller");
            if out.survived() {
                alive += 1;
            }
        }
        alive
    });
    let alive: u64 = counts.iter().sum();
    Ok(Estimate::bernoulli(alive, cfg.n_paths, 0.99))
}

/// Fraction of paths surviving to t under strip killing (Wilson CI).
pub fn exit_prob_mc(
    kind: ProcessKind,
    start: PhaseState,
    t: f64,
    config: &SimConfig,
) -> Result<Estimate> {
    if !start.is_interior() {
        return Err(Error::Domain(format!("start must be interior, got {start:?}")));
    }
    survival_prob(kind, Domain::Strip, start, t, config)
}

/// Girsanov-reweighted survival estimate with effective sample size.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GirsanovEstimate {
    pub estimate: Estimate,
    /// (Σw)²/Σw² over surviving paths.
    pub ess: f64,
    /// Set when ess < 1% of n_paths (weight degeneracy).
    pub degenerate: bool,
}

/// Survival probability of the linear Langevin process estimated by
/// reweighting integrated-Brownian paths with the Girsanov density.
pub fn exit_prob_girsanov(
    params: &ModelParams,
    start: PhaseState,
    t: f64,
    config: &SimConfig,
) -> Result<GirsanovEstimate> {
    params.validate()?;
    if !start.is_interior() {
        return Err(Error::Domain(format!("start must be interior, got {start:?}")));
    }
    let mut cfg = *config;
    cfg.t_horizon = t;
    let sim = Simulator::new(ProcessKind::Ibm { sigma: params.sigma }, Domain::Strip, cfg)?;

    #[derive(Default)]
    struct Acc {
        sum: f64,
        sum_sq: f64,
        w_sum: f64,
        w_sq: f64,
    }
    let batches = parallel_batches(cfg.n_paths, |s, e| {
        let mut acc = Acc::default();
        for i in s..e {
            let mut rng = crate::dynamics::path_rng(cfg.seed, i);
            let (out, w) = sim.run_path(start, &mut rng, true).expect("start validated");
            if let ExitOutcome::Survived { final_state } = out {
                let w: PathWeight = w.expect("weights requested");
                let logz = girsanov_log_weight_endpoint(params, start, final_state, t, &w)
                    .expect("sigma tags match by construction");
                let z = logz.exp();
                acc.sum += z;
                acc.sum_sq += z * z;
                acc.w_sum += z;
                acc.w_sq += z * z;
            }
        }
        acc
    });
    let mut total = Acc::default();
    for b in &batches {
        total.sum += b.sum;
        total.sum_sq += b.sum_sq;
        total.w_sum += b.w_sum;
        total.w_sq += b.w_sq;
    }
    let n = cfg.n_paths as f64;
    let mean = total.sum / n;
    let var = (total.sum_sq / n - mean * mean).max(0.0);
    let estimate = Estimate::from_moments(mean, var, cfg.n_paths, 0.99);
    let ess = if total.w_sq > 0.0 { total.w_sum * total.w_sum / total.w_sq } else { 0.0 };
    Ok(GirsanovEstimate { estimate, ess, degenerate: ess < 0.01 * n })
}

/// E[Z_t] over unkilled IBM paths — must be 1 (martingale normalization).
pub fn girsanov_normalization_check(
    params: &ModelParams,
    start: PhaseState,
    t: f64,
    config: &SimConfig,
) -> Result<Estimate> {
    params.validate()?;
    let mut cfg = *config;
    cfg.t_horizon = t;
    let sim = Simulator::new(ProcessKind::Ibm { sigma: params.sigma }, Domain::Free, cfg)?;
    let batches = parallel_batches(cfg.n_paths, |s, e| {
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for i in s..e {
            let mut rng = crate::dynamics::path_rng(cfg.seed, i);
            let (out, w) = sim.run_path(start, &mut rng, true).expect("free domain");
            let end = match out {
                ExitOutcome::Survived { final_state } => final_state,
                ExitOutcome::Exited { .. } => unreachable!("free domain never kills"),
            };
            let logz =
                girsanov_log_weight_endpoint(params, start, end, t, &w.expect("requested"))
                    .expect("sigma tags match");
            let z = logz.exp();
            sum += z;
            sum_sq += z * z;
        }
        (sum, sum_sq)
    });
    let (sum, sum_sq) = batches
        .iter()
        .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let n = cfg.n_paths as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(Estimate::from_moments(mean, var, cfg.n_paths, 0.99))
}

/// Exit-side fraction for integrated Brownian motion started at rest:
/// fraction of paths leaving through q = 1 (runs until exit; the horizon in
/// `config` is extended until virtually every path has exited).
pub fn exit_side_right_fraction(q: f64, config: &SimConfig) -> Result<Estimate> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("q must be in (0,1), got {q}")));
    }
    let cfg = *config;
    let sim = Simulator::new(ProcessKind::Ibm { sigma: 1.0 }, Domain::Strip, cfg)?;
    let start = PhaseState::new(q, 0.0);
    let batches = parallel_batches(cfg.n_paths, |s, e| {
        let (mut right, mut undecided) = (0u64, 0u64);
        for i in s..e {
            let mut rng = crate::dynamics::path_rng(cfg.seed, i);
            match sim.run_path(start, &mut rng, false).expect("interior start") {
                (ExitOutcome::Exited { exit_side, .. }, _) => {
                    if exit_side == 1 {
                        right += 1;
                    }
                }
                (ExitOutcome::Survived { .. }, _) => undecided += 1,
            }
        }
        (right, undecided)
    });
    let (right, undecided) = batches
        .iter()
        .fold((0u64, 0u64), |(a, b), (c, d)| (a + c, b + d));
    let decided = cfg.n_paths - undecided;
    if undecided * 100 > cfg.n_paths {
        return Err(Error::SampleStarvation(format!(
            "{undecided} of {} paths undecided at horizon {}; raise t_horizon",
            cfg.n_paths, cfg.t_horizon
        )));
    }
    Ok(Estimate::bernoulli(right, decided, 0.99))
}
