//! Exact-in-law identity checks. These identities hold exactly for the
//! continuous processes, so deviations beyond combined-SE tolerance are
//! discretization-bias canaries for the exit detection scheme.

use super::{exit_prob_mc, parallel_batches, survival_prob, Estimate};
use crate::dynamics::{path_rng, Domain, ExitOutcome, ProcessKind, SimConfig, Simulator};
use crate::error::{Error, Result};
use crate::specfun::{h, PhaseState};
use serde::{Deserialize, Serialize};

/// Two estimates of the same quantity plus their combined-SE distance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub se_distance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: impl Into<String>, lhs: Estimate, rhs: Estimate, tol_se: f64) -> Self {
        let d = lhs.combined_se_distance(&rhs);
        Self { name: name.into(), lhs, rhs, se_distance: d, pass: d <= tol_se }
    }
}

fn decorrelate(config: &SimConfig, salt: u64) -> SimConfig {
    let mut c = *config;
    c.seed = config.seed.wrapping_mul(6364136223846793005).wrapping_add(salt);
    c
}

/// Brownian scaling (half-line killing): P_{(λ³q, λp)}(τ̂₀ > λ²t) equals
/// P_{(q,p)}(τ̂₀ > t); the discretization step is scaled along.
pub fn identity_time_scaling(
    lambda: f64,
    start: PhaseState,
    t: f64,
    config: &SimConfig,
) -> Result<IdentityCheck> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("scaling needs lambda > 0, got {lambda}")));
    }
    let kind = ProcessKind::Ibm { sigma: 1.0 };
    let a = survival_prob(kind, Domain::HalfLine, start, t, config)?;
    let scaled = PhaseState::new(lambda.powi(3) * start.q, lambda * start.p);
    let mut cfg = decorrelate(config, 0xA11CE);
    cfg.dt = config.dt * lambda * lambda;
    let b = survival_prob(kind, Domain::HalfLine, scaled, lambda * lambda * t, &cfg)?;
    Ok(IdentityCheck::new(
        format!("time-scaling lambda={lambda}"),
        a,
        b,
        3.0,
    ))
}

/// Strip reflection symmetry: P_{(q,p)}(τ_∂ > t) = P_{(1−q,−p)}(τ_∂ > t).
pub fn identity_reflection(
    start: PhaseState,
    t: f64,
    config: &SimConfig,
) -> Result<IdentityCheck> {
    let kind = ProcessKind::Ibm { sigma: 1.0 };
    let a = exit_prob_mc(kind, start, t, config)?;
    let reflected = PhaseState::new(1.0 - start.q, -start.p);
    let b = exit_prob_mc(kind, reflected, t, &decorrelate(config, 0xB0B))?;
    Ok(IdentityCheck::new("reflection", a, b, 3.0))
}

/// Noise rescaling: P^σ_{(q,p)}(τ_∂ > t) = P^{σ=1}_{(q, p/σ^{2/3})}(τ_∂ > σ^{2/3}t).
pub fn identity_sigma_rescale(
    sigma: f64,
    start: PhaseState,
    t: f64,
    config: &SimConfig,
) -> Result<IdentityCheck> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
    }
    let a = exit_prob_mc(ProcessKind::Ibm { sigma }, start, t, config)?;
    let s23 = sigma.powf(2.0 / 3.0);
    let mut cfg = decorrelate(config, 0x51C);
    cfg.dt = config.dt * s23;
    let b = exit_prob_mc(
        ProcessKind::Ibm { sigma: 1.0 },
        PhaseState::new(start.q, start.p / s23),
        s23 * t,
        &cfg,
    )?;
    Ok(IdentityCheck::new(format!("sigma-rescale sigma={sigma}"), a, b, 3.0))
}

/// Optional stopping for the h-martingale (or its reflection):
/// E[h(q̂_{t∧τ}, p̂_{t∧τ})] = h(q₀, p₀), with h extended by its boundary
/// limits (0 on exit through the vanishing side, g(v/σ^{2/3}) on the other).
pub fn martingale_check(
    sigma: f64,
    start: PhaseState,
    t: f64,
    config: &SimConfig,
    reflected: bool,
) -> Result<IdentityCheck> {
    if !start.is_interior() {
        return Err(Error::Domain(format!("start must be interior, got {start:?}")));
    }
    let s23 = sigma.powf(2.0 / 3.0);
    let hval = |q: f64, p: f64| -> f64 {
        let (qq, pp) = if reflected { (1.0 - q, -p) } else { (q, p) };
        // the stopped state can sit exactly on a boundary; h's continuous
        // extension is 0 there on the vanishing side
        if qq <= 0.0 {
            0.0
        } else {
            h(qq, pp / s23).expect("interior or vanishing-side boundary")
        }
    };
    let mut cfg = *config;
    cfg.t_horizon = t;
    let sim = Simulator::new(ProcessKind::Ibm { sigma }, Domain::Strip, cfg)?;
    let batches = parallel_batches(cfg.n_paths, |s, e| {
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for i in s..e {
            let mut rng = path_rng(cfg.seed, i);
            let v = match sim.run_path(start, &mut rng, false).expect("interior start") {
                (ExitOutcome::Survived { final_state }, _) => hval(final_state.q, final_state.p),
                (ExitOutcome::Exited { exit_side, exit_velocity, .. }, _) => {
                    let q = if exit_side == 0 { 0.0 } else { 1.0 };
                    // clamp the small interpolation-tolerance violations of
                    // the exit-velocity sign so h stays defined
                    let v = if exit_side == 0 {
                        exit_velocity.min(0.0)
                    } else {
                        exit_velocity.max(0.0)
                    };
                    hval(q, v)
                }
            };
            sum += v;
            sum_sq += v * v;
        }
        (sum, sum_sq)
    });
    let (sum, sum_sq) = batches.iter().fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let n = cfg.n_paths as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    let est = Estimate::from_moments(mean, var, cfg.n_paths, 0.99);
    let target = hval(start.q, start.p);
    let exact = Estimate { mean: target, std_err: 0.0, n_paths: 0, ci_level: 0.99, ci_lo: target, ci_hi: target };
    Ok(IdentityCheck::new(
        if reflected { "optional-stopping (reflected h)" } else { "optional-stopping (h)" },
        est,
        exact,
        3.0,
    ))
}
