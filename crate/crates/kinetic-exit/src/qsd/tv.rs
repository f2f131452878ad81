//! Conditional total-variation decay: the laws of the process conditioned on
//! survival, started from two different initial distributions, merge
//! exponentially fast. Conditioning is done by rejection (no respawn), which
//! is unbiased; the decay of the binned TV distance between the two
//! conditioned laws witnesses the convergence.

use super::{binned_tv, HistGrid, Histogram2d, Init};
use crate::dynamics::{path_rng, Domain, ExitOutcome, ProcessKind, SimConfig, Simulator};
use crate::error::{Error, Result};
use crate::estimators::{linear_fit, FitResult, BATCH};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const BOOTSTRAP_REPLICAS: usize = 64;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TvPoint {
    pub t: f64,
    pub tv: f64,
    /// Expected TV between two histograms drawn from the *same* law at the
    /// realized sample sizes (parametric bootstrap): the binning noise floor.
    pub noise_floor: f64,
    pub survivors: (u64, u64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TvDecay {
    pub points: Vec<TvPoint>,
    /// Linear fit of log TV̂ against t (slope < 0 under exponential merging).
    pub fit: FitResult,
}

/// Per-checkpoint histograms of surviving paths started from `theta`. Each
/// path is simulated once, segment by segment, and binned at every
/// checkpoint it survives past; killed paths are rejected from then on.
fn conditioned_histograms(
    kind: ProcessKind,
    theta: &Init,
    checkpoints: &[f64],
    grid: HistGrid,
    config: &SimConfig,
    seed: u64,
) -> Result<Vec<Histogram2d>> {
    let mut sims = Vec::with_capacity(checkpoints.len());
    let mut prev = 0.0;
    for &t in checkpoints {
        let seg = t - prev;
        let mut cfg = *config;
        cfg.t_horizon = seg;
        cfg.dt = config.dt.min(seg);
        sims.push(Simulator::new(kind, Domain::Strip, cfg)?);
        prev = t;
    }
    let n = config.n_paths;
    let empty: Vec<Histogram2d> =
        checkpoints.iter().map(|_| Histogram2d::new(grid)).collect();
    // histogram counts are integers, so the parallel reduction below is exact
    // and order-independent: deterministic for any worker count
    let hists = (0..n.div_ceil(BATCH))
        .into_par_iter()
        .map(|b| {
            let mut acc = empty.clone();
            for i in b * BATCH..((b + 1) * BATCH).min(n) {
                let mut rng = path_rng(seed, i);
                let mut state = theta.sample(&mut rng);
                for (k, sim) in sims.iter().enumerate() {
                    match sim.run_path(state, &mut rng, false).expect("interior state") {
                        (ExitOutcome::Survived { final_state }, _) => {
                            acc[k].add(final_state.q, final_state.p);
                            state = final_state;
                        }
                        (ExitOutcome::Exited { .. }, _) => break,
                    }
                }
            }
            acc
        })
        .reduce(
            || empty.clone(),
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    x.merge(y);
                }
                a
            },
        );
    Ok(hists)
}

/// One multinomial draw by sequential conditional binomials.
fn multinomial<R: Rng>(rng: &mut R, mut trials: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut rem = 1.0f64;
    for (o, &p) in out.iter_mut().zip(probs) {
        if trials == 0 {
            break;
        }
        let cond = (p / rem).clamp(0.0, 1.0);
        let draw = if cond >= 1.0 {
            trials
        } else {
            Binomial::new(trials, cond).expect("probability in [0,1]").sample(rng)
        };
        *o = draw;
        trials -= draw;
        rem = (rem - p).max(0.0);
    }
    if trials > 0 {
        *out.last_mut().unwrap() += trials;
    }
    out
}

/// Bootstrap noise floor: mean TV between two histograms multinomially
/// resampled from the pooled law at the realized sample sizes.
fn bootstrap_noise_floor(h1: &Histogram2d, h2: &Histogram2d, seed: u64) -> f64 {
    let (s1, s2) = (h1.total(), h2.total());
    let pooled: Vec<f64> = h1
        .counts
        .iter()
        .zip(&h2.counts)
        .map(|(&a, &b)| (a + b) as f64 / (s1 + s2) as f64)
        .collect();
    let mut rng = path_rng(seed, u64::MAX - 2);
    let mut acc = 0.0;
    for _ in 0..BOOTSTRAP_REPLICAS {
        let mut a = Histogram2d::new(h1.grid);
        let mut b = Histogram2d::new(h1.grid);
        a.counts = multinomial(&mut rng, s1, &pooled);
        b.counts = multinomial(&mut rng, s2, &pooled);
        acc += binned_tv(&a, &b);
    }
    acc / BOOTSTRAP_REPLICAS as f64
}

pub fn conditional_tv_decay(
    kind: ProcessKind,
    theta1: &Init,
    theta2: &Init,
    checkpoints: &[f64],
    grid: HistGrid,
    config: &SimConfig,
    min_survivors: u64,
) -> Result<Vec<TvPoint>> {
    kind.validate()?;
    theta1.validate()?;
    theta2.validate()?;
    if checkpoints.is_empty()
        || checkpoints[0] <= 0.0
        || checkpoints.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::Config("checkpoints must be positive and strictly increasing".into()));
    }
    let h1 = conditioned_histograms(kind, theta1, checkpoints, grid, config, config.seed)?;
    let seed2 = config.seed.wrapping_add(0x9E3779B97F4A7C15);
    let h2 = conditioned_histograms(kind, theta2, checkpoints, grid, config, seed2)?;
    let mut points = Vec::with_capacity(checkpoints.len());
    for (k, &t) in checkpoints.iter().enumerate() {
        let (s1, s2) = (h1[k].total(), h2[k].total());
        if s1 < min_survivors || s2 < min_survivors {
            return Err(Error::SampleStarvation(format!(
                "survivors at t={t}: {s1} and {s2}, below the floor {min_survivors}; \
                 raise n_paths or lower the last checkpoint"
            )));
        }
        points.push(TvPoint {
            t,
            tv: binned_tv(&h1[k], &h2[k]),
            noise_floor: bootstrap_noise_floor(&h1[k], &h2[k], config.seed ^ (k as u64)),
            survivors: (s1, s2),
        });
    }
    Ok(points)
}

/// Log-linear decay fit over TV points (noise-floored to keep logs finite).
pub fn tv_decay_fit(points: &[TvPoint]) -> TvDecay {
    let xs: Vec<f64> = points.iter().map(|p| p.t).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.tv.max(1e-12).ln()).collect();
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    TvDecay { points: points.to_vec(), fit: FitResult { slope, intercept, r2 } }
}
