//! Fleming–Viot particle system: n particles evolve under the killed
//! dynamics; a killed particle respawns at the state of a uniformly chosen
//! survivor. The empirical law approximates the conditioned law, and the
//! long-run kill rate per particle approximates the principal eigenvalue λ₀.

use super::{HistGrid, Histogram2d, Init};
use crate::dynamics::{path_rng, Domain, ExitOutcome, ProcessKind, SimConfig, Simulator};
use crate::error::{Error, Result};
use crate::specfun::{envelope_h_full, envelope_h_strip, ModelParams, PhaseState};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

// dedicated RNG streams; particle streams occupy 0..n
const INIT_STREAM: u64 = u64::MAX;
const RESPAWN_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FvConfig {
    pub n_particles: usize,
    pub t_max: f64,
    /// Respawn synchronization interval: particles advance independently for
    /// one macro-step, then killed ones respawn from the survivor pool.
    pub macro_dt: f64,
    /// Integration step inside a macro-step.
    pub dt: f64,
    pub seed: u64,
    /// Macro-steps between recorded cloud snapshots.
    pub snapshot_every: usize,
}

impl FvConfig {
    pub fn new(n_particles: usize, t_max: f64, macro_dt: f64, dt: f64, seed: u64) -> Result<Self> {
        let c = Self { n_particles, t_max, macro_dt, dt, seed, snapshot_every: 1 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 100 {
            return Err(Error::Config(format!(
                "Fleming-Viot needs >= 100 particles, got {}",
                self.n_particles
            )));
        }
        if !(self.dt > 0.0 && self.dt <= self.macro_dt && self.macro_dt <= self.t_max) {
            return Err(Error::Config(format!(
                "need 0 < dt <= macro_dt <= t_max, got dt={}, macro_dt={}, t_max={}",
                self.dt, self.macro_dt, self.t_max
            )));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Config("snapshot_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Ensemble state at one observation time. All states are interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleCloud {
    pub states: Vec<PhaseState>,
    pub time: f64,
    /// Cumulative respawn events since t = 0.
    pub kill_count: u64,
}

impl ParticleCloud {
    pub fn n(&self) -> usize {
        self.states.len()
    }
}

pub type FvSnapshot = ParticleCloud;

/// Output of a Fleming–Viot run: recorded clouds plus the per-macro-step
/// kill rate series (kills per particle per unit time).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FvSeries {
    pub snapshots: Vec<ParticleCloud>,
    pub kill_rate: Vec<(f64, f64)>,
    pub n_particles: usize,
    pub t_max: f64,
}

impl FvSeries {
    /// Mean kill rate over macro-steps with t in (t_lo, t_hi].
    pub fn mean_rate(&self, t_lo: f64, t_hi: f64) -> f64 {
        let sel: Vec<f64> = self
            .kill_rate
            .iter()
            .filter(|(t, _)| *t > t_lo && *t <= t_hi)
            .map(|(_, r)| *r)
            .collect();
        sel.iter().sum::<f64>() / sel.len().max(1) as f64
    }

    /// Mean kill rate over the stationarity window (last quarter of the run).
    pub fn final_quarter_rate(&self) -> f64 {
        self.mean_rate(0.75 * self.t_max, self.t_max)
    }

    /// Relative drift across the stationarity window: |second-eighth mean −
    /// first-eighth mean| / window mean. Small values indicate the kill rate
    /// has stabilized.
    pub fn final_quarter_drift(&self) -> f64 {
        let (lo, hi) = (0.75 * self.t_max, self.t_max);
        let mid = 0.5 * (lo + hi);
        let (a, b) = (self.mean_rate(lo, mid), self.mean_rate(mid, hi));
        let m = self.final_quarter_rate();
        if m > 0.0 {
            (b - a).abs() / m
        } else {
            f64::INFINITY
        }
    }
}

/// Run the Fleming–Viot system. Particles advance in parallel within a
/// macro-step (one ChaCha stream per particle index); respawns are applied
/// serially in particle-index order from a dedicated stream, so the run is a
/// deterministic function of (config, init) for any worker count.
pub fn fleming_viot_run(kind: ProcessKind, init: &Init, fv: &FvConfig) -> Result<FvSeries> {
    kind.validate()?;
    init.validate()?;
    fv.validate()?;
    let n = fv.n_particles;
    let sim = Simulator::new(
        kind,
        Domain::Strip,
        SimConfig::new(fv.dt, fv.macro_dt, n as u64, fv.seed)?,
    )?;

    let mut init_rng = path_rng(fv.seed, INIT_STREAM);
    let mut respawn_rng = path_rng(fv.seed, RESPAWN_STREAM);
    let mut states: Vec<PhaseState> = (0..n).map(|_| init.sample(&mut init_rng)).collect();
    let mut rngs: Vec<ChaCha8Rng> = (0..n as u64).map(|i| path_rng(fv.seed, i)).collect();

    let n_steps = (fv.t_max / fv.macro_dt).round() as usize;
    let mut kill_count = 0u64;
    let mut kill_rate = Vec::with_capacity(n_steps);
    let mut snapshots = Vec::new();
    snapshots.push(ParticleCloud { states: states.clone(), time: 0.0, kill_count });

    for step in 1..=n_steps {
        let t = step as f64 * fv.macro_dt;
        let outcomes: Vec<Option<PhaseState>> = states
            .par_iter()
            .zip(rngs.par_iter_mut())
            .map(|(s, rng)| {
                match sim.run_path(*s, rng, false).expect("cloud states stay interior") {
                    (ExitOutcome::Survived { final_state }, _) => Some(final_state),
                    (ExitOutcome::Exited { .. }, _) => None,
                }
            })
            .collect();
        let survivors: Vec<PhaseState> = outcomes.iter().flatten().copied().collect();
        if survivors.is_empty() {
            return Err(Error::Extinction(format!(
                "all {n} particles exited within the macro-step ending at t={t}; \
                 reduce macro_dt or start further from the boundary"
            )));
        }
        let mut kills = 0u64;
        for (s, out) in states.iter_mut().zip(&outcomes) {
            *s = match out {
                Some(next) => *next,
                None => {
                    kills += 1;
                    survivors[respawn_rng.gen_range(0..survivors.len())]
                }
            };
        }
        kill_count += kills;
        kill_rate.push((t, kills as f64 / (n as f64 * fv.macro_dt)));
        if step % fv.snapshot_every == 0 || step == n_steps {
            snapshots.push(ParticleCloud { states: states.clone(), time: t, kill_count });
        }
    }
    Ok(FvSeries { snapshots, kill_rate, n_particles: n, t_max: fv.t_max })
}

/// Time-averaged QSD histogram over the stationarity window, compared in
/// shape against the reflected envelope H_{α,β,−γ,σ}(q,−p).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QsdShape {
    pub hist: Histogram2d,
    /// Extremes of (histogram fraction)/(normalized envelope mass) over bins
    /// clearing the hit floor.
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub n_bins_used: usize,
    pub window: (f64, f64),
}

/// The envelope proportional to the QSD density ψ: the forward envelope of
/// the time-reversed dynamics, H_{α,β,−γ,σ}(q,−p).
pub fn qsd_envelope(kind: &ProcessKind, q: f64, p: f64) -> Result<f64> {
    match kind {
        ProcessKind::Ibm { sigma } => envelope_h_strip(q, -p / sigma.powf(2.0 / 3.0)),
        ProcessKind::Linear(params) => {
            let reversed = ModelParams { gamma: -params.gamma, ..*params };
            envelope_h_full(&reversed, q, -p)
        }
    }
}

pub fn qsd_density_estimate(
    series: &FvSeries,
    kind: &ProcessKind,
    grid: HistGrid,
    min_hits: u64,
) -> Result<QsdShape> {
    let window = (0.75 * series.t_max, series.t_max);
    let mut hist = Histogram2d::new(grid);
    let mut used = 0usize;
    for cloud in series.snapshots.iter().filter(|c| c.time >= window.0) {
        used += 1;
        for s in &cloud.states {
            hist.add(s.q, s.p);
        }
    }
    if used == 0 || hist.total() == 0 {
        return Err(Error::SampleStarvation(
            "no snapshots in the stationarity window; extend t_max or snapshot more often".into(),
        ));
    }
    // normalized envelope mass per bin (center-value approximation)
    let mut env = vec![0.0; grid.n_bins()];
    for (b, e) in env.iter_mut().enumerate() {
        let (q, p) = grid.center(b);
        *e = qsd_envelope(kind, q, p)?;
    }
    let env_total: f64 = env.iter().sum();
    let total = hist.total() as f64;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut n_bins_used = 0usize;
    for (b, &c) in hist.counts.iter().enumerate() {
        if c < min_hits {
            continue;
        }
        let r = (c as f64 / total) / (env[b] / env_total);
        lo = lo.min(r);
        hi = hi.max(r);
        n_bins_used += 1;
    }
    if n_bins_used == 0 {
        return Err(Error::SampleStarvation(format!(
            "no bin reached {min_hits} hits; coarsen the grid or lengthen the run"
        )));
    }
    Ok(QsdShape { hist, ratio_min: lo, ratio_max: hi, n_bins_used, window })
}
