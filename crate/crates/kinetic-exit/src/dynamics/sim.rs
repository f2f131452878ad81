//! Path simulation with killing: exact transitions on a dt grid, cubic
//! Hermite crossing detection between grid points, and recursive
//! re-simulation at halved steps near suspected crossings.

use super::transition::{ibm_transition, LinearTransition};
use super::{Domain, ExitOutcome, PathWeight, ProcessKind, SimConfig};
use crate::error::{Error, Result};
use crate::specfun::PhaseState;
use rand::Rng;

#[derive(Debug, Clone, Copy)]
enum StepKernel {
    Ibm { sigma: f64, dt: f64 },
    Lin(LinearTransition),
}

impl StepKernel {
    fn dt(&self) -> f64 {
        match self {
            StepKernel::Ibm { dt, .. } => *dt,
            StepKernel::Lin(tr) => tr.dt,
        }
    }

    #[inline]
    fn sample<R: Rng>(&self, state: PhaseState, rng: &mut R) -> PhaseState {
        match self {
            StepKernel::Ibm { sigma, dt } => ibm_transition(state, *dt, *sigma, rng),
            StepKernel::Lin(tr) => tr.step(state, rng),
        }
    }
}

fn kernel_ladder(kind: &ProcessKind, dt: f64, max_depth: u32) -> Vec<StepKernel> {
    (0..=max_depth)
        .map(|d| {
            let h = dt / (1u64 << d) as f64;
            match kind {
                ProcessKind::Ibm { sigma } => StepKernel::Ibm { sigma: *sigma, dt: h },
                ProcessKind::Linear(p) => StepKernel::Lin(LinearTransition::new(p, h)),
            }
        })
        .collect()
}

struct Crossing {
    theta: f64,
    side: u8,
}

/// Earliest boundary crossing of the cubic Hermite reconstruction of the
/// position over one step, if any. The cubic matches (q, p) at both ends.
fn hermite_crossing(domain: Domain, s0: PhaseState, s1: PhaseState, dt: f64) -> Option<Crossing> {
    if domain == Domain::Free {
        return None;
    }
    let (q0, p0, q1, p1) = (s0.q, s0.p, s1.q, s1.p);
    let dq = q1 - q0;
    let c2 = (3.0 * dq - (2.0 * p0 + p1) * dt) / (dt * dt);
    let c3 = (-2.0 * dq + (p0 + p1) * dt) / (dt * dt * dt);
    let qat = |th: f64| q0 + th * (p0 + th * (c2 + th * c3));

    // knots: 0, interior critical points of the cubic, dt — the cubic is
    // monotone between consecutive knots, so knot values find all crossings
    let mut knots = [0.0, dt, dt, dt];
    let mut nk = 2usize;
    let (aa, bb, cc) = (3.0 * c3, 2.0 * c2, p0);
    let disc = bb * bb - 4.0 * aa * cc;
    if disc > 0.0 && aa.abs() > 0.0 {
        let sq = disc.sqrt();
        for r in [(-bb - sq) / (2.0 * aa), (-bb + sq) / (2.0 * aa)] {
            if r > 0.0 && r < dt {
                knots[nk] = r;
                nk += 1;
            }
        }
    } else if aa == 0.0 && bb.abs() > 0.0 {
        let r = -cc / bb;
        if r > 0.0 && r < dt {
            knots[nk] = r;
            nk += 1;
        }
    }
    let knots = &mut knots[..nk];
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let crossed = |q: f64| -> Option<u8> {
        if q <= 0.0 {
            Some(0)
        } else if domain == Domain::Strip && q >= 1.0 {
            Some(1)
        } else {
            None
        }
    };

    let mut prev = 0.0_f64;
    for &th in knots.iter().skip(1) {
        let qv = qat(th);
        if let Some(side) = crossed(qv) {
            // bisect q(·) − bound on [prev, th]; q(prev) is strictly inside
            let bound = if side == 0 { 0.0 } else { 1.0 };
            let (mut lo, mut hi) = (prev, th);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let inside = if side == 0 { qat(mid) > bound } else { qat(mid) < bound };
                if inside {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(Crossing { theta: 0.5 * (lo + hi), side });
        }
        prev = th;
    }
    None
}

enum StepResult {
    Inside(PhaseState),
    Exit { offset: f64, side: u8, velocity: f64 },
}

/// Reusable path simulator: owns the per-depth transition kernels (the
/// expensive part for the linear process), shared read-only across workers.
pub struct Simulator {
    kind: ProcessKind,
    domain: Domain,
    config: SimConfig,
    base: Vec<StepKernel>,
    rem: Option<Vec<StepKernel>>,
    n_base: u64,
    rem_len: f64,
}

impl Simulator {
    pub fn new(kind: ProcessKind, domain: Domain, config: SimConfig) -> Result<Self> {
        kind.validate()?;
        config.validate()?;
        // split the horizon into n_base steps of dt plus one remainder step
        let ratio = config.t_horizon / config.dt;
        let mut n_base = ratio.floor() as u64;
        let mut rem_len = config.t_horizon - n_base as f64 * config.dt;
        if rem_len < 1e-9 * config.dt {
            // horizon is a multiple of dt up to rounding
            n_base = ratio.round() as u64;
            rem_len = 0.0;
        }
        let base = kernel_ladder(&kind, config.dt, config.max_refine_depth);
        let rem = if rem_len > 0.0 {
            Some(kernel_ladder(&kind, rem_len, config.max_refine_depth))
        } else {
            None
        };
        Ok(Self { kind, domain, config, base, rem, n_base, rem_len })
    }

    pub fn kind(&self) -> &ProcessKind {
        &self.kind
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    fn advance<R: Rng>(
        &self,
        kernels: &[StepKernel],
        state: PhaseState,
        depth: u32,
        rng: &mut R,
        w: Option<&mut PathWeight>,
    ) -> StepResult {
        let d = depth as usize;
        let dt = kernels[d].dt();
        let can_refine = depth < self.config.max_refine_depth;
        if can_refine && self.domain.boundary_distance(state.q) < self.config.refine_threshold {
            return self.advance_halves(kernels, state, depth, rng, w);
        }
        let end = kernels[d].sample(state, rng);
        match hermite_crossing(self.domain, state, end, dt) {
            None => {
                if let Some(w) = w {
                    accumulate(w, state, end, dt);
                }
                StepResult::Inside(end)
            }
            Some(_) if can_refine => {
                // discard the coarse draw and re-simulate the sub-interval
                self.advance_halves(kernels, state, depth, rng, w)
            }
            Some(cross) => {
                let velocity = state.p + (end.p - state.p) * cross.theta / dt;
                if let Some(w) = w {
                    let bound = if cross.side == 0 { 0.0 } else { 1.0 };
                    accumulate(w, state, PhaseState::new(bound, velocity), cross.theta);
                }
                StepResult::Exit { offset: cross.theta, side: cross.side, velocity }
            }
        }
    }

    fn advance_halves<R: Rng>(
        &self,
        kernels: &[StepKernel],
        state: PhaseState,
        depth: u32,
        rng: &mut R,
        mut w: Option<&mut PathWeight>,
    ) -> StepResult {
        let half = kernels[depth as usize + 1].dt();
        match self.advance(kernels, state, depth + 1, rng, w.as_deref_mut()) {
            StepResult::Inside(mid) => match self.advance(kernels, mid, depth + 1, rng, w) {
                StepResult::Inside(end) => StepResult::Inside(end),
                StepResult::Exit { offset, side, velocity } => {
                    StepResult::Exit { offset: offset + half, side, velocity }
                }
            },
            exit => exit,
        }
    }

    /// Simulate one path; when `want_weight` is set, Girsanov integrals are
    /// accumulated by trapezoid on the (possibly refined) traversed grid.
    pub fn run_path<R: Rng>(
        &self,
        start: PhaseState,
        rng: &mut R,
        want_weight: bool,
    ) -> Result<(ExitOutcome, Option<PathWeight>)> {
        if !self.domain.contains(start.q) {
            return Err(Error::Domain(format!(
                "start state must be interior, got q={}",
                start.q
            )));
        }
        let mut weight = want_weight.then(|| PathWeight {
            sigma: self.kind.sigma(),
            ..PathWeight::default()
        });
        let mut state = start;
        for i in 0..self.n_base {
            match self.advance(&self.base, state, 0, rng, weight.as_mut()) {
                StepResult::Inside(s) => state = s,
                StepResult::Exit { offset, side, velocity } => {
                    return Ok((
                        ExitOutcome::Exited {
                            exit_time: i as f64 * self.config.dt + offset,
                            exit_side: side,
                            exit_velocity: velocity,
                        },
                        weight,
                    ));
                }
            }
        }
        if let Some(rem) = &self.rem {
            match self.advance(rem, state, 0, rng, weight.as_mut()) {
                StepResult::Inside(s) => state = s,
                StepResult::Exit { offset, side, velocity } => {
                    return Ok((
                        ExitOutcome::Exited {
                            exit_time: self.n_base as f64 * self.config.dt + offset,
                            exit_side: side,
                            exit_velocity: velocity,
                        },
                        weight,
                    ));
                }
            }
        }
        let _ = self.rem_len;
        Ok((ExitOutcome::Survived { final_state: state }, weight))
    }
}

#[inline]
fn accumulate(w: &mut PathWeight, s0: PhaseState, s1: PhaseState, dt: f64) {
    w.int_p2 += 0.5 * dt * (s0.p * s0.p + s1.p * s1.p);
    w.int_q2 += 0.5 * dt * (s0.q * s0.q + s1.q * s1.q);
    w.int_q += 0.5 * dt * (s0.q + s1.q);
}

/// Convenience single-path entry point (strip killing). Estimator loops
/// should build a [`Simulator`] once and call `run_path` per path.
pub fn simulate_until_exit<R: Rng>(
    kind: ProcessKind,
    start: PhaseState,
    config: SimConfig,
    rng: &mut R,
    want_weight: bool,
) -> Result<(ExitOutcome, Option<PathWeight>)> {
    Simulator::new(kind, Domain::Strip, config)?.run_path(start, rng, want_weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::path_rng;

    fn cfg(dt: f64, t: f64, n: u64, seed: u64) -> SimConfig {
        SimConfig::new(dt, t, n, seed).unwrap()
    }

    #[test]
    fn ballistic_start_exits_right() {
        let sim = Simulator::new(
            ProcessKind::Ibm { sigma: 1.0 },
            Domain::Strip,
            cfg(0.01, 1.0, 1, 3),
        )
        .unwrap();
        let mut right = 0u32;
        let n = 2000;
        for i in 0..n {
            let mut rng = path_rng(3, i);
            let (out, _) = sim.run_path(PhaseState::new(0.5, 10.0), &mut rng, false).unwrap();
            if let ExitOutcome::Exited { exit_side: 1, exit_time, .. } = out {
                right += 1;
                assert!(exit_time < 0.3);
            }
        }
        assert!(right as f64 / n as f64 >= 0.999, "{right}/{n}");
    }

    #[test]
    fn entering_velocity_never_exits_instantly() {
        let sim = Simulator::new(
            ProcessKind::Ibm { sigma: 1.0 },
            Domain::Strip,
            cfg(0.001, 0.1, 1, 5),
        )
        .unwrap();
        let mut survived = 0u32;
        let n = 2000;
        for i in 0..n {
            let mut rng = path_rng(5, i);
            let (out, _) = sim.run_path(PhaseState::new(1e-6, 1.0), &mut rng, false).unwrap();
            match out {
                ExitOutcome::Survived { .. } => survived += 1,
                ExitOutcome::Exited { exit_side, exit_time, .. } => {
                    assert!(
                        !(exit_side == 0 && exit_time < 1e-3),
                        "instant exit through side 0 at t={exit_time}"
                    );
                }
            }
        }
        assert!(survived as f64 / n as f64 > 0.9, "{survived}/{n}");
    }

    #[test]
    fn exit_velocity_signs_consistent() {
        let sim = Simulator::new(
            ProcessKind::Ibm { sigma: 1.0 },
            Domain::Strip,
            cfg(0.01, 2.0, 1, 9),
        )
        .unwrap();
        for i in 0..3000 {
            let mut rng = path_rng(9, i);
            let (out, _) = sim.run_path(PhaseState::new(0.5, 0.0), &mut rng, false).unwrap();
            if let ExitOutcome::Exited { exit_side, exit_velocity, exit_time } = out {
                assert!(exit_time <= 2.0 + 1e-12);
                if exit_side == 0 {
                    assert!(exit_velocity <= 1e-6, "side 0 with v={exit_velocity}");
                } else {
                    assert!(exit_velocity >= -1e-6, "side 1 with v={exit_velocity}");
                }
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let sim = Simulator::new(
            ProcessKind::Ibm { sigma: 1.0 },
            Domain::Strip,
            cfg(0.01, 1.0, 1, 1234),
        )
        .unwrap();
        for i in 0..50 {
            let mut r1 = path_rng(1234, i);
            let mut r2 = path_rng(1234, i);
            let a = sim.run_path(PhaseState::new(0.5, 0.0), &mut r1, true).unwrap();
            let b = sim.run_path(PhaseState::new(0.5, 0.0), &mut r2, true).unwrap();
            assert_eq!(a.0, b.0);
            assert_eq!(a.1, b.1);
        }
    }

    #[test]
    fn tiny_horizon_survives_interior_start() {
        let sim = Simulator::new(
            ProcessKind::Ibm { sigma: 1.0 },
            Domain::Strip,
            cfg(1e-4, 1e-4, 1, 77),
        )
        .unwrap();
        let mut surv = 0u32;
        for i in 0..10_000 {
            let mut rng = path_rng(77, i);
            let (out, _) = sim.run_path(PhaseState::new(0.5, 0.0), &mut rng, false).unwrap();
            if out.survived() {
                surv += 1;
            }
        }
        assert!(surv >= 9_999, "{surv}");
    }

    #[test]
    fn weight_integrals_accumulate_monotonically() {
        let sim = Simulator::new(
            ProcessKind::Ibm { sigma: 1.0 },
            Domain::Strip,
            cfg(0.01, 1.0, 1, 21),
        )
        .unwrap();
        let mut rng = path_rng(21, 4);
        let (_, w) = sim.run_path(PhaseState::new(0.5, 0.0), &mut rng, true).unwrap();
        let w = w.unwrap();
        assert!(w.int_p2 >= 0.0 && w.int_q2 >= 0.0 && w.int_q >= 0.0);
        assert_eq!(w.sigma, 1.0);
    }

    #[test]
    fn half_line_ignores_right_boundary() {
        let sim = Simulator::new(
            ProcessKind::Ibm { sigma: 1.0 },
            Domain::HalfLine,
            cfg(0.01, 1.0, 1, 31),
        )
        .unwrap();
        for i in 0..500 {
            let mut rng = path_rng(31, i);
            let (out, _) = sim.run_path(PhaseState::new(0.5, 5.0), &mut rng, false).unwrap();
            if let ExitOutcome::Exited { exit_side, .. } = out {
                assert_eq!(exit_side, 0);
            }
        }
    }

    #[test]
    fn remainder_step_handles_non_multiple_horizon() {
        let sim = Simulator::new(
            ProcessKind::Ibm { sigma: 1.0 },
            Domain::Strip,
            cfg(0.03, 0.1, 1, 41),
        )
        .unwrap();
        let mut rng = path_rng(41, 0);
        let (out, _) = sim.run_path(PhaseState::new(0.5, 0.0), &mut rng, false).unwrap();
        if let ExitOutcome::Exited { exit_time, .. } = out {
            assert!(exit_time <= 0.1);
        }
    }

    #[test]
    fn rejects_non_interior_start() {
        let sim = Simulator::new(
            ProcessKind::Ibm { sigma: 1.0 },
            Domain::Strip,
            cfg(0.01, 1.0, 1, 1),
        )
        .unwrap();
        let mut rng = path_rng(1, 0);
        assert!(sim.run_path(PhaseState::new(0.0, 0.5), &mut rng, false).is_err());
        assert!(sim.run_path(PhaseState::new(1.2, 0.5), &mut rng, false).is_err());
    }

    #[test]
    fn hermite_detects_mid_step_excursion() {
        // start and end inside, but a strong outward velocity pair forces the
        // cubic below 0 in the middle of the step
        let s0 = PhaseState::new(0.05, -2.0);
        let s1 = PhaseState::new(0.05, 2.0);
        let c = hermite_crossing(Domain::Strip, s0, s1, 0.2).expect("must cross");
        assert_eq!(c.side, 0);
        assert!(c.theta > 0.0 && c.theta < 0.2);
    }
}
