//! Exact one-step Gaussian transitions for integrated Brownian motion and
//! the general linear Langevin system.

use crate::specfun::{ModelParams, PhaseState};
use nalgebra::{Matrix2, SMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

/// Exact IBM transition over dt: mean (q + p·dt, p), covariance
/// σ²[[dt³/3, dt²/2],[dt²/2, dt]] (Cholesky sampled, no discretization bias).
#[inline]
pub fn ibm_transition<R: Rng>(state: PhaseState, dt: f64, sigma: f64, rng: &mut R) -> PhaseState {
    let x1: f64 = rng.sample(StandardNormal);
    let x2: f64 = rng.sample(StandardNormal);
    let sq = dt.sqrt();
    let dp = sigma * sq * x1;
    let dq = state.p * dt + sigma * dt * sq * (0.5 * x1 + x2 / (2.0 * 3.0_f64.sqrt()));
    PhaseState::new(state.q + dq, state.p + dp)
}

/// Precomputed exact transition of the linear Langevin system over a fixed
/// step: mean map e^{A dt}·x + drift, and the Cholesky factor of the exact
/// covariance ∫₀^dt e^{As} diag(0,σ²) e^{Aᵀs} ds.
#[derive(Debug, Clone, Copy)]
pub struct LinearTransition {
    pub dt: f64,
    m: Matrix2<f64>,
    drift: [f64; 2],
    l11: f64,
    l21: f64,
    l22: f64,
}

impl LinearTransition {
    /// Build via block matrix exponentials (Van Loan), uniformly accurate in
    /// the parameters — no special-casing of defective eigenvalues of A.
    pub fn new(params: &ModelParams, dt: f64) -> Self {
        let a = Matrix2::new(0.0, 1.0, -params.alpha, -params.gamma);

        // mean map and constant-force response from exp of [[A, b],[0, 0]]
        let mut aug = SMatrix::<f64, 3, 3>::zeros();
        aug.fixed_view_mut::<2, 2>(0, 0).copy_from(&(a * dt));
        aug[(1, 2)] = -params.beta * dt;
        let eaug = aug.exp();
        let m = eaug.fixed_view::<2, 2>(0, 0).into_owned();
        let drift = [eaug[(0, 2)], eaug[(1, 2)]];

        // covariance from exp of [[−A, Q],[0, Aᵀ]]·dt (Van Loan):
        // cov = F2ᵀ G1 where the exponential is [[F1, G1],[0, F2]]
        let s2 = params.sigma * params.sigma;
        let mut vl = SMatrix::<f64, 4, 4>::zeros();
        vl.fixed_view_mut::<2, 2>(0, 0).copy_from(&(-a * dt));
        vl.fixed_view_mut::<2, 2>(2, 2).copy_from(&(a.transpose() * dt));
        vl[(1, 3)] = s2 * dt; // Q = diag(0, σ²)
        let evl = vl.exp();
        let f2 = evl.fixed_view::<2, 2>(2, 2).into_owned();
        let g1 = evl.fixed_view::<2, 2>(0, 2).into_owned();
        let cov = f2.transpose() * g1;

        // 2×2 Cholesky; c11 > 0 for every dt > 0 (hypoellipticity)
        let c11 = cov[(0, 0)].max(0.0);
        let c12 = 0.5 * (cov[(0, 1)] + cov[(1, 0)]);
        let c22 = cov[(1, 1)].max(0.0);
        let l11 = c11.sqrt();
        let l21 = if l11 > 0.0 { c12 / l11 } else { 0.0 };
        let l22 = (c22 - l21 * l21).max(0.0).sqrt();

        Self { dt, m, drift, l11, l21, l22 }
    }

    #[inline]
    pub fn step<R: Rng>(&self, state: PhaseState, rng: &mut R) -> PhaseState {
        let x1: f64 = rng.sample(StandardNormal);
        let x2: f64 = rng.sample(StandardNormal);
        let mq = self.m[(0, 0)] * state.q + self.m[(0, 1)] * state.p + self.drift[0];
        let mp = self.m[(1, 0)] * state.q + self.m[(1, 1)] * state.p + self.drift[1];
        PhaseState::new(mq + self.l11 * x1, mp + self.l21 * x1 + self.l22 * x2)
    }

    /// Exact conditional mean of the step (used in tests).
    pub fn mean(&self, state: PhaseState) -> (f64, f64) {
        (
            self.m[(0, 0)] * state.q + self.m[(0, 1)] * state.p + self.drift[0],
            self.m[(1, 0)] * state.q + self.m[(1, 1)] * state.p + self.drift[1],
        )
    }

    /// Exact step covariance entries (cqq, cqp, cpp), used in tests.
    pub fn covariance(&self) -> (f64, f64, f64) {
        (
            self.l11 * self.l11,
            self.l11 * self.l21,
            self.l21 * self.l21 + self.l22 * self.l22,
        )
    }
}

/// One exact transition of the linear Langevin system (builds the kernel on
/// the fly; for hot loops prebuild a [`LinearTransition`]).
pub fn linear_langevin_transition<R: Rng>(
    params: &ModelParams,
    state: PhaseState,
    dt: f64,
    rng: &mut R,
) -> PhaseState {
    LinearTransition::new(params, dt).step(state, rng)
}
