//! Property-based checks of the exact algebraic structure: scaling laws of
//! the envelope functions, symmetry of the two-sided envelope, degeneracies
//! of the tilted envelope and the Girsanov weight, and confidence-interval
//! sanity for the Bernoulli estimator.

use kinetic_exit::dynamics::{girsanov_log_weight_endpoint, PathWeight};
use kinetic_exit::estimators::Estimate;
use kinetic_exit::specfun::{envelope_g_tilted, envelope_h_strip, h};
use kinetic_exit::{ModelParams, PhaseState};
use proptest::prelude::*;

proptest! {
    /// Brownian scaling of the harmonic block: h(λ³q, λp) = λ^{1/2} h(q, p).
    #[test]
    fn h_brownian_scaling(
        q in 1e-3f64..10.0,
        p in -10.0f64..10.0,
        lambda in 0.2f64..5.0,
    ) {
        let lhs = h(lambda.powi(3) * q, lambda * p).unwrap();
        let rhs = lambda.sqrt() * h(q, p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1e-300),
            "lhs {lhs:e} vs rhs {rhs:e}");
    }

    /// The two-sided strip envelope is symmetric under (q,p) -> (1-q,-p).
    #[test]
    fn strip_envelope_reflection_symmetry(
        q in 1e-6f64..1.0 - 1e-6,
        p in -8.0f64..8.0,
    ) {
        let a = envelope_h_strip(q, p).unwrap();
        let b = envelope_h_strip(1.0 - q, -p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{a:e} vs {b:e}");
    }

    /// The strip envelope is strictly positive on the open strip.
    #[test]
    fn strip_envelope_positive(
        q in 1e-6f64..1.0 - 1e-6,
        p in -8.0f64..8.0,
    ) {
        prop_assert!(envelope_h_strip(q, p).unwrap() > 0.0);
    }

    /// The tilted envelope at zero tilt reduces to the strip envelope after
    /// the σ^{2/3} velocity rescale.
    #[test]
    fn tilted_envelope_zero_tilt_degeneracy(
        q in 1e-6f64..1.0 - 1e-6,
        p in -8.0f64..8.0,
        sigma in 0.3f64..3.0,
    ) {
        let a = envelope_g_tilted(0.0, sigma, q, p).unwrap();
        let b = envelope_h_strip(q, p / sigma.powf(2.0 / 3.0)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{a:e} vs {b:e}");
    }

    /// Girsanov weight degeneracy: with α = β = γ = 0 the two laws coincide
    /// and log Z = 0 exactly, whatever path functionals are fed in.
    #[test]
    fn girsanov_weight_trivial_for_ibm(
        q0 in 0.0f64..1.0,
        p0 in -3.0f64..3.0,
        q1 in -2.0f64..2.0,
        p1 in -3.0f64..3.0,
        t in 0.1f64..10.0,
        int_p2 in 0.0f64..50.0,
        int_q2 in 0.0f64..50.0,
        int_q in -20.0f64..20.0,
        sigma in 0.3f64..3.0,
    ) {
        let params = ModelParams::ibm(sigma).unwrap();
        let w = PathWeight { log_weight: 0.0, int_p2, int_q2, int_q, sigma };
        let logz = girsanov_log_weight_endpoint(
            &params,
            PhaseState::new(q0, p0),
            PhaseState::new(q1, p1),
            t,
            &w,
        )
        .unwrap();
        prop_assert!(logz == 0.0, "log Z = {logz:e}");
    }

    /// Wilson confidence intervals are ordered, contain the point estimate,
    /// and stay inside [0, 1].
    #[test]
    fn wilson_interval_sanity(successes in 0u64..=10_000, extra in 0u64..=10_000) {
        let n = successes + extra;
        prop_assume!(n > 0);
        let e = Estimate::bernoulli(successes, n, 0.99);
        prop_assert!(e.ci_lo >= 0.0 && e.ci_hi <= 1.0);
        prop_assert!(e.ci_lo <= e.mean && e.mean <= e.ci_hi);
        prop_assert!((e.mean - successes as f64 / n as f64).abs() < 1e-15);
        if successes > 0 && extra > 0 {
            prop_assert!(e.ci_lo < e.mean && e.mean < e.ci_hi);
            prop_assert!(e.std_err > 0.0);
        }
    }
}
