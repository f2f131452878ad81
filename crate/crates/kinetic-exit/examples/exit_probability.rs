//! Survival probability of integrated Brownian motion killed at q ∈ {0,1},
//! plus the exit-side split at rest checked against Lachal's closed form.

use kinetic_exit::dynamics::{ProcessKind, SimConfig};
use kinetic_exit::estimators::{exit_prob_mc, exit_side_right_fraction};
use kinetic_exit::specfun::{envelope_h_strip, exit_right_first_prob_at_rest};
use kinetic_exit::PhaseState;

fn main() {
    let kind = ProcessKind::Ibm { sigma: 1.0 };
    let config = SimConfig::new(0.01, 1.0, 100_000, 42).unwrap();

    println!("P(tau > 1) from (q, 0), against the envelope H(q, 0):");
    for q in [0.1, 0.3, 0.5] {
        let est = exit_prob_mc(kind, PhaseState::new(q, 0.0), 1.0, &config).unwrap();
        let env = envelope_h_strip(q, 0.0).unwrap();
        println!(
            "  q = {q:.1}:  {:.4} +- {:.4}   H = {:.4}   ratio = {:.3}",
            est.mean, est.std_err, env, est.mean / env
        );
    }

    println!();
    println!("exit-side split started at rest (vs Lachal's 2F1 closed form):");
    let mut cfg = config;
    cfg.t_horizon = 60.0;
    cfg.n_paths = 20_000;
    for q in [0.1, 0.5, 0.9] {
        let mc = exit_side_right_fraction(q, &cfg).unwrap();
        let exact = exit_right_first_prob_at_rest(q).unwrap();
        println!(
            "  q = {q:.1}:  P(exit right) = {:.4} +- {:.4}   exact {:.6}",
            mc.mean, mc.std_err, exact
        );
    }
}
