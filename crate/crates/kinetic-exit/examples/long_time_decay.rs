//! The t^{-1/4} long-time law on the half-line: with killing at q = 0 only,
//! P(tau > t) ~ C h(q,p) t^{-1/4} with C = 3 Gamma(1/4) / (2^{3/4} pi^{3/2}).

use kinetic_exit::dynamics::SimConfig;
use kinetic_exit::estimators::{tail_exponent_fit, LONG_TIME_PREFACTOR};
use kinetic_exit::specfun::h;
use kinetic_exit::PhaseState;

fn main() {
    let start = PhaseState::new(1.0, 0.0);
    let ts = [10.0, 20.0, 40.0, 80.0];
    let config = SimConfig::new(0.05, 1.0, 200_000, 23).unwrap();

    let fit = tail_exponent_fit(1.0, start, &ts, &config).unwrap();
    println!("log P(tau_0 > t) vs log t from (1, 0):");
    for (t, est) in &fit.probs {
        println!("  t = {t:>5}:  {:.5} +- {:.5}", est.mean, est.std_err);
    }
    println!();
    println!("slope     = {:+.4}   (target -0.25)", fit.fit.slope);
    println!("r2        = {:.5}", fit.fit.r2);
    let target = LONG_TIME_PREFACTOR * h(start.q, start.p).unwrap();
    println!(
        "prefactor = {:.4}    (target C*h(1,0) = {:.4}, off by {:+.1}%)",
        fit.implied_prefactor,
        target,
        100.0 * (fit.implied_prefactor / target - 1.0)
    );
}
