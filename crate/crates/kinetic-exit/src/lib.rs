//! Exit-time statistics for the kinetic Langevin process killed outside the
//! position interval (0,1).
//!
//! The crate is organised in layers:
//!
//! * [`specfun`] — the harmonic function `g`, the boundary envelopes built
//!   from it (`h`, `H`, `G`, `T`, `H_full`), and Lachal's explicit hitting
//!   laws for integrated Brownian motion.
//! * [`dynamics`] — exact Gaussian transition samplers (no discretization
//!   bias in the transitions themselves), path simulation with killing at
//!   q ∈ {0,1}, and Girsanov weight accumulation.
//! * [`estimators`] — Monte Carlo survival probabilities, envelope ratio
//!   scans, exact-in-law identity checks, and asymptotic-exponent fits.
//! * [`qsd`] — Fleming–Viot particle runs, the principal killing rate λ₀,
//!   quasi-stationary density estimates, and conditional TV decay.
//! * [`harness`] — CLI, flat key=value config files, run manifests, JSONL
//!   result records and CSV emission.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod qsd;
pub mod specfun;

pub use error::Error;
pub use specfun::{ModelParams, PhaseState};
