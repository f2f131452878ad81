//! Closed-form mathematical layer: the harmonic function `g`, the boundary
//! envelopes built from it, and Lachal's explicit hitting laws for integrated
//! Brownian motion (used as Monte Carlo oracles).

mod g;
mod gamma;
mod kummer;
mod lachal;
pub mod quad;

pub use g::{continuation_splice_jump, g, g_at_zero_from_gammas, g_positive_branch_quadrature};
pub use gamma::{gamma, ln_gamma};
pub use kummer::{kummer_m, kummer_u};
pub use lachal::{exit_right_first_prob_at_rest, velocity_zero_position_density};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point (q, p) of the closed strip [0,1] × R: position and velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub q: f64,
    pub p: f64,
}

/// Boundary classification of a phase-space point on ∂D.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryClass {
    /// Interior point: 0 < q < 1.
    Interior,
    /// Γ⁺: exiting velocity — (q=0, p<0) or (q=1, p>0).
    Exiting,
    /// Γ⁻: entering velocity — (q=0, p>0) or (q=1, p<0).
    Entering,
    /// Γ⁰: the singular corners (0,0) and (1,0).
    Singular,
}

impl PhaseState {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }

    /// True iff 0 < q < 1.
    pub fn is_interior(&self) -> bool {
        self.q > 0.0 && self.q < 1.0
    }

    pub fn boundary_class(&self) -> BoundaryClass {
        if self.is_interior() {
            return BoundaryClass::Interior;
        }
        let outward = if self.q <= 0.0 { -self.p } else { self.p };
        if outward > 0.0 {
            BoundaryClass::Exiting
        } else if outward < 0.0 {
            BoundaryClass::Entering
        } else {
            BoundaryClass::Singular
        }
    }
}

/// Coefficients (α, β, γ, σ) of the linear Langevin SDE
/// dp = −(αq + β) dt − γp dt + σ dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Stiffness α ≥ 0.
    pub alpha: f64,
    /// Constant force β (any sign).
    pub beta: f64,
    /// Friction γ (sign-free).
    pub gamma: f64,
    /// Noise amplitude σ > 0.
    pub sigma: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, sigma: f64) -> Result<Self> {
        let p = Self { alpha, beta, gamma, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fin = self.alpha.is_finite()
            && self.beta.is_finite()
            && self.gamma.is_finite()
            && self.sigma.is_finite();
        if !fin || self.alpha < 0.0 || self.sigma <= 0.0 {
            return Err(Error::Domain(format!(
                "model params require alpha >= 0, sigma > 0, all finite; got {self:?}"
            )));
        }
        Ok(())
    }

    /// The friction-corrected tilt rate √(α + γ²/2)/√11 entering `H_full`.
    pub fn lambda_eff(&self) -> f64 {
        ((self.alpha + 0.5 * self.gamma * self.gamma) / 11.0).sqrt()
    }

    /// Integrated-Brownian parameters (α = β = γ = 0) with the given σ.
    pub fn ibm(sigma: f64) -> Result<Self> {
        Self::new(0.0, 0.0, 0.0, sigma)
    }

    /// The η-process: α = 3η², β = 0, γ = 4η.
    pub fn eta_process(eta: f64, sigma: f64) -> Result<Self> {
        if eta < 0.0 {
            return Err(Error::Domain(format!("eta process requires eta >= 0, got {eta}")));
        }
        Self::new(3.0 * eta * eta, 0.0, 4.0 * eta, sigma)
    }
}

/// h(q,p) = q^{1/6} g(p q^{−1/3}), the harmonic building block.
///
/// Defined for q > 0; extends continuously by 0 on {(0,p): p ≤ 0}, which this
/// function returns. q ≤ 0 with p > 0 has no continuous extension and errors.
pub fn h(q: f64, p: f64) -> Result<f64> {
    if q > 0.0 {
        Ok(q.powf(1.0 / 6.0) * g(p * q.powf(-1.0 / 3.0)))
    } else if q == 0.0 && p <= 0.0 {
        Ok(0.0)
    } else {
        Err(Error::Domain(format!("h undefined at q={q}, p={p}")))
    }
}

fn check_strip(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("position q={q} outside the open strip (0,1)")))
    }
}

/// H(q,p) = h(q,p) ∧ h(1−q,−p): the two-sided envelope for integrated
/// Brownian motion on the strip. Strictly positive on the open strip.
pub fn envelope_h_strip(q: f64, p: f64) -> Result<f64> {
    check_strip(q)?;
    Ok(h(q, p)?.min(h(1.0 - q, -p)?))
}

/// G_{λ,σ}(q,p) = h(q, z) ∧ (e^{−3λp/σ²} h(1−q, −z)) with z = (p+3λq)/σ^{2/3}.
pub fn envelope_g_tilted(lambda: f64, sigma: f64, q: f64, p: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !(sigma > 0.0) {
        return Err(Error::Domain(format!(
            "envelope G requires lambda >= 0 and sigma > 0, got lambda={lambda}, sigma={sigma}"
        )));
    }
    check_strip(q)?;
    let z = (p + 3.0 * lambda * q) / sigma.powf(2.0 / 3.0);
    let tilt = (-3.0 * lambda * p / (sigma * sigma)).exp();
    Ok(h(q, z)?.min(tilt * h(1.0 - q, -z)?))
}

/// T_{α,β,γ,σ}(q,p): the exponential drift/friction correction factor.
pub fn envelope_t(params: &ModelParams, q: f64, p: f64) -> f64 {
    let (a, b, c, s2) = (params.alpha, params.beta, params.gamma, params.sigma * params.sigma);
    let coef_p2 = 0.5 * c - 2.0 * ((a + 0.5 * c * c) / 11.0).sqrt();
    let coef_qp = 8.0 * a / 11.0 - 3.0 * c * c / 22.0;
    (-(p * p / s2) * coef_p2 - (q * p / s2) * coef_qp - b * p / s2).exp()
}

/// H_{α,β,γ,σ}(q,p) = T_{α,β,γ,σ}(q,p) · G_{λ,σ}(q,p) with λ = √(α+γ²/2)/√11.
pub fn envelope_h_full(params: &ModelParams, q: f64, p: f64) -> Result<f64> {
    params.validate()?;
    Ok(envelope_t(params, q, p) * envelope_g_tilted(params.lambda_eff(), params.sigma, q, p)?)
}
