//! Confluent hypergeometric functions: Tricomi's U via its Laplace integral,
//! and Kummer's M via its power series (used for small arguments only).

use super::gamma::ln_gamma;
use super::quad::adaptive_gk;
use crate::error::{Error, Result};

/// U(a, b, x) for a > 0, x > 0 through the Laplace integral
/// U(a,b,x) = Γ(a)⁻¹ ∫₀^∞ e^{−xt} t^{a−1} (1+t)^{b−a−1} dt.
///
/// The integral is split at t = 1. On [0,1] the endpoint singularity t^{a−1}
/// is removed by the substitution t = s^{1/a} (applied when a < 1). The tail
/// is integrated octave by octave and truncated once an octave contributes
/// below 1e−18 of the running total.
pub fn kummer_u(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !(x > 0.0) || !b.is_finite() {
        return Err(Error::Domain(format!(
            "kummer_u requires a > 0 and x > 0, got a={a}, b={b}, x={x}"
        )));
    }
    let pw = b - a - 1.0;
    let head = if a < 1.0 {
        // t = s^{1/a}: (1/a) ∫₀¹ e^{−x s^{1/a}} (1 + s^{1/a})^{pw} ds, smooth.
        let inv_a = 1.0 / a;
        adaptive_gk(
            &|s: f64| {
                let t = s.powf(inv_a);
                (-x * t).exp() * (1.0 + t).powf(pw) * inv_a
            },
            0.0,
            1.0,
            1e-13,
            1e-300,
            48,
        )?
    } else {
        adaptive_gk(
            &|t: f64| (-x * t).exp() * t.powf(a - 1.0) * (1.0 + t).powf(pw),
            0.0,
            1.0,
            1e-13,
            1e-300,
            48,
        )?
    };

    let integrand = |t: f64| (-x * t).exp() * t.powf(a - 1.0) * (1.0 + t).powf(pw);
    let mut total = head;
    let mut lo = 1.0_f64;
    let mut converged = false;
    for _octave in 0..1100 {
        let hi = 2.0 * lo;
        let part = adaptive_gk(&integrand, lo, hi, 1e-13, 1e-18 * total.abs(), 48)?;
        total += part;
        // the integrand is eventually decreasing, so the left endpoint bounds
        // what any further octave can contribute per unit length
        if integrand(hi) * hi < 1e-18 * total {
            converged = true;
            break;
        }
        lo = hi;
    }
    if !converged {
        return Err(Error::QuadratureConvergence(format!(
            "kummer_u tail did not decay for a={a}, b={b}, x={x}"
        )));
    }
    Ok(total * (-ln_gamma(a)).exp())
}

/// Kummer's M(a, b, x) = ₁F₁(a; b; x) by power series; intended for |x| ≲ 30.
pub fn kummer_m(a: f64, b: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..500 {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * x / (kf + 1.0);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_1_1_1_is_e_times_e1() {
        // U(1,1,1) = e·E₁(1); frozen 40-digit oracle value.
        let got = kummer_u(1.0, 1.0, 1.0).unwrap();
        let want = 0.5963473623231940743;
        assert!(((got - want) / want).abs() < 1e-11, "{got} vs {want}");
    }

    #[test]
    fn u_sixth_values() {
        let got = kummer_u(1.0 / 6.0, 4.0 / 3.0, 1.0).unwrap();
        let want = 1.0208671373347342397;
        assert!(((got - want) / want).abs() < 1e-10, "{got} vs {want}");

        let got = kummer_u(7.0 / 6.0, 7.0 / 3.0, 2.0).unwrap();
        let want = 0.4777242369965306083;
        assert!(((got - want) / want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn u_large_x_leading_asymptotic() {
        // U(a,b,x) ~ x^{−a} as x → ∞
        let got = kummer_u(1.0 / 6.0, 4.0 / 3.0, 50.0).unwrap();
        let lead = 50.0_f64.powf(-1.0 / 6.0);
        assert!((got / lead - 1.0).abs() < 0.01, "{got} vs {lead}");
        // and the frozen exact value
        let want = 0.5212874331365837335;
        assert!(((got - want) / want).abs() < 1e-10);
    }

    #[test]
    fn u_small_x_continuity_with_g0() {
        // small-x expansion of (2/9)^{1/6}·z·U(1/6,4/3,(2/9)z³) is
        // g(0) + g'(0)·z + O(z⁴); check continuity with the g(0) closed form
        let z = 0.02_f64;
        let x = 2.0 / 9.0 * z.powi(3);
        let c16 = (2.0_f64 / 9.0).powf(1.0 / 6.0);
        let got = c16 * z * kummer_u(1.0 / 6.0, 4.0 / 3.0, x).unwrap();
        let want = 0.6183916885668086143 + 0.4668160001694873235 * z;
        assert!(((got - want) / want).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn u_domain_errors() {
        assert!(kummer_u(-0.5, 1.0, 1.0).is_err());
        assert!(kummer_u(0.5, 1.0, -1.0).is_err());
        assert!(kummer_u(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn m_series_matches_exponential() {
        // M(a, a, x) = e^x
        for &x in &[0.3, 1.0, 5.0, -2.0] {
            assert!((kummer_m(0.7, 0.7, x) / x.exp() - 1.0).abs() < 1e-13);
        }
    }
}
