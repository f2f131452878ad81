//! Monte Carlo scalar with standard error and confidence interval.

use serde::{Deserialize, Serialize};

/// Inverse standard-normal CDF (Acklam's rational approximation, relative
/// error below 1.2e−9 — far below any Monte Carlo resolution here).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1), got {p}");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

/// A Monte Carlo scalar with standard error, path count and CI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_paths: u64,
    pub ci_level: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Estimate {
    /// Bernoulli estimand: SE = √(m(1−m)/n), Wilson score interval.
    pub fn bernoulli(successes: u64, n: u64, ci_level: f64) -> Self {
        let nf = n.max(1) as f64;
        let m = successes as f64 / nf;
        let std_err = (m * (1.0 - m) / nf).sqrt();
        let z = normal_quantile(0.5 + ci_level / 2.0);
        let z2 = z * z;
        let denom = 1.0 + z2 / nf;
        let center = (m + z2 / (2.0 * nf)) / denom;
        let half = z * (m * (1.0 - m) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
        Self {
            mean: m,
            std_err,
            n_paths: n,
            ci_level,
            ci_lo: (center - half).max(0.0),
            ci_hi: (center + half).min(1.0),
        }
    }

    /// Generic estimand from sample mean and (population-style) variance.
    pub fn from_moments(mean: f64, var: f64, n: u64, ci_level: f64) -> Self {
        let std_err = (var / n.max(1) as f64).sqrt();
        let z = normal_quantile(0.5 + ci_level / 2.0);
        Self {
            mean,
            std_err,
            n_paths: n,
            ci_level,
            ci_lo: mean - z * std_err,
            ci_hi: mean + z * std_err,
        }
    }

    /// |a − b| in units of the combined standard error.
    pub fn combined_se_distance(&self, other: &Estimate) -> f64 {
        let se = (self.std_err * self.std_err + other.std_err * other.std_err).sqrt();
        if se == 0.0 {
            if self.mean == other.mean {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - other.mean).abs() / se
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_matches_known_points() {
        assert!((normal_quantile(0.5)).abs() < 1e-9);
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-7);
        assert!((normal_quantile(0.995) - 2.575829303548901).abs() < 1e-7);
        assert!((normal_quantile(0.025) + 1.959963984540054).abs() < 1e-7);
    }

    #[test]
    fn wilson_interval_contains_mean_and_respects_bounds() {
        let e = Estimate::bernoulli(3, 10, 0.99);
        assert!(e.ci_lo <= e.mean && e.mean <= e.ci_hi);
        assert!(e.ci_lo >= 0.0 && e.ci_hi <= 1.0);
        // extreme counts stay inside [0,1] and keep a nonzero interval
        let e = Estimate::bernoulli(0, 10, 0.99);
        assert!(e.ci_lo.abs() < 1e-12 && e.ci_hi > 0.0);
        let e = Estimate::bernoulli(10, 10, 0.99);
        assert!((e.ci_hi - 1.0).abs() < 1e-12 && e.ci_lo < 1.0);
    }

    #[test]
    fn bernoulli_se_formula() {
        let e = Estimate::bernoulli(250, 1000, 0.99);
        assert!((e.std_err - (0.25f64 * 0.75 / 1000.0).sqrt()).abs() < 1e-15);
    }
}
