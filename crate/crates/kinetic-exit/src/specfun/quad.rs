//! Quadrature rules: adaptive Gauss–Kronrod 15(7) bisection and
//! double-exponential (tanh-sinh) quadrature for endpoint singularities.

use crate::error::{Error, Result};

// 15-point Kronrod nodes/weights (positive half) and embedded 7-point Gauss
// weights, standard QUADPACK values.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod 15(7) panel: returns (integral, error estimate).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut ik = WGK[7] * fc;
    let mut ig = WG[3] * fc;
    for i in 0..7 {
        let fl = f(c - r * XGK[i]);
        let fr = f(c + r * XGK[i]);
        ik += WGK[i] * (fl + fr);
        if i % 2 == 1 {
            ig += WG[i / 2] * (fl + fr);
        }
    }
    (ik * r, ((ik - ig) * r).abs())
}

/// Adaptive bisection on top of `gk15`.
pub fn adaptive_gk<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_depth: u32,
) -> Result<f64> {
    // Tolerance is distributed proportionally to panel length, so the summed
    // error over all accepted panels stays below the global budget.
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        err: f64,
        tol_per_len: f64,
        floor: f64,
        depth: u32,
    ) -> Result<f64> {
        if err <= tol_per_len * (b - a) || err <= floor {
            return Ok(whole);
        }
        if depth == 0 {
            return Err(Error::QuadratureConvergence(format!(
                "adaptive GK15 exhausted depth on [{a}, {b}], err {err:.3e}"
            )));
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Ok(whole); // interval at f64 resolution
        }
        let (il, el) = gk15(f, a, m);
        let (ir, er) = gk15(f, m, b);
        Ok(rec(f, a, m, il, el, tol_per_len, floor, depth - 1)?
            + rec(f, m, b, ir, er, tol_per_len, floor, depth - 1)?)
    }
    let (i0, e0) = gk15(f, a, b);
    let tol = abs_tol.max(rel_tol * i0.abs());
    // below ~50 eps of the first-pass magnitude no bisection can help
    let floor = 50.0 * f64::EPSILON * i0.abs() / (b - a).max(f64::MIN_POSITIVE);
    rec(f, a, b, i0, e0, tol / (b - a), floor, max_depth)
}

/// Tanh-sinh (double-exponential) quadrature on (a, b), tolerant of
/// integrable endpoint singularities.
///
/// The integrand receives `(x, x − a, b − x)` with the endpoint distances
/// computed in a cancellation-free way, so factors like `(b−x)^{−2/3}` can be
/// evaluated accurately arbitrarily close to the endpoints.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let r = 0.5 * (b - a);
    let t_max = 4.0_f64;
    let eval = |t: f64| -> f64 {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        // 1 − tanh(u) = 2 e^{−2u} / (1 + e^{−2u}): stable endpoint distances.
        let em = (-2.0 * u.abs()).exp();
        let dist = 2.0 * em / (1.0 + em); // 1 − |tanh(u)|
        let (wa, wb) = if t >= 0.0 { (2.0 - dist, dist) } else { (dist, 2.0 - dist) };
        let x = a + r * wa;
        // sech²(u) = 4 e^{−2|u|}/(1 + e^{−2|u|})², cancellation-free
        let sech2 = 4.0 * em / ((1.0 + em) * (1.0 + em));
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() * sech2;
        let v = f(x, r * wa, r * wb) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    // Level 0: h = 1.
    let mut h = 1.0;
    let mut n = t_max as i64;
    let mut sum = eval(0.0);
    for k in 1..=n {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
    }
    let mut prev = sum * h * r;
    for _level in 1..=12 {
        h *= 0.5;
        n *= 2;
        // add the new midpoints (odd multiples of the new h)
        let mut add = 0.0;
        let mut k = 1;
        while k <= n {
            add += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        sum += add;
        let cur = sum * h * r;
        if (cur - prev).abs() <= rel_tol * cur.abs().max(1e-300) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureConvergence(format!(
        "tanh-sinh did not converge on [{a}, {b}] to rel_tol {rel_tol:.3e}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk15_polynomial_exact() {
        // degree-22 exactness of Kronrod 15 covers this comfortably
        let (i, _) = gk15(&|x: f64| x * x * x - 2.0 * x + 1.0, 0.0, 2.0);
        assert!((i - (4.0 - 4.0 + 2.0)).abs() < 1e-13);
    }

    #[test]
    fn adaptive_oscillatory() {
        let i = adaptive_gk(&|x: f64| (10.0 * x).sin(), 0.0, 1.0, 1e-12, 1e-300, 40).unwrap();
        let want = (1.0 - 10.0_f64.cos()) / 10.0;
        assert!((i - want).abs() < 1e-11, "{i} vs {want}");
    }

    #[test]
    fn tanh_sinh_beta_integral() {
        // ∫₀¹ x^{−1/6}(1−x)^{−2/3} dx = B(5/6, 1/3)
        let i = tanh_sinh(
            &|_x, wa: f64, wb: f64| wa.powf(-1.0 / 6.0) * wb.powf(-2.0 / 3.0),
            0.0,
            1.0,
            1e-12,
        )
        .unwrap();
        let want = 3.259553792057860242; // Γ(5/6)Γ(1/3)/Γ(7/6)
        assert!(((i - want) / want).abs() < 1e-10, "{i} vs {want}");
    }

    #[test]
    fn tanh_sinh_smooth() {
        let i = tanh_sinh(&|x: f64, _, _| x.exp(), 0.0, 1.0, 1e-13).unwrap();
        assert!((i - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }
}
