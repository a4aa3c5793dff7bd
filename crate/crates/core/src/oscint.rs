//! Stable closed-form trigonometric integrals on [0, T] and a Filon-type
//! rule for oscillatory integrals of sampled data.
//!
//! Every formula switches to its Taylor expansion below a small-phase
//! threshold so near-coincident frequencies never hit 0/0 cancellation.

use num_complex::Complex64;

const SMALL_PHASE: f64 = 0.1;

/// sin(z)/z.
pub fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 6.0 + z * z * z * z / 120.0
    } else {
        z.sin() / z
    }
}

/// Integral of cos(e t) over [0, T].
pub fn int_cos(e: f64, t_final: f64) -> f64 {
    t_final * sinc(e * t_final)
}

/// Integral of sin(e t) over [0, T].
pub fn int_sin(e: f64, t_final: f64) -> f64 {
    let z = e * t_final;
    if z.abs() < SMALL_PHASE {
        // z T/2 - z^3 T/24 + z^5 T/720
        t_final * z * (0.5 - z * z / 24.0 + z * z * z * z / 720.0)
    } else {
        let s = (0.5 * z).sin();
        2.0 * s * s / e
    }
}

/// Integral of t cos(e t) over [0, T].
pub fn int_t_cos(e: f64, t_final: f64) -> f64 {
    let z = e * t_final;
    let t2 = t_final * t_final;
    if z.abs() < SMALL_PHASE {
        let z2 = z * z;
        t2 * (0.5 - z2 / 8.0 + z2 * z2 / 144.0 - z2 * z2 * z2 / 5760.0)
    } else {
        let s = (0.5 * z).sin();
        -2.0 * s * s / (e * e) + t_final * z.sin() / e
    }
}

/// Integral of t sin(e t) over [0, T].
pub fn int_t_sin(e: f64, t_final: f64) -> f64 {
    let z = e * t_final;
    if z.abs() < SMALL_PHASE {
        let z2 = z * z;
        let t3 = t_final * t_final * t_final;
        e * t3 * (1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0 - z2 * z2 * z2 / 45360.0)
    } else {
        z.sin() / (e * e) - t_final * z.cos() / e
    }
}

/// Integral of cos(a t) cos(b t) over [0, T].
pub fn cos_cos(a: f64, b: f64, t_final: f64) -> f64 {
    0.5 * (int_cos(a - b, t_final) + int_cos(a + b, t_final))
}

/// Integral of sin(a t) sin(b t) over [0, T].
pub fn sin_sin(a: f64, b: f64, t_final: f64) -> f64 {
    0.5 * (int_cos(a - b, t_final) - int_cos(a + b, t_final))
}

/// Integral of sin(a t) cos(b t) over [0, T].
pub fn sin_cos(a: f64, b: f64, t_final: f64) -> f64 {
    0.5 * (int_sin(a + b, t_final) + int_sin(a - b, t_final))
}

/// Filon-type integral of r(s) e^{-i omega s} over the sample grid, with r
/// linearly interpolated between samples. The oscillation is integrated
/// exactly, so the error is O(h^2 r'') independent of omega.
pub fn filon_linear(times: &[f64], values: &[f64], omega: f64) -> Complex64 {
    assert_eq!(times.len(), values.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..times.len() {
        let t0 = times[k - 1];
        let h = times[k] - t0;
        if h <= 0.0 {
            continue;
        }
        let r0 = values[k - 1];
        let slope = (values[k] - r0) / h;
        let z = omega * h;
        let (i0, i1) = if z.abs() < SMALL_PHASE {
            // I0 = h sum (-izh)^k/(k+1)!, I1 = h^2 sum (-izh)^k/(k!(k+2))
            let m = Complex64::new(0.0, -z);
            let mut i0 = Complex64::new(1.0, 0.0);
            let mut i1 = Complex64::new(0.5, 0.0);
            let mut pw = Complex64::new(1.0, 0.0);
            let mut fact = 1.0;
            for j in 1..=8u32 {
                pw *= m;
                fact *= j as f64;
                i0 += pw / (fact * (j as f64 + 1.0));
                i1 += pw / (fact * (j as f64 + 2.0));
            }
            (h * i0, h * h * i1)
        } else {
            let w = Complex64::new(0.0, -z).exp();
            let iw = Complex64::new(0.0, omega);
            let one = Complex64::new(1.0, 0.0);
            let i0 = (one - w) / iw;
            let i1 = Complex64::new(0.0, h) * w / omega + (w - one) / (omega * omega);
            (i0, i1)
        };
        let phase = Complex64::new(0.0, -omega * t0).exp();
        acc += phase * (r0 * i0 + slope * i1);
    }
    acc
}

/// Integral of r(s) ds with r linearly interpolated (exact trapezoid).
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 1..times.len() {
        acc += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
    }
    acc
}

/// Integral of s r(s) ds with r linearly interpolated (exact per interval).
pub fn first_moment(times: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 1..times.len() {
        let (t0, t1) = (times[k - 1], times[k]);
        let (r0, r1) = (values[k - 1], values[k]);
        let h = t1 - t0;
        // int (t0+u)(r0 + u (r1-r0)/h) du over [0,h]
        acc += t0 * 0.5 * h * (r0 + r1) + h * h * (r0 / 6.0 + r1 / 3.0);
    }
    acc
}
