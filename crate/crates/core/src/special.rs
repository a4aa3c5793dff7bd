//! Fractional-order Bessel functions of the first kind, their derivatives and
//! positive zeros, plus the Gamma function needed by the series definition.
//!
//! `J_nu` is evaluated by the power series for x <= 40 (summed in
//! double-double arithmetic so the alternating-series cancellation does not
//! eat the 1e-12 accuracy budget) and by the Hankel asymptotic expansion for
//! x > 40, with order reduction to [-1, 1.5] followed by forward recurrence
//! for larger orders (stable there since x > 4*nu over the supported range).

use crate::dd::Dd;
use crate::{Error, Result};
use std::f64::consts::PI;

/// Crossover between the power-series and asymptotic regimes.
pub const SERIES_CUTOFF: f64 = 40.0;

// Lanczos coefficients, g = 607/128, 15 terms (Godfrey's set).
const LANCZOS_G: f64 = 4.7421875;
const LANCZOS: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
];

/// Gamma function via a fixed-coefficient Lanczos approximation.
pub fn gamma(x: f64) -> Result<f64> {
    if x <= 0.0 && x == x.floor() {
        return Err(Error::GammaPole(x));
    }
    Ok(gamma_inner(x))
}

fn gamma_inner(x: f64) -> f64 {
    if x < 0.5 {
        // reflection formula
        PI / ((PI * x).sin() * gamma_inner(1.0 - x))
    } else {
        let z = x - 1.0;
        let mut a = LANCZOS[0];
        for (k, c) in LANCZOS.iter().enumerate().skip(1) {
            a += c / (z + k as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * a
    }
}

/// Bessel function of the first kind, real order `nu > -1`, argument `x >= 0`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !(nu > -1.0) || !nu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bessel order nu = {nu} outside supported range (-1, inf)"
        )));
    }
    if x < 0.0 || !x.is_finite() {
        return Err(Error::NegativeArgument { x });
    }
    if x == 0.0 {
        return if nu < 0.0 {
            Err(Error::BesselAtZero { nu })
        } else if nu == 0.0 {
            Ok(1.0)
        } else {
            Ok(0.0)
        };
    }
    if x <= SERIES_CUTOFF {
        series_dd(nu, x)
    } else if nu <= 1.5 {
        Ok(hankel(nu, x))
    } else {
        // reduce to a base order f in [0.5, 1.5), recur upward
        let k = (nu - 0.5).floor();
        let f = nu - k;
        let mut jm1 = hankel(f, x);
        let mut j = hankel(f + 1.0, x);
        let mut order = f + 1.0;
        while order < nu - 0.5 {
            let next = (2.0 * order / x) * j - jm1;
            jm1 = j;
            j = next;
            order += 1.0;
        }
        Ok(j)
    }
}

/// Power series summed in double-double arithmetic.
fn series_dd(nu: f64, x: f64) -> Result<f64> {
    let half = 0.5 * x;
    let pref = half.powf(nu) / gamma(nu + 1.0)?;
    let q = Dd::prod(half, half);
    let mut sum = Dd::from(1.0);
    let mut term = Dd::from(1.0);
    let mut max_term = 1.0_f64;
    for m in 1..=600 {
        let mf = m as f64;
        let den = Dd::sum(mf, nu).mul(Dd::from(mf));
        term = term.mul(q).div(den).neg();
        sum = sum.add(term);
        max_term = max_term.max(term.abs_hi());
        if term.abs_hi() < 1e-35 * max_term && mf > half {
            break;
        }
    }
    Ok(pref * sum.value())
}

/// Hankel asymptotic expansion, valid for x > SERIES_CUTOFF and |nu| <= ~2.5.
fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut t = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..=40u32 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        t *= (mu - odd * odd) / (8.0 * kf * x);
        if t.abs() >= prev {
            break; // asymptotic tail started to diverge
        }
        prev = t.abs();
        // signs: P = t0 - t2 + t4 - ..., Q = t1 - t3 + t5 - ...
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * t;
        } else {
            p += sign * t;
        }
        if t.abs() < 1e-18 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Derivative via the Watson relation `z J_nu'(z) = nu J_nu(z) - z J_{nu+1}(z)`.
pub fn bessel_j_prime(nu: f64, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::NegativeArgument { x });
    }
    Ok((nu / x) * bessel_j(nu, x)? - bessel_j(nu + 1.0, x)?)
}

/// Table of the first positive zeros of `J_nu`.
#[derive(Debug, Clone)]
pub struct BesselZeroTable {
    pub order: f64,
    pub zeros: Vec<f64>,
    pub tolerance: f64,
}

/// McMahon first-order guess for the n-th positive zero of `J_nu`.
pub fn mcmahon(nu: f64, n: usize) -> f64 {
    let a = PI * (n as f64 + 0.5 * nu - 0.25);
    let mu = 4.0 * nu * nu;
    a - (mu - 1.0) / (8.0 * a)
}

/// Locate the first `count` positive zeros of `J_nu`, each polished until
/// `|J_nu| <= tol`.
///
/// The zeros are isolated by a sign-change scan with step pi/2 (consecutive
/// zeros of `J_nu` are at least pi apart for nu >= 1/2), so none can be
/// skipped; each bracket is then refined by Newton with a bisection fallback.
pub fn bessel_zeros(nu: f64, count: usize, tol: f64) -> Result<BesselZeroTable> {
    if nu < 0.4 {
        return Err(Error::InvalidArgument(format!(
            "bessel_zeros requires nu >= 0.4 (got {nu})"
        )));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("count must be >= 1".into()));
    }
    let step = 0.5 * PI;
    let mut zeros = Vec::with_capacity(count);
    let mut x = if nu < 1.0 { 0.05 } else { 0.5 * nu };
    let scan_limit = PI * (count as f64 + nu) + 30.0;
    let mut fx = bessel_j(nu, x)?;
    while zeros.len() < count {
        if x > scan_limit {
            return Err(Error::ZeroFinding { nu, index: zeros.len() + 1, lo: x, hi: x });
        }
        let x2 = x + step;
        let fx2 = bessel_j(nu, x2)?;
        if fx == 0.0 {
            zeros.push(x);
        } else if fx.signum() != fx2.signum() {
            let z = refine_zero(nu, x, x2, tol, zeros.len() + 1)?;
            zeros.push(z);
        }
        x = x2;
        fx = fx2;
    }
    Ok(BesselZeroTable { order: nu, zeros, tolerance: tol })
}

fn refine_zero(nu: f64, mut lo: f64, mut hi: f64, tol: f64, index: usize) -> Result<f64> {
    let mut flo = bessel_j(nu, lo)?;
    let mut x = 0.5 * (lo + hi);
    for iter in 0..240 {
        let f = bessel_j(nu, x)?;
        if f.abs() <= tol {
            return Ok(x);
        }
        // keep the bracket current
        if f.signum() == flo.signum() {
            lo = x;
            flo = f;
        } else {
            hi = x;
        }
        let mut next = x;
        if iter < 40 {
            let fp = bessel_j_prime(nu, x)?;
            if fp != 0.0 {
                next = x - f / fp;
            }
        }
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == x {
            next = 0.5 * (lo + hi);
        }
        x = next;
    }
    Err(Error::ZeroFinding { nu, index, lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sin_form(x: f64) -> f64 {
        (2.0 / (PI * x)).sqrt() * x.sin()
    }
    fn cos_form(x: f64) -> f64 {
        (2.0 / (PI * x)).sqrt() * x.cos()
    }

    #[test]
    fn gamma_basics() {
        assert!((gamma(1.0).unwrap() - 1.0).abs() < 1e-15);
        let g = gamma(0.5).unwrap();
        assert!((g - PI.sqrt()).abs() / PI.sqrt() < 1e-13);
        // frozen from an arbitrary-precision recurrence oracle
        let g725 = gamma(7.25).unwrap();
        assert!((g725 - 1155.3810139199896872).abs() / 1155.38 < 1e-13);
        assert!(gamma(0.0).is_err());
        assert!(gamma(-3.0).is_err());
        // recurrence over the contract interval
        for i in 1..=40 {
            let x = 0.5 + 1.2 * i as f64;
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert!((lhs - rhs).abs() / lhs.abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn half_integer_closed_forms() {
        for &x in &[1.0, 2.0, 5.0, 13.0, 50.0, 120.0] {
            let j = bessel_j(0.5, x).unwrap();
            assert!((j - sin_form(x)).abs() < 1e-13, "J_1/2({x})");
            let jm = bessel_j(-0.5, x).unwrap();
            assert!((jm - cos_form(x)).abs() < 1e-13, "J_-1/2({x})");
        }
    }

    #[test]
    fn series_oracle_value() {
        // frozen 60-term arbitrary-precision series oracle
        let j = bessel_j(0.75, 1.0).unwrap();
        assert!((j - 0.55865249320489174775).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_j(-0.25, 0.0).is_err());
        assert!(bessel_j(0.5, -1.0).is_err());
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(2.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn derivative_identities() {
        // J_0' = -J_1
        for &x in &[0.7, 3.0, 55.0] {
            let lhs = bessel_j_prime(0.0, x).unwrap();
            let rhs = -bessel_j(1.0, x).unwrap();
            assert!((lhs - rhs).abs() < 1e-13);
        }
        // finite-difference consistency
        let h = 1e-5;
        for &(nu, x) in &[(0.5, PI), (0.75, 2.0), (-0.25, 1.3), (3.0, 17.0)] {
            let fd = (bessel_j(nu, x + h).unwrap() - bessel_j(nu, x - h).unwrap()) / (2.0 * h);
            let an = bessel_j_prime(nu, x).unwrap();
            assert!((fd - an).abs() < 1e-6, "nu = {nu}, x = {x}");
        }
        // Watson relation at negative order: x J'_{-nu} + nu J_{-nu} = -x J_{-nu+1}
        let (nu, x) = (0.25, 2.0);
        let lhs = x * bessel_j_prime(-nu, x).unwrap() + nu * bessel_j(-nu, x).unwrap();
        let rhs = -x * bessel_j(-nu + 1.0, x).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn recurrence_closure_across_regimes() {
        // J_{nu-1} + J_{nu+1} = (2 nu / x) J_nu, including near the crossover
        for &nu in &[0.3, 0.75, 1.4, 2.5] {
            for &x in &[5.0, 39.5, 40.5, 90.0, 199.0] {
                let lhs = bessel_j(nu - 1.0, x).unwrap() + bessel_j(nu + 1.0, x).unwrap();
                let rhs = (2.0 * nu / x) * bessel_j(nu, x).unwrap();
                assert!((lhs - rhs).abs() < 1e-10, "nu = {nu}, x = {x}");
            }
        }
    }

    #[test]
    fn zeros_of_sin() {
        let table = bessel_zeros(0.5, 3, 1e-12).unwrap();
        for (i, z) in table.zeros.iter().enumerate() {
            assert!((z - PI * (i + 1) as f64).abs() < 1e-11);
        }
    }

    #[test]
    fn first_zero_three_halves() {
        // bisection oracle on tan x = x, frozen
        let table = bessel_zeros(1.5, 1, 1e-12).unwrap();
        assert!((table.zeros[0] - 4.493409457909064).abs() < 1e-10);
    }

    #[test]
    fn mcmahon_deviation_small_at_n50() {
        let table = bessel_zeros(0.75, 50, 1e-12).unwrap();
        let guess = PI * (50.0 + 0.5 * 0.75 - 0.25);
        assert!((table.zeros[49] - guess).abs() <= 0.02);
    }

    #[test]
    fn zero_gaps_monotone_to_pi() {
        for &nu in &[0.5, 0.75, 1.5, 5.0] {
            let table = bessel_zeros(nu, 40, 1e-12).unwrap();
            let z = &table.zeros;
            let mut prev_gap = f64::INFINITY;
            for i in 1..z.len() {
                let gap = z[i] - z[i - 1];
                assert!(gap <= prev_gap + 1e-9, "nu = {nu}, i = {i}");
                assert!(gap >= PI - 1e-9, "nu = {nu}, i = {i}");
                prev_gap = gap;
            }
            assert!((z[z.len() - 1] - z[z.len() - 2] - PI).abs() < 0.01);
        }
    }

    #[test]
    fn zero_interlacing() {
        for &nu in &[0.5, 1.25, 4.0] {
            let a = bessel_zeros(nu, 20, 1e-12).unwrap().zeros;
            let b = bessel_zeros(nu + 1.0, 20, 1e-12).unwrap().zeros;
            for i in 0..19 {
                assert!(a[i] < b[i] && b[i] < a[i + 1], "nu = {nu}, i = {i}");
            }
        }
    }

    #[test]
    fn large_order_zero_residuals() {
        let table = bessel_zeros(10.0, 30, 1e-12).unwrap();
        for &z in &table.zeros {
            assert!(bessel_j(10.0, z).unwrap().abs() <= 1e-12);
        }
        assert!(table.zeros[0] > 10.0);
    }
}
