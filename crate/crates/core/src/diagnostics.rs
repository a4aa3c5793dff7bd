//! Numerical certification of the structural facts the rest of the toolkit
//! relies on: the controllability threshold time, Kadec-type frequency
//! margins, deficiency counts, the frequency counting function,
//! admissibility of potentials, and hidden-regularity tail profiles.

use crate::innerprod::{mu_coefficients, sobolev_tail, SobolevProfile, CONVERGENCE_RATIO};
use crate::simulate::{duhamel_exp_coefficients, ControlSignal, TrajectoryRecord};
use crate::spectrum::EigenSystem;
use crate::{Error, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub const SCHEMA_VERSION: u32 = 1;

/// Default tail start for the Kadec certificate; earlier terms are reported
/// separately since finitely many outliers are harmless for basis purposes.
pub const DEFAULT_KADEC_TAIL_START: usize = 20;

/// Controllability threshold time T0 = 4/(2 - alpha).
pub fn threshold_time(alpha: f64) -> Result<f64> {
    if !(0.0..2.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha, 2.0));
    }
    Ok(4.0 / (2.0 - alpha))
}

/// Quarter-gap certificate for the normalized frequencies: the deviation
/// sup_n |2 omega_n / (pi (2-alpha)) - n - k/2| must stay below 1/4 on the
/// tail for the exponential family to be a Riesz basis.
#[derive(Debug, Clone)]
pub struct KadecReport {
    pub alpha: f64,
    /// Integer shift k: 0 on the weak branch, floor(1/(2-alpha)) on the
    /// strong branch.
    pub k_shift: u32,
    pub tail_start: usize,
    pub sup_deviation: f64,
    /// 1/4 - sup_deviation.
    pub margin: f64,
    /// Asymptotic value of the deviation.
    pub limit_deviation: f64,
    /// Largest deviation among the skipped head terms n < tail_start.
    pub head_deviation: f64,
}

impl KadecReport {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"schema_version\":{SCHEMA_VERSION},\"alpha\":{:.16e},\"k_shift\":{},\"tail_start\":{},\"sup_deviation\":{:.16e},\"margin\":{:.16e},\"limit_deviation\":{:.16e},\"head_deviation\":{:.16e}}}",
            self.alpha,
            self.k_shift,
            self.tail_start,
            self.sup_deviation,
            self.margin,
            self.limit_deviation,
            self.head_deviation
        )
    }
}

pub fn kadec_certificate(sys: &EigenSystem, tail_start: usize) -> Result<KadecReport> {
    let s = &sys.setup;
    if sys.n_max() < tail_start + 50 {
        return Err(Error::InvalidArgument(format!(
            "need at least {} modes beyond the tail start, have {}",
            tail_start + 50,
            sys.n_max()
        )));
    }
    let k_shift = s.k_alpha.unwrap_or(0);
    let deviation = |n: usize| {
        (2.0 * sys.pairs[n].omega / (std::f64::consts::PI * (2.0 - s.alpha))
            - n as f64
            - k_shift as f64 / 2.0)
            .abs()
    };
    let mut sup_deviation = 0.0f64;
    for n in tail_start..=sys.n_max() {
        sup_deviation = sup_deviation.max(deviation(n));
    }
    let mut head_deviation = 0.0f64;
    for n in 1..tail_start.min(sys.n_max() + 1) {
        head_deviation = head_deviation.max(deviation(n));
    }
    // the normalized frequency tends to n + nu'/2 - 1/4 with nu' the order
    // whose zeros generate the spectrum
    let limit_deviation = (0.5 * s.zero_order - 0.25 - 0.5 * k_shift as f64).abs();
    Ok(KadecReport {
        alpha: s.alpha,
        k_shift,
        tail_start,
        sup_deviation,
        margin: 0.25 - sup_deviation,
        limit_deviation,
        head_deviation,
    })
}

/// Deficiency count k = floor(1/(2-alpha)) for alpha in (1, 2), defined
/// only away from the excluded values alpha = 2 - 1/k.
pub fn deficiency(alpha: f64) -> Result<u32> {
    if !(1.0..2.0).contains(&alpha) || alpha == 1.0 {
        return Err(Error::InvalidArgument(format!(
            "deficiency count requires alpha in (1, 2), got {alpha}"
        )));
    }
    if crate::moment::is_excluded_alpha(alpha) {
        return Err(Error::ExcludedAlpha(alpha));
    }
    Ok((1.0 / (2.0 - alpha)).floor() as u32)
}

#[derive(Debug, Clone, Copy)]
pub struct CountingPoint {
    pub r: f64,
    /// card{n in Z : |omega_n| < r}, counting the signed sequence and 0.
    pub count: u64,
    pub ratio: f64,
}

/// Counting function of the signed frequency sequence on a grid of radii.
pub fn counting_function(sys: &EigenSystem, r_grid: &[f64]) -> Result<Vec<CountingPoint>> {
    let omega_max = sys.pairs.last().map(|p| p.omega).unwrap_or(0.0);
    let mut out = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        if r > omega_max {
            return Err(Error::CountingRange { r, omega_max });
        }
        let positive = sys.pairs[1..].iter().take_while(|p| p.omega < r).count() as u64;
        let count = 2 * positive + u64::from(r > 0.0);
        out.push(CountingPoint { r, count, ratio: count as f64 / r });
    }
    Ok(out)
}

pub fn counting_json(points: &[CountingPoint]) -> String {
    let rows: Vec<String> = points
        .iter()
        .map(|p| format!("{{\"r\":{:.16e},\"count\":{},\"ratio\":{:.16e}}}", p.r, p.count, p.ratio))
        .collect();
    format!(
        "{{\"schema_version\":{SCHEMA_VERSION},\"points\":[{}]}}",
        rows.join(",")
    )
}

/// Admissibility of a potential: lambda*_n |<mu, Phi_n>| bounded below.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub mu_id: String,
    /// min_n lambda*_n |mu_n| over the truncation.
    pub worst_ratio: f64,
    pub floor_c: f64,
    pub pass: bool,
    pub ratios: Vec<f64>,
}

impl AdmissibilityReport {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"schema_version\":{SCHEMA_VERSION},\"mu_id\":\"{}\",\"worst_ratio\":{:.16e},\"floor_c\":{:.16e},\"pass\":{}}}",
            self.mu_id, self.worst_ratio, self.floor_c, self.pass
        )
    }
}

pub fn admissibility(
    mu: impl Fn(f64) -> f64 + Copy,
    mu_id: &str,
    sys: &EigenSystem,
    floor_c: f64,
) -> Result<AdmissibilityReport> {
    let coeffs = mu_coefficients(mu, sys)?;
    let ratios: Vec<f64> = coeffs
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, &c)| {
            let lam_star = if n == 0 { 1.0 } else { sys.pairs[n].lambda };
            lam_star * c.abs()
        })
        .collect();
    let worst_ratio = ratios.iter().fold(f64::INFINITY, |m, &r| m.min(r));
    Ok(AdmissibilityReport {
        mu_id: mu_id.into(),
        worst_ratio,
        floor_c,
        pass: worst_ratio >= floor_c,
        ratios,
    })
}

/// Tail profiles evidencing the extra terminal regularity of trajectories
/// started from the ground state.
#[derive(Debug, Clone)]
pub struct HiddenRegularityReport {
    /// sum lambda*^3 a_n(T)^2 partial sums (position).
    pub position: SobolevProfile,
    /// sum lambda*^2 v_n(T)^2 partial sums (velocity).
    pub velocity: SobolevProfile,
    /// sum lambda_n^2 |gamma_n|^2 partial sums (Duhamel tail).
    pub duhamel: SobolevProfile,
    pub undersampled: bool,
}

impl HiddenRegularityReport {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"schema_version\":{SCHEMA_VERSION},\"position_total\":{:.16e},\"position_converging\":{},\"velocity_total\":{:.16e},\"velocity_converging\":{},\"duhamel_total\":{:.16e},\"duhamel_converging\":{},\"undersampled\":{}}}",
            self.position.total(),
            self.position.converging,
            self.velocity.total(),
            self.velocity.converging,
            self.duhamel.total(),
            self.duhamel.converging,
            self.undersampled
        )
    }
}

pub fn hidden_regularity_check(
    traj: &TrajectoryRecord,
    p: &ControlSignal,
    m: &DMatrix<f64>,
    sys: &EigenSystem,
) -> Result<HiddenRegularityReport> {
    let end = traj.terminal();
    let position = sobolev_tail(&crate::innerprod::ModalVector { coeffs: end.a.clone() }, sys, 3.0);
    let velocity = sobolev_tail(&crate::innerprod::ModalVector { coeffs: end.v.clone() }, sys, 2.0);
    let d = duhamel_exp_coefficients(traj, p, m, sys)?;
    let mut partial_sums = Vec::with_capacity(d.gamma.len());
    let mut acc = 0.0;
    for (n, g) in d.gamma.iter().enumerate() {
        let lam = if n == 0 { 1.0 } else { sys.pairs[n].lambda };
        acc += lam * lam * g.norm_sqr();
        partial_sums.push(acc);
    }
    let mut duhamel = SobolevProfile { s: 2.0, partial_sums, converging: false };
    duhamel.converging = duhamel.last_quartile_ratio() < CONVERGENCE_RATIO;
    Ok(HiddenRegularityReport { position, velocity, duhamel, undersampled: d.undersampled })
}

/// Seeded rough control: a random Fourier series with amplitude envelope
/// 1/k^2 (random phases, slightly detuned frequencies), Hann-windowed and
/// stored as piecewise-linear samples. The window removes the 1/omega
/// boundary terms of the transform — otherwise the seed-dependent jump
/// p(0) - p(T) dominates every eigenfrequency sample — so what remains is
/// the envelope's own omega^-2 tail: square-integrable, borderline smooth.
pub fn rough_control(seed: u64, t_final: f64, n_pts: usize, amp: f64) -> ControlSignal {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n_pts = n_pts.max(2);
    let mut values = vec![0.0; n_pts];
    let base = std::f64::consts::PI / t_final;
    for k in 1..=64u32 {
        let w = base * k as f64 * rng.gen_range(0.95..1.05);
        let env = amp / (k * k) as f64;
        let (a, b) = (env * rng.gen_range(-1.0..1.0), env * rng.gen_range(-1.0..1.0));
        for (i, v) in values.iter_mut().enumerate() {
            let t = t_final * i as f64 / (n_pts - 1) as f64;
            *v += a * (w * t).cos() + b * (w * t).sin();
        }
    }
    for (i, v) in values.iter_mut().enumerate() {
        let s = std::f64::consts::PI * i as f64 / (n_pts - 1) as f64;
        *v *= s.sin() * s.sin();
    }
    ControlSignal::Sampled { t_final, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innerprod::coupling_matrix;
    use crate::simulate::{evolve_bilinear, ModalState};
    use crate::spectrum::build_eigensystem;
    use std::f64::consts::PI;

    #[test]
    fn threshold_values() {
        assert_eq!(threshold_time(0.0).unwrap(), 2.0);
        assert_eq!(threshold_time(1.0).unwrap(), 4.0);
        assert_eq!(threshold_time(1.5).unwrap(), 8.0);
        assert!(threshold_time(2.0).is_err());
        assert!(threshold_time(-0.1).is_err());
        let mut prev = 0.0;
        for k in 0..20 {
            let t = threshold_time(k as f64 * 0.1).unwrap();
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn kadec_classical() {
        // omega_n = n pi: deviations vanish identically
        let sys = build_eigensystem(0.0, 120, 1e-12).unwrap();
        let r = kadec_certificate(&sys, 20).unwrap();
        assert_eq!(r.k_shift, 0);
        assert!(r.sup_deviation < 1e-8, "sup = {}", r.sup_deviation);
        assert!((r.margin - 0.25).abs() < 1e-8);
        assert_eq!(r.limit_deviation, 0.0);
    }

    #[test]
    fn kadec_weak_branch_limit() {
        // alpha = 2/3: limit deviation alpha/(4(2-alpha)) = 1/8
        let sys = build_eigensystem(2.0 / 3.0, 400, 1e-12).unwrap();
        let r = kadec_certificate(&sys, 20).unwrap();
        assert!((r.limit_deviation - 0.125).abs() < 1e-12);
        assert!(r.sup_deviation < 0.25 && r.margin > 0.0);
        // the tail approaches the limit from below 1/4
        let dev_last = (2.0 * sys.pairs[400].omega / (PI * (2.0 - 2.0 / 3.0)) - 400.0).abs();
        assert!((dev_last - 0.125).abs() < 1e-3);
    }

    #[test]
    fn kadec_strong_branch_shift() {
        // alpha = 4/3: k = 1, theta = 1/2, limit deviation (2 theta - 1)/4 = 0
        let sys = build_eigensystem(4.0 / 3.0, 200, 1e-12).unwrap();
        let r = kadec_certificate(&sys, 20).unwrap();
        assert_eq!(r.k_shift, 1);
        assert!(r.limit_deviation.abs() < 1e-12);
        assert!(r.sup_deviation < 0.05, "sup = {}", r.sup_deviation);
    }

    #[test]
    fn deficiency_counts() {
        assert_eq!(deficiency(1.2).unwrap(), 1);
        assert_eq!(deficiency(1.55).unwrap(), 2);
        assert!(matches!(deficiency(1.5), Err(Error::ExcludedAlpha(_))));
        assert!(deficiency(1.0).is_err());
        assert!(deficiency(0.5).is_err());
        assert!(deficiency(2.0).is_err());
    }

    #[test]
    fn counting_classical() {
        let sys = build_eigensystem(0.0, 30, 1e-12).unwrap();
        let pts = counting_function(&sys, &[10.5 * PI]).unwrap();
        assert_eq!(pts[0].count, 21);
        assert!((pts[0].ratio - 2.0 / PI).abs() < 0.01);
        // monotone in r
        let grid: Vec<f64> = (1..=40).map(|k| 2.0 * k as f64).collect();
        let pts = counting_function(&sys, &grid).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].count >= w[0].count);
        }
        assert!(counting_function(&sys, &[1e6]).is_err());
    }

    #[test]
    fn counting_limit_bound() {
        for &alpha in &[2.0 / 3.0, 1.5] {
            let sys = build_eigensystem(alpha, 300, 1e-11).unwrap();
            let t0 = threshold_time(alpha).unwrap();
            let omega_hi = sys.pairs[295].omega;
            let grid: Vec<f64> = (0..40)
                .map(|k| 50.0 + (omega_hi - 50.0) * k as f64 / 39.0)
                .collect();
            for p in counting_function(&sys, &grid).unwrap() {
                assert!(
                    (p.ratio - t0 / PI).abs() <= 5.0 / p.r,
                    "alpha = {alpha}, r = {}: ratio {}",
                    p.r,
                    p.ratio
                );
            }
        }
    }

    #[test]
    fn admissibility_power_law() {
        let alpha = 0.5;
        let sys = build_eigensystem(alpha, 20, 1e-12).unwrap();
        let r = admissibility(|x| x.powf(2.0 - alpha), "x^1.5", &sys, 0.1).unwrap();
        assert!(r.pass);
        let c = (2.0 - alpha).powf(1.5);
        for (n, ratio) in r.ratios.iter().enumerate().skip(1) {
            assert!((ratio - c).abs() < 1e-6, "n = {n}: {ratio}");
        }
        assert!((r.ratios[0] - 1.0 / (3.0 - alpha)).abs() < 1e-10);
        // relative spread over the excited modes
        let (lo, hi) = r.ratios[1..]
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        assert!((hi - lo) / hi <= 1e-6);
    }

    #[test]
    fn admissibility_failures_and_perturbations() {
        let alpha = 0.5;
        let sys = build_eigensystem(alpha, 10, 1e-12).unwrap();
        // constant mu is orthogonal to every excited mode
        let r = admissibility(|_| 1.0, "1", &sys, 1e-6).unwrap();
        assert!(!r.pass && r.worst_ratio < 1e-7);
        // small smooth perturbation keeps a positive floor
        let r = admissibility(
            |x| x.powf(2.0 - alpha) + 0.01 * x * x,
            "x^1.5+0.01x^2",
            &sys,
            0.1,
        )
        .unwrap();
        assert!(r.pass, "worst = {}", r.worst_ratio);
    }

    #[test]
    fn hidden_regularity_free_run_trivial() {
        let alpha = 2.0 / 3.0;
        let sys = build_eigensystem(alpha, 12, 1e-12).unwrap();
        let m = coupling_matrix(|x| x.powf(2.0 - alpha), &sys).unwrap();
        let p = ControlSignal::zero(1.0);
        let traj = evolve_bilinear(&ModalState::ground(13), &p, &m, &sys, 1.0, 1e-9).unwrap();
        let r = hidden_regularity_check(&traj, &p, &m, &sys).unwrap();
        assert!(r.duhamel.total() == 0.0);
        assert!((r.position.total() - 1.0).abs() < 1e-12);
        assert!(r.position.converging && r.velocity.converging && r.duhamel.converging);
    }

    #[test]
    fn hidden_regularity_rough_control() {
        let alpha = 2.0 / 3.0;
        let sys = build_eigensystem(alpha, 20, 1e-12).unwrap();
        let m = coupling_matrix(|x| x.powf(2.0 - alpha), &sys).unwrap();
        let t = threshold_time(alpha).unwrap();
        let p = rough_control(42, t, 257, 0.05);
        let traj = evolve_bilinear(&ModalState::ground(21), &p, &m, &sys, t, 1e-9).unwrap();
        let r = hidden_regularity_check(&traj, &p, &m, &sys).unwrap();
        assert!(!r.undersampled);
        assert!(r.position.converging, "ratio = {}", r.position.last_quartile_ratio());
        assert!(r.velocity.converging, "ratio = {}", r.velocity.last_quartile_ratio());
        assert!(r.duhamel.converging, "ratio = {}", r.duhamel.last_quartile_ratio());
    }

    #[test]
    fn json_shapes() {
        let sys = build_eigensystem(0.5, 120, 1e-12).unwrap();
        let k = kadec_certificate(&sys, 20).unwrap();
        assert!(k.to_json().starts_with("{\"schema_version\":1,"));
        let a = admissibility(|x| x, "x", &sys, 0.0).unwrap();
        assert!(a.to_json().contains("\"mu_id\":\"x\""));
        let c = counting_function(&sys, &[10.0]).unwrap();
        assert!(counting_json(&c).contains("\"points\":[{"));
    }
}
