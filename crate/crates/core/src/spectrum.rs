//! Eigenvalues and eigenfunctions of `-(x^a u')'` on (0,1) with Neumann
//! conditions, and the derived spectral sequences (omega, gaps).

use crate::special::{bessel_j, bessel_zeros, gamma};
use crate::{Error, Result};

/// Largest supported degeneracy exponent. Beyond this the Bessel orders grow
/// like 1/(2 - alpha) and leave the accuracy envelope of `special`.
pub const ALPHA_MAX: f64 = 1.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// alpha in [0, 1): order -nu with nu in (0, 1/2]
    Weak,
    /// alpha in [1, 2): order +nu with nu >= 0
    Strong,
}

/// alpha and every constant derived from it.
#[derive(Debug, Clone, Copy)]
pub struct DegeneracySetup {
    pub alpha: f64,
    pub kappa: f64,
    pub nu: f64,
    pub bessel_order: f64,
    pub zero_order: f64,
    pub t0: f64,
    pub k_alpha: Option<u32>,
    pub branch: Branch,
}

impl DegeneracySetup {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=ALPHA_MAX).contains(&alpha) {
            return Err(Error::AlphaOutOfRange(alpha, ALPHA_MAX));
        }
        let kappa = 0.5 * (2.0 - alpha);
        let nu = (1.0 - alpha).abs() / (2.0 - alpha);
        let branch = if alpha < 1.0 { Branch::Weak } else { Branch::Strong };
        let bessel_order = match branch {
            Branch::Weak => -nu,
            Branch::Strong => nu,
        };
        Ok(DegeneracySetup {
            alpha,
            kappa,
            nu,
            bessel_order,
            zero_order: bessel_order + 1.0,
            t0: 4.0 / (2.0 - alpha),
            k_alpha: match branch {
                Branch::Weak => None,
                Branch::Strong => Some((1.0 / (2.0 - alpha)).floor() as u32),
            },
            branch,
        })
    }
}

/// One eigenpair: lambda_n = kappa^2 j_n^2 with j_n the n-th positive zero of
/// J_{order+1}; the eigenfunction is K_n x^{(1-alpha)/2} J_order(j_n x^kappa).
#[derive(Debug, Clone, Copy)]
pub struct EigenPair {
    pub n: usize,
    pub lambda: f64,
    pub jzero: f64,
    pub kn: f64,
    pub omega: f64,
    pub phi_at_1: f64,
    pub phi_at_0: f64,
}

#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub setup: DegeneracySetup,
    pub pairs: Vec<EigenPair>,
}

/// Build the truncated eigensystem for modes n = 0..=n_max.
pub fn build_eigensystem(alpha: f64, n_max: usize, tol: f64) -> Result<EigenSystem> {
    let setup = DegeneracySetup::new(alpha)?;
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    let mut pairs = Vec::with_capacity(n_max + 1);
    pairs.push(EigenPair {
        n: 0,
        lambda: 0.0,
        jzero: 0.0,
        kn: 1.0,
        omega: 0.0,
        phi_at_1: 1.0,
        phi_at_0: 1.0,
    });
    let table = bessel_zeros(setup.zero_order, n_max, tol)?;
    let sqrt_wt = (2.0 - alpha).sqrt();
    // leading series coefficient of J_order: (y/2)^order / Gamma(order + 1)
    let g0 = gamma(setup.bessel_order + 1.0)?;
    for (i, &jz) in table.zeros.iter().enumerate() {
        let jval = bessel_j(setup.bessel_order, jz)?;
        let kn = sqrt_wt / jval.abs();
        let lambda = (setup.kappa * jz).powi(2);
        pairs.push(EigenPair {
            n: i + 1,
            lambda,
            jzero: jz,
            kn,
            omega: setup.kappa * jz,
            phi_at_1: kn * jval,
            phi_at_0: kn * (0.5 * jz).powf(setup.bessel_order) / g0,
        });
    }
    Ok(EigenSystem { setup, pairs })
}

impl EigenSystem {
    pub fn n_max(&self) -> usize {
        self.pairs.len() - 1
    }

    pub fn pair(&self, n: usize) -> Result<&EigenPair> {
        self.pairs.get(n).ok_or(Error::IndexOutOfRange { n, max: self.n_max() })
    }

    /// Pointwise eigenfunction value, x in [0, 1].
    pub fn eigenfunction(&self, n: usize, x: f64) -> Result<f64> {
        let pair = *self.pair(n)?;
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidArgument(format!("x = {x} outside [0, 1]")));
        }
        if n == 0 {
            return Ok(1.0);
        }
        if x == 0.0 {
            return Ok(pair.phi_at_0);
        }
        let s = &self.setup;
        let arg = pair.jzero * x.powf(s.kappa);
        Ok(pair.kn * x.powf(0.5 * (1.0 - s.alpha)) * bessel_j(s.bessel_order, arg)?)
    }

    /// Signed frequency omega_n for n in Z (odd extension).
    pub fn omega_signed(&self, n: i64) -> Result<f64> {
        let idx = n.unsigned_abs() as usize;
        let pair = self.pair(idx)?;
        Ok(if n < 0 { -pair.omega } else { pair.omega })
    }

    /// Positive-side frequencies omega_0..omega_N.
    pub fn omegas(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.omega).collect()
    }

    /// Gap sequence (n, omega_{n+1} - omega_n) for n = 0..N-1.
    pub fn gap_profile(&self) -> Vec<(usize, f64)> {
        self.pairs
            .windows(2)
            .map(|w| (w[0].n, w[1].omega - w[0].omega))
            .collect()
    }

    /// CSV table with columns (n, lambda, jzero, Kn, omega, phi_at_1, phi_at_0).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,lambda,jzero,Kn,omega,phi_at_1,phi_at_0\n");
        for p in &self.pairs {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                p.n, p.lambda, p.jzero, p.kn, p.omega, p.phi_at_1, p.phi_at_0
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_j_prime;
    use std::f64::consts::PI;

    #[test]
    fn setup_constants() {
        let s = DegeneracySetup::new(0.0).unwrap();
        assert_eq!(s.branch, Branch::Weak);
        assert!((s.nu - 0.5).abs() < 1e-15);
        assert!((s.bessel_order + 0.5).abs() < 1e-15);
        assert!((s.t0 - 2.0).abs() < 1e-15);
        let s = DegeneracySetup::new(1.5).unwrap();
        assert_eq!(s.branch, Branch::Strong);
        assert!((s.nu - 1.0).abs() < 1e-15);
        assert!((s.t0 - 8.0).abs() < 1e-12);
        assert_eq!(s.k_alpha, Some(2));
        assert!(DegeneracySetup::new(2.5).is_err());
        assert!(DegeneracySetup::new(-0.1).is_err());
    }

    #[test]
    fn classical_limit() {
        // alpha = 0 reduces to the Neumann wave equation: lambda_n = n^2 pi^2,
        // Phi_n = sqrt(2) cos(n pi x)
        let sys = build_eigensystem(0.0, 10, 1e-12).unwrap();
        for n in 1..=10usize {
            let p = &sys.pairs[n];
            let exact = (n as f64 * PI).powi(2);
            assert!((p.lambda - exact).abs() < 1e-9 * exact);
            for k in 0..=8 {
                let x = k as f64 / 8.0;
                let phi = sys.eigenfunction(n, x).unwrap();
                let exact = 2f64.sqrt() * (n as f64 * PI * x).cos();
                assert!(
                    (phi - exact).abs() < 1e-9 || (phi + exact).abs() < 1e-9,
                    "n = {n}, x = {x}: {phi} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn ground_state_pair() {
        for &alpha in &[0.0, 0.5, 1.0, 1.5] {
            let sys = build_eigensystem(alpha, 2, 1e-12).unwrap();
            let p = &sys.pairs[0];
            assert_eq!((p.lambda, p.kn, p.phi_at_1, p.phi_at_0), (0.0, 1.0, 1.0, 1.0));
            assert_eq!(sys.eigenfunction(0, 0.37).unwrap(), 1.0);
        }
    }

    #[test]
    fn strong_branch_first_eigenvalue() {
        // alpha = 4/3: kappa = 1/3, zeros of J_{3/2}; oracle j_{3/2,1} from
        // bisection on tan x = x
        let sys = build_eigensystem(4.0 / 3.0, 1, 1e-13).unwrap();
        let exact = (4.493409457909064_f64 / 3.0).powi(2);
        assert!((sys.pairs[1].lambda - exact).abs() < 1e-9);
    }

    #[test]
    fn boundary_value_identity() {
        for &alpha in &[0.0, 0.3, 2.0 / 3.0, 1.0, 4.0 / 3.0, 1.5, 1.8] {
            let sys = build_eigensystem(alpha, 20, 1e-13).unwrap();
            let target = (2.0 - alpha).sqrt();
            for p in sys.pairs.iter().skip(1) {
                assert!((p.phi_at_1.abs() - target).abs() <= 1e-12, "alpha = {alpha}, n = {}", p.n);
            }
        }
    }

    #[test]
    fn eigenfunction_value_oracle() {
        // frozen from an arbitrary-precision evaluation of the composed formula
        let sys = build_eigensystem(0.5, 1, 1e-13).unwrap();
        let phi = sys.eigenfunction(1, 0.7).unwrap();
        assert!((phi - (-0.8490826367273987)).abs() < 1e-10);
        // matches the stored boundary values
        assert!((sys.eigenfunction(1, 1.0).unwrap() - sys.pairs[1].phi_at_1).abs() < 1e-12);
        assert!((sys.eigenfunction(1, 0.0).unwrap() - sys.pairs[1].phi_at_0).abs() < 1e-12);
    }

    #[test]
    fn omega_sequence_properties() {
        let sys = build_eigensystem(0.0, 10, 1e-12).unwrap();
        for n in 1..=10i64 {
            assert!((sys.omega_signed(n).unwrap() - n as f64 * PI).abs() < 1e-9);
        }
        assert_eq!(sys.omega_signed(0).unwrap(), 0.0);
        let sys = build_eigensystem(1.5, 5, 1e-12).unwrap();
        assert_eq!(
            sys.omega_signed(-3).unwrap() + sys.omega_signed(3).unwrap(),
            0.0
        );
        assert!(sys.omega_signed(11).is_err());
    }

    #[test]
    fn omega_asymptotic_shift() {
        // 2 omega_n / (pi (2 - alpha)) - n -> alpha / (4 (2 - alpha))
        let alpha = 1.5;
        let sys = build_eigensystem(alpha, 200, 1e-12).unwrap();
        let dev = 2.0 * sys.pairs[200].omega / (PI * (2.0 - alpha)) - 200.0;
        assert!((dev - 0.75).abs() < 0.01);
    }

    #[test]
    fn gap_profile_monotone_with_limit() {
        for &alpha in &[0.0, 2.0 / 3.0, 1.5] {
            let sys = build_eigensystem(alpha, 60, 1e-12).unwrap();
            let gaps = sys.gap_profile();
            let limit = sys.setup.kappa * PI;
            for w in gaps.windows(2).skip(1) {
                assert!(w[1].1 <= w[0].1 + 1e-10, "alpha = {alpha}, n = {}", w[0].0);
            }
            assert!((gaps.last().unwrap().1 - limit).abs() < 1e-3);
        }
        // alpha = 0: constant pi
        let sys = build_eigensystem(0.0, 10, 1e-12).unwrap();
        for (_, g) in sys.gap_profile().iter().skip(1) {
            assert!((g - PI).abs() < 1e-9);
        }
    }

    #[test]
    fn phi_at_zero_growth_exponent() {
        // |Phi_n(0)| ~ c j_n^{1/2 - nu} on the weak branch: check the log-log
        // slope over n in [20, 100]
        let alpha = 0.5;
        let sys = build_eigensystem(alpha, 100, 1e-12).unwrap();
        let nu = sys.setup.nu;
        let (a, b) = (&sys.pairs[20], &sys.pairs[100]);
        let slope = (b.phi_at_0.abs().ln() - a.phi_at_0.abs().ln()) / (b.jzero.ln() - a.jzero.ln());
        assert!((slope - (0.5 - nu)).abs() < 0.05, "slope = {slope}");
        // alpha = 0: bounded, |Phi_n(0)| = sqrt(2)
        let sys = build_eigensystem(0.0, 30, 1e-12).unwrap();
        for p in sys.pairs.iter().skip(1) {
            assert!((p.phi_at_0.abs() - 2f64.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn neumann_residual_via_watson() {
        // Phi_n'(1) = 0 reduces to J_{order+1}(j_n) = 0
        for &alpha in &[0.3, 4.0 / 3.0] {
            let sys = build_eigensystem(alpha, 10, 1e-13).unwrap();
            let s = &sys.setup;
            for p in sys.pairs.iter().skip(1) {
                // Phi'(1) = Kn [ (1-alpha)/2 J_order(j) + j kappa J'_order(j) ]
                let j = p.jzero;
                let d = 0.5 * (1.0 - s.alpha) * bessel_j(s.bessel_order, j).unwrap()
                    + j * s.kappa * bessel_j_prime(s.bessel_order, j).unwrap();
                assert!((p.kn * d).abs() <= 1e-8, "alpha = {alpha}, n = {}", p.n);
            }
        }
    }

    #[test]
    fn eigen_equation_residual() {
        // -(x^a Phi')' = lambda Phi, with the second derivative expressed via
        // the Watson chain (independent J evaluations at three orders)
        for &alpha in &[0.4, 1.3] {
            let sys = build_eigensystem(alpha, 4, 1e-13).unwrap();
            let s = sys.setup;
            for n in 1..=4usize {
                let p = sys.pairs[n];
                for k in 1..=19 {
                    let x: f64 = 0.05 + 0.05 * k as f64;
                    let z = p.jzero * x.powf(s.kappa);
                    let o = s.bessel_order;
                    let jv = bessel_j(o, z).unwrap();
                    let jp = bessel_j_prime(o, z).unwrap();
                    // J'' from differentiating the Watson relation
                    let jp1 = (o + 1.0) / z * bessel_j(o + 1.0, z).unwrap()
                        - bessel_j(o + 2.0, z).unwrap();
                    let jpp = -o / (z * z) * jv + o / z * jp - jp1;
                    let pexp = 0.5 * (1.0 - s.alpha);
                    let c = p.jzero * s.kappa;
                    // Phi = Kn x^pexp J(z), z = j x^kappa
                    let phi = p.kn * x.powf(pexp) * jv;
                    let dphi = p.kn
                        * (pexp * x.powf(pexp - 1.0) * jv
                            + x.powf(pexp) * jp * c * x.powf(s.kappa - 1.0));
                    // (x^a Phi')' expanded by product/chain rule
                    let t1 = s.alpha * x.powf(s.alpha - 1.0) * dphi;
                    let ddphi = p.kn
                        * (pexp * (pexp - 1.0) * x.powf(pexp - 2.0) * jv
                            + 2.0 * pexp * x.powf(pexp - 1.0) * jp * c * x.powf(s.kappa - 1.0)
                            + x.powf(pexp)
                                * (jpp * c * c * x.powf(2.0 * s.kappa - 2.0)
                                    + jp * c * (s.kappa - 1.0) * x.powf(s.kappa - 2.0)));
                    let t2 = x.powf(s.alpha) * ddphi;
                    let resid = -(t1 + t2) - p.lambda * phi;
                    assert!(
                        resid.abs() <= 1e-8 * (1.0 + p.lambda * phi.abs()),
                        "alpha = {alpha}, n = {n}, x = {x}, resid = {resid}"
                    );
                }
            }
        }
    }

    #[test]
    fn csv_export_shape() {
        let sys = build_eigensystem(0.5, 3, 1e-12).unwrap();
        let csv = sys.to_csv();
        assert!(csv.starts_with("n,lambda,jzero,Kn,omega,phi_at_1,phi_at_0\n"));
        assert_eq!(csv.lines().count(), 5);
    }
}
