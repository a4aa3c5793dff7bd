//! L^2(0,1) inner products against the eigenfunctions, modal expansion and
//! reconstruction, and the Sobolev-tower partial sums.
//!
//! Quadrature: dyadic panels geometrically graded toward x = 0 (the
//! eigenfunctions are bounded there but their derivatives blow up
//! algebraically for alpha > 0), each panel split so that the Bessel phase
//! advances by at most a few radians per sub-panel, 16-point Gauss-Legendre
//! on every sub-panel.

use crate::spectrum::EigenSystem;
use crate::{Error, Result};
use nalgebra::DMatrix;
use std::sync::OnceLock;

/// Number of dyadic grading levels toward x = 0.
const GRADING_LEVELS: u32 = 50;

/// Coefficients of a function in the truncated eigenbasis.
#[derive(Debug, Clone)]
pub struct ModalVector {
    pub coeffs: Vec<f64>,
}

impl ModalVector {
    pub fn zeros(len: usize) -> Self {
        ModalVector { coeffs: vec![0.0; len] }
    }

    pub fn unit(len: usize, m: usize) -> Self {
        let mut v = Self::zeros(len);
        v.coeffs[m] = 1.0;
        v
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Pointwise reconstruction sum_n c_n Phi_n(x).
    pub fn reconstruct(&self, sys: &EigenSystem, x: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (n, c) in self.coeffs.iter().enumerate() {
            acc += c * sys.eigenfunction(n, x)?;
        }
        Ok(acc)
    }
}

/// Partial sums of sum_k (lambda*_k)^s c_k^2 with lambda*_0 = 1.
#[derive(Debug, Clone)]
pub struct SobolevProfile {
    pub s: f64,
    pub partial_sums: Vec<f64>,
    pub converging: bool,
}

impl SobolevProfile {
    pub fn total(&self) -> f64 {
        *self.partial_sums.last().unwrap_or(&0.0)
    }

    /// Fraction of the total contributed by the last quartile of modes.
    pub fn last_quartile_ratio(&self) -> f64 {
        let total = self.total();
        if total == 0.0 {
            return 0.0;
        }
        let at = 3 * self.partial_sums.len() / 4;
        (total - self.partial_sums[at.saturating_sub(1)]) / total
    }
}

/// Threshold for the last-quartile Cauchy-increment convergence proxy.
pub const CONVERGENCE_RATIO: f64 = 1e-3;

pub fn sobolev_tail(v: &ModalVector, sys: &EigenSystem, s: f64) -> SobolevProfile {
    let mut partial_sums = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    for (k, c) in v.coeffs.iter().enumerate() {
        let lam_star = if k == 0 { 1.0 } else { sys.pairs[k].lambda };
        acc += lam_star.powf(s) * c * c;
        partial_sums.push(acc);
    }
    let mut profile = SobolevProfile { s, partial_sums, converging: false };
    profile.converging = profile.last_quartile_ratio() < CONVERGENCE_RATIO;
    profile
}

/// A fixed quadrature rule on (0, 1).
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn gl16() -> &'static [(f64, f64); 16] {
    static RULE: OnceLock<[(f64, f64); 16]> = OnceLock::new();
    RULE.get_or_init(|| {
        // Legendre P_16 roots by Newton from Chebyshev initial guesses
        let n = 16usize;
        let mut rule = [(0.0, 0.0); 16];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            rule[i] = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

impl Quadrature {
    /// Graded rule resolving a total Bessel phase `jmax` with exponent
    /// `kappa` (phase over [a,b] is jmax (b^kappa - a^kappa)), at most
    /// `rad_per_panel` radians per sub-panel.
    pub fn graded(jmax: f64, kappa: f64, rad_per_panel: f64) -> Quadrature {
        let rule = gl16();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut push_panel = |a: f64, b: f64| {
            let phase = jmax * (b.powf(kappa) - a.powf(kappa));
            let nsub = ((phase / rad_per_panel).ceil() as usize).clamp(1, 4000);
            let h = (b - a) / nsub as f64;
            for s in 0..nsub {
                let (lo, hi) = (a + s as f64 * h, a + (s + 1) as f64 * h);
                let c = 0.5 * (lo + hi);
                let r = 0.5 * (hi - lo);
                for &(x, w) in rule.iter() {
                    nodes.push(c + r * x);
                    weights.push(r * w);
                }
            }
        };
        for k in 0..GRADING_LEVELS {
            let b = 0.5f64.powi(k as i32);
            push_panel(0.5 * b, b);
        }
        push_panel(0.0, 0.5f64.powi(GRADING_LEVELS as i32));
        Quadrature { nodes, weights }
    }

    /// Composite 16-point Gauss-Legendre rule on [a, b] with `nsub` equal
    /// sub-panels.
    pub fn uniform(a: f64, b: f64, nsub: usize) -> Quadrature {
        let rule = gl16();
        let nsub = nsub.max(1);
        let h = (b - a) / nsub as f64;
        let mut nodes = Vec::with_capacity(16 * nsub);
        let mut weights = Vec::with_capacity(16 * nsub);
        for s in 0..nsub {
            let c = a + (s as f64 + 0.5) * h;
            let r = 0.5 * h;
            for &(x, w) in rule.iter() {
                nodes.push(c + r * x);
                weights.push(r * w);
            }
        }
        Quadrature { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Eigenfunction values tabulated on a quadrature rule; shared by all the
/// inner-product operations so a single Bessel evaluation pass serves every
/// coefficient.
pub struct ProjectionEngine<'a> {
    pub sys: &'a EigenSystem,
    pub quad: Quadrature,
    /// phi[n][i] = Phi_n(node_i)
    phi: Vec<Vec<f64>>,
}

impl<'a> ProjectionEngine<'a> {
    pub fn new(sys: &'a EigenSystem, rad_per_panel: f64) -> Result<Self> {
        let jmax = sys.pairs.last().map(|p| p.jzero).unwrap_or(1.0).max(1.0);
        let quad = Quadrature::graded(jmax, sys.setup.kappa, rad_per_panel);
        let mut phi = Vec::with_capacity(sys.pairs.len());
        for n in 0..sys.pairs.len() {
            let mut row = Vec::with_capacity(quad.nodes.len());
            for &x in &quad.nodes {
                row.push(sys.eigenfunction(n, x)?);
            }
            phi.push(row);
        }
        Ok(ProjectionEngine { sys, quad, phi })
    }

    /// c_n = <f, Phi_n> for all n.
    pub fn project_fn(&self, f: impl Fn(f64) -> f64) -> ModalVector {
        let fv: Vec<f64> = self.quad.nodes.iter().map(|&x| f(x)).collect();
        let coeffs = self
            .phi
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&fv)
                    .zip(&self.quad.weights)
                    .map(|((&p, &v), &w)| w * p * v)
                    .sum()
            })
            .collect();
        ModalVector { coeffs }
    }

    /// M_{nm} = <mu Phi_m, Phi_n>.
    pub fn coupling(&self, mu: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let npts = self.quad.nodes.len();
        let nmodes = self.phi.len();
        let muw: Vec<f64> = self
            .quad
            .nodes
            .iter()
            .zip(&self.quad.weights)
            .map(|(&x, &w)| mu(x) * w)
            .collect();
        let phi = DMatrix::from_fn(nmodes, npts, |n, i| self.phi[n][i]);
        let phi_w = DMatrix::from_fn(nmodes, npts, |n, i| self.phi[n][i] * muw[i]);
        let m = &phi_w * phi.transpose();
        // symmetrize away quadrature roundoff
        0.5 * (&m + m.transpose())
    }
}

/// Modal coefficients of `f`, each accurate to `quad_tol` (absolute), by
/// comparing two refinement levels and refining once more if needed.
pub fn project(
    f: impl Fn(f64) -> f64 + Copy,
    sys: &EigenSystem,
    quad_tol: f64,
) -> Result<ModalVector> {
    let mut rad = 2.5;
    let coarse = ProjectionEngine::new(sys, rad)?.project_fn(f);
    let mut prev = coarse;
    for _ in 0..3 {
        rad *= 0.5;
        let fine = ProjectionEngine::new(sys, rad)?.project_fn(f);
        let est = prev
            .coeffs
            .iter()
            .zip(&fine.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if est <= quad_tol {
            return Ok(fine);
        }
        prev = fine;
    }
    Err(Error::QuadratureNonConvergence { tol: quad_tol, est: f64::NAN })
}

/// mu_n = <mu, Phi_n>.
pub fn mu_coefficients(mu: impl Fn(f64) -> f64 + Copy, sys: &EigenSystem) -> Result<ModalVector> {
    project(mu, sys, 1e-10)
}

/// Full coupling matrix M_{nm} = <mu Phi_m, Phi_n>.
pub fn coupling_matrix(mu: impl Fn(f64) -> f64, sys: &EigenSystem) -> Result<DMatrix<f64>> {
    Ok(ProjectionEngine::new(sys, 1.0)?.coupling(mu))
}

/// CSV export of a matrix with an index header row.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::from("n");
    for j in 0..m.ncols() {
        out.push_str(&format!(",{j}"));
    }
    out.push('\n');
    for i in 0..m.nrows() {
        out.push_str(&format!("{i}"));
        for j in 0..m.ncols() {
            out.push_str(&format!(",{:.16e}", m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::build_eigensystem;
    use std::f64::consts::PI;

    #[test]
    fn quadrature_polynomials_exact() {
        let q = Quadrature::graded(1.0, 1.0, 2.5);
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        assert!((q.integrate(|x| x * x) - 1.0 / 3.0).abs() < 1e-14);
        assert!((q.integrate(|x| x.powf(0.3)) - 1.0 / 1.3).abs() < 1e-13);
    }

    #[test]
    fn orthonormality_unit_vectors() {
        for &alpha in &[0.0, 0.5, 4.0 / 3.0] {
            let sys = build_eigensystem(alpha, 12, 1e-12).unwrap();
            let eng = ProjectionEngine::new(&sys, 1.5).unwrap();
            for m in 0..=12usize {
                let v = eng.project_fn(|x| {
                    // evaluate Phi_m directly
                    sys.eigenfunction(m, x).unwrap()
                });
                for (n, c) in v.coeffs.iter().enumerate() {
                    let expect = if n == m { 1.0 } else { 0.0 };
                    assert!(
                        (c - expect).abs() < 1e-8,
                        "alpha = {alpha}, n = {n}, m = {m}, c = {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn project_constant_is_ground_state() {
        let sys = build_eigensystem(2.0 / 3.0, 8, 1e-12).unwrap();
        let v = project(|_| 1.0, &sys, 1e-9).unwrap();
        assert!((v.coeffs[0] - 1.0).abs() < 1e-9);
        for c in &v.coeffs[1..] {
            assert!(c.abs() < 1e-9);
        }
    }

    #[test]
    fn classical_cosine_series() {
        // alpha = 0, f = x^2: c_0 = 1/3, c_n = 2 sqrt(2) (-1)^n / (n^2 pi^2)
        let sys = build_eigensystem(0.0, 10, 1e-12).unwrap();
        let v = project(|x| x * x, &sys, 1e-10).unwrap();
        assert!((v.coeffs[0] - 1.0 / 3.0).abs() < 1e-10);
        for n in 1..=10usize {
            let exact = 2.0 * 2f64.sqrt() * (-1f64).powi(n as i32) / (n as f64 * PI).powi(2);
            // sign convention of Phi_n may flip per mode; compare magnitudes
            assert!(
                (v.coeffs[n].abs() - exact.abs()).abs() < 1e-10,
                "n = {n}: {} vs {exact}",
                v.coeffs[n]
            );
        }
    }

    #[test]
    fn power_law_potential_identities() {
        for &alpha in &[0.0, 0.5, 4.0 / 3.0] {
            let sys = build_eigensystem(alpha, 15, 1e-12).unwrap();
            let mu = move |x: f64| x.powf(2.0 - alpha);
            let v = mu_coefficients(mu, &sys).unwrap();
            assert!((v.coeffs[0] - 1.0 / (3.0 - alpha)).abs() < 1e-10, "alpha = {alpha}");
            let c = (2.0 - alpha).powf(1.5);
            for n in 1..=15usize {
                let lhs = sys.pairs[n].lambda * v.coeffs[n].abs();
                assert!((lhs - c).abs() < 1e-6, "alpha = {alpha}, n = {n}: {lhs} vs {c}");
            }
        }
    }

    #[test]
    fn coupling_matrix_identity_and_symmetry() {
        let sys = build_eigensystem(4.0 / 3.0, 8, 1e-12).unwrap();
        let m = coupling_matrix(|_| 1.0, &sys).unwrap();
        for i in 0..=8usize {
            for j in 0..=8usize {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((m[(i, j)] - expect).abs() < 1e-8);
            }
        }
        let alpha = 4.0 / 3.0;
        let m = coupling_matrix(move |x: f64| x.powf(2.0 - alpha), &sys).unwrap();
        for i in 0..=8usize {
            for j in 0..=8usize {
                assert!((m[(i, j)] - m[(j, i)]).abs() < 1e-9);
            }
        }
        // row zero equals mu_coefficients (same quadrature path)
        let eng = ProjectionEngine::new(&sys, 1.0).unwrap();
        let mc = eng.project_fn(move |x: f64| x.powf(2.0 - alpha));
        let mm = eng.coupling(move |x: f64| x.powf(2.0 - alpha));
        for j in 0..=8usize {
            assert!((mm[(0, j)] - mc.coeffs[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn coupling_entry_oracle() {
        // alpha = 0, mu = x^2: closed-form cosine product integral
        let sys = build_eigensystem(0.0, 4, 1e-12).unwrap();
        let m = coupling_matrix(|x| x * x, &sys).unwrap();
        let oracle: f64 = -0.22515818587186171;
        assert!(
            (m[(1, 2)].abs() - oracle.abs()).abs() < 1e-10,
            "M12 = {}",
            m[(1, 2)]
        );
    }

    #[test]
    fn parseval_and_reconstruction() {
        let alpha = 0.5;
        let sys = build_eigensystem(alpha, 60, 1e-12).unwrap();
        let f = |x: f64| (2.0 * x).sin() + x * x;
        let v = project(f, &sys, 1e-9).unwrap();
        let q = Quadrature::graded(1.0, 1.0, 2.5);
        let norm2 = q.integrate(|x| f(x) * f(x));
        let sum2: f64 = v.coeffs.iter().map(|c| c * c).sum();
        assert!(norm2 - sum2 > -1e-10);
        assert!(norm2 - sum2 < 1e-6);
        for k in 1..=20 {
            let x = k as f64 / 21.0;
            let rec = v.reconstruct(&sys, x).unwrap();
            // f violates the Neumann condition, so the series converges
            // like 1/N pointwise
            assert!((rec - f(x)).abs() < 1e-3, "x = {x}: {rec} vs {}", f(x));
        }
    }

    #[test]
    fn sobolev_tail_cases() {
        let sys = build_eigensystem(0.5, 20, 1e-12).unwrap();
        // unit vector: total = lambda_m^3
        let v = ModalVector::unit(21, 7);
        let p = sobolev_tail(&v, &sys, 3.0);
        assert!((p.total() - sys.pairs[7].lambda.powi(3)).abs() < 1e-6 * p.total());
        // c_n = 1/lambda_n^2, s = 3: increments ~ 1/lambda_n, converging
        let mut v = ModalVector::zeros(21);
        v.coeffs[0] = 1.0;
        for n in 1..=20usize {
            v.coeffs[n] = 1.0 / sys.pairs[n].lambda.powi(2);
        }
        let p = sobolev_tail(&v, &sys, 3.0);
        assert!(p.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    }
}
