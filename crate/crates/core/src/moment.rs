//! Control synthesis near the ground state via the trigonometric moment
//! problem: find Q in span{1, t, cos omega_n t, sin omega_n t} whose moments
//! against the family match the target coefficients, then reflect
//! q(t) = Q(T - t) to get the forward-time control.
//!
//! The minimum-norm solution is computed from the Gram system with a
//! spectral cutoff, which degrades gracefully to least squares when the
//! horizon is below the controllability threshold and the family loses
//! independence.

use crate::innerprod::{mu_coefficients, ModalVector, Quadrature};
use crate::simulate::{ControlSignal, TrigMode};
use crate::spectrum::{build_eigensystem, DegeneracySetup, EigenSystem};
use crate::{oscint, Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Relative spectral cutoff for the Gram solve.
pub const DEFAULT_EPS_REG: f64 = 1e-12;

/// Modal target offset from the ground state: position coefficients Y and
/// velocity coefficients Z.
#[derive(Debug, Clone)]
pub struct TargetState {
    pub y: ModalVector,
    pub z: ModalVector,
}

impl TargetState {
    pub fn zeros(n_modes: usize) -> Self {
        TargetState { y: ModalVector::zeros(n_modes), z: ModalVector::zeros(n_modes) }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Seeded target with coefficients proportional to (lambda*_n)^(-decay),
/// uniformly random signs and magnitudes.
pub fn random_decaying_target(
    sys: &EigenSystem,
    n_modes: usize,
    seed: u64,
    scale: f64,
    decay: f64,
) -> TargetState {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut t = TargetState::zeros(n_modes);
    for n in 0..n_modes {
        let lam_star = if n == 0 { 1.0 } else { sys.pairs[n].lambda };
        let w = scale * lam_star.powf(-decay);
        t.y.coeffs[n] = w * rng.gen_range(-1.0..1.0);
        t.z.coeffs[n] = w * rng.gen_range(-1.0..1.0);
    }
    t
}

/// One member of the moment family on [0, T].
#[derive(Debug, Clone, Copy)]
pub enum FamilyMember {
    One,
    Time,
    Cos(f64),
    Sin(f64),
}

impl FamilyMember {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            FamilyMember::One => 1.0,
            FamilyMember::Time => t,
            FamilyMember::Cos(w) => (w * t).cos(),
            FamilyMember::Sin(w) => (w * t).sin(),
        }
    }

    /// L^2(0, T) inner product with another member, in closed form. The
    /// underlying primitives switch to series limits for near-coincident
    /// frequencies.
    pub fn inner(self, other: FamilyMember, t_final: f64) -> f64 {
        use FamilyMember::*;
        let t = t_final;
        match (self, other) {
            (One, One) => t,
            (One, Time) | (Time, One) => 0.5 * t * t,
            (Time, Time) => t * t * t / 3.0,
            (One, Cos(w)) | (Cos(w), One) => oscint::int_cos(w, t),
            (One, Sin(w)) | (Sin(w), One) => oscint::int_sin(w, t),
            (Time, Cos(w)) | (Cos(w), Time) => oscint::int_t_cos(w, t),
            (Time, Sin(w)) | (Sin(w), Time) => oscint::int_t_sin(w, t),
            (Cos(a), Cos(b)) => oscint::cos_cos(a, b, t),
            (Sin(a), Sin(b)) => oscint::sin_sin(a, b, t),
            (Sin(a), Cos(b)) => oscint::sin_cos(a, b, t),
            (Cos(a), Sin(b)) => oscint::sin_cos(b, a, t),
        }
    }
}

/// The assembled moment problem: family [1, t, cos/sin omega_n t], its Gram
/// matrix on [0, T], and the target moments.
#[derive(Debug, Clone)]
pub struct MomentProblem {
    pub t_final: f64,
    /// omega_1..omega_N (the n = 0 members are 1 and t).
    pub omegas: Vec<f64>,
    pub rhs: DVector<f64>,
    pub gram: DMatrix<f64>,
    /// Relative spectral cutoff applied in the solve.
    pub eps_reg: f64,
}

impl MomentProblem {
    pub fn dim(&self) -> usize {
        2 * self.omegas.len() + 2
    }

    pub fn family(&self) -> Vec<FamilyMember> {
        let mut fam = vec![FamilyMember::One, FamilyMember::Time];
        for &w in &self.omegas {
            fam.push(FamilyMember::Cos(w));
            fam.push(FamilyMember::Sin(w));
        }
        fam
    }

    /// Gram matrix with every family member scaled to unit L^2 norm.
    pub fn normalized_gram(&self) -> DMatrix<f64> {
        let d: Vec<f64> = (0..self.dim()).map(|i| self.gram[(i, i)].sqrt()).collect();
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.gram[(i, j)] / (d[i] * d[j]))
    }
}

fn family_gram(family: &[FamilyMember], t_final: f64) -> DMatrix<f64> {
    let m = family.len();
    let mut g = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = family[i].inner(family[j], t_final);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Moments (A_0, B_0, A_n, B_n) of a target: the linearized terminal map
/// sends q to (Y_n, Z_n) = (mu_n S_n / omega_n, mu_n C_n), so the moment
/// constraints on Q read <Q, 1> = Z_0/mu_0, <Q, t> = Y_0/mu_0,
/// <Q, cos> = Z_n/mu_n, <Q, sin> = omega_n Y_n/mu_n.
pub fn assemble_moment_problem(
    target: &TargetState,
    mu: &ModalVector,
    sys: &EigenSystem,
    t_final: f64,
) -> Result<MomentProblem> {
    let n_modes = target.len();
    if target.z.len() != n_modes || mu.len() < n_modes {
        return Err(Error::InvalidArgument("target/mu length mismatch".into()));
    }
    if n_modes == 0 || n_modes > sys.pairs.len() {
        return Err(Error::IndexOutOfRange { n: n_modes.saturating_sub(1), max: sys.n_max() });
    }
    if t_final <= 0.0 {
        return Err(Error::InvalidArgument(format!("t_final = {t_final} must be > 0")));
    }
    for n in 0..n_modes {
        let m = mu.coeffs[n];
        if m.abs() < 1e-14 {
            return Err(Error::ZeroMuCoefficient { n, value: m });
        }
    }
    let omegas: Vec<f64> = sys.pairs[1..n_modes].iter().map(|p| p.omega).collect();
    let mut rhs = DVector::zeros(2 * n_modes);
    rhs[0] = target.z.coeffs[0] / mu.coeffs[0];
    rhs[1] = target.y.coeffs[0] / mu.coeffs[0];
    for n in 1..n_modes {
        rhs[2 * n] = target.z.coeffs[n] / mu.coeffs[n];
        rhs[2 * n + 1] = sys.pairs[n].omega * target.y.coeffs[n] / mu.coeffs[n];
    }
    let problem = MomentProblem {
        t_final,
        omegas,
        rhs,
        gram: DMatrix::zeros(0, 0),
        eps_reg: DEFAULT_EPS_REG,
    };
    let gram = family_gram(&problem.family(), t_final);
    Ok(MomentProblem { gram, ..problem })
}

/// Inverse of the rhs map: modal target whose moments equal `rhs`.
pub fn target_from_rhs(rhs: &DVector<f64>, mu: &ModalVector, sys: &EigenSystem) -> TargetState {
    let n_modes = rhs.len() / 2;
    let mut t = TargetState::zeros(n_modes);
    t.z.coeffs[0] = rhs[0] * mu.coeffs[0];
    t.y.coeffs[0] = rhs[1] * mu.coeffs[0];
    for n in 1..n_modes {
        t.z.coeffs[n] = rhs[2 * n] * mu.coeffs[n];
        t.y.coeffs[n] = rhs[2 * n + 1] * mu.coeffs[n] / sys.pairs[n].omega;
    }
    t
}

/// Output of the min-norm solve: the profile Q, the forward control
/// q(t) = Q(T - t), and the achieved moment residuals.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub t_final: f64,
    /// Coefficients of Q in the family order [1, t, cos, sin, ...].
    pub coefficients: Vec<f64>,
    /// Q itself (the moment constraints are against Q).
    pub profile: ControlSignal,
    /// q(t) = Q(T - t), applied forward in time.
    pub control: ControlSignal,
    /// Algebraic residual gram c - rhs.
    pub residual: Vec<f64>,
    /// The same moments recomputed by quadrature on Q.
    pub residual_quad: Vec<f64>,
    /// sqrt(c' gram c) = L^2 norm of Q.
    pub min_norm: f64,
    /// Number of Gram eigenvalues above the cutoff.
    pub effective_rank: usize,
}

impl SynthesisResult {
    pub fn residual_inf(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Minimum-norm solution of gram c = rhs by symmetric eigendecomposition
/// with relative spectral cutoff; infeasibility shows up in the residual
/// rather than as an error.
pub fn solve_min_norm(problem: &MomentProblem) -> SynthesisResult {
    let dim = problem.dim();
    let eig = SymmetricEigen::new(problem.gram.clone());
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l));
    let cut = problem.eps_reg * lmax;
    let mut c = DVector::zeros(dim);
    let mut effective_rank = 0;
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > cut {
            effective_rank += 1;
            let u = eig.eigenvectors.column(k);
            c += u * (u.dot(&problem.rhs) / l);
        }
    }
    let gc = &problem.gram * &c;
    let residual: Vec<f64> = (&gc - &problem.rhs).iter().copied().collect();
    let min_norm = c.dot(&gc).max(0.0).sqrt();
    let coefficients: Vec<f64> = c.iter().copied().collect();
    let modes = problem
        .omegas
        .iter()
        .enumerate()
        .map(|(k, &w)| TrigMode {
            omega: w,
            cos_amp: coefficients[2 * k + 2],
            sin_amp: coefficients[2 * k + 3],
        })
        .collect();
    let profile = ControlSignal::Trig {
        t_final: problem.t_final,
        constant: coefficients[0],
        linear: coefficients[1],
        modes,
    };
    // independent recomputation of the moments by composite quadrature on Q
    let family = problem.family();
    let omega_max = problem.omegas.last().copied().unwrap_or(0.0);
    let nsub = (((2.0 * omega_max + 2.0) * problem.t_final / 3.0).ceil() as usize).clamp(8, 40000);
    let quad = Quadrature::uniform(0.0, problem.t_final, nsub);
    let qv: Vec<f64> = quad.nodes.iter().map(|&t| profile.eval(t)).collect();
    let residual_quad: Vec<f64> = family
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let m: f64 = quad
                .nodes
                .iter()
                .zip(&quad.weights)
                .zip(&qv)
                .map(|((&t, &w), &q)| w * q * f.eval(t))
                .sum();
            m - problem.rhs[k]
        })
        .collect();
    SynthesisResult {
        t_final: problem.t_final,
        control: profile.reflected(),
        profile,
        coefficients,
        residual,
        residual_quad,
        min_norm,
        effective_rank,
    }
}

/// Full pipeline: eigensystem, mu coefficients, moment assembly, min-norm
/// solve, reflection to the forward control.
pub fn synthesize_ground_state_control(
    target: &TargetState,
    mu: impl Fn(f64) -> f64 + Copy,
    alpha: f64,
    t_final: f64,
    n_modes: usize,
) -> Result<SynthesisResult> {
    let sys = build_eigensystem(alpha, n_modes.max(2), 1e-12)?;
    let mu_c = mu_coefficients(mu, &sys)?;
    let mu_trunc = ModalVector { coeffs: mu_c.coeffs[..n_modes].to_vec() };
    let problem = assemble_moment_problem(target, &mu_trunc, &sys, t_final)?;
    Ok(solve_min_norm(&problem))
}

/// Solvability regime of the horizon T relative to the threshold T0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// T > T0: a full neighborhood of the ground state is reachable.
    OpenNeighborhood,
    /// T = T0, alpha in [0, 1): reachable set of codimension 1.
    Codim1,
    /// T = T0, alpha in (1, 2) with 1/(2-alpha) not an integer: finite
    /// deficiency k = floor(1/(2-alpha)).
    Deficiency(u32),
    /// T < T0: overdetermined; the family is not minimal.
    Overdetermined,
    /// alpha = 2 - 1/k at T = T0: behavior not classified.
    Excluded,
}

impl Regime {
    pub fn label(self) -> String {
        match self {
            Regime::OpenNeighborhood => "open-neighborhood".into(),
            Regime::Codim1 => "codim-1".into(),
            Regime::Deficiency(k) => format!("deficiency-{k}"),
            Regime::Overdetermined => "overdetermined".into(),
            Regime::Excluded => "excluded".into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RegimeReport {
    pub alpha: f64,
    pub t_final: f64,
    pub t0: f64,
    /// T - T0.
    pub margin: f64,
    pub regime: Regime,
}

/// Whether alpha sits on the excluded sequence 2 - 1/k (k = 1, 2, ...).
pub fn is_excluded_alpha(alpha: f64) -> bool {
    if alpha < 1.0 - 1e-9 {
        return false;
    }
    let k = (1.0 / (2.0 - alpha)).round();
    k >= 1.0 && (alpha - (2.0 - 1.0 / k)).abs() <= 1e-9
}

pub fn regime_report(alpha: f64, t_final: f64) -> Result<RegimeReport> {
    let setup = DegeneracySetup::new(alpha)?;
    let t0 = setup.t0;
    let margin = t_final - t0;
    let at_threshold = margin.abs() <= 1e-9 * t0;
    let regime = if at_threshold {
        if alpha < 1.0 {
            Regime::Codim1
        } else if is_excluded_alpha(alpha) {
            Regime::Excluded
        } else {
            Regime::Deficiency(setup.k_alpha.unwrap_or(0))
        }
    } else if margin > 0.0 {
        Regime::OpenNeighborhood
    } else {
        Regime::Overdetermined
    };
    Ok(RegimeReport { alpha, t_final, t0, margin, regime })
}

/// JSON record of a synthesis run.
pub fn synthesis_json(result: &SynthesisResult, report: &RegimeReport) -> String {
    let coeffs: Vec<String> = result.coefficients.iter().map(|c| format!("{c:.16e}")).collect();
    format!(
        "{{\"schema_version\":1,\"T\":{:.16e},\"T0\":{:.16e},\"regime\":\"{}\",\"residual_inf\":{:.16e},\"min_norm\":{:.16e},\"effective_rank\":{},\"coefficients\":[{}]}}",
        result.t_final,
        report.t0,
        report.regime.label(),
        result.residual_inf(),
        result.min_norm,
        result.effective_rank,
        coeffs.join(",")
    )
}
