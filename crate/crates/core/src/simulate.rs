//! Modal time evolution of the bilinear-controlled system and of its
//! linearization about the ground state, plus the oscillatory Duhamel
//! coefficients used by the regularity diagnostics.
//!
//! The modal system is a_n'' + lambda_n a_n = p(t) (M a)_n with M the
//! coupling matrix of the potential. The diagonal part is propagated exactly
//! (harmonic rotation; the n = 0 mode linearly), the coupling enters through
//! a midpoint kick: Strang splitting, second order, unconditionally stable.

use crate::innerprod::ModalVector;
use crate::oscint;
use crate::spectrum::EigenSystem;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Default truncation used by the command-line driver.
pub const DEFAULT_N_MODES: usize = 40;
/// Default terminal-state step-halving tolerance.
pub const DEFAULT_STEP_TOL: f64 = 1e-9;

/// One oscillatory term a cos(omega t) + b sin(omega t).
#[derive(Debug, Clone, Copy)]
pub struct TrigMode {
    pub omega: f64,
    pub cos_amp: f64,
    pub sin_amp: f64,
}

/// A control signal on [0, T].
#[derive(Debug, Clone)]
pub enum ControlSignal {
    /// d0 + d1 t + sum_k (a_k cos omega_k t + b_k sin omega_k t)
    Trig {
        t_final: f64,
        constant: f64,
        linear: f64,
        modes: Vec<TrigMode>,
    },
    /// Uniform samples on [0, T], linearly interpolated (>= 2 points).
    Sampled { t_final: f64, values: Vec<f64> },
}

impl ControlSignal {
    pub fn zero(t_final: f64) -> Self {
        ControlSignal::Trig { t_final, constant: 0.0, linear: 0.0, modes: Vec::new() }
    }

    pub fn t_final(&self) -> f64 {
        match self {
            ControlSignal::Trig { t_final, .. } | ControlSignal::Sampled { t_final, .. } => *t_final,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ControlSignal::Trig { constant, linear, modes, .. } => {
                let mut acc = constant + linear * t;
                for m in modes {
                    acc += m.cos_amp * (m.omega * t).cos() + m.sin_amp * (m.omega * t).sin();
                }
                acc
            }
            ControlSignal::Sampled { t_final, values } => {
                let h = t_final / (values.len() - 1) as f64;
                let u = (t / h).clamp(0.0, (values.len() - 1) as f64);
                let k = (u.floor() as usize).min(values.len() - 2);
                let f = u - k as f64;
                values[k] * (1.0 - f) + values[k + 1] * f
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            ControlSignal::Trig { t_final, constant, linear, modes } => ControlSignal::Trig {
                t_final: *t_final,
                constant: constant * factor,
                linear: linear * factor,
                modes: modes
                    .iter()
                    .map(|m| TrigMode {
                        omega: m.omega,
                        cos_amp: m.cos_amp * factor,
                        sin_amp: m.sin_amp * factor,
                    })
                    .collect(),
            },
            ControlSignal::Sampled { t_final, values } => ControlSignal::Sampled {
                t_final: *t_final,
                values: values.iter().map(|v| v * factor).collect(),
            },
        }
    }

    /// The time reflection t -> T - t of the signal, on the same interval.
    pub fn reflected(&self) -> Self {
        match self {
            ControlSignal::Trig { t_final, constant, linear, modes } => {
                let t0 = *t_final;
                // a cos(w(T-t)) + b sin(w(T-t)) regrouped in cos/sin of w t
                let modes = modes
                    .iter()
                    .map(|m| {
                        let (s, c) = (m.omega * t0).sin_cos();
                        TrigMode {
                            omega: m.omega,
                            cos_amp: m.cos_amp * c + m.sin_amp * s,
                            sin_amp: m.cos_amp * s - m.sin_amp * c,
                        }
                    })
                    .collect();
                ControlSignal::Trig {
                    t_final: t0,
                    constant: constant + linear * t0,
                    linear: -linear,
                    modes,
                }
            }
            ControlSignal::Sampled { t_final, values } => {
                let mut values = values.clone();
                values.reverse();
                ControlSignal::Sampled { t_final: *t_final, values }
            }
        }
    }

    /// Uniform samples on [0, T] (n >= 2 points including both endpoints).
    pub fn sample(&self, n: usize) -> Vec<f64> {
        let h = self.t_final() / (n - 1) as f64;
        (0..n).map(|k| self.eval(k as f64 * h)).collect()
    }

    fn sampled_grid(t_final: f64, values: &[f64]) -> Vec<f64> {
        let h = t_final / (values.len() - 1) as f64;
        (0..values.len()).map(|k| k as f64 * h).collect()
    }

    /// Integral of q(s) cos(omega s) over [0, T] (closed form for trig
    /// signals, oscillation-exact Filon rule for sampled ones).
    pub fn fourier_cos(&self, omega: f64) -> f64 {
        match self {
            ControlSignal::Trig { t_final, constant, linear, modes } => {
                let t0 = *t_final;
                let mut acc = constant * oscint::int_cos(omega, t0)
                    + linear * oscint::int_t_cos(omega, t0);
                for m in modes {
                    acc += m.cos_amp * oscint::cos_cos(m.omega, omega, t0)
                        + m.sin_amp * oscint::sin_cos(m.omega, omega, t0);
                }
                acc
            }
            ControlSignal::Sampled { t_final, values } => {
                let times = Self::sampled_grid(*t_final, values);
                oscint::filon_linear(&times, values, omega).re
            }
        }
    }

    /// Integral of q(s) sin(omega s) over [0, T].
    pub fn fourier_sin(&self, omega: f64) -> f64 {
        match self {
            ControlSignal::Trig { t_final, constant, linear, modes } => {
                let t0 = *t_final;
                let mut acc = constant * oscint::int_sin(omega, t0)
                    + linear * oscint::int_t_sin(omega, t0);
                for m in modes {
                    acc += m.cos_amp * oscint::sin_cos(omega, m.omega, t0)
                        + m.sin_amp * oscint::sin_sin(m.omega, omega, t0);
                }
                acc
            }
            ControlSignal::Sampled { t_final, values } => {
                let times = Self::sampled_grid(*t_final, values);
                -oscint::filon_linear(&times, values, omega).im
            }
        }
    }

    /// Integral of q over [0, T].
    pub fn integral(&self) -> f64 {
        self.fourier_cos(0.0)
    }

    /// Integral of s q(s) over [0, T].
    pub fn time_moment(&self) -> f64 {
        match self {
            ControlSignal::Trig { t_final, constant, linear, modes } => {
                let t0 = *t_final;
                let mut acc = constant * 0.5 * t0 * t0 + linear * t0 * t0 * t0 / 3.0;
                for m in modes {
                    acc += m.cos_amp * oscint::int_t_cos(m.omega, t0)
                        + m.sin_amp * oscint::int_t_sin(m.omega, t0);
                }
                acc
            }
            ControlSignal::Sampled { t_final, values } => {
                let times = Self::sampled_grid(*t_final, values);
                oscint::first_moment(&times, values)
            }
        }
    }

    /// CSV export (t, q) at `n` uniform sample points.
    pub fn to_csv(&self, n: usize) -> String {
        let h = self.t_final() / (n - 1) as f64;
        let mut out = String::from("t,q\n");
        for k in 0..n {
            let t = k as f64 * h;
            out.push_str(&format!("{:.16e},{:.16e}\n", t, self.eval(t)));
        }
        out
    }
}

/// Modal coefficients (position, velocity) at a fixed time.
#[derive(Debug, Clone)]
pub struct ModalState {
    pub a: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl ModalState {
    pub fn rest(n_modes: usize) -> Self {
        ModalState { a: vec![0.0; n_modes], v: vec![0.0; n_modes], t: 0.0 }
    }

    /// Ground state: a = e_0, v = 0.
    pub fn ground(n_modes: usize) -> Self {
        let mut s = Self::rest(n_modes);
        s.a[0] = 1.0;
        s
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// E = 1/2 sum (v_n^2 + lambda_n a_n^2).
    pub fn energy(&self, sys: &EigenSystem) -> f64 {
        self.a
            .iter()
            .zip(&self.v)
            .enumerate()
            .map(|(n, (&a, &v))| 0.5 * (v * v + sys.pairs[n].lambda * a * a))
            .sum()
    }

    /// Componentwise sup distance over (a, v).
    pub fn sup_distance(&self, other: &ModalState) -> f64 {
        self.a
            .iter()
            .zip(&other.a)
            .chain(self.v.iter().zip(&other.v))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        let fmt = |v: &[f64]| {
            let items: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
            format!("[{}]", items.join(","))
        };
        format!(
            "{{\"t\":{:.16e},\"a\":{},\"v\":{}}}",
            self.t,
            fmt(&self.a),
            fmt(&self.v)
        )
    }
}

/// Snapshots of a modal trajectory on a strictly increasing time grid
/// ending at T.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl TrajectoryRecord {
    pub fn terminal(&self) -> ModalState {
        ModalState {
            a: self.a.last().cloned().unwrap_or_default(),
            v: self.v.last().cloned().unwrap_or_default(),
            t: *self.times.last().unwrap_or(&0.0),
        }
    }

    pub fn state(&self, k: usize) -> ModalState {
        ModalState { a: self.a[k].clone(), v: self.v[k].clone(), t: self.times[k] }
    }

    /// CSV with columns t, a_0..a_N, v_0..v_N.
    pub fn to_csv(&self) -> String {
        let n = self.a.first().map(|r| r.len()).unwrap_or(0);
        let mut out = String::from("t");
        for j in 0..n {
            out.push_str(&format!(",a_{j}"));
        }
        for j in 0..n {
            out.push_str(&format!(",v_{j}"));
        }
        out.push('\n');
        for (k, &t) in self.times.iter().enumerate() {
            out.push_str(&format!("{t:.16e}"));
            for x in self.a[k].iter().chain(self.v[k].iter()) {
                out.push_str(&format!(",{x:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

struct Stepper<'a> {
    omegas: &'a [f64],
    m: &'a DMatrix<f64>,
    p: &'a ControlSignal,
}

impl Stepper<'_> {
    fn half_rotate(&self, a: &mut DVector<f64>, v: &mut DVector<f64>, rot: &[(f64, f64)], h2: f64) {
        for (j, &(c, s)) in rot.iter().enumerate() {
            let w = self.omegas[j];
            if w == 0.0 {
                a[j] += v[j] * h2;
            } else {
                let (aj, vj) = (a[j], v[j]);
                a[j] = c * aj + s / w * vj;
                v[j] = -w * s * aj + c * vj;
            }
        }
    }

    /// Integrate with n_steps uniform Strang steps, recording every
    /// `stride`-th state (plus the terminal one).
    fn run(&self, init: &ModalState, t_final: f64, n_steps: usize, stride: usize) -> TrajectoryRecord {
        let h = t_final / n_steps as f64;
        let rot: Vec<(f64, f64)> = self
            .omegas
            .iter()
            .map(|&w| {
                let (s, c) = (0.5 * h * w).sin_cos();
                (c, s)
            })
            .collect();
        let mut a = DVector::from_column_slice(&init.a);
        let mut v = DVector::from_column_slice(&init.v);
        let mut rec = TrajectoryRecord {
            times: vec![0.0],
            a: vec![init.a.clone()],
            v: vec![init.v.clone()],
        };
        for k in 0..n_steps {
            let t = k as f64 * h;
            self.half_rotate(&mut a, &mut v, &rot, 0.5 * h);
            let pv = self.p.eval(t + 0.5 * h);
            if pv != 0.0 {
                v.axpy(h * pv, &(self.m * &a), 1.0);
            }
            self.half_rotate(&mut a, &mut v, &rot, 0.5 * h);
            if (k + 1) % stride == 0 || k + 1 == n_steps {
                rec.times.push((k + 1) as f64 * h);
                rec.a.push(a.as_slice().to_vec());
                rec.v.push(v.as_slice().to_vec());
            }
        }
        rec
    }
}

/// Evolve the bilinear system from `init` under control `p` and coupling
/// matrix `m` up to time T, halving the step until the terminal state is
/// converged to `step_tol` in sup norm.
pub fn evolve_bilinear(
    init: &ModalState,
    p: &ControlSignal,
    m: &DMatrix<f64>,
    sys: &EigenSystem,
    t_final: f64,
    step_tol: f64,
) -> Result<TrajectoryRecord> {
    let n_modes = init.len();
    if m.nrows() != n_modes || m.ncols() != n_modes {
        return Err(Error::InvalidArgument(format!(
            "coupling matrix is {}x{}, state has {} modes",
            m.nrows(),
            m.ncols(),
            n_modes
        )));
    }
    if n_modes > sys.pairs.len() {
        return Err(Error::IndexOutOfRange { n: n_modes - 1, max: sys.n_max() });
    }
    if t_final <= 0.0 {
        return Err(Error::InvalidArgument(format!("t_final = {t_final} must be > 0")));
    }
    let omegas: Vec<f64> = sys.pairs[..n_modes].iter().map(|p| p.omega).collect();
    let omega_max = omegas.last().copied().unwrap_or(0.0).max(1.0);
    let stepper = Stepper { omegas: &omegas, m, p };
    // snapshot grid fine enough for the oscillatory post-processing:
    // >= 20 points per period of the top frequency
    let n_snap = ((20.0 * omega_max * t_final / (2.0 * std::f64::consts::PI)).ceil() as usize)
        .clamp(400, 20000);
    let mut n_steps = (omega_max * t_final).ceil() as usize;
    n_steps = n_steps.max(64).next_power_of_two().max(n_snap.next_power_of_two());
    let mut prev = stepper.run(init, t_final, n_steps, (n_steps / n_snap).max(1));
    let mut change = f64::INFINITY;
    for _ in 0..18 {
        n_steps *= 2;
        let cur = stepper.run(init, t_final, n_steps, (n_steps / n_snap).max(1));
        change = cur.terminal().sup_distance(&prev.terminal());
        if change < step_tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::StepUnderflow { steps: n_steps, tol: step_tol, change })
}

/// Terminal state of the linearization about the ground state driven by q:
/// W_n(T) = mu_n int q(s) sin(omega_n (T-s))/omega_n ds, with the n = 0
/// kernel (T - s). Closed form for trig signals, Filon quadrature otherwise.
pub fn evolve_linearized(
    q: &ControlSignal,
    mu_coeffs: &ModalVector,
    sys: &EigenSystem,
    t_final: f64,
) -> Result<ModalState> {
    if (q.t_final() - t_final).abs() > 1e-12 * t_final.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "signal lives on [0, {}], requested horizon {t_final}",
            q.t_final()
        )));
    }
    let n_modes = mu_coeffs.len();
    if n_modes > sys.pairs.len() {
        return Err(Error::IndexOutOfRange { n: n_modes - 1, max: sys.n_max() });
    }
    let mut state = ModalState::rest(n_modes);
    state.t = t_final;
    if n_modes == 0 {
        return Ok(state);
    }
    let mu0 = mu_coeffs.coeffs[0];
    let total = q.integral();
    state.a[0] = mu0 * (t_final * total - q.time_moment());
    state.v[0] = mu0 * total;
    for n in 1..n_modes {
        let w = sys.pairs[n].omega;
        let mu_n = mu_coeffs.coeffs[n];
        let c = q.fourier_cos(w);
        let s = q.fourier_sin(w);
        let (sw, cw) = (w * t_final).sin_cos();
        // int q(s) sin(w(T-s)) ds = sin(wT) C - cos(wT) S, and cos analogue
        state.a[n] = mu_n * (sw * c - cw * s) / w;
        state.v[n] = mu_n * (cw * c + sw * s);
    }
    Ok(state)
}

/// Oscillatory Duhamel data of a trajectory: gamma_n = int r_n(s)
/// e^{-i omega_n s} ds with r(s) = p(s) M a(s), plus the n = 0 kernels.
#[derive(Debug, Clone)]
pub struct DuhamelCoefficients {
    /// gamma_n for n >= 0 (negative indices by conjugation of real data).
    pub gamma: Vec<Complex64>,
    /// int r_0(s) ds
    pub r0_integral: f64,
    /// int r_0(s) (T - s) ds
    pub r0_weighted: f64,
    /// Snapshot grid coarser than 20 points per top period.
    pub undersampled: bool,
}

impl DuhamelCoefficients {
    /// gamma_n for n in Z; the data r_n is real, so gamma_{-n} = conj(gamma_n).
    pub fn gamma_signed(&self, n: i64) -> Complex64 {
        let g = self.gamma[n.unsigned_abs() as usize];
        if n < 0 {
            g.conj()
        } else {
            g
        }
    }
}

pub fn duhamel_exp_coefficients(
    traj: &TrajectoryRecord,
    p: &ControlSignal,
    m: &DMatrix<f64>,
    sys: &EigenSystem,
) -> Result<DuhamelCoefficients> {
    let n_modes = m.nrows();
    if traj.a.first().map(|r| r.len()) != Some(n_modes) {
        return Err(Error::InvalidArgument("trajectory/coupling size mismatch".into()));
    }
    let t_final = *traj.times.last().unwrap();
    // r[n][k] = p(t_k) (M a(t_k))_n
    let mut r = vec![vec![0.0; traj.times.len()]; n_modes];
    for (k, &t) in traj.times.iter().enumerate() {
        let a = DVector::from_column_slice(&traj.a[k]);
        let ma = m * a;
        let pv = p.eval(t);
        for n in 0..n_modes {
            r[n][k] = pv * ma[n];
        }
    }
    let gamma = (0..n_modes)
        .map(|n| oscint::filon_linear(&traj.times, &r[n], sys.pairs[n].omega))
        .collect();
    let r0_integral = oscint::trapezoid(&traj.times, &r[0]);
    let r0_weighted = t_final * r0_integral - oscint::first_moment(&traj.times, &r[0]);
    let omega_max = sys.pairs[..n_modes].iter().map(|p| p.omega).fold(0.0, f64::max);
    let hmax = traj
        .times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    Ok(DuhamelCoefficients {
        gamma,
        r0_integral,
        r0_weighted,
        undersampled: omega_max * hmax > 2.0 * std::f64::consts::PI / 20.0,
    })
}

/// Terminal state from the free rotation of `init` plus the Duhamel terms.
pub fn reconstruct_terminal(
    init: &ModalState,
    coeffs: &DuhamelCoefficients,
    sys: &EigenSystem,
    t_final: f64,
) -> ModalState {
    let n_modes = init.len();
    let mut out = ModalState::rest(n_modes);
    out.t = t_final;
    out.a[0] = init.a[0] + init.v[0] * t_final + coeffs.r0_weighted;
    out.v[0] = init.v[0] + coeffs.r0_integral;
    for n in 1..n_modes {
        let w = sys.pairs[n].omega;
        let (sw, cw) = (w * t_final).sin_cos();
        let e = Complex64::new(cw, sw);
        let g = coeffs.gamma[n] * e;
        out.a[n] = init.a[n] * cw + init.v[n] * sw / w + g.im / w;
        out.v[n] = -init.a[n] * w * sw + init.v[n] * cw + g.re;
    }
    out
}
