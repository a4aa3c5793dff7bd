use thiserror::Error;

/// Errors surfaced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("gamma pole: x = {0} is a nonpositive integer")]
    GammaPole(f64),

    #[error("bessel domain: J_nu undefined at x = 0 for negative order nu = {nu}")]
    BesselAtZero { nu: f64 },

    #[error("bessel domain: x = {x} must be nonnegative")]
    NegativeArgument { x: f64 },

    #[error("zero finding failed for J_{nu} at index {index}: bracket [{lo}, {hi}]")]
    ZeroFinding { nu: f64, index: usize, lo: f64, hi: f64 },

    #[error("alpha = {0} out of range [0, {1}]")]
    AlphaOutOfRange(f64, f64),

    #[error("mode index {n} out of range 0..={max}")]
    IndexOutOfRange { n: usize, max: usize },

    #[error("quadrature did not reach tolerance {tol} (estimated error {est})")]
    QuadratureNonConvergence { tol: f64, est: f64 },

    #[error("time stepper underflow: step count {steps} exceeded without reaching tolerance {tol} (last change {change})")]
    StepUnderflow { steps: usize, tol: f64, change: f64 },

    #[error("potential coefficient mu_{n} = {value} vanishes; moment problem unsolvable at that mode")]
    ZeroMuCoefficient { n: usize, value: f64 },

    #[error("alpha = {0} is excluded: 1/(2-alpha) is an integer (open case)")]
    ExcludedAlpha(f64),

    #[error("r = {r} outside the computed frequency range (omega_N = {omega_max})")]
    CountingRange { r: f64, omega_max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
