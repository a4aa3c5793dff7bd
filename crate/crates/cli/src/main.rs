//! Command-line driver: spectra, simulations, control synthesis, and
//! diagnostic reports as flat reproducible artifacts (CSV + JSON).
//!
//! Exit codes: 0 success, 1 numeric/acceptance failure, 2 configuration
//! error.

mod config;

use clap::{Parser, Subcommand};
use config::{canonical, resolve_time, validate, Config, ControlSpec, MuSpec, TargetSpec};
use degwave::acceptance::{results_json, run_all};
use degwave::diagnostics::{
    admissibility, counting_function, counting_json, kadec_certificate, rough_control,
};
use degwave::innerprod::{coupling_matrix, mu_coefficients};
use degwave::moment::{
    assemble_moment_problem, random_decaying_target, regime_report, solve_min_norm,
    synthesis_json, TargetState,
};
use degwave::simulate::{evolve_bilinear, ControlSignal, ModalState};
use degwave::spectrum::{build_eigensystem, EigenSystem};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "degwave", version, about = "Spectral toolkit for the degenerate wave equation with bilinear control")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random construction.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of excited modes in the truncation.
    #[arg(long, global = true)]
    modes: Option<usize>,
    /// Degeneracy exponent.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Horizon: a number, "T0", or "c*T0".
    #[arg(long, global = true)]
    time: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalue/eigenfunction tables with gap profile and Kadec report.
    Spectrum,
    /// Bilinear time evolution from the ground state.
    Simulate,
    /// Moment-problem control synthesis toward a modal target.
    Synthesize,
    /// Structural diagnostics: regime, Kadec, admissibility, counting.
    Diagnose,
    /// Run the full acceptance suite.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(AppError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

enum AppError {
    Config(String),
    Numeric(String),
}

impl From<degwave::Error> for AppError {
    fn from(e: degwave::Error) -> Self {
        AppError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Numeric(format!("io: {e}"))
    }
}

fn run(cli: Cli) -> Result<ExitCode, AppError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
            config::parse(&text).map_err(AppError::Config)?
        }
        None => Config::default(),
    };
    if let Some(v) = cli.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = cli.modes {
        cfg.modes = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = &cli.time {
        cfg.time = v.clone();
    }
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    validate(&cfg).map_err(AppError::Config)?;
    fs::create_dir_all(&cfg.out)?;
    let hash = config_hash(&cfg);
    match cli.cmd {
        Cmd::Spectrum => cmd_spectrum(&cfg, &hash),
        Cmd::Simulate => cmd_simulate(&cfg, &hash),
        Cmd::Synthesize => cmd_synthesize(&cfg, &hash),
        Cmd::Diagnose => cmd_diagnose(&cfg, &hash),
        Cmd::Verify => cmd_verify(&cfg, &hash),
    }
}

fn config_hash(cfg: &Config) -> String {
    let digest = Sha256::digest(canonical(cfg).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Resolved potential, evaluable through a Copy closure.
enum ResolvedMu {
    Power(f64),
    PowerPerturbed(f64),
    Table(Vec<(f64, f64)>),
}

impl ResolvedMu {
    fn from_spec(spec: &MuSpec, alpha: f64) -> Result<(Self, String), AppError> {
        Ok(match spec {
            MuSpec::Power => (ResolvedMu::Power(alpha), format!("x^{}", 2.0 - alpha)),
            MuSpec::PowerPerturbed => (
                ResolvedMu::PowerPerturbed(alpha),
                format!("x^{}+0.01x^2", 2.0 - alpha),
            ),
            MuSpec::Table(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
                let mut rows = Vec::new();
                for (idx, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('x') {
                        continue;
                    }
                    let mut it = line.split(',');
                    let parse = |s: Option<&str>| {
                        s.and_then(|v| v.trim().parse::<f64>().ok()).ok_or_else(|| {
                            AppError::Config(format!(
                                "{} line {}: expected 'x,mu'",
                                path.display(),
                                idx + 1
                            ))
                        })
                    };
                    rows.push((parse(it.next())?, parse(it.next())?));
                }
                if rows.len() < 2 {
                    return Err(AppError::Config(format!(
                        "{}: need at least two samples",
                        path.display()
                    )));
                }
                rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                (ResolvedMu::Table(rows), format!("table:{}", path.display()))
            }
        })
    }

    fn eval(&self, x: f64) -> f64 {
        match self {
            ResolvedMu::Power(alpha) => x.powf(2.0 - alpha),
            ResolvedMu::PowerPerturbed(alpha) => x.powf(2.0 - alpha) + 0.01 * x * x,
            ResolvedMu::Table(rows) => {
                let i = rows.partition_point(|r| r.0 < x).clamp(1, rows.len() - 1);
                let (x0, y0) = rows[i - 1];
                let (x1, y1) = rows[i];
                let f = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
                y0 * (1.0 - f) + y1 * f
            }
        }
    }
}

fn resolve_target(cfg: &Config, sys: &EigenSystem) -> Result<TargetState, AppError> {
    let n = cfg.modes + 1;
    Ok(match &cfg.target {
        TargetSpec::Zero => TargetState::zeros(n),
        TargetSpec::SingleMode { mode, amp } => {
            let mut t = TargetState::zeros(n);
            t.y.coeffs[*mode] = *amp;
            t
        }
        TargetSpec::RandomDecaying { amp, decay } => {
            random_decaying_target(sys, n, cfg.seed, *amp, *decay)
        }
        TargetSpec::File(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
            let mut t = TargetState::zeros(n);
            for (idx, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('n') {
                    continue;
                }
                let fields: Vec<&str> = line.split(',').map(str::trim).collect();
                let bad = || {
                    AppError::Config(format!(
                        "{} line {}: expected 'n,y,z'",
                        path.display(),
                        idx + 1
                    ))
                };
                if fields.len() != 3 {
                    return Err(bad());
                }
                let k: usize = fields[0].parse().map_err(|_| bad())?;
                if k >= n {
                    return Err(AppError::Config(format!(
                        "{} line {}: mode {k} exceeds modes = {}",
                        path.display(),
                        idx + 1,
                        cfg.modes
                    )));
                }
                t.y.coeffs[k] = fields[1].parse().map_err(|_| bad())?;
                t.z.coeffs[k] = fields[2].parse().map_err(|_| bad())?;
            }
            t
        }
    })
}

fn resolve_control(cfg: &Config, t_final: f64) -> ControlSignal {
    match &cfg.control {
        ControlSpec::Zero => ControlSignal::zero(t_final),
        ControlSpec::Rough { points, amp } => rough_control(cfg.seed, t_final, *points, *amp),
    }
}

fn write(path: &Path, contents: &str) -> Result<(), AppError> {
    fs::write(path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_spectrum(cfg: &Config, hash: &str) -> Result<ExitCode, AppError> {
    let sys = build_eigensystem(cfg.alpha, cfg.modes, cfg.zero_tol)?;
    write(&cfg.out.join("spectrum.csv"), &sys.to_csv())?;
    let gaps: Vec<String> = sys
        .gap_profile()
        .iter()
        .map(|(n, g)| format!("[{n},{g:.16e}]"))
        .collect();
    let kadec = if cfg.modes >= 70 {
        kadec_certificate(&sys, 20)?.to_json()
    } else {
        "null".into()
    };
    let json = format!(
        "{{\"schema_version\":1,\"config_hash\":\"{hash}\",\"alpha\":{:.16e},\"modes\":{},\"t0\":{:.16e},\"gaps\":[{}],\"kadec\":{kadec}}}",
        cfg.alpha,
        cfg.modes,
        sys.setup.t0,
        gaps.join(",")
    );
    write(&cfg.out.join("spectrum.json"), &json)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(cfg: &Config, hash: &str) -> Result<ExitCode, AppError> {
    let sys = build_eigensystem(cfg.alpha, cfg.modes, cfg.zero_tol)?;
    let t_final = resolve_time(&cfg.time, sys.setup.t0).map_err(AppError::Config)?;
    let (mu, _) = ResolvedMu::from_spec(&cfg.mu, cfg.alpha)?;
    let m = coupling_matrix(|x| mu.eval(x), &sys)?;
    let p = resolve_control(cfg, t_final);
    let init = ModalState::ground(cfg.modes + 1);
    let traj = evolve_bilinear(&init, &p, &m, &sys, t_final, cfg.step_tol)?;
    write(&cfg.out.join("trajectory.csv"), &traj.to_csv())?;
    let json = format!(
        "{{\"schema_version\":1,\"config_hash\":\"{hash}\",\"terminal\":{}}}",
        traj.terminal().to_json()
    );
    write(&cfg.out.join("terminal.json"), &json)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_synthesize(cfg: &Config, hash: &str) -> Result<ExitCode, AppError> {
    let sys = build_eigensystem(cfg.alpha, cfg.modes, cfg.zero_tol)?;
    let t_final = resolve_time(&cfg.time, sys.setup.t0).map_err(AppError::Config)?;
    let (mu, _) = ResolvedMu::from_spec(&cfg.mu, cfg.alpha)?;
    let mu_c = mu_coefficients(|x| mu.eval(x), &sys)?;
    let target = resolve_target(cfg, &sys)?;
    let problem = assemble_moment_problem(&target, &mu_c, &sys, t_final)?;
    let result = solve_min_norm(&problem);
    let report = regime_report(cfg.alpha, t_final)?;
    write(&cfg.out.join("control.csv"), &result.control.to_csv(cfg.sample_points))?;
    let json = format!(
        "{{\"schema_version\":1,\"config_hash\":\"{hash}\",\"synthesis\":{}}}",
        synthesis_json(&result, &report)
    );
    write(&cfg.out.join("synthesis.json"), &json)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_diagnose(cfg: &Config, hash: &str) -> Result<ExitCode, AppError> {
    let sys = build_eigensystem(cfg.alpha, cfg.modes, cfg.zero_tol)?;
    let t_final = resolve_time(&cfg.time, sys.setup.t0).map_err(AppError::Config)?;
    let report = regime_report(cfg.alpha, t_final)?;
    let (mu, mu_id) = ResolvedMu::from_spec(&cfg.mu, cfg.alpha)?;
    let adm = admissibility(|x| mu.eval(x), &mu_id, &sys, cfg.floor_c)?;
    let kadec = if cfg.modes >= 70 {
        kadec_certificate(&sys, 20)?.to_json()
    } else {
        "null".into()
    };
    let omega_hi = sys.pairs[cfg.modes].omega;
    let grid: Vec<f64> = (1..=16).map(|k| omega_hi * k as f64 / 17.0).collect();
    let counting = counting_json(&counting_function(&sys, &grid)?);
    let json = format!(
        "{{\"schema_version\":1,\"config_hash\":\"{hash}\",\"alpha\":{:.16e},\"T\":{:.16e},\"t0\":{:.16e},\"regime\":\"{}\",\"margin\":{:.16e},\"kadec\":{kadec},\"admissibility\":{},\"counting\":{counting}}}",
        cfg.alpha,
        t_final,
        report.t0,
        report.regime.label(),
        report.margin,
        adm.to_json()
    );
    write(&cfg.out.join("diagnostics.json"), &json)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(cfg: &Config, hash: &str) -> Result<ExitCode, AppError> {
    let results = run_all(cfg.seed);
    for r in &results {
        println!("{}", r.line());
    }
    let json = format!(
        "{{\"schema_version\":1,\"config_hash\":\"{hash}\",\"report\":{}}}",
        results_json(&results, cfg.seed)
    );
    write(&cfg.out.join("verify.json"), &json)?;
    if results.iter().all(|r| r.pass) {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
