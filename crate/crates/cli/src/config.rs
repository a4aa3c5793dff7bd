//! Flat key = value experiment configuration: zero-dependency parse,
//! diff-friendly, unknown keys rejected with their line number.

use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub enum MuSpec {
    /// x^(2 - alpha), the reference admissible potential.
    Power,
    /// x^(2 - alpha) + 0.01 x^2.
    PowerPerturbed,
    /// Two-column CSV (x, mu) on [0, 1], linearly interpolated.
    Table(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    Zero,
    /// Position coefficient `amp` on mode `mode`.
    SingleMode { mode: usize, amp: f64 },
    /// Seeded coefficients proportional to lambda*^(-decay).
    RandomDecaying { amp: f64, decay: f64 },
    /// Three-column CSV (n, y, z).
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlSpec {
    Zero,
    /// Seeded rough square-integrable signal.
    Rough { points: usize, amp: f64 },
}

#[derive(Debug, Clone)]
pub struct Config {
    pub alpha: f64,
    pub modes: usize,
    /// Horizon: a number, "T0", or "c*T0".
    pub time: String,
    pub mu: MuSpec,
    pub target: TargetSpec,
    pub control: ControlSpec,
    pub seed: u64,
    pub out: PathBuf,
    pub step_tol: f64,
    pub zero_tol: f64,
    pub floor_c: f64,
    pub sample_points: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            alpha: 2.0 / 3.0,
            modes: 40,
            time: "1.2*T0".into(),
            mu: MuSpec::Power,
            target: TargetSpec::RandomDecaying { amp: 1e-3, decay: 2.0 },
            control: ControlSpec::Rough { points: 257, amp: 0.05 },
            seed: 0,
            out: PathBuf::from("out"),
            step_tol: 1e-9,
            zero_tol: 1e-12,
            floor_c: 0.05,
            sample_points: 1001,
        }
    }
}

fn parse_num<T: std::str::FromStr>(line_no: usize, key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("line {line_no}: invalid value '{value}' for key '{key}'"))
}

/// Parse a config file. Every error names the offending line and field.
pub fn parse(text: &str) -> Result<Config, String> {
    let mut cfg = Config::default();
    let mut target_mode = 1usize;
    let mut target_amp = 1e-3;
    let mut target_decay = 2.0;
    let mut control_points = 257usize;
    let mut control_amp = 0.05;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {line_no}: expected 'key = value', got '{line}'"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "alpha" => cfg.alpha = parse_num(line_no, key, value)?,
            "modes" => cfg.modes = parse_num(line_no, key, value)?,
            "time" => cfg.time = value.to_string(),
            "seed" => cfg.seed = parse_num(line_no, key, value)?,
            "out" => cfg.out = PathBuf::from(value),
            "step_tol" => cfg.step_tol = parse_num(line_no, key, value)?,
            "zero_tol" => cfg.zero_tol = parse_num(line_no, key, value)?,
            "floor_c" => cfg.floor_c = parse_num(line_no, key, value)?,
            "sample_points" => cfg.sample_points = parse_num(line_no, key, value)?,
            "mu" => {
                cfg.mu = match value {
                    "power" => MuSpec::Power,
                    "power-perturbed" => MuSpec::PowerPerturbed,
                    _ => match value.strip_prefix("table:") {
                        Some(p) => MuSpec::Table(PathBuf::from(p.trim())),
                        None => {
                            return Err(format!(
                                "line {line_no}: mu must be power, power-perturbed, or table:PATH"
                            ))
                        }
                    },
                }
            }
            "target" => {
                cfg.target = match value {
                    "zero" => TargetSpec::Zero,
                    "single-mode" => TargetSpec::SingleMode { mode: 0, amp: 0.0 },
                    "random-decaying" => TargetSpec::RandomDecaying { amp: 0.0, decay: 0.0 },
                    _ => match value.strip_prefix("file:") {
                        Some(p) => TargetSpec::File(PathBuf::from(p.trim())),
                        None => {
                            return Err(format!(
                                "line {line_no}: target must be zero, single-mode, random-decaying, or file:PATH"
                            ))
                        }
                    },
                }
            }
            "target_mode" => target_mode = parse_num(line_no, key, value)?,
            "target_amp" => target_amp = parse_num(line_no, key, value)?,
            "target_decay" => target_decay = parse_num(line_no, key, value)?,
            "control" => {
                cfg.control = match value {
                    "zero" => ControlSpec::Zero,
                    "rough" => ControlSpec::Rough { points: 0, amp: 0.0 },
                    _ => return Err(format!("line {line_no}: control must be zero or rough")),
                }
            }
            "control_points" => control_points = parse_num(line_no, key, value)?,
            "control_amp" => control_amp = parse_num(line_no, key, value)?,
            _ => return Err(format!("line {line_no}: unknown key '{key}'")),
        }
    }
    if let TargetSpec::SingleMode { mode, amp } = &mut cfg.target {
        (*mode, *amp) = (target_mode, target_amp);
    }
    if let TargetSpec::RandomDecaying { amp, decay } = &mut cfg.target {
        (*amp, *decay) = (target_amp, target_decay);
    }
    if let ControlSpec::Rough { points, amp } = &mut cfg.control {
        (*points, *amp) = (control_points, control_amp);
    }
    Ok(cfg)
}

/// Range checks applied after flag overrides.
pub fn validate(cfg: &Config) -> Result<(), String> {
    if !(0.0..=1.9).contains(&cfg.alpha) {
        return Err(format!(
            "field 'alpha': {} outside the supported range [0, 1.9]",
            cfg.alpha
        ));
    }
    if cfg.modes < 1 {
        return Err("field 'modes': must be >= 1".into());
    }
    for (name, v) in [
        ("step_tol", cfg.step_tol),
        ("zero_tol", cfg.zero_tol),
    ] {
        if !(v > 0.0) {
            return Err(format!("field '{name}': must be > 0"));
        }
    }
    if cfg.sample_points < 2 {
        return Err("field 'sample_points': must be >= 2".into());
    }
    if let TargetSpec::SingleMode { mode, .. } = cfg.target {
        if mode > cfg.modes {
            return Err(format!(
                "field 'target_mode': {mode} exceeds modes = {}",
                cfg.modes
            ));
        }
    }
    Ok(())
}

/// Horizon expression: plain number, "T0", or "c*T0"/"T0*c".
pub fn resolve_time(expr: &str, t0: f64) -> Result<f64, String> {
    let e = expr.replace(' ', "");
    let t = if e == "T0" {
        t0
    } else if let Some(c) = e.strip_suffix("*T0") {
        c.parse::<f64>().map_err(|_| format!("field 'time': bad factor in '{expr}'"))? * t0
    } else if let Some(c) = e.strip_prefix("T0*") {
        c.parse::<f64>().map_err(|_| format!("field 'time': bad factor in '{expr}'"))? * t0
    } else {
        e.parse::<f64>().map_err(|_| format!("field 'time': cannot parse '{expr}'"))?
    };
    if !(t > 0.0) {
        return Err(format!("field 'time': horizon {t} must be > 0"));
    }
    Ok(t)
}

/// Canonical rendering of the resolved configuration; hashed into every
/// output so runs are traceable to their exact inputs.
pub fn canonical(cfg: &Config) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "alpha = {:.16e}", cfg.alpha);
    let _ = writeln!(s, "control = {:?}", cfg.control);
    let _ = writeln!(s, "floor_c = {:.16e}", cfg.floor_c);
    let _ = writeln!(s, "modes = {}", cfg.modes);
    let _ = writeln!(s, "mu = {:?}", cfg.mu);
    let _ = writeln!(s, "sample_points = {}", cfg.sample_points);
    let _ = writeln!(s, "seed = {}", cfg.seed);
    let _ = writeln!(s, "step_tol = {:.16e}", cfg.step_tol);
    let _ = writeln!(s, "target = {:?}", cfg.target);
    let _ = writeln!(s, "time = {}", cfg.time);
    let _ = writeln!(s, "zero_tol = {:.16e}", cfg.zero_tol);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = parse("alpha = 0.5\nmodes = 10\ntime = 1.5*T0\n# comment\n").unwrap();
        assert_eq!(cfg.alpha, 0.5);
        assert_eq!(cfg.modes, 10);
        assert_eq!(resolve_time(&cfg.time, 2.0).unwrap(), 3.0);
    }

    #[test]
    fn unknown_key_names_line() {
        let err = parse("alpha = 0.5\nbogus = 1\n").unwrap_err();
        assert!(err.contains("line 2") && err.contains("bogus"), "{err}");
    }

    #[test]
    fn bad_value_names_field() {
        let err = parse("modes = many\n").unwrap_err();
        assert!(err.contains("line 1") && err.contains("modes"), "{err}");
    }

    #[test]
    fn time_forms() {
        assert_eq!(resolve_time("3.5", 2.0).unwrap(), 3.5);
        assert_eq!(resolve_time("T0", 2.0).unwrap(), 2.0);
        assert_eq!(resolve_time("T0*0.6", 2.0).unwrap(), 1.2);
        assert!(resolve_time("two", 2.0).is_err());
        assert!(resolve_time("-1", 2.0).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = Config::default();
        cfg.alpha = 2.5;
        assert!(validate(&cfg).unwrap_err().contains("alpha"));
        cfg.alpha = 0.5;
        assert!(validate(&cfg).is_ok());
    }

    #[test]
    fn generator_parameters_attach() {
        let cfg = parse("target = single-mode\ntarget_mode = 3\ntarget_amp = 0.01\n").unwrap();
        assert_eq!(cfg.target, TargetSpec::SingleMode { mode: 3, amp: 0.01 });
        let cfg = parse("control = rough\ncontrol_points = 65\ncontrol_amp = 0.1\n").unwrap();
        assert_eq!(cfg.control, ControlSpec::Rough { points: 65, amp: 0.1 });
    }
}
