//! Experiment configuration: a flat `key = value` text format with `#`
//! comments and dotted keys, validated up front with line numbers.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Decay,
    Energy,
    Lipschitz,
    Picard,
    Lorentz3d,
    Noncorot,
    Lifespan,
    Toolbox,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "decay" => Self::Decay,
            "energy" => Self::Energy,
            "lipschitz" => Self::Lipschitz,
            "picard" => Self::Picard,
            "lorentz3d" => Self::Lorentz3d,
            "noncorot" => Self::Noncorot,
            "lifespan" => Self::Lifespan,
            "toolbox" => Self::Toolbox,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Decay => "decay",
            Self::Energy => "energy",
            Self::Lipschitz => "lipschitz",
            Self::Picard => "picard",
            Self::Lorentz3d => "lorentz3d",
            Self::Noncorot => "noncorot",
            Self::Lifespan => "lifespan",
            Self::Toolbox => "toolbox",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataKind {
    TaylorGreen,
    RandomBand,
    SingleBlock,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub d: usize,
    pub n: usize,
    pub l: f64,
    pub nu: f64,
    pub a: f64,
    pub mu: f64,
    pub b: f64,
    /// None means "derive from the advective CFL of the initial data".
    pub dt: Option<f64>,
    pub t_end: f64,
    pub sample_every: usize,
    pub data_kind: DataKind,
    pub seed: u64,
    pub amplitude: f64,
    /// Separate tensor amplitude; `None` follows `amplitude`.
    pub tau_amp: Option<f64>,
    pub q0: i32,
    pub q1: i32,
    pub output: PathBuf,
    pub epsilon: f64,
    pub lp_exponent: f64,
    /// `sweep.<key> = v1,v2,...` expands the run over that parameter.
    pub sweep: Option<(String, Vec<f64>)>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Toolbox,
            d: 2,
            n: 64,
            l: 2.0 * std::f64::consts::PI,
            nu: 1.0,
            a: 0.0,
            mu: 0.0,
            b: 0.0,
            dt: None,
            t_end: 1.0,
            sample_every: 10,
            data_kind: DataKind::RandomBand,
            seed: 1,
            amplitude: 0.25,
            tau_amp: None,
            q0: 0,
            q1: 2,
            output: PathBuf::from("out"),
            epsilon: 0.01,
            lp_exponent: 2.0,
            sweep: None,
        }
    }
}

impl ExperimentConfig {
    pub fn tau_amplitude(&self) -> f64 {
        self.tau_amp.unwrap_or(self.amplitude)
    }

    /// Resolve the time step: configured value, or the CFL estimate
    /// `0.25 (L/n) / max(|u0|, 1)` clamped to `[1e-5, 5e-3]`.
    pub fn resolve_dt(&self, max_u0: f64) -> f64 {
        match self.dt {
            Some(dt) => dt,
            None => (0.25 * (self.l / self.n as f64) / max_u0.max(1.0)).clamp(1e-5, 5e-3),
        }
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(format!(
                "line {line_no}: expected `key = value`, got `{line}`"
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if entries.insert(key.clone(), (line_no, value)).is_some() {
            return Err(Error::config(format!("line {line_no}: duplicate key `{key}`")));
        }
    }

    let mut cfg = ExperimentConfig::default();
    let mut explicit_d = false;
    let mut explicit_b = false;
    let mut explicit_mu = false;

    let bad = |line: usize, key: &str, msg: &str| {
        Error::config(format!("line {line}: key `{key}`: {msg}"))
    };
    let parse_f64 = |line: usize, key: &str, v: &str| -> Result<f64> {
        v.parse::<f64>()
            .map_err(|_| bad(line, key, "not a number"))
    };
    let parse_usize = |line: usize, key: &str, v: &str| -> Result<usize> {
        v.parse::<usize>()
            .map_err(|_| bad(line, key, "not a non-negative integer"))
    };

    for (key, (line, value)) in &entries {
        let line = *line;
        match key.as_str() {
            "experiment" => {
                cfg.experiment = ExperimentKind::parse(value)
                    .ok_or_else(|| bad(line, key, "unknown experiment"))?;
            }
            "grid.d" => {
                cfg.d = parse_usize(line, key, value)?;
                explicit_d = true;
                if cfg.d != 2 && cfg.d != 3 {
                    return Err(bad(line, key, "dimension must be 2 or 3"));
                }
            }
            "grid.N" => {
                cfg.n = parse_usize(line, key, value)?;
                if cfg.n < 8 || !cfg.n.is_power_of_two() {
                    return Err(bad(line, key, "must be a power of two >= 8"));
                }
            }
            "grid.L" => {
                cfg.l = parse_f64(line, key, value)?;
                if !(cfg.l > 0.0) {
                    return Err(bad(line, key, "must be positive"));
                }
            }
            "params.nu" => {
                cfg.nu = parse_f64(line, key, value)?;
                if !(cfg.nu > 0.0) {
                    return Err(bad(line, key, "viscosity must be positive"));
                }
            }
            "params.a" => {
                cfg.a = parse_f64(line, key, value)?;
                if cfg.a < 0.0 {
                    return Err(bad(line, key, "damping must be >= 0"));
                }
            }
            "params.mu" => {
                cfg.mu = parse_f64(line, key, value)?;
                explicit_mu = true;
                if cfg.mu < 0.0 {
                    return Err(bad(line, key, "coupling must be >= 0"));
                }
            }
            "params.b" => {
                cfg.b = parse_f64(line, key, value)?;
                explicit_b = true;
                if !(-1.0..=1.0).contains(&cfg.b) {
                    return Err(bad(line, key, "slip parameter must be in [-1, 1]"));
                }
            }
            "time.dt" => {
                let dt = parse_f64(line, key, value)?;
                if !(dt > 0.0) {
                    return Err(bad(line, key, "dt must be positive"));
                }
                cfg.dt = Some(dt);
            }
            "time.T" => {
                cfg.t_end = parse_f64(line, key, value)?;
                if cfg.t_end < 0.0 {
                    return Err(bad(line, key, "horizon must be >= 0"));
                }
            }
            "time.sample_every" => {
                cfg.sample_every = parse_usize(line, key, value)?.max(1);
            }
            "initial_data.kind" => {
                cfg.data_kind = match value.as_str() {
                    "taylor-green" => DataKind::TaylorGreen,
                    "random-band" => DataKind::RandomBand,
                    "single-block" => DataKind::SingleBlock,
                    _ => return Err(bad(line, key, "unknown generator")),
                };
            }
            "initial_data.seed" => {
                cfg.seed = value
                    .parse::<u64>()
                    .map_err(|_| bad(line, key, "not a seed"))?;
            }
            "initial_data.amplitude" => {
                cfg.amplitude = parse_f64(line, key, value)?;
                if !(cfg.amplitude >= 0.0) {
                    return Err(bad(line, key, "amplitude must be >= 0"));
                }
            }
            "initial_data.tau_amplitude" => {
                let v = parse_f64(line, key, value)?;
                if !(v >= 0.0) {
                    return Err(bad(line, key, "amplitude must be >= 0"));
                }
                cfg.tau_amp = Some(v);
            }
            "initial_data.q0" => {
                cfg.q0 = value.parse::<i32>().map_err(|_| bad(line, key, "not an integer"))?;
            }
            "initial_data.q1" => {
                cfg.q1 = value.parse::<i32>().map_err(|_| bad(line, key, "not an integer"))?;
            }
            "output" => {
                cfg.output = PathBuf::from(value);
            }
            "epsilon" => {
                cfg.epsilon = parse_f64(line, key, value)?;
                if !(cfg.epsilon > 0.0) {
                    return Err(bad(line, key, "epsilon must be positive"));
                }
            }
            "lp_exponent" => {
                cfg.lp_exponent = parse_f64(line, key, value)?;
                if cfg.lp_exponent < 1.0 {
                    return Err(bad(line, key, "exponent must be >= 1"));
                }
            }
            _ if key.starts_with("sweep.") => {
                let target = key.trim_start_matches("sweep.").to_string();
                if target != "params.mu" && target != "params.b" && target != "initial_data.seed" {
                    return Err(bad(line, key, "unsupported sweep target"));
                }
                let vals: Result<Vec<f64>> = value
                    .split(',')
                    .map(|v| parse_f64(line, key, v.trim()))
                    .collect();
                cfg.sweep = Some((target, vals?));
            }
            _ => {
                return Err(Error::config(format!("line {line}: unknown key `{key}`")));
            }
        }
    }

    // experiment-specific constraints
    let first_line_of = |k: &str| entries.get(k).map(|(l, _)| *l).unwrap_or(0);
    match cfg.experiment {
        ExperimentKind::Decay => {
            if cfg.b != 0.0 {
                return Err(bad(
                    first_line_of("params.b"),
                    "params.b",
                    "the decay experiment requires b = 0",
                ));
            }
            if cfg.mu != 0.0 {
                return Err(bad(
                    first_line_of("params.mu"),
                    "params.mu",
                    "the decay experiment requires mu = 0",
                ));
            }
        }
        ExperimentKind::Lorentz3d => {
            if explicit_d && cfg.d != 3 {
                return Err(bad(
                    first_line_of("grid.d"),
                    "grid.d",
                    "lorentz3d runs in dimension 3",
                ));
            }
            cfg.d = 3;
        }
        ExperimentKind::Noncorot => {
            let active = (explicit_mu && cfg.mu > 0.0) || (explicit_b && cfg.b != 0.0);
            if !active && cfg.sweep.is_none() {
                return Err(Error::config(
                    "noncorot requires mu > 0 or b != 0 (or a sweep over them)".to_string(),
                ));
            }
        }
        _ => {}
    }
    Ok(cfg)
}
