//! Flat `key = value` run configuration with command-line overrides.
//!
//! Keys are case-insensitive, `#` starts a comment, and unknown keys are errors.
//! Overrides use `--key value` or `--key=value` and always win over the file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use gcselect_core::fem::MassMatrix;
use gcselect_core::{Grid, InitialData, ModelParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}: expected `key = value`, found `{text}`")]
    Syntax { origin: String, text: String },
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { origin: String, key: String },
    #[error("{origin}: bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        origin: String,
        key: String,
        value: String,
        reason: String,
    },
    #[error("override `{0}` has no value")]
    MissingValue(String),
    #[error("expected an override of the form --key value, found `{0}`")]
    StrayArgument(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Constant,
    Random,
    Dirac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Eps,
    Mu,
    Rho0,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Eps => "eps",
            SweepAxis::Mu => "mu",
            SweepAxis::Rho0 => "rho0",
        }
    }

    pub fn apply(self, params: &mut ModelParams, value: f64) {
        match self {
            SweepAxis::Eps => params.eps = value,
            SweepAxis::Mu => params.mu = value,
            SweepAxis::Rho0 => params.rho0 = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Lin,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub n_cells: usize,
    pub dt: f64,
    pub t_max: f64,
    pub init: InitKind,
    pub init_value: f64,
    pub seed: u64,
    pub init_lower: f64,
    pub init_upper: f64,
    pub dirac_z: f64,
    pub stop_at_threshold: bool,
    pub snapshot_times: Vec<f64>,
    pub modes: usize,
    pub axis: SweepAxis,
    pub sweep_start: f64,
    pub sweep_stop: f64,
    pub sweep_count: usize,
    pub sweep_spacing: Spacing,
    pub mass_matrix: MassMatrix,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    explicit: BTreeSet<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            n_cells: 400,
            dt: 1e-3,
            t_max: 50.0,
            init: InitKind::Constant,
            init_value: 1.0,
            seed: 0,
            init_lower: 0.0,
            init_upper: 1.0,
            dirac_z: 0.5,
            stop_at_threshold: true,
            snapshot_times: Vec::new(),
            modes: 12,
            axis: SweepAxis::Rho0,
            sweep_start: 1.0,
            sweep_stop: 1000.0,
            sweep_count: 8,
            sweep_spacing: Spacing::Log,
            mass_matrix: MassMatrix::Consistent,
            out: PathBuf::from("."),
            jobs: None,
            explicit: BTreeSet::new(),
        }
    }
}

fn num<T: std::str::FromStr>(origin: &str, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::BadValue {
        origin: origin.to_string(),
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn choice<T: Copy>(origin: &str, key: &str, value: &str, options: &[(&str, T)]) -> Result<T, ConfigError> {
    let lower = value.to_ascii_lowercase();
    options
        .iter()
        .find(|(name, _)| *name == lower)
        .map(|(_, v)| *v)
        .ok_or_else(|| ConfigError::BadValue {
            origin: origin.to_string(),
            key: key.to_string(),
            value: value.to_string(),
            reason: format!(
                "expected one of {}",
                options.iter().map(|(n, _)| *n).collect::<Vec<_>>().join("|")
            ),
        })
}

impl RunConfig {
    /// Reads `file` (if any), then applies `overrides` in order.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            cfg.apply_text(&text, &path.display().to_string())?;
        }
        for (key, value) in overrides {
            cfg.set(key, value, "command line")?;
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let here = format!("{origin}:{}", i + 1);
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                origin: here.clone(),
                text: line.to_string(),
            })?;
            self.set(key.trim(), value.trim(), &here)?;
        }
        Ok(())
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str, origin: &str) -> Result<(), ConfigError> {
        let key = key.trim().to_ascii_lowercase();
        let k = key.as_str();
        match k {
            "q0" => self.params.q0 = num(origin, k, value)?,
            "q1" => self.params.q1 = num(origin, k, value)?,
            "d" => self.params.d = num(origin, k, value)?,
            "mu" => self.params.mu = num(origin, k, value)?,
            "eps" => self.params.eps = num(origin, k, value)?,
            "rho0" => self.params.rho0 = num(origin, k, value)?,
            "s0" => self.params.s0 = num(origin, k, value)?,
            "n_cells" => self.n_cells = num(origin, k, value)?,
            "dt" => self.dt = num(origin, k, value)?,
            "t_max" => self.t_max = num(origin, k, value)?,
            "init" => {
                self.init = choice(
                    origin,
                    k,
                    value,
                    &[
                        ("constant", InitKind::Constant),
                        ("random", InitKind::Random),
                        ("dirac", InitKind::Dirac),
                    ],
                )?
            }
            "init_value" => self.init_value = num(origin, k, value)?,
            "seed" => self.seed = num(origin, k, value)?,
            "init_lower" => self.init_lower = num(origin, k, value)?,
            "init_upper" => self.init_upper = num(origin, k, value)?,
            "dirac_z" => self.dirac_z = num(origin, k, value)?,
            "stop_at_threshold" => self.stop_at_threshold = num(origin, k, value)?,
            "snapshot_times" => {
                self.snapshot_times = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| num(origin, k, s))
                    .collect::<Result<_, _>>()?
            }
            "modes" => self.modes = num(origin, k, value)?,
            "axis" => {
                self.axis = choice(
                    origin,
                    k,
                    value,
                    &[
                        ("eps", SweepAxis::Eps),
                        ("mu", SweepAxis::Mu),
                        ("rho0", SweepAxis::Rho0),
                    ],
                )?
            }
            "sweep_start" => self.sweep_start = num(origin, k, value)?,
            "sweep_stop" => self.sweep_stop = num(origin, k, value)?,
            "sweep_count" => self.sweep_count = num(origin, k, value)?,
            "sweep_spacing" => {
                self.sweep_spacing =
                    choice(origin, k, value, &[("lin", Spacing::Lin), ("log", Spacing::Log)])?
            }
            "mass_matrix" => {
                self.mass_matrix = choice(
                    origin,
                    k,
                    value,
                    &[
                        ("consistent", MassMatrix::Consistent),
                        ("lumped", MassMatrix::Lumped),
                    ],
                )?
            }
            "out" => self.out = PathBuf::from(value),
            "jobs" => self.jobs = Some(num(origin, k, value)?),
            _ => {
                return Err(ConfigError::UnknownKey {
                    origin: origin.to_string(),
                    key,
                })
            }
        }
        self.explicit.insert(key);
        Ok(())
    }

    /// Whether `key` was given in the file or on the command line.
    pub fn is_set(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    fn check(&self) -> Result<(), ConfigError> {
        self.params
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.n_cells == 0 {
            return Err(ConfigError::Invalid("n_cells must be positive".into()));
        }
        if !(self.dt > 0.0 && self.t_max > 0.0) {
            return Err(ConfigError::Invalid("dt and t_max must be positive".into()));
        }
        if self.modes == 0 {
            return Err(ConfigError::Invalid("modes must be positive".into()));
        }
        if self.jobs == Some(0) {
            return Err(ConfigError::Invalid("jobs must be positive".into()));
        }
        self.initial_data()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn initial_data(&self) -> InitialData {
        match self.init {
            InitKind::Constant => InitialData::Constant(self.init_value),
            InitKind::Random => InitialData::Random {
                seed: self.seed,
                lower: self.init_lower,
                upper: self.init_upper,
            },
            InitKind::Dirac => InitialData::Dirac(self.dirac_z),
        }
    }

    pub fn grid(&self) -> gcselect_core::Result<Grid> {
        Grid::resolving(self.n_cells, self.params.eps)
    }

    /// Axis values of a sweep.
    pub fn sweep_values(&self) -> Result<Vec<f64>, ConfigError> {
        let (a, b, n) = (self.sweep_start, self.sweep_stop, self.sweep_count);
        if n == 0 || !a.is_finite() || !b.is_finite() {
            return Err(ConfigError::Invalid("sweep needs finite bounds and sweep_count >= 1".into()));
        }
        if self.sweep_spacing == Spacing::Log && !(a > 0.0 && b > 0.0) {
            return Err(ConfigError::Invalid("log spacing needs positive bounds".into()));
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        let step = |i: usize| i as f64 / (n - 1) as f64;
        Ok((0..n)
            .map(|i| match self.sweep_spacing {
                Spacing::Lin => a + (b - a) * step(i),
                Spacing::Log => (a.ln() + (b.ln() - a.ln()) * step(i)).exp(),
            })
            .collect())
    }
}

/// Splits `--key value` / `--key=value` arguments into pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(body) = arg.strip_prefix("--") else {
            return Err(ConfigError::StrayArgument(arg.clone()));
        };
        match body.split_once('=') {
            Some((k, v)) => out.push((k.to_string(), v.to_string())),
            None => {
                let v = it.next().ok_or_else(|| ConfigError::MissingValue(arg.clone()))?;
                out.push((body.to_string(), v.clone()));
            }
        }
    }
    Ok(out)
}
