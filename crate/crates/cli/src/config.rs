//! Run configuration: command-line flags layered over an optional
//! `key=value` file, the `BETA_LAB_SEED` variable and built-in defaults.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use beta_lab_core::Tolerances;

pub const SEED_ENV: &str = "BETA_LAB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
    Json,
}

impl FromStr for Format {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            "json" => Ok(Format::Json),
            _ => Err(ConfigError::BadValue { key: "format".into(), value: s.into() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    UnknownKey(String),
    BadValue { key: String, value: String },
    Malformed { line: usize, text: String },
    Io(String),
    Invalid(String),
}

impl ConfigError {
    pub fn name(&self) -> &'static str {
        match self {
            ConfigError::UnknownKey(_) => "UnknownKey",
            ConfigError::BadValue { .. } => "BadValue",
            ConfigError::Malformed { .. } => "MalformedConfig",
            ConfigError::Io(_) => "IoError",
            ConfigError::Invalid(_) => "InvalidConfig",
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::UnknownKey(k) => write!(f, "unknown key `{k}`"),
            ConfigError::BadValue { key, value } => write!(f, "bad value `{value}` for `{key}`"),
            ConfigError::Malformed { line, text } => write!(f, "line {line}: expected key=value, got `{text}`"),
            ConfigError::Io(msg) => write!(f, "{msg}"),
            ConfigError::Invalid(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Pass/fail thresholds of the CLI checks, overridable as `tol.<name>`
/// together with the numerical [`Tolerances`] of the core crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub first_integral: f64,
    pub el_residual: f64,
    pub closed_form_log: f64,
    pub closed_form_catenoid: f64,
    pub pde_ratio: f64,
    pub first_variation_abs: f64,
    pub first_variation_rel: f64,
    pub critical_first_variation: f64,
    pub second_variation: f64,
    pub pair_identity: f64,
    pub factorization: f64,
    pub tangent_det: f64,
    pub negative_control: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            first_integral: 1e-10,
            el_residual: 1e-8,
            closed_form_log: 1e-10,
            closed_form_catenoid: 1e-8,
            pde_ratio: 3.5,
            first_variation_abs: 1e-6,
            first_variation_rel: 1e-4,
            critical_first_variation: 1e-6,
            second_variation: 1e-3,
            pair_identity: 1e-6,
            factorization: 1e-12,
            tangent_det: 1e-12,
            negative_control: 1e-4,
        }
    }
}

/// Every setting a subcommand may read. `None` means "use the subcommand's
/// default".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub beta: Option<Vec<f64>>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub eps: Option<f64>,
    pub r_max: Option<f64>,
    pub n: Option<usize>,
    pub samples: Option<usize>,
    pub f0: Option<f64>,
    pub g0: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub tol: Vec<(String, f64)>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| ConfigError::BadValue { key: key.into(), value: value.into() })
}

pub fn parse_beta_list(value: &str) -> Result<Vec<f64>, ConfigError> {
    let list: Vec<f64> = value
        .split(',')
        .map(|v| parse("beta", v))
        .collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err(ConfigError::BadValue { key: "beta".into(), value: value.into() });
    }
    Ok(list)
}

impl Settings {
    /// Applies one `key=value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "beta" => self.beta = Some(parse_beta_list(v)?),
            "c1" => self.c1 = Some(parse(key, v)?),
            "c2" => self.c2 = Some(parse(key, v)?),
            "eps" => self.eps = Some(parse(key, v)?),
            "r_max" | "r-max" => self.r_max = Some(parse(key, v)?),
            "n" | "nodes" => self.n = Some(parse(key, v)?),
            "samples" => self.samples = Some(parse(key, v)?),
            "f0" => self.f0 = Some(parse(key, v)?),
            "g0" => self.g0 = Some(parse(key, v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = Some(v.parse()?),
            "seed" => self.seed = Some(parse(key, v)?),
            _ => match key.strip_prefix("tol.") {
                Some(name) if is_tolerance_name(name) => self.tol.push((name.into(), parse(key, v)?)),
                _ => return Err(ConfigError::UnknownKey(key.into())),
            },
        }
        Ok(())
    }

    /// Parses a config file: one `key = value` per line, `#` comments.
    pub fn parse_file_contents(text: &str) -> Result<Settings, ConfigError> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Malformed { line: i + 1, text: raw.into() })?;
            s.set(k.trim(), v)?;
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Settings, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Settings::parse_file_contents(&text)
    }

    /// `self` wins wherever it has a value.
    pub fn over(self, base: Settings) -> Settings {
        let mut tol = base.tol;
        tol.extend(self.tol);
        Settings {
            beta: self.beta.or(base.beta),
            c1: self.c1.or(base.c1),
            c2: self.c2.or(base.c2),
            eps: self.eps.or(base.eps),
            r_max: self.r_max.or(base.r_max),
            n: self.n.or(base.n),
            samples: self.samples.or(base.samples),
            f0: self.f0.or(base.f0),
            g0: self.g0.or(base.g0),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            seed: self.seed.or(base.seed),
            tol,
        }
    }
}

/// Seed from the environment variable, if set.
pub fn env_seed(value: Option<&str>) -> Result<Option<u64>, ConfigError> {
    value.map(|v| parse(SEED_ENV, v)).transpose()
}

/// Layers `flags > env seed > file > defaults`.
pub fn layer(flags: Settings, env_seed: Option<u64>, file: Option<Settings>) -> Settings {
    let env = Settings { seed: env_seed, ..Settings::default() };
    flags.over(env.over(file.unwrap_or_default()))
}

const CORE_TOLERANCES: [&str; 10] = [
    "degenerate_det",
    "lagrangian_cos",
    "complex_sin",
    "seed_projection",
    "fd_relative_step",
    "criticality",
    "ellipticity_violation",
    "far_remainder",
    "near_relative",
    "pde_residual",
];

const CHECK_THRESHOLDS: [&str; 13] = [
    "first_integral",
    "el_residual",
    "closed_form_log",
    "closed_form_catenoid",
    "pde_ratio",
    "first_variation_abs",
    "first_variation_rel",
    "critical_first_variation",
    "second_variation",
    "pair_identity",
    "factorization",
    "tangent_det",
    "negative_control",
];

pub fn is_tolerance_name(name: &str) -> bool {
    CORE_TOLERANCES.contains(&name) || CHECK_THRESHOLDS.contains(&name)
}

/// Fully resolved configuration handed to a subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub betas: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    pub eps: f64,
    pub r_max: f64,
    pub n: usize,
    pub samples: usize,
    pub f0: f64,
    pub g0: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub thresholds: Thresholds,
}

/// Per-subcommand defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Defaults {
    pub betas: Vec<f64>,
    pub eps: f64,
    pub r_max: f64,
    pub n: usize,
    pub samples: usize,
    pub format: Format,
}

impl RunConfig {
    pub fn resolve(s: Settings, d: Defaults) -> Result<RunConfig, ConfigError> {
        let mut tolerances = Tolerances::default();
        let mut thresholds = Thresholds::default();
        for (name, value) in &s.tol {
            let t = &mut tolerances;
            let h = &mut thresholds;
            let slot = match name.as_str() {
                "degenerate_det" => &mut t.degenerate_det,
                "lagrangian_cos" => &mut t.lagrangian_cos,
                "complex_sin" => &mut t.complex_sin,
                "seed_projection" => &mut t.seed_projection,
                "fd_relative_step" => &mut t.fd_relative_step,
                "criticality" => &mut t.criticality,
                "ellipticity_violation" => &mut t.ellipticity_violation,
                "far_remainder" => &mut t.far_remainder,
                "near_relative" => &mut t.near_relative,
                "pde_residual" => &mut t.pde_residual,
                "first_integral" => &mut h.first_integral,
                "el_residual" => &mut h.el_residual,
                "closed_form_log" => &mut h.closed_form_log,
                "closed_form_catenoid" => &mut h.closed_form_catenoid,
                "pde_ratio" => &mut h.pde_ratio,
                "first_variation_abs" => &mut h.first_variation_abs,
                "first_variation_rel" => &mut h.first_variation_rel,
                "critical_first_variation" => &mut h.critical_first_variation,
                "second_variation" => &mut h.second_variation,
                "pair_identity" => &mut h.pair_identity,
                "factorization" => &mut h.factorization,
                "tangent_det" => &mut h.tangent_det,
                "negative_control" => &mut h.negative_control,
                _ => return Err(ConfigError::UnknownKey(format!("tol.{name}"))),
            };
            if !(value.is_finite() && *value >= 0.0) {
                return Err(ConfigError::BadValue { key: format!("tol.{name}"), value: value.to_string() });
            }
            *slot = *value;
        }
        let cfg = RunConfig {
            betas: s.beta.unwrap_or(d.betas),
            c1: s.c1.unwrap_or(1.0),
            c2: s.c2.unwrap_or(1.0),
            eps: s.eps.unwrap_or(d.eps),
            r_max: s.r_max.unwrap_or(d.r_max),
            n: s.n.unwrap_or(d.n),
            samples: s.samples.unwrap_or(d.samples),
            f0: s.f0.unwrap_or(0.0),
            g0: s.g0.unwrap_or(0.0),
            out: s.out,
            format: s.format.unwrap_or(d.format),
            seed: s.seed.unwrap_or(beta_lab_core::symbol::DEFAULT_SEED),
            tolerances,
            thresholds,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, value: f64| Err(ConfigError::BadValue { key: key.into(), value: value.to_string() });
        for &b in &self.betas {
            if !(b.is_finite() && b >= 0.0) {
                return bad("beta", b);
            }
        }
        for (key, v) in [("c1", self.c1), ("c2", self.c2), ("f0", self.f0), ("g0", self.g0)] {
            if !v.is_finite() {
                return bad(key, v);
            }
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return bad("eps", self.eps);
        }
        if !(self.r_max.is_finite() && self.r_max > self.eps) {
            return bad("r_max", self.r_max);
        }
        if self.n < 9 {
            return bad("n", self.n as f64);
        }
        if self.samples == 0 {
            return bad("samples", 0.0);
        }
        Ok(())
    }

    pub fn single_beta(&self) -> Result<f64, ConfigError> {
        match self.betas.as_slice() {
            [b] => Ok(*b),
            _ => Err(ConfigError::Invalid("this output needs exactly one beta".into())),
        }
    }
}
