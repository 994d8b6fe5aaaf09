//! Run configuration: defaults, command-line flags and `key=value` files.
//!
//! Precedence is defaults < flags < config file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use ringstir::dynamics::DEFAULT_KAPPA;
use ringstir::twolevel::{DEFAULT_RHO, DEFAULT_SHARPNESS};
use ringstir::{RegimeThresholds, RingParams};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    Ground,
    Dot,
}

impl FromStr for Initial {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ground" => Ok(Initial::Ground),
            "dot" => Ok(Initial::Dot),
            other => Err(format!("unknown initial state {other:?} (expected ground or dot)")),
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// Intra-wire coupling (bond 1-2).
    #[arg(long, allow_negative_numbers = true)]
    pub c0: Option<f64>,
    /// Dot to wire-site-1 coupling.
    #[arg(long, allow_negative_numbers = true)]
    pub c1: Option<f64>,
    /// Dot to wire-site-2 coupling.
    #[arg(long, allow_negative_numbers = true)]
    pub c2: Option<f64>,
    /// Lower end of the dot-potential grid or sweep window.
    #[arg(long, allow_negative_numbers = true)]
    pub u_min: Option<f64>,
    /// Upper end of the dot-potential grid or sweep window.
    #[arg(long, allow_negative_numbers = true)]
    pub u_max: Option<f64>,
    /// Number of grid points (samples for `dynamics`, points per axis for `regimes`).
    #[arg(long)]
    pub n: Option<usize>,
    /// Sweep rate for `dynamics`.
    #[arg(long, allow_negative_numbers = true)]
    pub u_dot: Option<f64>,
    /// Local error tolerance per unit time for `dynamics`.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Two-level regime threshold on |c+-|/|c0|.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Sharp-metamorphosis threshold on |c1-c2|/|c1+c2|.
    #[arg(long)]
    pub sharpness: Option<f64>,
    /// Lower end of the (c1, c2) grid for `regimes`.
    #[arg(long, allow_negative_numbers = true)]
    pub c_min: Option<f64>,
    /// Upper end of the (c1, c2) grid for `regimes`.
    #[arg(long, allow_negative_numbers = true)]
    pub c_max: Option<f64>,
    /// Initial state for `dynamics`.
    #[arg(long, value_enum)]
    pub initial: Option<Initial>,
    /// Output file (directory for `figures`). Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot to this path (`regimes`).
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// `key=value` file; its entries override flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub n: usize,
    pub u_dot: f64,
    pub tol: f64,
    pub rho: f64,
    pub sharpness: f64,
    pub kappa: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub initial: Initial,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub svg: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            c0: 1.0,
            c1: 0.2,
            c2: 0.15,
            u_min: -5.0,
            u_max: 5.0,
            n: 201,
            u_dot: 1.0,
            tol: 1e-8,
            rho: DEFAULT_RHO,
            sharpness: DEFAULT_SHARPNESS,
            kappa: DEFAULT_KAPPA,
            c_min: 0.0,
            c_max: 20.0,
            initial: Initial::Ground,
            out: None,
            svg: None,
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| ConfigError(format!("bad value {value:?} for {key}: {e}")))
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = args.$field.clone() { cfg.$field = v; })*
            };
        }
        take!(c0, c1, c2, u_min, u_max, n, u_dot, tol, rho, sharpness, c_min, c_max, initial, format);
        cfg.out = args.out.clone();
        cfg.svg = args.svg.clone();
        if let Some(path) = &args.config {
            cfg.apply_file(path)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_str(&text)
    }

    /// Apply `key=value` lines. Blank lines and `#` comments are ignored;
    /// dashes and underscores in keys are interchangeable.
    pub fn apply_str(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key=value, got {raw:?}", lineno + 1)))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            match key.as_str() {
                "c0" => self.c0 = parse(&key, value)?,
                "c1" => self.c1 = parse(&key, value)?,
                "c2" => self.c2 = parse(&key, value)?,
                "u_min" => self.u_min = parse(&key, value)?,
                "u_max" => self.u_max = parse(&key, value)?,
                "n" => self.n = parse(&key, value)?,
                "u_dot" => self.u_dot = parse(&key, value)?,
                "tol" => self.tol = parse(&key, value)?,
                "rho" => self.rho = parse(&key, value)?,
                "sharpness" => self.sharpness = parse(&key, value)?,
                "kappa" => self.kappa = parse(&key, value)?,
                "c_min" => self.c_min = parse(&key, value)?,
                "c_max" => self.c_max = parse(&key, value)?,
                "initial" => self.initial = parse(&key, value)?,
                "format" => self.format = parse(&key, value)?,
                "out" => self.out = Some(PathBuf::from(value)),
                "svg" => self.svg = Some(PathBuf::from(value)),
                other => return Err(ConfigError(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = [
            ("c0", self.c0),
            ("c1", self.c1),
            ("c2", self.c2),
            ("u_min", self.u_min),
            ("u_max", self.u_max),
            ("u_dot", self.u_dot),
            ("tol", self.tol),
            ("rho", self.rho),
            ("sharpness", self.sharpness),
            ("kappa", self.kappa),
            ("c_min", self.c_min),
            ("c_max", self.c_max),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(ConfigError(format!("{name} must be finite, got {v}")));
            }
        }
        if self.n < 2 {
            return Err(ConfigError(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.u_min < self.u_max) {
            return Err(ConfigError(format!(
                "empty grid: need u_min < u_max, got {} and {}",
                self.u_min, self.u_max
            )));
        }
        if !(self.c_min < self.c_max) {
            return Err(ConfigError(format!(
                "empty grid: need c_min < c_max, got {} and {}",
                self.c_min, self.c_max
            )));
        }
        for (name, v) in [("rho", self.rho), ("sharpness", self.sharpness), ("kappa", self.kappa), ("tol", self.tol)] {
            if v <= 0.0 {
                return Err(ConfigError(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> RingParams {
        RingParams::new(self.c0, self.c1, self.c2)
    }

    pub fn thresholds(&self) -> RegimeThresholds {
        RegimeThresholds {
            rho: self.rho,
            sharpness: self.sharpness,
        }
    }

    /// `n` equally spaced points from `u_min` to `u_max`, endpoints exact.
    pub fn u_grid(&self) -> Vec<f64> {
        linspace(self.u_min, self.u_max, self.n)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n)
        .map(|k| if k + 1 == n { b } else { a + (b - a) * (k as f64) / last })
        .collect()
}
