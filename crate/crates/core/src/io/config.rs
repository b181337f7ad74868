//! Run configuration: a flat `key = value` file plus command-line overrides.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cases::{case_by_name, CaseSpec};
use crate::error::{Error, Result};
use crate::euler::Primitive;
use crate::kinetic::DEFAULT_ALPHA;
use crate::limiters::{DensityKind, LimiterConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Vtk,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "vtk" => Ok(OutputFormat::Vtk),
            other => Err(Error::Config(format!("unknown output format `{other}` (expected csv or vtk)"))),
        }
    }
}

/// One-dimensional Riemann problem given inline, states as `(rho, v, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InlineRiemann {
    pub left: [f64; 3],
    pub right: [f64; 3],
    pub gamma: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub x_jump: f64,
    pub t_final: f64,
}

impl Default for InlineRiemann {
    fn default() -> Self {
        Self { left: [1.0, 0.0, 1.0], right: [0.125, 0.0, 0.1], gamma: 1.4, x_min: 0.0, x_max: 1.0, x_jump: 0.5, t_final: 0.2 }
    }
}

impl InlineRiemann {
    pub fn to_case(&self) -> Result<CaseSpec> {
        let w = |s: [f64; 3]| Primitive::new(s[0], s[1], 0.0, s[2]);
        CaseSpec::riemann_strip(
            INLINE_CASE,
            w(self.left),
            w(self.right),
            self.gamma,
            (self.x_min, self.x_max),
            self.x_jump,
            self.t_final,
        )
    }
}

/// Case name selecting the inline Riemann definition.
pub const INLINE_CASE: &str = "riemann";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub case: String,
    pub riemann: Option<InlineRiemann>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    /// Case default when unset.
    pub limiter: Option<DensityKind>,
    pub pressure_limiter: bool,
    pub alpha: f64,
    pub kinetic_speed: Option<f64>,
    pub t_final: Option<f64>,
    pub output_dir: Option<PathBuf>,
    /// Write a snapshot every this many steps.
    pub snapshot_every: Option<u64>,
    /// Write snapshots at these times; steps are shortened to land on them.
    pub snapshot_times: Vec<f64>,
    pub formats: Vec<OutputFormat>,
    /// Record the worst violation of the local density bounds.
    pub check_bounds: bool,
    pub max_steps: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            case: String::new(),
            riemann: None,
            nx: None,
            ny: None,
            limiter: None,
            pressure_limiter: true,
            alpha: DEFAULT_ALPHA,
            kinetic_speed: None,
            t_final: None,
            output_dir: None,
            snapshot_every: None,
            snapshot_times: Vec::new(),
            formats: vec![OutputFormat::Csv],
            check_bounds: false,
            max_steps: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse(key, s)).collect()
}

fn parse_state(key: &str, value: &str) -> Result<[f64; 3]> {
    let v: Vec<f64> = parse_list(key, value)?;
    <[f64; 3]>::try_from(v).map_err(|_| Error::Config(format!("`{key}` expects rho,v,p")))
}

fn optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    let v = value.trim();
    if v.is_empty() || v.eq_ignore_ascii_case("none") || v.eq_ignore_ascii_case("auto") {
        Ok(None)
    } else {
        parse(key, v).map(Some)
    }
}

impl RunConfig {
    pub fn for_case(case: &str) -> Self {
        Self { case: case.to_string(), ..Self::default() }
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_kv_file(path: &std::path::Path) -> Result<Self> {
        Self::from_kv_str(&std::fs::read_to_string(path)?)
    }

    /// Sets one key; used for both file entries and overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        match key.as_str() {
            "case" => self.case = value.trim().to_string(),
            "nx" => self.nx = optional(&key, value)?,
            "ny" => self.ny = optional(&key, value)?,
            "limiter" => self.limiter = optional(&key, value)?,
            "pressure_limiter" => self.pressure_limiter = parse(&key, value)?,
            "alpha" => self.alpha = parse(&key, value)?,
            "kinetic_speed" => self.kinetic_speed = optional(&key, value)?,
            "t_final" => self.t_final = optional(&key, value)?,
            "output_dir" => self.output_dir = optional::<String>(&key, value)?.map(PathBuf::from),
            "snapshot_every" => self.snapshot_every = optional(&key, value)?,
            "snapshot_times" => self.snapshot_times = parse_list(&key, value)?,
            "formats" => self.formats = parse_list(&key, value)?,
            "check_bounds" => self.check_bounds = parse(&key, value)?,
            "max_steps" => self.max_steps = optional(&key, value)?,
            k if k.starts_with("riemann.") => {
                let r = self.riemann.get_or_insert_with(InlineRiemann::default);
                match &k["riemann.".len()..] {
                    "left" => r.left = parse_state(k, value)?,
                    "right" => r.right = parse_state(k, value)?,
                    "gamma" => r.gamma = parse(k, value)?,
                    "x_min" => r.x_min = parse(k, value)?,
                    "x_max" => r.x_max = parse(k, value)?,
                    "x_jump" => r.x_jump = parse(k, value)?,
                    "t_final" => r.t_final = parse(k, value)?,
                    other => return Err(Error::Config(format!("unknown key `riemann.{other}`"))),
                }
            }
            other => return Err(Error::Config(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    pub fn resolve_case(&self) -> Result<CaseSpec> {
        if self.case.is_empty() {
            return Err(Error::Config("no case selected".into()));
        }
        if self.case == INLINE_CASE {
            return self
                .riemann
                .as_ref()
                .ok_or_else(|| Error::Config("case `riemann` needs riemann.* keys".into()))?
                .to_case();
        }
        case_by_name(&self.case)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == Some(0) || self.ny == Some(0) {
            return Err(Error::Config("mesh must have at least one cell in each direction".into()));
        }
        if self.snapshot_every == Some(0) {
            return Err(Error::Config("snapshot_every must be positive".into()));
        }
        if let Some(t) = self.t_final {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("t_final must be positive, got {t}")));
            }
        }
        if self.snapshot_times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Config("snapshot times must be positive".into()));
        }
        if let Some(a) = self.kinetic_speed {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Config(format!("kinetic speed must be positive, got {a}")));
            }
        }
        if !(0.5..1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must lie in [1/2, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn limiter_config(&self, case: &CaseSpec) -> LimiterConfig {
        LimiterConfig { pressure: self.pressure_limiter, ..LimiterConfig::new(self.limiter.unwrap_or(case.default_limiter)) }
    }
}
