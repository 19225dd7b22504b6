use std::fmt;
use std::path::PathBuf;

use pfr_core::experiments::TrialMode;
use pfr_core::strategy::FlowConstraint;
use pfr_core::{IsoperimetricSpec, ReactorParams};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Evaluate,
    CaseStudy,
    SweepSingle,
    SweepPair,
    Trial,
    PdeCheck,
}

impl fmt::Display for RunKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RunKind::Evaluate => "evaluate",
            RunKind::CaseStudy => "case_study",
            RunKind::SweepSingle => "sweep_single",
            RunKind::SweepPair => "sweep_pair",
            RunKind::Trial => "trial",
            RunKind::PdeCheck => "pde_check",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub run: RunKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default)]
    pub reactor: ReactorSection,
    #[serde(default)]
    pub constraint: ConstraintSection,
    #[serde(default)]
    pub control: ControlDef,
    #[serde(default)]
    pub flow: FlowDef,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub trial: TrialSection,
    #[serde(default)]
    pub pde: PdeSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_seed() -> u64 {
    20080601
}

fn default_threads() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReactorSection {
    pub order: f64,
    pub rate_constant: f64,
    pub length: f64,
    pub flow_rate: f64,
}

impl Default for ReactorSection {
    fn default() -> Self {
        let p = ReactorParams::reference();
        Self {
            order: p.order,
            rate_constant: p.rate_constant,
            length: p.length,
            flow_rate: p.flow_rate,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstraintSection {
    pub period: f64,
    pub c_mean: f64,
    pub c_min: f64,
    pub c_max: f64,
    /// Flow-rate bounds; `None` values fall back to the reference block.
    pub v_mean: Option<f64>,
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
}

impl Default for ConstraintSection {
    fn default() -> Self {
        let s = IsoperimetricSpec::reference();
        Self {
            period: s.period,
            c_mean: s.c_mean,
            c_min: s.c_min,
            c_max: s.c_max,
            v_mean: None,
            v_min: None,
            v_max: None,
        }
    }
}

/// Inlet concentration control.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlDef {
    /// `C̄` unless `value` is given.
    Steady { value: Option<f64> },
    /// `mean + amplitude·sin(2πt/τ + phase)`; defaults to the widest
    /// admissible amplitude around `C̄`.
    Sinusoid {
        mean: Option<f64>,
        amplitude: Option<f64>,
        #[serde(default)]
        phase: f64,
    },
    Piecewise {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Optimal single-input bang control with `cycles` sub-periods.
    Bang {
        #[serde(default = "one")]
        cycles: usize,
    },
    /// Optimal two-input pair; overrides `[flow]`.
    BangPair {
        #[serde(default = "one")]
        cycles: usize,
    },
}

fn one() -> usize {
    1
}

impl Default for ControlDef {
    fn default() -> Self {
        ControlDef::Steady { value: None }
    }
}

/// Flow-rate control. `constant` uses `reactor.flow_rate` throughout.
#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowDef {
    #[default]
    Constant,
    Steady {
        value: f64,
    },
    Sinusoid {
        mean: f64,
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    Piecewise {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Number of interior grid points in `(0, 1)` when `alphas` is absent.
    pub points: usize,
    pub alphas: Option<Vec<f64>>,
    pub beta_points: usize,
    pub betas: Option<Vec<f64>>,
    /// Largest allowed `|closed form - constructive|` in `--check` mode.
    pub tolerance: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            points: 50,
            alphas: None,
            beta_points: 20,
            betas: None,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrialSection {
    pub samples: usize,
    pub pieces: usize,
    pub mode: TrialMode,
    /// Largest allowed cost spread for `n = 1` in `--check` mode.
    pub tolerance: f64,
}

impl Default for TrialSection {
    fn default() -> Self {
        Self {
            samples: 200,
            pieces: 11,
            mode: TrialMode::Single,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdeSection {
    pub cells: Vec<usize>,
    pub cfl: f64,
    pub warmup_periods: usize,
    /// Write the space-time field of the finest grid every this many steps.
    pub dump_every: Option<usize>,
    /// Relative cost tolerance at the finest grid in `--check` mode.
    pub tolerance: f64,
}

impl Default for PdeSection {
    fn default() -> Self {
        Self {
            cells: vec![64, 128, 256, 512],
            cfl: 0.9,
            warmup_periods: 3,
            dump_every: None,
            tolerance: 5e-3,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub csv: bool,
    pub json: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("pfr-out"),
            csv: true,
            json: true,
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    /// Parse error with the offending location already rendered.
    Parse(String),
    /// Semantically invalid value for a named field.
    Field {
        field: String,
        reason: String,
    },
    /// Well-formed configuration whose constraints cannot be satisfied.
    Infeasible(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "cannot read config: {m}"),
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Field { field, reason } => write!(f, "config field `{field}`: {reason}"),
            ConfigError::Infeasible(m) => write!(f, "infeasible specification: {m}"),
        }
    }
}

fn field(name: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: name.to_string(),
        reason: reason.into(),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.check_fields()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn check_fields(&self) -> Result<(), ConfigError> {
        if self.threads == 0 {
            return Err(field("threads", "must be at least 1"));
        }
        let s = &self.sweep;
        if s.alphas.is_none() && s.points == 0 {
            return Err(field("sweep.points", "must be at least 1"));
        }
        if s.betas.is_none() && s.beta_points == 0 {
            return Err(field("sweep.beta_points", "must be at least 1"));
        }
        if self.trial.samples == 0 {
            return Err(field("trial.samples", "must be at least 1"));
        }
        if self.trial.pieces == 0 {
            return Err(field("trial.pieces", "must be at least 1"));
        }
        if self.pde.cells.is_empty() {
            return Err(field("pde.cells", "needs at least one grid"));
        }
        if let Some(&bad) = self.pde.cells.iter().find(|&&n| n < 16) {
            return Err(field(
                "pde.cells",
                format!("{bad} cells is below the minimum of 16"),
            ));
        }
        if !(self.pde.cfl > 0.0 && self.pde.cfl <= 1.0) {
            return Err(field("pde.cfl", "must lie in (0, 1]"));
        }
        if self.pde.warmup_periods == 0 {
            return Err(field("pde.warmup_periods", "must be at least 1"));
        }
        if let ControlDef::Bang { cycles: 0 } | ControlDef::BangPair { cycles: 0 } = self.control {
            return Err(field("control.cycles", "must be at least 1"));
        }
        self.params()?;
        Ok(())
    }

    pub fn params(&self) -> Result<ReactorParams, ConfigError> {
        let r = &self.reactor;
        ReactorParams::new(r.order, r.rate_constant, r.length, r.flow_rate).map_err(|e| match e {
            pfr_core::ModelError::BadParameter { name, .. } => {
                field(&format!("reactor.{name}"), e.to_string())
            }
            other => field("reactor", other.to_string()),
        })
    }

    /// Validated constraint; any violation of its internal consistency is
    /// reported as infeasible.
    pub fn spec(&self) -> Result<IsoperimetricSpec, ConfigError> {
        let c = &self.constraint;
        let reference = IsoperimetricSpec::reference()
            .flow
            .expect("reference flow bounds");
        let spec = IsoperimetricSpec {
            period: c.period,
            c_mean: c.c_mean,
            c_min: c.c_min,
            c_max: c.c_max,
            flow: Some(FlowConstraint {
                v_mean: c.v_mean.unwrap_or(reference.v_mean),
                v_min: c.v_min.unwrap_or(reference.v_min),
                v_max: c.v_max.unwrap_or(reference.v_max),
            }),
        };
        spec.validate()
            .map_err(|e| ConfigError::Infeasible(e.to_string()))?;
        Ok(spec)
    }

    /// `PFR_THREADS` wins over the `threads` key.
    pub fn thread_count(&self) -> Result<usize, ConfigError> {
        match std::env::var("PFR_THREADS") {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(field(
                    "PFR_THREADS",
                    format!("`{v}` is not a positive integer"),
                )),
            },
            Err(_) => Ok(self.threads),
        }
    }
}
