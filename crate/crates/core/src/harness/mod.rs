//! Reproducible experiments with CSV / JSON artifacts.
//!
//! Every experiment reads an [`ExperimentConfig`], returns a [`RunOutput`]
//! whose report carries named pass/fail checks, and can be written to a run
//! directory containing `summary.json` plus whichever of `density.csv`,
//! `corr.csv` and `dual_stats.csv` apply.

mod experiments;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use experiments::{
    run_corr, run_dual_stats, run_duality, run_engines_equal, run_gw_alpha, run_hydro, run_hydrostatic, weak_statistic,
};

use crate::dual::{write_dual_stats_csv, DualStatsRow};
use crate::error::{Error, Result};
use crate::forward::{Engine, InitialProfile};
use crate::gw::ProbMode;
use crate::model::ModelParams;

pub const VERSION: &str = concat!("ssep-core ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Hydro,
    Hydrostatic,
    Corr,
    Duality,
    GwAlpha,
    DualStats,
    EnginesEqual,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Hydro,
        ExperimentKind::Hydrostatic,
        ExperimentKind::Corr,
        ExperimentKind::Duality,
        ExperimentKind::GwAlpha,
        ExperimentKind::DualStats,
        ExperimentKind::EnginesEqual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Hydro => "hydro",
            ExperimentKind::Hydrostatic => "hydrostatic",
            ExperimentKind::Corr => "corr",
            ExperimentKind::Duality => "duality",
            ExperimentKind::GwAlpha => "gw-alpha",
            ExperimentKind::DualStats => "dual-stats",
            ExperimentKind::EnginesEqual => "engines-equal",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Tolerances used by the pass/fail checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Bands {
    /// Sup distance of the empirical density to the continuum solution.
    pub sup: f64,
    /// Weak-statistic distance.
    pub weak: f64,
    /// L² distance of the stationary profile.
    pub l2: f64,
    /// Margin added to the correlation noise band.
    pub corr_margin: f64,
    /// Multiple of the (joint) standard error allowed in statistical checks.
    pub z: f64,
    /// Lower bound on the fraction of first boundary events that are deaths.
    pub death_first_min: Option<f64>,
}

impl Default for Bands {
    fn default() -> Self {
        Bands {
            sup: 0.03,
            weak: 0.01,
            l2: 0.02,
            corr_margin: 0.01,
            z: 4.0,
            death_first_min: None,
        }
    }
}

fn default_profile() -> InitialProfile {
    InitialProfile::constant(0.5)
}

fn default_samples() -> usize {
    1000
}

fn default_delta() -> f64 {
    0.2
}

fn default_burn_in() -> f64 {
    2.0
}

fn default_t_end() -> f64 {
    6.0
}

fn default_spacing() -> f64 {
    0.1
}

/// JSON experiment description. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    /// Inline parameters; alternatively `params_file`.
    #[serde(default)]
    pub params: Option<ModelParams>,
    /// Parameter file, relative paths resolved against the config file.
    #[serde(default)]
    pub params_file: Option<PathBuf>,
    #[serde(default = "default_profile")]
    pub profile: InitialProfile,
    /// Observation times (ascending); the first one is used by
    /// single-time experiments.
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub engine: Engine,
    /// Lattice sizes for scaling experiments; empty means just `N`.
    #[serde(default)]
    pub n_values: Vec<usize>,
    /// Starting site of the dual process (dual-stats).
    #[serde(default)]
    pub x: Option<usize>,
    /// Horizon of the dual process (dual-stats).
    #[serde(default)]
    pub t_horizon: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    #[serde(default)]
    pub gw_mode: Option<ProbMode>,
    #[serde(default)]
    pub bands: Bands,
}

impl ExperimentConfig {
    /// Config with inline parameters and every other field at its default.
    pub fn new(params: ModelParams) -> Self {
        ExperimentConfig {
            experiment: None,
            params: Some(params),
            params_file: None,
            profile: default_profile(),
            times: Vec::new(),
            n_samples: default_samples(),
            seed: 0,
            out: None,
            engine: Engine::default(),
            n_values: Vec::new(),
            x: None,
            t_horizon: None,
            delta: default_delta(),
            burn_in: default_burn_in(),
            t_end: default_t_end(),
            spacing: default_spacing(),
            gw_mode: None,
            bands: Bands::default(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read a config file and resolve `params_file` next to it.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json_str(&text)?;
        if let (None, Some(file)) = (&cfg.params, &cfg.params_file) {
            let full = match path.parent() {
                Some(dir) if file.is_relative() => dir.join(file),
                _ => file.clone(),
            };
            let p = ModelParams::load(&full).map_err(|e| Error::Config(format!("{}: {e}", full.display())))?;
            cfg.params = Some(p);
        }
        Ok(cfg)
    }

    pub fn params(&self) -> Result<ModelParams> {
        match (&self.params, &self.params_file) {
            (Some(p), _) => {
                p.validate()?;
                Ok(*p)
            }
            (None, Some(f)) => ModelParams::load(f).map_err(|e| Error::Config(format!("{}: {e}", f.display()))),
            (None, None) => Err(Error::Config("config gives neither params nor params_file".into())),
        }
    }

    pub(crate) fn first_time(&self, default: f64) -> f64 {
        self.times.first().copied().unwrap_or(default)
    }

    pub(crate) fn sizes(&self, n: usize) -> Vec<usize> {
        if self.n_values.is_empty() {
            vec![n]
        } else {
            self.n_values.clone()
        }
    }
}

/// One named pass/fail check: `pass` iff `value <= bound` unless stated
/// otherwise in `name`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            pass: value <= bound,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            pass: value >= bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub version: String,
    pub seed: u64,
    pub n_samples: usize,
    pub params: ModelParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h1_warning: Option<String>,
    pub checks: Vec<Check>,
    /// Experiment-specific results.
    pub data: serde_json::Value,
}

impl Report {
    pub(crate) fn new(kind: ExperimentKind, cfg: &ExperimentConfig, params: &ModelParams) -> Self {
        Report {
            experiment: kind,
            version: VERSION.into(),
            seed: cfg.seed,
            n_samples: cfg.n_samples,
            params: *params,
            h1_warning: params.h1_warning(),
            checks: Vec::new(),
            data: serde_json::Value::Null,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub t: f64,
    pub x: usize,
    pub u: f64,
    pub empirical: Option<f64>,
    pub stderr: Option<f64>,
    pub discrete: Option<f64>,
    pub continuum: Option<f64>,
    pub stationary: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrRow {
    pub n: usize,
    pub t: f64,
    pub x: usize,
    pub y: usize,
    pub empirical: f64,
    pub stderr: f64,
    pub pde: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: Report,
    pub density: Vec<DensityRow>,
    pub corr: Vec<CorrRow>,
    pub dual_stats: Vec<DualStatsRow>,
}

impl RunOutput {
    pub(crate) fn new(report: Report) -> Self {
        RunOutput {
            report,
            density: Vec::new(),
            corr: Vec::new(),
            dual_stats: Vec::new(),
        }
    }

    fn header(&self) -> serde_json::Value {
        serde_json::json!({
            "experiment": self.report.experiment,
            "params": self.report.params,
            "seed": self.report.seed,
            "n_samples": self.report.n_samples,
            "version": self.report.version,
        })
    }

    /// Write `summary.json` and the non-empty CSV tables into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let header = self.header();
        if !self.density.is_empty() {
            write_csv(dir.join("density.csv"), &header, &self.density)?;
        }
        if !self.corr.is_empty() {
            write_csv(dir.join("corr.csv"), &header, &self.corr)?;
        }
        if !self.dual_stats.is_empty() {
            let f = std::io::BufWriter::new(std::fs::File::create(dir.join("dual_stats.csv"))?);
            write_dual_stats_csv(f, &header, &self.dual_stats)?;
        }
        let mut f = std::fs::File::create(dir.join("summary.json"))?;
        serde_json::to_writer_pretty(&mut f, &self.report)?;
        writeln!(f)?;
        Ok(())
    }
}

fn write_csv<T: Serialize>(path: PathBuf, header: &serde_json::Value, rows: &[T]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# {header}")?;
    let mut w = csv::Writer::from_writer(f);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Run the experiment named in `kind`.
pub fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<RunOutput> {
    match kind {
        ExperimentKind::Hydro => run_hydro(cfg),
        ExperimentKind::Hydrostatic => run_hydrostatic(cfg),
        ExperimentKind::Corr => run_corr(cfg),
        ExperimentKind::Duality => run_duality(cfg),
        ExperimentKind::GwAlpha => run_gw_alpha(cfg),
        ExperimentKind::DualStats => run_dual_stats(cfg),
        ExperimentKind::EnginesEqual => run_engines_equal(cfg),
    }
}
