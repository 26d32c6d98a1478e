//! Experiment configuration.
//!
//! A TOML file with a `[general]` section and one section per experiment
//! (`[table1]`, `[table2]`, `[sweep]`, `[decay]`). Every key is optional;
//! missing keys fall back to the defaults of the published experiments, and
//! command-line flags override both.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{HarnessError, Result};

/// Environment variable naming the config file when `--config` is absent.
pub const CONFIG_ENV: &str = "FRACSHIFT_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Corrected,
    Standard,
}

impl Scheme {
    pub fn corrected(self) -> bool {
        self == Scheme::Corrected
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Corrected => "corrected",
            Scheme::Standard => "standard",
        })
    }
}

impl FromStr for Scheme {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrected" => Ok(Scheme::Corrected),
            "standard" => Ok(Scheme::Standard),
            other => Err(HarnessError::Config(format!("unknown scheme {other:?}"))),
        }
    }
}

/// What the computed solution at `t_eval` is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// Closed-form solution of the spatially discrete problem (smooth data only).
    Semidiscrete,
    /// Closed-form solution of the continuous problem.
    Exact,
    /// Corrected scheme at `tau_ref`, same mesh and θ.
    Corrected,
    /// The scheme under test itself at `tau_ref`.
    SameScheme,
}

impl FromStr for Reference {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semidiscrete" => Ok(Reference::Semidiscrete),
            "exact" => Ok(Reference::Exact),
            "corrected" => Ok(Reference::Corrected),
            "same-scheme" => Ok(Reference::SameScheme),
            other => Err(HarnessError::Config(format!("unknown reference {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Table1,
    Table2,
    AlphaSweep,
    WeightDecay,
    Custom,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralSection {
    pub m: Option<usize>,
    pub threads: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub cells: Option<Vec<(f64, f64)>>,
    pub alphas: Option<Vec<f64>>,
    pub thetas: Option<Vec<f64>>,
    pub taus: Option<Vec<f64>>,
    pub tau_ref: Option<f64>,
    pub t_eval: Option<f64>,
    pub m: Option<usize>,
    pub schemes: Option<Vec<Scheme>>,
    pub reference: Option<Reference>,
    pub output: Option<PathBuf>,
    pub len: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub general: GeneralSection,
    pub table1: Option<ExperimentSection>,
    pub table2: Option<ExperimentSection>,
    pub sweep: Option<ExperimentSection>,
    pub decay: Option<ExperimentSection>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| HarnessError::ConfigFile { path: path.to_owned(), source })?;
        Self::parse(&text)
    }

    fn section(&self, kind: ExperimentKind) -> ExperimentSection {
        match kind {
            ExperimentKind::Table1 => self.table1.clone(),
            ExperimentKind::Table2 => self.table2.clone(),
            ExperimentKind::AlphaSweep => self.sweep.clone(),
            ExperimentKind::WeightDecay => self.decay.clone(),
            ExperimentKind::Custom => None,
        }
        .unwrap_or_default()
    }
}

/// Fully resolved settings for one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// (α, θ) pairs.
    pub cells: Vec<(f64, f64)>,
    /// θ values for the weight-decay dump.
    pub thetas: Vec<f64>,
    /// Step sizes, strictly decreasing.
    pub taus: Vec<f64>,
    pub tau_ref: f64,
    pub t_eval: f64,
    /// Final time of the problem; every τ must divide it.
    pub t_final: f64,
    pub m: usize,
    pub schemes: Vec<Scheme>,
    pub reference: Reference,
    pub output: PathBuf,
    /// Number of shift weights dumped per θ (indices 0..len).
    pub decay_len: usize,
    pub threads: usize,
}

pub const TABLE1_CELLS: [(f64, f64); 12] = [
    (0.1, -0.9),
    (0.1, -0.5),
    (0.1, 0.5),
    (0.1, 0.9),
    (0.5, -0.8),
    (0.5, -0.5),
    (0.5, 0.0),
    (0.5, 0.6),
    (0.9, -0.5),
    (0.9, -0.2),
    (0.9, 0.3),
    (0.9, 0.6),
];

pub const TABLE2_CELLS: [(f64, f64); 8] = [
    (0.2, -0.5),
    (0.2, -0.3),
    (0.2, 0.0),
    (0.2, 0.9),
    (0.8, -0.5),
    (0.8, 0.1),
    (0.8, 0.5),
    (0.8, 0.7),
];

pub const SWEEP_ALPHAS: [f64; 7] = [0.5, 0.2, 0.1, 0.05, 0.01, 0.005, 0.001];
pub const SWEEP_THETAS: [f64; 4] = [-0.5, 0.1, 0.4, 0.8];
pub const DECAY_THETAS: [f64; 5] = [-0.9, -0.5, 0.0, 0.5, 0.9];

/// τ = 2^{-5}, …, 2^{-8}.
pub fn default_taus() -> Vec<f64> {
    (5..=8).map(|k| 2f64.powi(-k)).collect()
}

impl ExperimentConfig {
    /// Defaults for `kind`, overlaid with the file's `[general]` and
    /// experiment section.
    pub fn resolve(kind: ExperimentKind, file: &FileConfig) -> Result<Self> {
        let sec = file.section(kind);
        let general = &file.general;
        let threads = general.threads.unwrap_or(0);
        let m = sec.m.or(general.m).unwrap_or(1023);
        let dir = general.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));

        let (cells, taus, schemes, reference, file_name) = match kind {
            ExperimentKind::Table1 => (
                TABLE1_CELLS.to_vec(),
                default_taus(),
                vec![Scheme::Corrected, Scheme::Standard],
                Reference::Semidiscrete,
                "table1.csv",
            ),
            ExperimentKind::Table2 => (
                TABLE2_CELLS.to_vec(),
                default_taus(),
                vec![Scheme::Corrected, Scheme::Standard],
                Reference::Corrected,
                "table2.csv",
            ),
            ExperimentKind::AlphaSweep => {
                let alphas = sec.alphas.clone().unwrap_or_else(|| SWEEP_ALPHAS.to_vec());
                let thetas = sec.thetas.clone().unwrap_or_else(|| SWEEP_THETAS.to_vec());
                let cells = thetas.iter().flat_map(|&t| alphas.iter().map(move |&a| (a, t))).collect();
                (cells, vec![2f64.powi(-7)], vec![Scheme::Corrected], Reference::Exact, "sweep.csv")
            }
            ExperimentKind::WeightDecay | ExperimentKind::Custom => {
                (Vec::new(), Vec::new(), Vec::new(), Reference::Exact, "decay.csv")
            }
        };

        let cells = match (&sec.cells, kind) {
            (Some(c), _) => c.clone(),
            (None, ExperimentKind::Table1 | ExperimentKind::Table2) => match (&sec.alphas, &sec.thetas) {
                (Some(a), Some(t)) => a.iter().flat_map(|&a| t.iter().map(move |&t| (a, t))).collect(),
                _ => cells,
            },
            _ => cells,
        };

        let cfg = Self {
            kind,
            cells,
            thetas: sec.thetas.clone().unwrap_or_else(|| DECAY_THETAS.to_vec()),
            taus: sec.taus.clone().unwrap_or(taus),
            tau_ref: sec.tau_ref.unwrap_or(2f64.powi(-11)),
            t_eval: sec.t_eval.unwrap_or(0.5),
            t_final: 1.0,
            m,
            schemes: sec.schemes.clone().unwrap_or(schemes),
            reference: sec.reference.unwrap_or(reference),
            output: dir.join(sec.output.clone().unwrap_or_else(|| PathBuf::from(file_name))),
            decay_len: sec.len.unwrap_or(61),
            threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.kind == ExperimentKind::WeightDecay {
            if self.thetas.iter().any(|t| !t.is_finite()) {
                return bad("non-finite θ".into());
            }
            return Ok(());
        }
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        for &(a, t) in &self.cells {
            if !(a > 0.0 && a < 1.0) {
                return bad(format!("α = {a} outside (0, 1)"));
            }
            if !(t > -1.0 && t < 1.0) {
                return bad(format!("θ = {t} outside (−1, 1)"));
            }
        }
        if self.taus.is_empty() {
            return bad("no step sizes".into());
        }
        if self.taus.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("step sizes must be strictly decreasing".into());
        }
        if self.schemes.is_empty() {
            return bad("no schemes selected".into());
        }
        let mut all = self.taus.clone();
        if matches!(self.reference, Reference::Corrected | Reference::SameScheme) {
            all.push(self.tau_ref);
            if !(self.tau_ref < *self.taus.last().unwrap()) {
                return bad("tau_ref must be finer than every τ".into());
            }
        }
        for tau in all {
            if !(tau > 0.0) {
                return bad(format!("τ = {tau} must be positive"));
            }
            for (what, t) in [("t_eval", self.t_eval), ("T", self.t_final)] {
                if !on_grid(t, tau) {
                    return bad(format!("{what} = {t} is not a multiple of τ = {tau}"));
                }
            }
        }
        if self.t_eval > self.t_final {
            return bad("t_eval beyond T".into());
        }
        Ok(())
    }

    /// Number of steps of size τ to reach `t_eval`.
    pub fn steps_to_eval(&self, tau: f64) -> usize {
        (self.t_eval / tau).round() as usize
    }
}

fn on_grid(t: f64, tau: f64) -> bool {
    let n = (t / tau).round();
    n >= 1.0 && (n * tau - t).abs() <= 1e-12 * t.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_grids() {
        let file = FileConfig::default();
        let t1 = ExperimentConfig::resolve(ExperimentKind::Table1, &file).unwrap();
        assert_eq!(t1.cells.len(), 12);
        assert_eq!(t1.taus, vec![1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0]);
        assert_eq!(t1.m, 1023);
        assert_eq!(t1.reference, Reference::Semidiscrete);
        assert_eq!(t1.steps_to_eval(1.0 / 256.0), 128);
        let t2 = ExperimentConfig::resolve(ExperimentKind::Table2, &file).unwrap();
        assert_eq!(t2.cells.len(), 8);
        assert_eq!(t2.tau_ref, 1.0 / 2048.0);
        let sw = ExperimentConfig::resolve(ExperimentKind::AlphaSweep, &file).unwrap();
        assert_eq!(sw.cells.len(), 28);
        assert_eq!(sw.taus, vec![1.0 / 128.0]);
    }

    #[test]
    fn file_sections_override_defaults() {
        let text = r#"
            [general]
            m = 63
            output_dir = "out"

            [table1]
            cells = [[0.5, 0.0]]
            taus = [0.0625, 0.03125]
            reference = "exact"
            schemes = ["corrected"]
        "#;
        let file = FileConfig::parse(text).unwrap();
        let cfg = ExperimentConfig::resolve(ExperimentKind::Table1, &file).unwrap();
        assert_eq!(cfg.m, 63);
        assert_eq!(cfg.cells, vec![(0.5, 0.0)]);
        assert_eq!(cfg.reference, Reference::Exact);
        assert_eq!(cfg.schemes, vec![Scheme::Corrected]);
        assert_eq!(cfg.output, PathBuf::from("out/table1.csv"));
    }

    #[test]
    fn validation_rejects_bad_grids() {
        let parse = |s: &str| {
            let file = FileConfig::parse(s).unwrap();
            ExperimentConfig::resolve(ExperimentKind::Table1, &file)
        };
        assert!(parse("[table1]\ntaus = [0.01, 0.02]").is_err());
        assert!(parse("[table1]\ntaus = [0.3]").is_err());
        assert!(parse("[table1]\ncells = [[1.5, 0.0]]").is_err());
        assert!(parse("[table1]\ncells = [[0.5, -1.0]]").is_err());
        assert!(parse("[general]\nm = 0").is_err());
        assert!(FileConfig::parse("[table1]\nbogus = 1").is_err());
        assert!(matches!(parse("[table1]\ntaus = [0.3]"), Err(HarnessError::Config(_))));
    }
}
