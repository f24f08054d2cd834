//! Flat `key = value` run configuration. Unknown keys are errors; `#`
//! starts a comment. Relative paths resolve against the config file's
//! directory.

use std::path::{Path, PathBuf};

use crate::energy::EnergyKind;
use crate::error::{Error, Result};
use crate::optimize::OptimizerConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub cones: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub energy: EnergyKind,
    /// Exponent for `energy = log_length_p`.
    pub p: u32,
    pub optimizer: OptimizerConfig,
    /// Metric read by `stats` and used as the target by `map-sample`.
    pub lambda: Option<PathBuf>,
    /// Source metric of `map-sample`; the input embedding when absent.
    pub source_lambda: Option<PathBuf>,
    pub metrics: Vec<PathBuf>,
    pub weights: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
    pub histogram_bins: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            cones: None,
            output: None,
            energy: EnergyKind::LogLength2,
            p: 4,
            optimizer: OptimizerConfig::default(),
            lambda: None,
            source_lambda: None,
            metrics: Vec::new(),
            weights: Vec::new(),
            seed: 0,
            samples: 1000,
            histogram_bins: 20,
        }
    }
}

pub const KEYS: &[&str] = &[
    "input",
    "cones",
    "output",
    "energy",
    "p",
    "constraint_tolerance",
    "gradient_tolerance",
    "max_iterations",
    "armijo",
    "backtrack",
    "max_halvings",
    "constraint_cap",
    "continuation_steps",
    "projection_max_iterations",
    "lambda",
    "source_lambda",
    "metrics",
    "weights",
    "seed",
    "samples",
    "histogram_bins",
];

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidInput(format!("{key}: cannot parse {value:?}")))
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut c = Self::default();
        for (k, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let wrap = |e: Error| Error::Parse {
                line: k + 1,
                message: e.to_string(),
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| wrap(Error::InvalidInput("expected `key = value`".into())))?;
            c.set(key.trim(), value.trim(), base).map_err(wrap)?;
        }
        Ok(c)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&std::fs::read_to_string(path)?, base)
    }

    /// Applies one `key=value` assignment, resolving paths against `base`.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let path = |v: &str| base.join(v);
        let ls = &mut self.optimizer.line_search;
        match key {
            "input" => self.input = Some(path(value)),
            "cones" => self.cones = Some(path(value)),
            "output" => self.output = Some(path(value)),
            "lambda" => self.lambda = Some(path(value)),
            "source_lambda" => self.source_lambda = Some(path(value)),
            "metrics" => self.metrics = list(value).map(path).collect(),
            "weights" => self.weights = list(value).map(|w| num(key, w)).collect::<Result<_>>()?,
            "energy" => {
                self.energy = match value {
                    "log_length" => EnergyKind::LogLength2,
                    "log_length_p" => EnergyKind::LogLengthP(self.p),
                    "log_scale" => EnergyKind::LogScale,
                    "sdq" => EnergyKind::QuadraticSymmetricDirichlet,
                    _ => return Err(Error::InvalidInput(format!("unknown energy {value:?}"))),
                }
            }
            "p" => {
                self.p = num(key, value)?;
                if let EnergyKind::LogLengthP(_) = self.energy {
                    self.energy = EnergyKind::LogLengthP(self.p);
                }
            }
            "constraint_tolerance" => self.optimizer.constraint_tolerance = num(key, value)?,
            "gradient_tolerance" => self.optimizer.gradient_tolerance = num(key, value)?,
            "max_iterations" => self.optimizer.max_iterations = num(key, value)?,
            "armijo" => ls.armijo = num(key, value)?,
            "backtrack" => ls.backtrack = num(key, value)?,
            "max_halvings" => ls.max_halvings = num(key, value)?,
            "constraint_cap" => ls.constraint_cap = num(key, value)?,
            "continuation_steps" => self.optimizer.continuation_steps = num(key, value)?,
            "projection_max_iterations" => {
                self.optimizer.projection_max_iterations = num(key, value)?
            }
            "seed" => self.seed = num(key, value)?,
            "samples" => self.samples = num(key, value)?,
            "histogram_bins" => self.histogram_bins = num(key, value)?,
            _ => return Err(Error::InvalidInput(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a `key=value` override from the command line.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| {
            Error::InvalidInput(format!("override {assignment:?} is not key=value"))
        })?;
        self.set(k.trim(), v.trim(), Path::new(""))
    }

    pub fn require<'a>(&self, what: &str, p: &'a Option<PathBuf>) -> Result<&'a Path> {
        p.as_deref()
            .ok_or_else(|| Error::InvalidInput(format!("missing required key `{what}`")))
    }
}
