use std::fmt;
use std::path::{Path as FsPath, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::params::ratio_str;
use crate::lattice::{parse_rational, LatticeParams, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Build,
    Balance,
    Measures,
    Geometry,
    Generator,
    Occupation,
    Tightness,
    Resurrection,
    Variance,
    Reversal,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Build,
        Experiment::Balance,
        Experiment::Measures,
        Experiment::Geometry,
        Experiment::Generator,
        Experiment::Occupation,
        Experiment::Tightness,
        Experiment::Resurrection,
        Experiment::Variance,
        Experiment::Reversal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Build => "build",
            Experiment::Balance => "balance",
            Experiment::Measures => "measures",
            Experiment::Geometry => "geometry",
            Experiment::Generator => "generator",
            Experiment::Occupation => "occupation",
            Experiment::Tightness => "tightness",
            Experiment::Resurrection => "resurrection",
            Experiment::Variance => "variance",
            Experiment::Reversal => "reversal",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| Error::Usage(format!("unknown experiment {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            o => Err(Error::Usage(format!("unknown format {o:?}"))),
        }
    }
}

/// Everything an experiment run depends on. Two runs with equal configs
/// produce identical reports apart from timing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub k_min: u32,
    pub k_max: u32,
    #[serde(with = "ratio_str")]
    pub epsilon: Rational,
    #[serde(with = "ratio_str")]
    pub radius: Rational,
    #[serde(with = "ratio_str")]
    pub rod_length: Rational,
    pub paths: u64,
    pub t_max: f64,
    /// Window lengths for the modulus.
    pub theta: Vec<f64>,
    /// Levels for the modulus.
    pub delta: Vec<f64>,
    /// Observation times.
    pub times: Vec<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

impl ExperimentConfig {
    /// Defaults for `experiment`, matching the acceptance settings.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            k_min: 3,
            k_max: 6,
            epsilon: int(1),
            radius: int(20),
            rod_length: int(20),
            paths: 1,
            t_max: 1.0,
            theta: Vec::new(),
            delta: Vec::new(),
            times: Vec::new(),
            seed: 20_240_901,
            out: None,
            format: Format::Json,
        };
        match experiment {
            Experiment::Build => c.k_max = 8,
            Experiment::Balance | Experiment::Measures => {}
            Experiment::Geometry => {}
            Experiment::Generator => c.k_max = 7,
            Experiment::Reversal => {
                c.k_min = 4;
                c.k_max = 4;
                c.paths = 100_000;
                c.times = vec![0.25, 0.5, 0.75, 1.0];
            }
            Experiment::Occupation => {
                c.k_min = 4;
                c.k_max = 4;
                c.paths = 10_000;
                c.t_max = 50.0;
            }
            Experiment::Resurrection => {
                c.k_min = 4;
                c.k_max = 4;
                c.paths = 100_000;
                c.t_max = 2.0;
                c.times = vec![0.5, 1.0, 2.0];
            }
            Experiment::Variance => {
                c.k_min = 5;
                c.k_max = 5;
                c.paths = 10_000;
                c.t_max = 0.5;
            }
            Experiment::Tightness => {
                c.epsilon = Rational::new(5, 8);
                c.radius = int(11);
                c.rod_length = int(11);
                c.paths = 100_000;
                c.t_max = 1.0;
                c.theta = vec![0.1];
                c.delta = vec![0.5];
                c.times = vec![0.25];
            }
        }
        c
    }

    pub fn ks(&self) -> std::ops::RangeInclusive<u32> {
        self.k_min..=self.k_max
    }

    pub fn params(&self, k: u32) -> Result<LatticeParams> {
        LatticeParams::new(k, self.epsilon, self.radius, self.rod_length)
    }

    /// Applies one `key = value` setting. Keys use the long CLI names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |what: &str| Error::Usage(format!("bad value {value:?} for {what}"));
        match key.trim() {
            "experiment" => self.experiment = value.parse()?,
            "k" => {
                let (a, b) = match value.split_once("..") {
                    Some((a, b)) => (a, b.trim_start_matches('=')),
                    None => (value, value),
                };
                self.k_min = a.trim().parse().map_err(|_| bad("k"))?;
                self.k_max = b.trim().parse().map_err(|_| bad("k"))?;
            }
            "epsilon" => self.epsilon = parse_rational(value)?,
            "radius" => self.radius = parse_rational(value)?,
            "rod-length" => self.rod_length = parse_rational(value)?,
            "paths" => self.paths = value.parse().map_err(|_| bad("paths"))?,
            "t-max" => self.t_max = value.parse().map_err(|_| bad("t-max"))?,
            "theta" => self.theta = parse_list(value).ok_or_else(|| bad("theta"))?,
            "delta" => self.delta = parse_list(value).ok_or_else(|| bad("delta"))?,
            "times" => self.times = parse_list(value).ok_or_else(|| bad("times"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            other => return Err(Error::Usage(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a key-value file: one `key = value` per line, `#` comments.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &FsPath) -> Result<()> {
        self.apply_text(&std::fs::read_to_string(path)?)
    }

    /// Checks ranges, then the lattice assumptions at every `k` in range.
    pub fn validate(&self) -> Result<()> {
        if self.k_min > self.k_max {
            return Err(Error::Usage(format!("empty k range {}..{}", self.k_min, self.k_max)));
        }
        if self.paths == 0 {
            return Err(Error::Usage("paths must be at least 1".into()));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Usage(format!("t-max must be positive, got {}", self.t_max)));
        }
        if self.theta.iter().chain(&self.delta).chain(&self.times).any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::Usage("theta, delta and times must be positive".into()));
        }
        if self.times.iter().any(|&t| t > self.t_max) {
            return Err(Error::Usage("observation times exceed t-max".into()));
        }
        if self.theta.iter().any(|&th| th >= self.t_max) {
            return Err(Error::Usage("theta must be below t-max".into()));
        }
        for k in self.ks() {
            self.params(k)?;
        }
        Ok(())
    }
}

fn parse_list(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}
