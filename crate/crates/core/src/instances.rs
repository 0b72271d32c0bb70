//! Seeded random instances and JSON persistence.
//!
//! Generated instances follow fixed documented distributions. They are
//! reproducible from `(spec, seed)` but are not any published benchmark set.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Family, InstanceFile, ModelError, MoilpInstance};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Model {
        path: PathBuf,
        #[source]
        source: ModelError,
    },
    #[error("invalid generator spec: {0}")]
    Spec(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub family: Family,
    pub p: usize,
    /// Items (knapsack). Ignored for GAP.
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub machines: usize,
    #[serde(default)]
    pub jobs: usize,
    pub seed: u64,
    /// Inclusive range for profits/costs and weights/resources.
    pub value_range: (i64, i64),
    /// Knapsack: fraction of total weight. GAP: fraction of a machine's
    /// total resource demand divided by the machine count.
    pub capacity_ratio: f64,
}

impl GeneratorSpec {
    pub fn knapsack(p: usize, n: usize, seed: u64) -> Self {
        GeneratorSpec {
            family: Family::Knapsack,
            p,
            n,
            machines: 0,
            jobs: 0,
            seed,
            value_range: (1, 100),
            capacity_ratio: 0.5,
        }
    }

    pub fn gap(p: usize, machines: usize, jobs: usize, seed: u64) -> Self {
        GeneratorSpec {
            family: Family::Gap,
            p,
            n: 0,
            machines,
            jobs,
            seed,
            value_range: (1, 20),
            capacity_ratio: 0.8,
        }
    }

    /// Number of decision variables of the generated instance.
    pub fn num_vars(&self) -> usize {
        match self.family {
            Family::Gap => self.machines * self.jobs,
            _ => self.n,
        }
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let bad = |m: &str| Err(InstanceError::Spec(m.to_string()));
        if !(2..=3).contains(&self.p) {
            return bad("p must be 2 or 3");
        }
        let (lo, hi) = self.value_range;
        if lo < 1 || lo > hi {
            return bad("value range must be non-empty and positive");
        }
        if !(self.capacity_ratio > 0.0) {
            return bad("capacity ratio must be positive");
        }
        match self.family {
            Family::Knapsack if self.n == 0 => bad("knapsack needs n >= 1"),
            Family::Gap if self.machines < 2 || self.jobs < 2 => bad("gap needs at least 2 machines and 2 jobs"),
            Family::Generic => bad("only knapsack and gap can be generated"),
            _ => Ok(()),
        }
    }

    /// `<family>/p<p>_n<n>_s<seed>.json`
    pub fn relative_path(&self) -> PathBuf {
        Path::new(self.family.as_str()).join(format!("p{}_n{}_s{}.json", self.p, self.num_vars(), self.seed))
    }
}

fn ceil_ratio(ratio: f64, total: i64) -> i64 {
    (ratio * total as f64 - 1e-9).ceil().max(1.0) as i64
}

/// Draws an instance file from `spec`; identical specs give identical files.
pub fn generate(spec: &GeneratorSpec) -> Result<InstanceFile, InstanceError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = spec.value_range;
    let mut draw = |len: usize| -> Vec<i64> { (0..len).map(|_| rng.gen_range(lo..=hi)).collect() };
    Ok(match spec.family {
        Family::Knapsack => {
            let n = spec.n;
            let weights = draw(n);
            let profits: Vec<Vec<i64>> = (0..spec.p).map(|_| draw(n)).collect();
            let capacity = ceil_ratio(spec.capacity_ratio, weights.iter().sum());
            InstanceFile::Knapsack {
                p: spec.p,
                n,
                capacity,
                weights,
                profits,
            }
        }
        Family::Gap => {
            let (m, j) = (spec.machines, spec.jobs);
            let costs: Vec<Vec<Vec<i64>>> = (0..spec.p).map(|_| (0..m).map(|_| draw(j)).collect()).collect();
            let resources: Vec<Vec<i64>> = (0..m).map(|_| draw(j)).collect();
            let capacities = resources
                .iter()
                .map(|row| ceil_ratio(spec.capacity_ratio / m as f64, row.iter().sum()))
                .collect();
            InstanceFile::Gap {
                p: spec.p,
                machines: m,
                jobs: j,
                capacities,
                resources,
                costs,
            }
        }
        Family::Generic => unreachable!("rejected by validate"),
    })
}

pub fn generate_instance(spec: &GeneratorSpec) -> Result<MoilpInstance, InstanceError> {
    generate(spec)?.into_instance().map_err(|source| InstanceError::Model {
        path: spec.relative_path(),
        source,
    })
}

pub fn parse_file(path: &Path, text: &str) -> Result<InstanceFile, InstanceError> {
    serde_json::from_str(text).map_err(|e| InstanceError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_file(path: &Path) -> Result<InstanceFile, InstanceError> {
    let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_file(path, &text)
}

pub fn load(path: &Path) -> Result<MoilpInstance, InstanceError> {
    load_file(path)?.into_instance().map_err(|source| InstanceError::Model {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save(file: &InstanceFile, path: &Path) -> Result<(), InstanceError> {
    let io = |source| InstanceError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut text = serde_json::to_string_pretty(file).expect("instance files always serialize");
    text.push('\n');
    fs::write(path, text).map_err(io)
}

/// Generates one file per seed under `dir`, returning the written paths.
pub fn generate_to_dir(base: &GeneratorSpec, seeds: &[u64], dir: &Path) -> Result<Vec<PathBuf>, InstanceError> {
    let mut written = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let spec = GeneratorSpec { seed, ..base.clone() };
        let path = dir.join(spec.relative_path());
        save(&generate(&spec)?, &path)?;
        written.push(path);
    }
    Ok(written)
}
