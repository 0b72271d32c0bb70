//! Batch experiments: every (selection, rule) combination on every instance,
//! written as `results.csv` and an aggregated `summary.md`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branching::BranchRule;
use crate::dominance::DominanceTest;
use crate::engine::{combo_label, solve, SearchConfig, SearchStatus, Selection};
use crate::instances::{load, InstanceError};
use crate::model::MoilpInstance;
use crate::oracle::{brute_force_front, OracleError};

/// Environment variable that overrides the plan seed.
pub const SEED_ENV: &str = "MOBB_SEED";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BenchError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => 1,
            _ => 2,
        }
    }
}

fn default_selections() -> Vec<Selection> {
    Selection::ALL.to_vec()
}

fn default_rules() -> Vec<BranchRule> {
    BranchRule::ALL.to_vec()
}

fn default_time_limit() -> f64 {
    3600.0
}

fn default_repetitions() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

fn default_jobs() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    /// Paths or glob patterns.
    pub instances: Vec<String>,
    #[serde(default = "default_selections")]
    pub selections: Vec<Selection>,
    #[serde(default = "default_rules")]
    pub rules: Vec<BranchRule>,
    #[serde(default = "default_time_limit")]
    pub time_limit_seconds: f64,
    #[serde(default)]
    pub node_limit: Option<u64>,
    #[serde(default)]
    pub dominance_test: DominanceTest,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentPlan {
    pub fn new(instances: Vec<String>) -> Self {
        ExperimentPlan {
            instances,
            selections: default_selections(),
            rules: default_rules(),
            time_limit_seconds: default_time_limit(),
            node_limit: None,
            dominance_test: DominanceTest::Exact,
            repetitions: default_repetitions(),
            output_dir: default_output(),
            jobs: default_jobs(),
            seed: 0,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| BenchError::Usage(format!("{}: {e}", path.display())))
    }

    /// Applies `MOBB_SEED` if it is set.
    pub fn apply_env(&mut self) -> Result<(), BenchError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| BenchError::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{v}`")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.selections.is_empty() || self.rules.is_empty() {
            return Err(BenchError::Usage("at least one selection and one rule are required".into()));
        }
        if self.repetitions == 0 {
            return Err(BenchError::Usage("repetitions must be at least 1".into()));
        }
        if !(self.time_limit_seconds > 0.0) {
            return Err(BenchError::Usage("time limit must be positive".into()));
        }
        Ok(())
    }

    pub fn combos(&self) -> Vec<(Selection, BranchRule)> {
        self.selections
            .iter()
            .flat_map(|&s| self.rules.iter().map(move |&r| (s, r)))
            .collect()
    }

    fn config(&self, selection: Selection, rule: BranchRule) -> SearchConfig {
        SearchConfig {
            selection,
            rule,
            time_limit_seconds: self.time_limit_seconds,
            node_limit: self.node_limit,
            dominance_test: self.dominance_test,
            rng_seed: self.seed,
            rescore_on_pop: false,
        }
    }

    /// Expands globs into a sorted, deduplicated file list.
    pub fn resolve_instances(&self) -> Result<Vec<PathBuf>, BenchError> {
        let mut out = Vec::new();
        for pattern in &self.instances {
            let paths = glob::glob(pattern).map_err(|e| BenchError::Usage(format!("bad pattern `{pattern}`: {e}")))?;
            for p in paths.flatten() {
                if p.is_file() {
                    out.push(p);
                }
            }
        }
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err(BenchError::Usage("no instance files matched".into()));
        }
        Ok(out)
    }
}

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub family: String,
    pub p: usize,
    pub n: usize,
    pub combo: String,
    pub instance: String,
    pub status: String,
    pub nodes_created: u64,
    pub nodes_processed: u64,
    pub time_s: f64,
}

impl ResultRecord {
    pub fn solved(&self) -> bool {
        self.status == SearchStatus::Complete.as_str()
    }
}

struct Loaded {
    path: PathBuf,
    instance: Result<MoilpInstance, String>,
}

fn load_all(paths: &[PathBuf]) -> Vec<Loaded> {
    paths
        .iter()
        .map(|p| Loaded {
            path: p.clone(),
            instance: load(p).map_err(|e: InstanceError| e.to_string()),
        })
        .collect()
}

fn thread_pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool")
}

/// Runs the plan and returns the records in deterministic order
/// (instance, combo, repetition). Per-run failures become `error` rows.
pub fn run_records(plan: &ExperimentPlan) -> Result<Vec<ResultRecord>, BenchError> {
    plan.validate()?;
    let loaded = load_all(&plan.resolve_instances()?);
    let combos = plan.combos();
    let tasks: Vec<(usize, Selection, BranchRule)> = (0..loaded.len())
        .flat_map(|i| combos.iter().map(move |&(s, r)| (i, s, r)))
        .flat_map(|t| std::iter::repeat(t).take(plan.repetitions))
        .collect();
    let pool = thread_pool(plan.jobs);
    let records = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, s, r)| {
                let item = &loaded[i];
                let combo = combo_label(s, r);
                let instance = item.path.display().to_string();
                match &item.instance {
                    Err(msg) => {
                        log::error!("{instance}: {msg}");
                        ResultRecord {
                            family: "unknown".into(),
                            p: 0,
                            n: 0,
                            combo,
                            instance,
                            status: "error".into(),
                            nodes_created: 0,
                            nodes_processed: 0,
                            time_s: 0.0,
                        }
                    }
                    Ok(inst) => {
                        let base = ResultRecord {
                            family: inst.family().as_str().into(),
                            p: inst.num_objectives(),
                            n: inst.num_vars(),
                            combo,
                            instance,
                            status: "error".into(),
                            nodes_created: 0,
                            nodes_processed: 0,
                            time_s: 0.0,
                        };
                        match solve(inst, &plan.config(s, r)) {
                            Ok(res) => ResultRecord {
                                status: res.status.as_str().into(),
                                nodes_created: res.nodes_created,
                                nodes_processed: res.nodes_processed,
                                time_s: res.wall_time_seconds,
                                ..base
                            },
                            Err(e) => {
                                log::error!("{} {}: {e}", base.instance, base.combo);
                                base
                            }
                        }
                    }
                }
            })
            .collect()
    });
    Ok(records)
}

pub fn write_csv(records: &[ResultRecord], path: &Path) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRecord>, BenchError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(BenchError::from)).collect()
}

/// Aggregate for one combination within one size class.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub combo: String,
    pub family: String,
    pub p: usize,
    pub n: usize,
    /// Means over solved runs only; `None` when nothing was solved.
    pub mean_nodes: Option<f64>,
    pub mean_time: Option<f64>,
    pub solved: usize,
    pub total: usize,
}

/// Groups by size class (family, p, n) and combo, keeping first-seen combo order.
pub fn summarize(records: &[ResultRecord]) -> Vec<ResultRow> {
    let mut combo_order: Vec<String> = Vec::new();
    for r in records {
        if !combo_order.contains(&r.combo) {
            combo_order.push(r.combo.clone());
        }
    }
    let mut groups: BTreeMap<(String, usize, usize), BTreeMap<usize, Vec<&ResultRecord>>> = BTreeMap::new();
    for r in records {
        let idx = combo_order.iter().position(|c| *c == r.combo).unwrap_or(0);
        groups
            .entry((r.family.clone(), r.p, r.n))
            .or_default()
            .entry(idx)
            .or_default()
            .push(r);
    }
    let mut rows = Vec::new();
    for ((family, p, n), by_combo) in groups {
        for (idx, runs) in by_combo {
            let solved: Vec<&&ResultRecord> = runs.iter().filter(|r| r.solved()).collect();
            let mean = |f: &dyn Fn(&ResultRecord) -> f64| {
                (!solved.is_empty()).then(|| solved.iter().map(|r| f(r)).sum::<f64>() / solved.len() as f64)
            };
            rows.push(ResultRow {
                combo: combo_order[idx].clone(),
                family: family.clone(),
                p,
                n,
                mean_nodes: mean(&|r| r.nodes_created as f64),
                mean_time: mean(&|r| r.time_s),
                solved: solved.len(),
                total: runs.len(),
            });
        }
    }
    rows
}

pub fn render_markdown(rows: &[ResultRow]) -> String {
    let mut out = String::from("# Benchmark summary\n");
    let mut current: Option<(&str, usize, usize)> = None;
    for row in rows {
        let class = (row.family.as_str(), row.p, row.n);
        if current != Some(class) {
            current = Some(class);
            let _ = write!(
                out,
                "\n## {} p={} n={}\n\n| combo | nodes | time(s) |\n|---|---:|---:|\n",
                row.family, row.p, row.n
            );
        }
        let bracket = if row.solved < row.total {
            format!(" ({})", row.solved)
        } else {
            String::new()
        };
        let nodes = row.mean_nodes.map_or("-".to_string(), |v| format!("{v:.1}"));
        let time = row.mean_time.map_or("-".to_string(), |v| format!("{v:.3}"));
        let _ = writeln!(out, "| {} | {nodes}{bracket} | {time}{bracket} |", row.combo);
    }
    out
}

#[derive(Debug)]
pub struct BenchOutcome {
    pub records: Vec<ResultRecord>,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

impl BenchOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.records.iter().any(|r| r.status == "error") {
            2
        } else {
            0
        }
    }
}

/// Runs the plan and writes `results.csv` and `summary.md` to the output directory.
pub fn run(plan: &ExperimentPlan) -> Result<BenchOutcome, BenchError> {
    let records = run_records(plan)?;
    let dir = &plan.output_dir;
    fs::create_dir_all(dir).map_err(|source| BenchError::Io {
        path: dir.clone(),
        source,
    })?;
    let csv_path = dir.join("results.csv");
    let summary_path = dir.join("summary.md");
    write_csv(&records, &csv_path)?;
    fs::write(&summary_path, render_markdown(&summarize(&records))).map_err(|source| BenchError::Io {
        path: summary_path.clone(),
        source,
    })?;
    Ok(BenchOutcome {
        records,
        csv_path,
        summary_path,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyStatus {
    Pass,
    Fail(String),
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct VerifyLine {
    pub instance: String,
    pub combo: String,
    pub status: VerifyStatus,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub lines: Vec<VerifyLine>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| !matches!(l.status, VerifyStatus::Fail(_)))
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            2
        }
    }
}

/// Solves every instance with every combination and compares against
/// exhaustive enumeration. Instances beyond the enumeration budget are skipped.
pub fn verify(plan: &ExperimentPlan) -> Result<VerifyReport, BenchError> {
    plan.validate()?;
    let loaded = load_all(&plan.resolve_instances()?);
    let combos = plan.combos();
    let pool = thread_pool(plan.jobs);
    let per_instance: Vec<Vec<VerifyLine>> = pool.install(|| {
        loaded
            .par_iter()
            .map(|item| {
                let name = item.path.display().to_string();
                let line = |combo: String, status| VerifyLine {
                    instance: name.clone(),
                    combo,
                    status,
                };
                let inst = match &item.instance {
                    Ok(i) => i,
                    Err(msg) => return vec![line("-".into(), VerifyStatus::Fail(msg.clone()))],
                };
                let expected = match brute_force_front(inst) {
                    Ok(f) => f.points,
                    Err(e @ OracleError::BudgetExceeded { .. }) => {
                        log::warn!("{name}: skipped, {e}");
                        return vec![line("-".into(), VerifyStatus::Skipped(e.to_string()))];
                    }
                    Err(e) => return vec![line("-".into(), VerifyStatus::Fail(e.to_string()))],
                };
                combos
                    .iter()
                    .map(|&(s, r)| {
                        let status = match solve(inst, &plan.config(s, r)) {
                            Ok(res) if res.status != SearchStatus::Complete => {
                                VerifyStatus::Fail(format!("stopped with {}", res.status.as_str()))
                            }
                            Ok(res) if res.front() == expected => VerifyStatus::Pass,
                            Ok(res) => VerifyStatus::Fail(format!(
                                "front differs: {} points vs {} expected",
                                res.front().len(),
                                expected.len()
                            )),
                            Err(e) => VerifyStatus::Fail(e.to_string()),
                        };
                        line(combo_label(s, r), status)
                    })
                    .collect()
            })
            .collect()
    });
    Ok(VerifyReport {
        lines: per_instance.into_iter().flatten().collect(),
    })
}
