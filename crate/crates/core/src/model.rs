//! Canonical problem representation.
//!
//! Every instance is stored as a minimization problem `min Cx s.t. Ax (<=|=) b,
//! l <= x <= u, x integral`. Maximization families (knapsack) are negated on
//! ingestion and converted back with [`to_display_sense`].

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("dimension mismatch in `{field}`: expected {expected}, found {found}")]
    Dimension {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid value in `{field}`: {reason}")]
    Value { field: &'static str, reason: String },
}

fn dim(field: &'static str, expected: usize, found: usize) -> Result<(), ModelError> {
    if expected == found {
        Ok(())
    } else {
        Err(ModelError::Dimension {
            field,
            expected,
            found,
        })
    }
}

fn bad(field: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::Value {
        field,
        reason: reason.into(),
    }
}

/// Sense in which the original (user-facing) objectives are stated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Knapsack,
    Gap,
    Generic,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Knapsack => "knapsack",
            Family::Gap => "gap",
            Family::Generic => "generic",
        }
    }
}

/// Per-variable data used by the static branching rules: a positive weight
/// `w_i` and the objective coefficients `c^k_i` in the original sense.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchMetadata {
    pub weights: Vec<i64>,
    /// `p` rows of `n` coefficients.
    pub coefficients: Vec<Vec<i64>>,
    pub sense: Sense,
}

impl BranchMetadata {
    /// Ratio vector `(c^1_i / w_i, ..., c^p_i / w_i)` of variable `i`.
    pub fn ratios(&self, i: usize) -> Vec<f64> {
        let w = self.weights[i] as f64;
        self.coefficients.iter().map(|row| row[i] as f64 / w).collect()
    }
}

/// The JSON file representation of an instance (one instance per file).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum InstanceFile {
    Knapsack {
        p: usize,
        n: usize,
        capacity: i64,
        weights: Vec<i64>,
        profits: Vec<Vec<i64>>,
    },
    Gap {
        p: usize,
        machines: usize,
        jobs: usize,
        capacities: Vec<i64>,
        resources: Vec<Vec<i64>>,
        costs: Vec<Vec<Vec<i64>>>,
    },
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<MoilpInstance, ModelError> {
        match &self {
            InstanceFile::Knapsack {
                p,
                n,
                capacity,
                weights,
                profits,
            } => {
                dim("profits", *p, profits.len())?;
                dim("weights", *n, weights.len())?;
                from_knapsack(weights, *capacity, profits)
            }
            InstanceFile::Gap {
                p,
                machines,
                jobs,
                capacities,
                resources,
                costs,
            } => {
                dim("costs", *p, costs.len())?;
                dim("capacities", *machines, capacities.len())?;
                dim("resources", *machines, resources.len())?;
                for row in resources {
                    dim("resources", *jobs, row.len())?;
                }
                from_gap(costs, resources, capacities)
            }
        }
    }
}

/// A linear constraint row `coeffs . x (<= | =) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<Rational64>,
    pub sense: RowSense,
    pub rhs: Rational64,
}

impl Row {
    pub fn new(coeffs: Vec<Rational64>, sense: RowSense, rhs: Rational64) -> Self {
        Row { coeffs, sense, rhs }
    }

    pub fn from_ints(coeffs: &[i64], sense: RowSense, rhs: i64) -> Self {
        Row {
            coeffs: coeffs.iter().map(|&c| Rational64::from_integer(c)).collect(),
            sense,
            rhs: Rational64::from_integer(rhs),
        }
    }

    /// Exact satisfaction test for an integer point.
    pub fn is_satisfied(&self, x: &[i64]) -> bool {
        let lhs = self
            .coeffs
            .iter()
            .zip(x)
            .filter(|(_, &xi)| xi != 0)
            .fold(Rational64::zero(), |acc, (c, &xi)| acc + c * xi);
        match self.sense {
            RowSense::Le => lhs <= self.rhs,
            RowSense::Eq => lhs == self.rhs,
        }
    }
}

/// Canonical minimization MOILP.
#[derive(Debug, Clone)]
pub struct MoilpInstance {
    num_vars: usize,
    objectives: Vec<Vec<i64>>,
    rows: Vec<Row>,
    var_lower: Vec<i64>,
    var_upper: Vec<i64>,
    display_sense: Sense,
    family: Family,
    metadata: Option<BranchMetadata>,
    source: Option<InstanceFile>,
    // Float copies for building LPs.
    rows_f64: Vec<Vec<f64>>,
    rhs_f64: Vec<f64>,
}

impl MoilpInstance {
    /// Builds a generic instance. `objectives` is `p` rows of `n` integer
    /// coefficients in minimization sense.
    pub fn new(
        objectives: Vec<Vec<i64>>,
        rows: Vec<Row>,
        var_lower: Vec<i64>,
        var_upper: Vec<i64>,
    ) -> Result<Self, ModelError> {
        let p = objectives.len();
        if p < 2 {
            return Err(bad("objectives", format!("need at least 2 objectives, got {p}")));
        }
        let n = objectives[0].len();
        if n == 0 {
            return Err(bad("objectives", "need at least one variable"));
        }
        for row in &objectives {
            dim("objectives", n, row.len())?;
        }
        for row in &rows {
            dim("constraints", n, row.coeffs.len())?;
        }
        dim("var_lower", n, var_lower.len())?;
        dim("var_upper", n, var_upper.len())?;
        if let Some(i) = (0..n).find(|&i| var_lower[i] > var_upper[i]) {
            return Err(bad(
                "var_lower",
                format!("lower bound exceeds upper bound for variable {i}"),
            ));
        }
        let rows_f64 = rows
            .iter()
            .map(|r| r.coeffs.iter().map(rat_to_f64).collect())
            .collect();
        let rhs_f64 = rows.iter().map(|r| rat_to_f64(&r.rhs)).collect();
        Ok(MoilpInstance {
            num_vars: n,
            objectives,
            rows,
            var_lower,
            var_upper,
            display_sense: Sense::Minimize,
            family: Family::Generic,
            metadata: None,
            source: None,
            rows_f64,
            rhs_f64,
        })
    }

    pub fn with_metadata(mut self, metadata: BranchMetadata) -> Result<Self, ModelError> {
        dim("weights", self.num_vars, metadata.weights.len())?;
        dim("coefficients", self.num_objectives(), metadata.coefficients.len())?;
        for row in &metadata.coefficients {
            dim("coefficients", self.num_vars, row.len())?;
        }
        if metadata.weights.iter().any(|&w| w <= 0) {
            return Err(bad("weights", "branching weights must be strictly positive"));
        }
        self.metadata = Some(metadata);
        Ok(self)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_objectives(&self) -> usize {
        self.objectives.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objectives(&self) -> &[Vec<i64>] {
        &self.objectives
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn var_lower(&self) -> &[i64] {
        &self.var_lower
    }

    pub fn var_upper(&self) -> &[i64] {
        &self.var_upper
    }

    pub fn display_sense(&self) -> Sense {
        self.display_sense
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn metadata(&self) -> Option<&BranchMetadata> {
        self.metadata.as_ref()
    }

    /// The file representation this instance was built from, if any.
    pub fn source(&self) -> Option<&InstanceFile> {
        self.source.as_ref()
    }

    pub(crate) fn row_f64(&self, i: usize) -> &[f64] {
        &self.rows_f64[i]
    }

    pub(crate) fn rhs_f64(&self, i: usize) -> f64 {
        self.rhs_f64[i]
    }

    /// `Cx` in minimization sense, exact.
    pub fn evaluate(&self, x: &[i64]) -> Vec<i64> {
        self.objectives
            .iter()
            .map(|row| row.iter().zip(x).map(|(c, xi)| c * xi).sum())
            .collect()
    }

    pub fn evaluate_f64(&self, x: &[f64]) -> Vec<f64> {
        self.objectives
            .iter()
            .map(|row| row.iter().zip(x).map(|(&c, xi)| c as f64 * xi).sum())
            .collect()
    }

    /// Exact feasibility of an integer point, bounds included.
    pub fn is_feasible(&self, x: &[i64]) -> bool {
        x.len() == self.num_vars
            && x.iter()
                .enumerate()
                .all(|(i, &xi)| self.var_lower[i] <= xi && xi <= self.var_upper[i])
            && self.rows.iter().all(|r| r.is_satisfied(x))
    }

    /// Componentwise strict upper bound on every image over the variable box:
    /// `M_k = sum_i max(C_ki * l_i, C_ki * u_i) + 1`.
    pub fn reference_point(&self) -> Vec<i64> {
        self.objectives
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(i, &c)| (c * self.var_lower[i]).max(c * self.var_upper[i]))
                    .sum::<i64>()
                    + 1
            })
            .collect()
    }
}

pub(crate) fn rat_to_f64(r: &Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Builds the minimization form of a multi-objective 0/1 knapsack problem.
/// `profits` holds `p` rows of `n` profits.
pub fn from_knapsack(
    weights: &[i64],
    capacity: i64,
    profits: &[Vec<i64>],
) -> Result<MoilpInstance, ModelError> {
    let n = weights.len();
    let p = profits.len();
    if !(2..=3).contains(&p) {
        return Err(bad("profits", format!("expected 2 or 3 objectives, got {p}")));
    }
    if n == 0 {
        return Err(bad("weights", "at least one item is required"));
    }
    for row in profits {
        dim("profits", n, row.len())?;
    }
    if weights.iter().any(|&w| w <= 0) {
        return Err(bad("weights", "weights must be positive"));
    }
    if profits.iter().flatten().any(|&c| c <= 0) {
        return Err(bad("profits", "profits must be positive"));
    }
    if capacity <= 0 {
        return Err(bad("capacity", "capacity must be positive"));
    }
    let objectives = profits
        .iter()
        .map(|row| row.iter().map(|&c| -c).collect())
        .collect();
    let rows = vec![Row::from_ints(weights, RowSense::Le, capacity)];
    let mut inst = MoilpInstance::new(objectives, rows, vec![0; n], vec![1; n])?
        .with_metadata(BranchMetadata {
            weights: weights.to_vec(),
            coefficients: profits.to_vec(),
            sense: Sense::Maximize,
        })?;
    inst.display_sense = Sense::Maximize;
    inst.family = Family::Knapsack;
    inst.source = Some(InstanceFile::Knapsack {
        p,
        n,
        capacity,
        weights: weights.to_vec(),
        profits: profits.to_vec(),
    });
    Ok(inst)
}

/// Index of assignment variable `x_{ij}` (machine `i`, job `j`).
pub fn gap_var(machine: usize, job: usize, jobs: usize) -> usize {
    machine * jobs + job
}

/// Builds a multi-objective generalized assignment problem. `costs` is
/// `p x m x j`, `resources` is `m x j`, `capacities` has length `m`.
pub fn from_gap(
    costs: &[Vec<Vec<i64>>],
    resources: &[Vec<i64>],
    capacities: &[i64],
) -> Result<MoilpInstance, ModelError> {
    let p = costs.len();
    if !(2..=3).contains(&p) {
        return Err(bad("costs", format!("expected 2 or 3 objectives, got {p}")));
    }
    let m = capacities.len();
    if m < 2 {
        return Err(bad("capacities", "at least two machines are required"));
    }
    dim("resources", m, resources.len())?;
    let j = resources[0].len();
    if j < 2 {
        return Err(bad("resources", "at least two jobs are required"));
    }
    for row in resources {
        dim("resources", j, row.len())?;
    }
    for layer in costs {
        dim("costs", m, layer.len())?;
        for row in layer {
            dim("costs", j, row.len())?;
        }
    }
    if capacities.iter().any(|&c| c <= 0) {
        return Err(bad("capacities", "capacities must be positive"));
    }
    if resources.iter().flatten().any(|&r| r <= 0) {
        return Err(bad("resources", "resources must be positive"));
    }
    if costs.iter().flatten().flatten().any(|&c| c <= 0) {
        return Err(bad("costs", "costs must be positive"));
    }

    let n = m * j;
    let objectives: Vec<Vec<i64>> = costs
        .iter()
        .map(|layer| layer.iter().flatten().copied().collect())
        .collect();
    let mut rows = Vec::with_capacity(j + m);
    for job in 0..j {
        let mut coeffs = vec![0; n];
        for machine in 0..m {
            coeffs[gap_var(machine, job, j)] = 1;
        }
        rows.push(Row::from_ints(&coeffs, RowSense::Eq, 1));
    }
    for machine in 0..m {
        let mut coeffs = vec![0; n];
        for job in 0..j {
            coeffs[gap_var(machine, job, j)] = resources[machine][job];
        }
        rows.push(Row::from_ints(&coeffs, RowSense::Le, capacities[machine]));
    }
    let weights = resources.iter().flatten().copied().collect();
    let mut inst = MoilpInstance::new(objectives.clone(), rows, vec![0; n], vec![1; n])?
        .with_metadata(BranchMetadata {
            weights,
            coefficients: objectives,
            sense: Sense::Minimize,
        })?;
    inst.family = Family::Gap;
    inst.source = Some(InstanceFile::Gap {
        p,
        machines: m,
        jobs: j,
        capacities: capacities.to_vec(),
        resources: resources.to_vec(),
        costs: costs.to_vec(),
    });
    Ok(inst)
}

/// Converts a minimization-sense image into the instance's original sense.
pub fn to_display_sense(y_min: &[i64], instance: &MoilpInstance) -> Vec<i64> {
    match instance.display_sense {
        Sense::Minimize => y_min.to_vec(),
        Sense::Maximize => y_min.iter().map(|v| -v).collect(),
    }
}

/// A node of the search tree: tightened variable bounds plus bookkeeping.
#[derive(Debug, Clone)]
pub struct Subproblem {
    pub fixed_lower: Vec<i64>,
    pub fixed_upper: Vec<i64>,
    pub depth: usize,
    pub node_id: u64,
    pub score: f64,
    /// Split value recorded by the branching step that created this node.
    pub split: Option<(usize, i64)>,
}

impl Subproblem {
    pub fn root(instance: &MoilpInstance) -> Self {
        Subproblem {
            fixed_lower: instance.var_lower.clone(),
            fixed_upper: instance.var_upper.clone(),
            depth: 0,
            node_id: 0,
            score: f64::INFINITY,
            split: None,
        }
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.fixed_lower[i] >= self.fixed_upper[i]
    }

    pub fn unfixed(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.fixed_lower.len()).filter(move |&i| !self.is_fixed(i))
    }

    /// True when some variable has an empty domain.
    pub fn is_syntactically_infeasible(&self) -> bool {
        self.fixed_lower
            .iter()
            .zip(&self.fixed_upper)
            .any(|(l, u)| l > u)
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.iter()
            .enumerate()
            .all(|(i, &xi)| self.fixed_lower[i] <= xi && xi <= self.fixed_upper[i])
    }
}

/// An integer feasible solution with its image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SolutionPoint {
    pub x: Vec<i64>,
    /// Image in minimization sense (`Cx`).
    pub y: Vec<i64>,
    /// Image in the instance's original sense.
    pub display_y: Vec<i64>,
}

impl SolutionPoint {
    pub fn new(x: Vec<i64>, instance: &MoilpInstance) -> Self {
        let y = instance.evaluate(&x);
        let display_y = to_display_sense(&y, instance);
        SolutionPoint { x, y, display_y }
    }
}
