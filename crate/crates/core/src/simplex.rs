//! Dense bounded-variable primal simplex.
//!
//! Solves `min c^T x s.t. A x (<=|=|>=) b, l <= x <= u` with a two-phase
//! method on an explicit tableau. Every row receives a logical column
//! (`A_i x + s_i = b_i`, `s_i >= 0` for `<=` rows, `s_i = 0` for equalities);
//! rows whose initial residual does not fit the logical get an artificial
//! column that is driven to zero in phase one. Dantzig pricing is used until
//! the objective stalls for `2(n+m)` iterations, after which Bland's rule
//! takes over for the rest of the phase.

use thiserror::Error;

use crate::model::{MoilpInstance, RowSense, Subproblem};

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Tolerance used to decide whether a value is integral.
pub const INT_TOL: f64 = 1e-6;
/// Entries below this magnitude are never used as pivots.
pub const PIVOT_TOL: f64 = 1e-10;
const DUAL_TOL: f64 = 1e-9;
const BOUND_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("numerical failure in simplex: {0}")]
    Numerical(String),
    #[error("malformed LP: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub sense: LpSense,
    pub rhs: f64,
}

impl LpRow {
    pub fn new(coeffs: Vec<f64>, sense: LpSense, rhs: f64) -> Self {
        LpRow { coeffs, sense, rhs }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    /// May contain `-inf`.
    pub lower: Vec<f64>,
    /// May contain `+inf`.
    pub upper: Vec<f64>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        LpProblem {
            objective,
            rows: Vec::new(),
            lower,
            upper,
        }
    }

    pub fn with_row(mut self, coeffs: Vec<f64>, sense: LpSense, rhs: f64) -> Self {
        self.rows.push(LpRow::new(coeffs, sense, rhs));
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Malformed("bound vectors do not match objective".into()));
        }
        if let Some(r) = self.rows.iter().position(|r| r.coeffs.len() != n) {
            return Err(LpError::Malformed(format!("row {r} has wrong length")));
        }
        let finite = |v: f64| !v.is_nan();
        if !self.objective.iter().all(|v| v.is_finite())
            || !self.rows.iter().all(|r| r.rhs.is_finite() && r.coeffs.iter().all(|c| c.is_finite()))
            || !self.lower.iter().chain(&self.upper).all(|&v| finite(v))
        {
            return Err(LpError::Malformed("non-finite data".into()));
        }
        Ok(())
    }

    /// Largest violation of rows and bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, &xj) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - xj).max(xj - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let v = match row.sense {
                LpSense::Le => lhs - row.rhs,
                LpSense::Ge => row.rhs - lhs,
                LpSense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Basic optimal solution; empty unless `Optimal`.
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// Row duals: the rate of change of the optimal value per unit increase of
    /// each row's right-hand side, for rows as given. Empty unless `Optimal`.
    pub duals: Vec<f64>,
}

impl LpResult {
    fn infeasible() -> Self {
        LpResult {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective_value: f64::INFINITY,
            duals: Vec::new(),
        }
    }

    fn unbounded() -> Self {
        LpResult {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective_value: f64::NEG_INFINITY,
            duals: Vec::new(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

enum StepOutcome {
    Optimal,
    Unbounded,
}

/// Simplex working memory. Reusable across solves; not shareable.
#[derive(Debug, Default)]
pub struct LpSolver {
    m: usize,
    n: usize,
    ncols: usize,
    /// Row-major `m x ncols`, holds `B^{-1} A_full`.
    tab: Vec<f64>,
    /// Original `A_full` (with row signs normalized to `<=`/`=`), row-major.
    orig: Vec<f64>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    /// Column -> row index if basic.
    basic_row: Vec<Option<usize>>,
    num_artificial: usize,
    pivots_since_refactor: usize,
}

/// Solves `problem` with a fresh solver.
pub fn solve_lp(problem: &LpProblem) -> Result<LpResult, LpError> {
    LpSolver::default().solve(problem)
}

impl LpSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, problem: &LpProblem) -> Result<LpResult, LpError> {
        problem.validate()?;
        if (0..problem.num_vars()).any(|j| problem.lower[j] > problem.upper[j]) {
            return Ok(LpResult::infeasible());
        }
        let negated = self.setup(problem);

        if self.num_artificial > 0 {
            self.set_phase_costs(Phase::One, &problem.objective);
            match self.iterate(Phase::One)? {
                StepOutcome::Optimal => {}
                StepOutcome::Unbounded => {
                    return Err(LpError::Numerical("phase one reported unbounded".into()))
                }
            }
            self.refactor()?;
            let infeasibility: f64 = (self.n + self.m..self.ncols).map(|j| self.x[j].abs()).sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if infeasibility > FEAS_TOL * scale {
                return Ok(LpResult::infeasible());
            }
            self.retire_artificials();
        }

        self.set_phase_costs(Phase::Two, &problem.objective);
        match self.iterate(Phase::Two)? {
            StepOutcome::Optimal => {}
            StepOutcome::Unbounded => return Ok(LpResult::unbounded()),
        }
        self.refactor()?;
        self.compute_reduced_costs();

        let mut x: Vec<f64> = self.x[..self.n].to_vec();
        for (j, xj) in x.iter_mut().enumerate() {
            if *xj < problem.lower[j] {
                *xj = problem.lower[j];
            } else if *xj > problem.upper[j] {
                *xj = problem.upper[j];
            }
        }
        let scale = 1.0 + problem.rows.iter().fold(0.0f64, |a, r| a.max(r.rhs.abs()));
        let violation = problem.max_violation(&x);
        if violation > FEAS_TOL * scale {
            return Err(LpError::Numerical(format!(
                "optimal basis violates constraints by {violation:e}"
            )));
        }
        let objective_value = problem.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        let duals = (0..self.m)
            .map(|i| {
                let y = -self.reduced[self.n + i];
                if negated[i] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        Ok(LpResult {
            status: LpStatus::Optimal,
            x,
            objective_value,
            duals,
        })
    }

    /// Builds the initial tableau. Returns which rows were negated (`>=` rows).
    fn setup(&mut self, problem: &LpProblem) -> Vec<bool> {
        let n = problem.num_vars();
        let m = problem.rows.len();
        self.n = n;
        self.m = m;

        let mut negated = vec![false; m];
        let mut a = vec![0.0; m * n];
        let mut rhs = vec![0.0; m];
        let mut is_eq = vec![false; m];
        for (i, row) in problem.rows.iter().enumerate() {
            let sign = if row.sense == LpSense::Ge { -1.0 } else { 1.0 };
            negated[i] = row.sense == LpSense::Ge;
            is_eq[i] = row.sense == LpSense::Eq;
            for j in 0..n {
                a[i * n + j] = sign * row.coeffs[j];
            }
            rhs[i] = sign * row.rhs;
        }

        // Nonbasic starting values for the structural columns.
        let mut x_struct = vec![0.0; n];
        for j in 0..n {
            x_struct[j] = if problem.lower[j].is_finite() {
                problem.lower[j]
            } else if problem.upper[j].is_finite() {
                problem.upper[j]
            } else {
                0.0
            };
        }
        let residual: Vec<f64> = (0..m)
            .map(|i| rhs[i] - (0..n).map(|j| a[i * n + j] * x_struct[j]).sum::<f64>())
            .collect();
        let needs_art: Vec<Option<f64>> = (0..m)
            .map(|i| {
                let r = residual[i];
                let fits = if is_eq[i] { r.abs() <= BOUND_TOL } else { r >= -BOUND_TOL };
                if fits {
                    None
                } else {
                    Some(if r >= 0.0 { 1.0 } else { -1.0 })
                }
            })
            .collect();
        let num_art = needs_art.iter().filter(|s| s.is_some()).count();
        let ncols = n + m + num_art;
        self.ncols = ncols;
        self.num_artificial = num_art;

        self.orig = vec![0.0; m * ncols];
        let mut art_col = n + m;
        let mut basis = vec![0; m];
        for i in 0..m {
            let row = &mut self.orig[i * ncols..(i + 1) * ncols];
            row[..n].copy_from_slice(&a[i * n..(i + 1) * n]);
            row[n + i] = 1.0;
            if let Some(sign) = needs_art[i] {
                row[art_col] = sign;
                basis[i] = art_col;
                art_col += 1;
            } else {
                basis[i] = n + i;
            }
        }
        self.rhs = rhs;

        self.lower = vec![0.0; ncols];
        self.upper = vec![f64::INFINITY; ncols];
        self.lower[..n].copy_from_slice(&problem.lower);
        self.upper[..n].copy_from_slice(&problem.upper);
        for i in 0..m {
            if is_eq[i] {
                self.upper[n + i] = 0.0;
            }
        }

        self.x = vec![0.0; ncols];
        self.x[..n].copy_from_slice(&x_struct);
        self.basis = basis;
        self.basic_row = vec![None; ncols];
        for (r, &b) in self.basis.iter().enumerate() {
            self.basic_row[b] = Some(r);
        }
        for i in 0..m {
            let b = self.basis[i];
            self.x[b] = if b >= n + m { residual[i].abs() } else { residual[i] };
        }

        // Initial basis matrix is diagonal with entries +/-1; invert by row sign.
        self.tab = self.orig.clone();
        for i in 0..m {
            let piv = self.orig[i * ncols + self.basis[i]];
            if piv < 0.0 {
                for v in &mut self.tab[i * ncols..(i + 1) * ncols] {
                    *v = -*v;
                }
            }
        }
        self.cost = vec![0.0; ncols];
        self.reduced = vec![0.0; ncols];
        self.pivots_since_refactor = 0;
        negated
    }

    fn set_phase_costs(&mut self, phase: Phase, objective: &[f64]) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        match phase {
            Phase::One => {
                for j in self.n + self.m..self.ncols {
                    self.cost[j] = 1.0;
                }
            }
            Phase::Two => self.cost[..self.n].copy_from_slice(objective),
        }
    }

    fn compute_reduced_costs(&mut self) {
        let ncols = self.ncols;
        for j in 0..ncols {
            let mut d = self.cost[j];
            for r in 0..self.m {
                let cb = self.cost[self.basis[r]];
                if cb != 0.0 {
                    d -= cb * self.tab[r * ncols + j];
                }
            }
            self.reduced[j] = d;
        }
        for &b in &self.basis {
            self.reduced[b] = 0.0;
        }
    }

    fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    fn iterate(&mut self, phase: Phase) -> Result<StepOutcome, LpError> {
        self.compute_reduced_costs();
        let stall_limit = 2 * (self.n + self.m).max(1);
        let max_iter = 200 * (self.ncols + self.m + 10);
        let mut best = self.objective();
        let mut stalled = 0usize;
        let mut bland = false;
        for _ in 0..max_iter {
            let Some((q, dir)) = self.choose_entering(bland) else {
                return Ok(StepOutcome::Optimal);
            };
            match self.ratio_test(q, dir, bland) {
                None => {
                    return if phase == Phase::One {
                        Err(LpError::Numerical("unbounded ray in phase one".into()))
                    } else {
                        Ok(StepOutcome::Unbounded)
                    };
                }
                Some((theta, leave)) => self.step(q, dir, theta, leave)?,
            }
            let obj = self.objective();
            if obj < best - 1e-12 * (1.0 + best.abs()) {
                best = obj;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= stall_limit {
                    bland = true;
                }
            }
        }
        Err(LpError::Numerical("iteration limit exceeded".into()))
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.ncols {
            if self.basic_row[j].is_some() || self.upper[j] - self.lower[j] <= 0.0 {
                continue;
            }
            let d = self.reduced[j];
            let at_lower = self.lower[j].is_finite() && self.x[j] <= self.lower[j];
            let at_upper = self.upper[j].is_finite() && self.x[j] >= self.upper[j];
            let dir = if d < -DUAL_TOL && !at_upper {
                1.0
            } else if d > DUAL_TOL && !at_lower {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if best.map_or(true, |(_, _, mag)| d.abs() > mag) {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Returns the step length and the leaving row (`None` for a bound flip
    /// of the entering column). `None` overall means unbounded.
    fn ratio_test(&self, q: usize, dir: f64, bland: bool) -> Option<(f64, Option<usize>)> {
        let ncols = self.ncols;
        let mut theta = f64::INFINITY;
        let mut leave: Option<usize> = None;
        let mut leave_mag = 0.0;
        if self.lower[q].is_finite() && self.upper[q].is_finite() {
            theta = self.upper[q] - self.lower[q];
        }
        for r in 0..self.m {
            let alpha = dir * self.tab[r * ncols + q];
            if alpha.abs() <= PIVOT_TOL {
                continue;
            }
            let b = self.basis[r];
            let limit = if alpha > 0.0 {
                if !self.lower[b].is_finite() {
                    continue;
                }
                ((self.x[b] - self.lower[b]) / alpha).max(0.0)
            } else {
                if !self.upper[b].is_finite() {
                    continue;
                }
                ((self.upper[b] - self.x[b]) / -alpha).max(0.0)
            };
            let better = if limit < theta - 1e-12 {
                true
            } else if limit <= theta + 1e-12 {
                match leave {
                    None => false,
                    Some(cur) => {
                        if bland {
                            b < self.basis[cur]
                        } else {
                            alpha.abs() > leave_mag
                        }
                    }
                }
            } else {
                false
            };
            if better {
                theta = limit;
                leave = Some(r);
                leave_mag = alpha.abs();
            }
        }
        if theta.is_infinite() {
            None
        } else {
            Some((theta, leave))
        }
    }

    fn step(&mut self, q: usize, dir: f64, theta: f64, leave: Option<usize>) -> Result<(), LpError> {
        let ncols = self.ncols;
        if theta > 0.0 {
            self.x[q] += dir * theta;
            for r in 0..self.m {
                let a = self.tab[r * ncols + q];
                if a != 0.0 {
                    let b = self.basis[r];
                    self.x[b] -= dir * theta * a;
                }
            }
        }
        match leave {
            None => {
                // bound flip
                self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
            }
            Some(r) => {
                let b = self.basis[r];
                let alpha = dir * self.tab[r * ncols + q];
                self.x[b] = if alpha > 0.0 { self.lower[b] } else { self.upper[b] };
                self.pivot(r, q);
                self.pivots_since_refactor += 1;
                if self.pivots_since_refactor >= REFACTOR_EVERY {
                    self.refactor()?;
                    self.compute_reduced_costs();
                }
            }
        }
        Ok(())
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let ncols = self.ncols;
        let piv = self.tab[r * ncols + q];
        for v in &mut self.tab[r * ncols..(r + 1) * ncols] {
            *v /= piv;
        }
        let (before, rest) = self.tab.split_at_mut(r * ncols);
        let (prow, after) = rest.split_at_mut(ncols);
        for other in before.chunks_mut(ncols).chain(after.chunks_mut(ncols)) {
            let f = other[q];
            if f != 0.0 {
                for (o, p) in other.iter_mut().zip(prow.iter()) {
                    *o -= f * p;
                }
                other[q] = 0.0;
            }
        }
        let f = self.reduced[q];
        if f != 0.0 {
            for (d, p) in self.reduced.iter_mut().zip(prow.iter()) {
                *d -= f * p;
            }
            self.reduced[q] = 0.0;
        }
        let old = self.basis[r];
        self.basic_row[old] = None;
        self.basis[r] = q;
        self.basic_row[q] = Some(r);
    }

    /// Rebuilds `B^{-1} A_full` and the basic values from the original data.
    fn refactor(&mut self) -> Result<(), LpError> {
        let (m, ncols) = (self.m, self.ncols);
        self.pivots_since_refactor = 0;
        if m == 0 {
            return Ok(());
        }
        // Right-hand side with nonbasic contributions removed.
        let mut beta: Vec<f64> = (0..m)
            .map(|i| {
                let row = &self.orig[i * ncols..(i + 1) * ncols];
                let nb: f64 = (0..ncols)
                    .filter(|&j| self.basic_row[j].is_none() && self.x[j] != 0.0)
                    .map(|j| row[j] * self.x[j])
                    .sum();
                self.rhs[i] - nb
            })
            .collect();
        let mut work = self.orig.clone();
        // Gauss-Jordan on basis columns with partial pivoting over rows.
        let mut row_of: Vec<usize> = vec![usize::MAX; m];
        let mut used = vec![false; m];
        for (k, &col) in self.basis.iter().enumerate() {
            let mut best_r = usize::MAX;
            let mut best_v = PIVOT_TOL;
            for r in 0..m {
                if !used[r] && work[r * ncols + col].abs() > best_v {
                    best_v = work[r * ncols + col].abs();
                    best_r = r;
                }
            }
            if best_r == usize::MAX {
                return Err(LpError::Numerical("singular basis during refactorization".into()));
            }
            used[best_r] = true;
            row_of[k] = best_r;
            let piv = work[best_r * ncols + col];
            for v in &mut work[best_r * ncols..(best_r + 1) * ncols] {
                *v /= piv;
            }
            beta[best_r] /= piv;
            for r in 0..m {
                if r == best_r {
                    continue;
                }
                let f = work[r * ncols + col];
                if f != 0.0 {
                    for j in 0..ncols {
                        work[r * ncols + j] -= f * work[best_r * ncols + j];
                    }
                    beta[r] -= f * beta[best_r];
                }
            }
        }
        for (k, &r) in row_of.iter().enumerate() {
            self.tab[k * ncols..(k + 1) * ncols].copy_from_slice(&work[r * ncols..(r + 1) * ncols]);
            self.x[self.basis[k]] = beta[r];
        }
        Ok(())
    }

    /// Fixes artificial columns at zero and pivots basic artificials out where
    /// a structural or logical replacement exists.
    fn retire_artificials(&mut self) {
        let ncols = self.ncols;
        let first_art = self.n + self.m;
        for j in first_art..ncols {
            self.upper[j] = 0.0;
            self.lower[j] = 0.0;
            if self.basic_row[j].is_none() {
                self.x[j] = 0.0;
            }
        }
        for r in 0..self.m {
            let b = self.basis[r];
            if b < first_art {
                continue;
            }
            let mut best = None;
            let mut best_v = 1e-9;
            for j in 0..first_art {
                if self.basic_row[j].is_none() && self.tab[r * ncols + j].abs() > best_v {
                    best_v = self.tab[r * ncols + j].abs();
                    best = Some(j);
                }
            }
            if let Some(q) = best {
                // Degenerate pivot: the artificial sits at zero (up to the
                // phase-one residue, which the next refactorization absorbs).
                self.x[b] = 0.0;
                self.pivot(r, q);
            }
        }
    }
}

/// The LP relaxation of `subproblem` with the given objective.
pub fn relaxation_lp(instance: &MoilpInstance, subproblem: &Subproblem, objective: Vec<f64>) -> LpProblem {
    let mut lp = LpProblem::new(
        objective,
        subproblem.fixed_lower.iter().map(|&v| v as f64).collect(),
        subproblem.fixed_upper.iter().map(|&v| v as f64).collect(),
    );
    for (i, row) in instance.rows().iter().enumerate() {
        let sense = match row.sense {
            RowSense::Le => LpSense::Le,
            RowSense::Eq => LpSense::Eq,
        };
        lp.rows.push(LpRow::new(instance.row_f64(i).to_vec(), sense, instance.rhs_f64(i)));
    }
    lp
}

/// Weighted-sum objective `w^T C` as a float vector.
pub fn weighted_objective(instance: &MoilpInstance, weights: &[f64]) -> Vec<f64> {
    let n = instance.num_vars();
    let mut c = vec![0.0; n];
    for (row, &w) in instance.objectives().iter().zip(weights) {
        if w != 0.0 {
            for (cj, &v) in c.iter_mut().zip(row) {
                *cj += w * v as f64;
            }
        }
    }
    c
}

/// Minimizes `(w^T C) x` over the LP relaxation of `subproblem`.
pub fn solve_weighted_sum(
    solver: &mut LpSolver,
    instance: &MoilpInstance,
    subproblem: &Subproblem,
    weights: &[f64],
) -> Result<LpResult, LpError> {
    if weights.len() != instance.num_objectives() {
        return Err(LpError::Malformed("weight vector length differs from p".into()));
    }
    if subproblem.is_syntactically_infeasible() {
        return Ok(LpResult::infeasible());
    }
    let lp = relaxation_lp(instance, subproblem, weighted_objective(instance, weights));
    solver.solve(&lp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::from_knapsack;

    #[test]
    fn bound_attained_minimum() {
        let lp = LpProblem::new(vec![1.0, 0.0, 0.0], vec![0.0; 3], vec![1.0; 3]);
        let res = solve_lp(&lp).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert_eq!(res.x[0], 0.0);
        assert_eq!(res.objective_value, 0.0);
    }

    #[test]
    fn two_variable_single_row() {
        // Basic solutions of x1 + 2 x2 <= 2 on the unit box: (0,0) 0, (1,0) -2,
        // (0,1) -3, (1,0.5) -3.5; the last is optimal.
        let lp = LpProblem::new(vec![-2.0, -3.0], vec![0.0; 2], vec![1.0; 2])
            .with_row(vec![1.0, 2.0], LpSense::Le, 2.0);
        let res = solve_lp(&lp).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert!((res.x[0] - 1.0).abs() < 1e-9);
        assert!((res.x[1] - 0.5).abs() < 1e-9);
        assert!((res.objective_value + 3.5).abs() < 1e-9);
        // Dual of the row: d(value)/d(rhs) = -1.5
        assert!((res.duals[0] + 1.5).abs() < 1e-9);
    }

    #[test]
    fn zero_row_infeasible() {
        let lp = LpProblem::new(vec![1.0, 1.0], vec![0.0; 2], vec![1.0; 2])
            .with_row(vec![0.0, 0.0], LpSense::Le, -1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y s.t. x + y = 1.5, x - y >= 0.5, box [0, 1]
        let lp = LpProblem::new(vec![1.0, 2.0], vec![0.0; 2], vec![1.0; 2])
            .with_row(vec![1.0, 1.0], LpSense::Eq, 1.5)
            .with_row(vec![1.0, -1.0], LpSense::Ge, 0.5);
        let res = solve_lp(&lp).unwrap();
        assert!(res.is_optimal());
        assert!((res.x[0] - 1.0).abs() < 1e-9 && (res.x[1] - 0.5).abs() < 1e-9);
        assert!((res.objective_value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn free_variable_and_unbounded() {
        let lp = LpProblem::new(vec![1.0, 0.0], vec![f64::NEG_INFINITY, 0.0], vec![f64::INFINITY, 1.0])
            .with_row(vec![-1.0, 1.0], LpSense::Le, 3.0);
        let res = solve_lp(&lp).unwrap();
        assert!(res.is_optimal());
        assert!((res.x[0] + 3.0).abs() < 1e-9);

        let lp = LpProblem::new(vec![-1.0], vec![0.0], vec![f64::INFINITY]);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn weighted_sum_on_single_item_knapsack() {
        let inst = from_knapsack(&[1], 1, &[vec![5], vec![7]]).unwrap();
        let sub = Subproblem::root(&inst);
        let mut solver = LpSolver::new();
        let res = solve_weighted_sum(&mut solver, &inst, &sub, &[1.0, 1.0]).unwrap();
        assert!(res.is_optimal());
        assert!((res.x[0] - 1.0).abs() < 1e-9);
        assert!((res.objective_value + 12.0).abs() < 1e-9);
    }

    #[test]
    fn near_lexicographic_weights_prefer_first_objective() {
        // Item 0 is best for objective 1, item 1 for objective 2; only one fits.
        let inst = from_knapsack(&[1, 1], 1, &[vec![9, 2], vec![1, 8]]).unwrap();
        let sub = Subproblem::root(&inst);
        let mut solver = LpSolver::new();
        let a = solve_weighted_sum(&mut solver, &inst, &sub, &[1.0, 1e-4]).unwrap();
        let b = solve_weighted_sum(&mut solver, &inst, &sub, &[1e-4, 1.0]).unwrap();
        let ya = inst.evaluate_f64(&a.x);
        let yb = inst.evaluate_f64(&b.x);
        assert!(ya[0] < yb[0]);
        assert!(yb[1] < ya[1]);
    }

    #[test]
    fn conflicting_gap_fixings_infeasible() {
        let costs = vec![vec![vec![1, 1], vec![1, 1]]; 2];
        let inst = crate::model::from_gap(&costs, &[vec![1, 1], vec![1, 1]], &[2, 2]).unwrap();
        let mut sub = Subproblem::root(&inst);
        // job 0 assigned to neither machine
        sub.fixed_upper[crate::model::gap_var(0, 0, 2)] = 0;
        sub.fixed_upper[crate::model::gap_var(1, 0, 2)] = 0;
        let mut solver = LpSolver::new();
        let res = solve_weighted_sum(&mut solver, &inst, &sub, &[1.0, 1.0]).unwrap();
        assert_eq!(res.status, LpStatus::Infeasible);
    }

    #[test]
    fn deterministic() {
        let lp = LpProblem::new(vec![-1.0, -1.0, -1.0], vec![0.0; 3], vec![1.0; 3])
            .with_row(vec![1.0, 1.0, 1.0], LpSense::Le, 1.5)
            .with_row(vec![1.0, -1.0, 0.0], LpSense::Eq, 0.0);
        assert_eq!(solve_lp(&lp).unwrap(), solve_lp(&lp).unwrap());
    }
}
