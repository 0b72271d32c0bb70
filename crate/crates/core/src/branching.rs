//! Variable selection and binary branching.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lbs::LowerBoundSet;
use crate::model::{MoilpInstance, Sense, Subproblem};

/// Distance to the nearest integer above which a value counts as fractional.
pub const FRAC_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchRule {
    /// Most often fractional across extreme preimages.
    Mof,
    /// Largest summed distance to the nearest integer.
    Hf,
    /// Smallest sum of objective/weight ratios (static).
    Sr,
    /// Least often ratio-dominated (static).
    Dom,
}

impl BranchRule {
    pub const ALL: [BranchRule; 4] = [BranchRule::Mof, BranchRule::Hf, BranchRule::Sr, BranchRule::Dom];

    pub fn as_str(self) -> &'static str {
        match self {
            BranchRule::Mof => "mof",
            BranchRule::Hf => "hf",
            BranchRule::Sr => "sr",
            BranchRule::Dom => "dom",
        }
    }

    pub fn is_static(self) -> bool {
        matches!(self, BranchRule::Sr | BranchRule::Dom)
    }
}

impl fmt::Display for BranchRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BranchRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mof" => Ok(BranchRule::Mof),
            "hf" => Ok(BranchRule::Hf),
            "sr" => Ok(BranchRule::Sr),
            "dom" => Ok(BranchRule::Dom),
            other => Err(format!("unknown branching rule `{other}` (expected mof|hf|sr|dom)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BranchError {
    #[error("no fractional value among unfixed variables")]
    NoFractionalVariable,
    #[error("every variable is fixed")]
    NoUnfixedVariable,
    #[error("variable {0} is already fixed")]
    FixedVariable(usize),
    #[error("split value {value} for variable {var} is outside its domain [{lower}, {upper}]")]
    SplitOutOfRange { var: usize, value: i64, lower: i64, upper: i64 },
}

/// A branching rule with the variable ranking the static rules need.
#[derive(Debug, Clone)]
pub struct BranchingRule {
    pub tag: BranchRule,
    /// SR order, used by SR itself and as the fallback for MOF/HF.
    sr_order: Vec<usize>,
    dom_order: Option<Vec<usize>>,
}

impl BranchingRule {
    pub fn new(tag: BranchRule, instance: &MoilpInstance) -> Self {
        let sr_order = sum_of_ratios_order(instance);
        let dom_order = (tag == BranchRule::Dom).then(|| dominance_order(instance));
        BranchingRule {
            tag,
            sr_order,
            dom_order,
        }
    }

    /// The precomputed ranking for SR or DOM, `None` for dynamic rules.
    pub fn static_order(&self) -> Option<&[usize]> {
        match self.tag {
            BranchRule::Sr => Some(&self.sr_order),
            BranchRule::Dom => self.dom_order.as_deref(),
            _ => None,
        }
    }

    fn first_unfixed(order: &[usize], sub: &Subproblem) -> Result<usize, BranchError> {
        order
            .iter()
            .copied()
            .find(|&i| !sub.is_fixed(i))
            .ok_or(BranchError::NoUnfixedVariable)
    }

    /// Picks the branching variable. MOF and HF report
    /// [`BranchError::NoFractionalVariable`] when every extreme preimage is
    /// integral on the unfixed variables.
    pub fn choose_variable(&self, lbs: &LowerBoundSet, sub: &Subproblem) -> Result<usize, BranchError> {
        if sub.unfixed().next().is_none() {
            return Err(BranchError::NoUnfixedVariable);
        }
        match self.tag {
            BranchRule::Mof => argmax_fractional(lbs, sub, |v| if frac_dist(v) > FRAC_TOL { 1.0 } else { 0.0 }),
            BranchRule::Hf => argmax_fractional(lbs, sub, |v| {
                let d = frac_dist(v);
                if d > FRAC_TOL {
                    d
                } else {
                    0.0
                }
            }),
            BranchRule::Sr => Self::first_unfixed(&self.sr_order, sub),
            BranchRule::Dom => Self::first_unfixed(self.dom_order.as_deref().unwrap_or(&self.sr_order), sub),
        }
    }

    /// Variable and split value, falling back to the SR order when no
    /// preimage is fractional.
    pub fn select(&self, lbs: &LowerBoundSet, sub: &Subproblem) -> Result<(usize, i64), BranchError> {
        let k = match self.choose_variable(lbs, sub) {
            Ok(k) => k,
            Err(BranchError::NoFractionalVariable) => Self::first_unfixed(&self.sr_order, sub)?,
            Err(e) => return Err(e),
        };
        Ok((k, split_value(lbs, sub, k)))
    }
}

fn frac_dist(v: f64) -> f64 {
    (v - v.round()).abs()
}

fn argmax_fractional<F: Fn(f64) -> f64>(lbs: &LowerBoundSet, sub: &Subproblem, score: F) -> Result<usize, BranchError> {
    let mut best: Option<(usize, f64)> = None;
    for i in sub.unfixed() {
        let s: f64 = lbs.extreme_points.iter().filter(|e| !e.x.is_empty()).map(|e| score(e.x[i])).sum();
        if s > 0.0 && best.map_or(true, |(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i).ok_or(BranchError::NoFractionalVariable)
}

/// Split point for variable `k`: the floor of its value in the extreme
/// preimage where it is most fractional, kept inside the domain so both
/// children are non-empty.
pub fn split_value(lbs: &LowerBoundSet, sub: &Subproblem, k: usize) -> i64 {
    let (lo, hi) = (sub.fixed_lower[k], sub.fixed_upper[k]);
    let mut best: Option<(f64, f64)> = None;
    for e in lbs.extreme_points.iter().filter(|e| !e.x.is_empty()) {
        let d = frac_dist(e.x[k]);
        if best.map_or(true, |(bd, _)| d > bd) {
            best = Some((d, e.x[k]));
        }
    }
    let raw = best.map_or(lo, |(_, v)| (v + FRAC_TOL).floor() as i64);
    raw.clamp(lo, hi - 1)
}

/// Variables ordered by ascending `sum_k c^k_i / w_i` in the original sense.
fn sum_of_ratios_order(instance: &MoilpInstance) -> Vec<usize> {
    let n = instance.num_vars();
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(meta) = instance.metadata() {
        let sums: Vec<f64> = (0..n).map(|i| meta.ratios(i).iter().sum()).collect();
        order.sort_by(|&a, &b| sums[a].total_cmp(&sums[b]).then(a.cmp(&b)));
    }
    order
}

/// Variables ordered by ascending count of ratio vectors dominating theirs.
fn dominance_order(instance: &MoilpInstance) -> Vec<usize> {
    let n = instance.num_vars();
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(meta) = instance.metadata() {
        let ratios: Vec<Vec<f64>> = (0..n).map(|i| meta.ratios(i)).collect();
        let counts = dominated_counts(&ratios, meta.sense);
        order.sort_by_key(|&i| (counts[i], i));
    }
    order
}

/// For each vector, how many others dominate it. Larger is better under
/// `Maximize`, smaller under `Minimize`.
pub fn dominated_counts(ratios: &[Vec<f64>], sense: Sense) -> Vec<usize> {
    let better = |a: &[f64], b: &[f64]| -> bool {
        let ge = match sense {
            Sense::Maximize => a.iter().zip(b).all(|(x, y)| x >= y),
            Sense::Minimize => a.iter().zip(b).all(|(x, y)| x <= y),
        };
        ge && a != b
    };
    ratios
        .iter()
        .map(|r| ratios.iter().filter(|o| better(o, r)).count())
        .collect()
}

/// Splits `sub` on `x_k <= split` / `x_k >= split + 1`. Child ids are drawn
/// from `next_id`.
pub fn branch(
    sub: &Subproblem,
    k: usize,
    split: i64,
    next_id: &mut u64,
) -> Result<(Subproblem, Subproblem), BranchError> {
    if sub.is_fixed(k) {
        return Err(BranchError::FixedVariable(k));
    }
    let (lower, upper) = (sub.fixed_lower[k], sub.fixed_upper[k]);
    if split < lower || split >= upper {
        return Err(BranchError::SplitOutOfRange {
            var: k,
            value: split,
            lower,
            upper,
        });
    }
    let mut low = sub.clone();
    low.fixed_upper[k] = split;
    let mut high = sub.clone();
    high.fixed_lower[k] = split + 1;
    for child in [&mut low, &mut high] {
        child.depth = sub.depth + 1;
        child.node_id = *next_id;
        child.split = Some((k, split));
        *next_id += 1;
    }
    Ok((low, high))
}
