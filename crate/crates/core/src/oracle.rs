//! Ground truth by exhaustive enumeration, and exact hypervolume for two and
//! three objectives.

use thiserror::Error;

use crate::dominance::dominates;
use crate::model::{to_display_sense, MoilpInstance};

/// Largest number of integer points the enumerator will visit (`2^25`).
pub const ENUMERATION_BUDGET: u128 = 1 << 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("integer box has {points} points, more than the budget of {budget}")]
    BudgetExceeded { points: u128, budget: u128 },
    #[error("point {point:?} exceeds the reference point {reference:?}")]
    AboveReference { point: Vec<i64>, reference: Vec<i64> },
    #[error("hypervolume supports 2 or 3 objectives, got {0}")]
    Dimension(usize),
}

/// A sorted list of pairwise nondominated images.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParetoFront {
    pub points: Vec<Vec<i64>>,
}

impl ParetoFront {
    /// Filters `points` (minimization sense) down to the nondominated ones,
    /// removing duplicates, and sorts them lexicographically.
    pub fn from_min_images(points: Vec<Vec<i64>>) -> Self {
        ParetoFront {
            points: nondominated_filter(points),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Nondominated subset of `points` under minimization, sorted and deduplicated.
pub fn nondominated_filter(mut points: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    points.sort();
    points.dedup();
    // lexicographic order: a point can only be dominated by an earlier one
    let mut kept: Vec<Vec<i64>> = Vec::with_capacity(points.len());
    for p in points {
        if !kept.iter().any(|k| dominates(k, &p)) {
            kept.push(p);
        }
    }
    kept
}

/// Calls `visit` on every integer point of the instance's variable box.
fn for_each_point<F: FnMut(&[i64])>(instance: &MoilpInstance, mut visit: F) -> Result<(), OracleError> {
    let (lo, hi) = (instance.var_lower(), instance.var_upper());
    let mut points: u128 = 1;
    for (l, u) in lo.iter().zip(hi) {
        points = points.saturating_mul((u - l + 1).max(0) as u128);
    }
    if points > ENUMERATION_BUDGET {
        return Err(OracleError::BudgetExceeded {
            points,
            budget: ENUMERATION_BUDGET,
        });
    }
    if points == 0 {
        return Ok(());
    }
    let mut x = lo.to_vec();
    loop {
        visit(&x);
        let mut i = 0;
        loop {
            if i == x.len() {
                return Ok(());
            }
            if x[i] < hi[i] {
                x[i] += 1;
                break;
            }
            x[i] = lo[i];
            i += 1;
        }
    }
}

/// All integer feasible solutions, checked in exact rational arithmetic.
pub fn feasible_solutions(instance: &MoilpInstance) -> Result<Vec<Vec<i64>>, OracleError> {
    let mut out = Vec::new();
    for_each_point(instance, |x| {
        if instance.is_feasible(x) {
            out.push(x.to_vec());
        }
    })?;
    Ok(out)
}

/// Nondominated images in minimization sense.
pub fn brute_force_min_front(instance: &MoilpInstance) -> Result<ParetoFront, OracleError> {
    let mut images = Vec::new();
    for_each_point(instance, |x| {
        if instance.is_feasible(x) {
            images.push(instance.evaluate(x));
        }
    })?;
    Ok(ParetoFront::from_min_images(images))
}

/// Nondominated images in the instance's original sense, sorted.
pub fn brute_force_front(instance: &MoilpInstance) -> Result<ParetoFront, OracleError> {
    let front = brute_force_min_front(instance)?;
    let mut points: Vec<Vec<i64>> = front.points.iter().map(|y| to_display_sense(y, instance)).collect();
    points.sort();
    Ok(ParetoFront { points })
}

fn check_reference(points: &[Vec<i64>], reference: &[i64]) -> Result<(), OracleError> {
    for p in points {
        if p.len() != reference.len() {
            return Err(OracleError::Dimension(p.len()));
        }
        if p.iter().zip(reference).any(|(a, r)| a > r) {
            return Err(OracleError::AboveReference {
                point: p.clone(),
                reference: reference.to_vec(),
            });
        }
    }
    Ok(())
}

/// Area dominated by 2-D points below `reference` (minimization).
fn sweep_2d(points: &[[i64; 2]], reference: [i64; 2]) -> i128 {
    let mut pts = points.to_vec();
    pts.sort();
    let mut area: i128 = 0;
    // walk x ascending; each strip's height is set by the running minimum y
    let mut running = reference[1];
    for (idx, p) in pts.iter().enumerate() {
        running = running.min(p[1]);
        let next_x = pts.get(idx + 1).map_or(reference[0], |q| q[0]);
        area += (next_x - p[0]) as i128 * (reference[1] - running) as i128;
    }
    area
}

/// Exact hypervolume of the union of boxes `[y, reference]` for `p` in {2, 3}.
pub fn hypervolume(points: &[Vec<i64>], reference: &[i64]) -> Result<f64, OracleError> {
    let p = reference.len();
    if !(2..=3).contains(&p) {
        return Err(OracleError::Dimension(p));
    }
    check_reference(points, reference)?;
    if p == 2 {
        let pts: Vec<[i64; 2]> = points.iter().map(|v| [v[0], v[1]]).collect();
        return Ok(sweep_2d(&pts, [reference[0], reference[1]]) as f64);
    }
    let mut levels: Vec<i64> = points.iter().map(|v| v[2]).collect();
    levels.sort_unstable();
    levels.dedup();
    let mut total: i128 = 0;
    for (k, &z) in levels.iter().enumerate() {
        let top = levels.get(k + 1).copied().unwrap_or(reference[2]);
        let slab: Vec<[i64; 2]> = points.iter().filter(|v| v[2] <= z).map(|v| [v[0], v[1]]).collect();
        total += sweep_2d(&slab, [reference[0], reference[1]]) * (top - z) as i128;
    }
    Ok(total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{from_knapsack, MoilpInstance, Row, RowSense};

    #[test]
    fn three_item_knapsack_front() {
        let inst = from_knapsack(&[2, 2, 1], 3, &[vec![3, 1, 1], vec![1, 3, 1]]).unwrap();
        let front = brute_force_front(&inst).unwrap();
        assert_eq!(front.points, vec![vec![2, 4], vec![4, 2]]);
    }

    #[test]
    fn conflicting_equalities_give_empty_front() {
        let rows = vec![
            Row::from_ints(&[1, 1], RowSense::Eq, 1),
            Row::from_ints(&[1, 1], RowSense::Eq, 2),
        ];
        let inst = MoilpInstance::new(vec![vec![1, 0], vec![0, 1]], rows, vec![0, 0], vec![1, 1]).unwrap();
        assert!(brute_force_front(&inst).unwrap().is_empty());
    }

    #[test]
    fn single_item_front() {
        let inst = from_knapsack(&[1], 1, &[vec![5], vec![7]]).unwrap();
        assert_eq!(brute_force_front(&inst).unwrap().points, vec![vec![5, 7]]);
    }

    #[test]
    fn filter_is_idempotent() {
        let pts = vec![vec![3, 1], vec![1, 3], vec![2, 2], vec![3, 3], vec![1, 3]];
        let once = nondominated_filter(pts);
        assert_eq!(once, vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert_eq!(nondominated_filter(once.clone()), once);
    }

    #[test]
    fn hypervolume_examples() {
        assert_eq!(hypervolume(&[vec![0, 0]], &[1, 1]).unwrap(), 1.0);
        assert_eq!(hypervolume(&[vec![0, 2], vec![2, 0]], &[3, 3]).unwrap(), 5.0);
        assert_eq!(hypervolume(&[vec![0, 0, 0]], &[2, 2, 2]).unwrap(), 8.0);
        assert_eq!(hypervolume(&[], &[2, 2, 2]).unwrap(), 0.0);
        // union of two 3-D boxes: 2*2*1 + 1*1*2 overlap-free parts
        assert_eq!(hypervolume(&[vec![0, 0, 1], vec![1, 1, 0]], &[2, 2, 2]).unwrap(), 5.0);
    }

    #[test]
    fn hypervolume_rejects_points_above_reference() {
        assert!(matches!(
            hypervolume(&[vec![4, 0]], &[3, 3]),
            Err(OracleError::AboveReference { .. })
        ));
        assert_eq!(hypervolume(&[vec![0]], &[1]), Err(OracleError::Dimension(1)));
    }

    #[test]
    fn enumeration_budget() {
        let n = 26;
        let inst = from_knapsack(&vec![1; n], 3, &[vec![1; n], vec![1; n]]).unwrap();
        assert!(matches!(brute_force_front(&inst), Err(OracleError::BudgetExceeded { .. })));
    }
}
