//! Gap measures between a node's lower bound set and the incumbent list,
//! used to rank open nodes under best-first style selection.
//!
//! Scores are taken over the *relevant* local upper bounds, those the node's
//! bound set still reaches below (see [`relevant_upper_bounds`]). Before the
//! first incumbent is found every score is `+inf`.

use crate::dominance::{relevant_upper_bounds, IncumbentList, LocalUpperBoundSet};
use crate::engine::Selection;
use crate::lbs::LowerBoundSet;
use crate::simplex::{LpError, LpProblem, LpSense, LpSolver, LpStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapScore {
    pub value: f64,
    pub strategy: Selection,
}

impl GapScore {
    fn new(value: f64, strategy: Selection) -> Self {
        debug_assert!(value >= 0.0);
        GapScore { value, strategy }
    }

    fn infinite(strategy: Selection) -> Self {
        GapScore {
            value: f64::INFINITY,
            strategy,
        }
    }
}

fn factorial(p: usize) -> f64 {
    (1..=p).map(|k| k as f64).product()
}

/// Distances `t_i` from `u` along `-e_i` to the boundary of the facet system,
/// clamped to `[0, u_i - ideal_i]`.
pub fn ray_lengths(lbs: &LowerBoundSet, u: &[i64]) -> Vec<f64> {
    let p = u.len();
    (0..p)
        .map(|i| {
            let ui = u[i] as f64;
            let mut t = ui - lbs.ideal_point[i];
            for f in &lbs.facets {
                if f.normal[i] > 0.0 {
                    let at_u: f64 = f.normal.iter().zip(u).map(|(l, &v)| l * v as f64).sum();
                    t = t.min((at_u - f.offset) / f.normal[i]);
                }
            }
            t.max(0.0)
        })
        .collect()
}

/// Volume of the simplex spanned by `u` and the points where its coordinate
/// rays meet the lower bound set.
pub fn simplex_volume(lbs: &LowerBoundSet, u: &[i64]) -> f64 {
    ray_lengths(lbs, u).iter().product::<f64>() / factorial(u.len())
}

/// Volume of the box between `ideal` and `u`, zero when `u` is not above it.
pub fn box_volume(u: &[i64], ideal: &[f64]) -> f64 {
    u.iter().zip(ideal).map(|(&ui, &li)| (ui as f64 - li).max(0.0)).product()
}

/// Largest `s >= 0` such that some facet-feasible `y` has `y <= u - s 1`.
/// Zero when no such point exists.
pub fn enclosure_width(solver: &mut LpSolver, lbs: &LowerBoundSet, u: &[i64]) -> Result<f64, LpError> {
    let p = u.len();
    // variables: y_1..y_p, s ; minimize -s
    let mut objective = vec![0.0; p + 1];
    objective[p] = -1.0;
    let mut lower: Vec<f64> = lbs.ideal_point.clone();
    lower.push(0.0);
    let mut upper: Vec<f64> = u.iter().map(|&v| v as f64).collect();
    upper.push(f64::INFINITY);
    if lower.iter().zip(&upper).any(|(l, h)| l > h) {
        return Ok(0.0);
    }
    let mut lp = LpProblem::new(objective, lower, upper);
    for i in 0..p {
        let mut row = vec![0.0; p + 1];
        row[i] = 1.0;
        row[p] = 1.0;
        lp = lp.with_row(row, LpSense::Le, u[i] as f64);
    }
    for f in lbs.weighted_facets() {
        let mut row = f.normal.clone();
        row.push(0.0);
        lp = lp.with_row(row, LpSense::Ge, f.offset);
    }
    let res = solver.solve(&lp)?;
    match res.status {
        LpStatus::Optimal => Ok(res.x[p].max(0.0)),
        LpStatus::Infeasible => Ok(0.0),
        LpStatus::Unbounded => Err(LpError::Numerical("enclosure width LP unbounded".into())),
    }
}

fn max_over<F: FnMut(&[i64]) -> f64>(lubs: &LocalUpperBoundSet, relevant: &[usize], mut f: F) -> f64 {
    relevant
        .iter()
        .map(|&k| f(&lubs.bounds()[k]))
        .fold(0.0, f64::max)
}

pub fn hvg_over(lbs: &LowerBoundSet, lubs: &LocalUpperBoundSet, relevant: &[usize]) -> GapScore {
    if lubs.is_initial() {
        return GapScore::infinite(Selection::Hvg);
    }
    GapScore::new(max_over(lubs, relevant, |u| simplex_volume(lbs, u)), Selection::Hvg)
}

pub fn hvb_over(lbs: &LowerBoundSet, lubs: &LocalUpperBoundSet, relevant: &[usize]) -> GapScore {
    if lubs.is_initial() {
        return GapScore::infinite(Selection::Hvb);
    }
    GapScore::new(
        max_over(lubs, relevant, |u| box_volume(u, &lbs.ideal_point)),
        Selection::Hvb,
    )
}

pub fn woe_over(
    solver: &mut LpSolver,
    lbs: &LowerBoundSet,
    lubs: &LocalUpperBoundSet,
    relevant: &[usize],
) -> Result<GapScore, LpError> {
    if lubs.is_initial() {
        return Ok(GapScore::infinite(Selection::Woe));
    }
    let mut best = 0.0f64;
    for &k in relevant {
        best = best.max(enclosure_width(solver, lbs, &lubs.bounds()[k])?);
    }
    Ok(GapScore::new(best, Selection::Woe))
}

/// Local hypervolume gap: the largest simplex volume over relevant bounds.
pub fn score_hvg(
    solver: &mut LpSolver,
    lbs: &LowerBoundSet,
    lubs: &LocalUpperBoundSet,
) -> Result<GapScore, LpError> {
    let relevant = relevant_upper_bounds(solver, lbs, lubs, crate::dominance::DOMINANCE_EPS)?;
    Ok(hvg_over(lbs, lubs, &relevant))
}

/// Largest search-zone box between a relevant bound and the local ideal point.
pub fn score_hvb(
    solver: &mut LpSolver,
    lbs: &LowerBoundSet,
    lubs: &LocalUpperBoundSet,
) -> Result<GapScore, LpError> {
    let relevant = relevant_upper_bounds(solver, lbs, lubs, crate::dominance::DOMINANCE_EPS)?;
    Ok(hvb_over(lbs, lubs, &relevant))
}

/// Width of enclosure: the largest, over relevant bounds, minimal
/// single-objective distance to the lower bound set.
pub fn score_woe(
    solver: &mut LpSolver,
    lbs: &LowerBoundSet,
    lubs: &LocalUpperBoundSet,
) -> Result<GapScore, LpError> {
    let relevant = relevant_upper_bounds(solver, lbs, lubs, crate::dominance::DOMINANCE_EPS)?;
    woe_over(solver, lbs, lubs, &relevant)
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let directed = |from: &[Vec<f64>], to: &[Vec<f64>]| {
        from.iter()
            .map(|x| to.iter().map(|y| euclid(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Hausdorff distance between the extreme points and the incumbent images.
pub fn score_hd(lbs: &LowerBoundSet, incumbents: &IncumbentList) -> GapScore {
    if incumbents.is_empty() {
        return GapScore::infinite(Selection::Hd);
    }
    let lower: Vec<Vec<f64>> = lbs.extreme_points.iter().map(|e| e.y.clone()).collect();
    let upper: Vec<Vec<f64>> = incumbents
        .images()
        .map(|y| y.iter().map(|&v| v as f64).collect())
        .collect();
    GapScore::new(hausdorff(&lower, &upper), Selection::Hd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbs::{ExtremePoint, Facet};

    fn diagonal_lbs(ideal: [f64; 2]) -> LowerBoundSet {
        // y1 + y2 >= 2 with axis supports at the ideal point
        LowerBoundSet {
            extreme_points: vec![
                ExtremePoint { y: vec![ideal[0], 2.0 - ideal[0]], x: vec![] },
                ExtremePoint { y: vec![2.0 - ideal[1], ideal[1]], x: vec![] },
            ],
            facets: vec![
                Facet::normalized(vec![1.0, 0.0], ideal[0]),
                Facet::normalized(vec![1.0, 1.0], 2.0),
                Facet::normalized(vec![0.0, 1.0], ideal[1]),
            ],
            ideal_point: ideal.to_vec(),
            is_empty: false,
        }
    }

    fn with_incumbent() -> LocalUpperBoundSet {
        let mut l = LocalUpperBoundSet::new(vec![100, 100]);
        l.insert(&[4, 4]);
        l
    }

    #[test]
    fn simplex_volume_ray_line_intersection() {
        let lbs = diagonal_lbs([-2.0, -2.0]);
        assert_eq!(ray_lengths(&lbs, &[4, 4]), vec![6.0, 6.0]);
        assert_eq!(simplex_volume(&lbs, &[4, 4]), 18.0);
    }

    #[test]
    fn box_volumes() {
        assert_eq!(box_volume(&[5, 5], &[1.0, 2.0]), 12.0);
        assert_eq!(box_volume(&[1, 1], &[2.0, 2.0]), 0.0);
        assert_eq!(box_volume(&[3, 3, 3], &[0.0, 0.0, 0.0]), 27.0);
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff(&[vec![0.0, 0.0]], &[vec![3.0, 4.0]]), 5.0);
        let s = vec![vec![1.0, 2.0], vec![3.0, 0.0]];
        assert_eq!(hausdorff(&s, &s), 0.0);
        assert_eq!(hausdorff(&[vec![0.0, 0.0], vec![10.0, 0.0]], &[vec![0.0, 0.0]]), 10.0);
    }

    #[test]
    fn enclosure_width_examples() {
        let lbs = diagonal_lbs([-2.0, -2.0]);
        let mut s = LpSolver::new();
        assert!((enclosure_width(&mut s, &lbs, &[4, 4]).unwrap() - 3.0).abs() < 1e-9);
        // (1,1) lies on the facet boundary
        assert!(enclosure_width(&mut s, &lbs, &[1, 1]).unwrap().abs() < 1e-9);
    }

    #[test]
    fn no_incumbents_scores_are_infinite() {
        let lbs = diagonal_lbs([-2.0, -2.0]);
        let lubs = LocalUpperBoundSet::new(vec![100, 100]);
        let mut s = LpSolver::new();
        assert_eq!(score_hvg(&mut s, &lbs, &lubs).unwrap().value, f64::INFINITY);
        assert_eq!(score_hvb(&mut s, &lbs, &lubs).unwrap().value, f64::INFINITY);
        assert_eq!(score_woe(&mut s, &lbs, &lubs).unwrap().value, f64::INFINITY);
        assert_eq!(score_hd(&lbs, &IncumbentList::new()).value, f64::INFINITY);
    }

    #[test]
    fn bound_below_lower_set_is_skipped() {
        // lower set sits at y1 + y2 >= 2 with ideal (0,0); the only bound is
        // (1,1) after inserting incumbents that close everything else
        let lbs = diagonal_lbs([0.0, 0.0]);
        let mut lubs = LocalUpperBoundSet::new(vec![100, 100]);
        lubs.insert(&[1, 0]);
        lubs.insert(&[0, 1]);
        let mut s = LpSolver::new();
        let rel = relevant_upper_bounds(&mut s, &lbs, &lubs, crate::dominance::DOMINANCE_EPS).unwrap();
        assert!(rel.is_empty());
        assert_eq!(hvg_over(&lbs, &lubs, &rel).value, 0.0);
        assert_eq!(hvb_over(&lbs, &lubs, &rel).value, 0.0);
    }

    #[test]
    fn scores_with_one_incumbent() {
        let lbs = diagonal_lbs([-2.0, -2.0]);
        let lubs = with_incumbent();
        let mut s = LpSolver::new();
        let hvg = score_hvg(&mut s, &lbs, &lubs).unwrap().value;
        let hvb = score_hvb(&mut s, &lbs, &lubs).unwrap().value;
        // bounds (4,100) and (100,4): ray lengths (6, 102) -> 306
        assert!((hvg - 306.0).abs() < 1e-9);
        assert!((hvb - 6.0 * 102.0).abs() < 1e-9);
        assert!(hvg <= hvb);
    }
}
