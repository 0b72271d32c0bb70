//! Incumbent list, local upper bounds of the search region, and fathoming.

use serde::{Deserialize, Serialize};

use crate::lbs::{integer_feasible_extremes, LowerBoundSet};
use crate::model::{MoilpInstance, SolutionPoint};
use crate::simplex::{LpError, LpProblem, LpSense, LpSolver, LpStatus};

/// Strictness margin of the dominance LP.
pub const DOMINANCE_EPS: f64 = 1e-6;

/// `a <= b` componentwise.
pub fn weakly_dominates(a: &[i64], b: &[i64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// `a <= b` componentwise with `a != b`.
pub fn dominates(a: &[i64], b: &[i64]) -> bool {
    weakly_dominates(a, b) && a != b
}

/// `a < b` in every component.
pub fn strictly_below(a: &[i64], b: &[i64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x < y)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InsertOutcome {
    Accepted { removed: Vec<SolutionPoint> },
    RejectedDominated,
}

/// Mutually nondominated integer solutions found so far.
#[derive(Debug, Clone, Default)]
pub struct IncumbentList {
    entries: Vec<SolutionPoint>,
}

impl IncumbentList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[SolutionPoint] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn images(&self) -> impl Iterator<Item = &[i64]> {
        self.entries.iter().map(|e| e.y.as_slice())
    }

    pub fn contains_image(&self, y: &[i64]) -> bool {
        self.entries.iter().any(|e| e.y == y)
    }

    /// Adds `candidate` unless an entry weakly dominates it; entries dominated
    /// by the candidate are removed and returned.
    pub fn try_insert(&mut self, candidate: SolutionPoint) -> InsertOutcome {
        if self.entries.iter().any(|e| weakly_dominates(&e.y, &candidate.y)) {
            return InsertOutcome::RejectedDominated;
        }
        let (removed, kept): (Vec<_>, Vec<_>) = std::mem::take(&mut self.entries)
            .into_iter()
            .partition(|e| dominates(&candidate.y, &e.y));
        self.entries = kept;
        self.entries.push(candidate);
        InsertOutcome::Accepted { removed }
    }

    pub fn into_entries(self) -> Vec<SolutionPoint> {
        self.entries
    }
}

/// Maximal corners `u` of the search region: a point `y` is not weakly
/// dominated by any incumbent iff `y < u` for some bound `u`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalUpperBoundSet {
    bounds: Vec<Vec<i64>>,
    reference: Vec<i64>,
}

impl LocalUpperBoundSet {
    /// Starts from the single corner `reference`, which must exceed every
    /// feasible image componentwise.
    pub fn new(reference: Vec<i64>) -> Self {
        LocalUpperBoundSet {
            bounds: vec![reference.clone()],
            reference,
        }
    }

    pub fn bounds(&self) -> &[Vec<i64>] {
        &self.bounds
    }

    pub fn reference(&self) -> &[i64] {
        &self.reference
    }

    /// True until the first point is inserted.
    pub fn is_initial(&self) -> bool {
        self.bounds.len() == 1 && self.bounds[0] == self.reference
    }

    /// Whether `y` lies in the search region.
    pub fn in_search_region(&self, y: &[i64]) -> bool {
        self.bounds.iter().any(|u| strictly_below(y, u))
    }

    /// Removes the region weakly dominated by `z` from the search region.
    pub fn insert(&mut self, z: &[i64]) {
        debug_assert!(strictly_below(z, &self.reference));
        let (affected, mut kept): (Vec<Vec<i64>>, Vec<Vec<i64>>) = std::mem::take(&mut self.bounds)
            .into_iter()
            .partition(|u| strictly_below(z, u));
        if affected.is_empty() {
            self.bounds = kept;
            return;
        }
        let mut candidates: Vec<Vec<i64>> = Vec::new();
        for u in &affected {
            for i in 0..z.len() {
                let mut c = u.clone();
                c[i] = z[i];
                if !candidates.contains(&c) {
                    candidates.push(c);
                }
            }
        }
        let maximal: Vec<Vec<i64>> = candidates
            .iter()
            .filter(|c| {
                !candidates.iter().chain(kept.iter()).any(|o| o != *c && weakly_dominates(c, o))
            })
            .cloned()
            .collect();
        kept.extend(maximal);
        self.bounds = kept;
    }
}

/// Functional form of [`LocalUpperBoundSet::insert`].
pub fn update_local_upper_bounds(lubs: &LocalUpperBoundSet, new_point: &[i64]) -> LocalUpperBoundSet {
    let mut next = lubs.clone();
    next.insert(new_point);
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Fathom {
    Infeasible,
    Optimal,
    Dominated,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominanceTest {
    /// Per local upper bound, an LP decides whether the bound set reaches
    /// strictly below it.
    #[default]
    Exact,
    /// Only checks that every extreme point is weakly dominated by an
    /// incumbent. Necessary, not sufficient: can discard nondominated points.
    ExtremePointsOnly,
}

/// Outcome of a fathoming test together with the local upper bounds that
/// remain open at the node.
#[derive(Debug, Clone, PartialEq)]
pub struct FathomReport {
    pub verdict: Fathom,
    /// Indices into the local upper bound list.
    pub relevant: Vec<usize>,
}

/// Indices of local upper bounds `u` for which the facet system admits a point
/// `y <= u - eps`.
pub fn relevant_upper_bounds(
    solver: &mut LpSolver,
    lbs: &LowerBoundSet,
    lubs: &LocalUpperBoundSet,
    eps: f64,
) -> Result<Vec<usize>, LpError> {
    let mut out = Vec::new();
    if lbs.is_empty {
        return Ok(out);
    }
    for (k, u) in lubs.bounds().iter().enumerate() {
        if reaches_below(solver, lbs, u, eps)? {
            out.push(k);
        }
    }
    Ok(out)
}

/// Lower limits of `y` implied by the axis-aligned facets.
fn axis_floor(lbs: &LowerBoundSet) -> Vec<f64> {
    let mut floor = lbs.ideal_point.clone();
    for f in lbs.facets.iter().filter(|f| f.is_axis()) {
        if let Some(i) = f.normal.iter().position(|&v| v > 0.0) {
            floor[i] = floor[i].max(f.offset / f.normal[i]);
        }
    }
    floor
}

/// Whether `{y : facets} ∩ {y <= u - eps}` is non-empty.
pub fn reaches_below(
    solver: &mut LpSolver,
    lbs: &LowerBoundSet,
    u: &[i64],
    eps: f64,
) -> Result<bool, LpError> {
    let top: Vec<f64> = u.iter().map(|&v| v as f64 - eps).collect();
    let floor = axis_floor(lbs);
    if floor.iter().zip(&top).any(|(l, h)| l > h) {
        return Ok(false);
    }
    if lbs
        .extreme_points
        .iter()
        .any(|e| e.y.iter().zip(&top).all(|(y, h)| y <= h))
    {
        return Ok(true);
    }
    let p = top.len();
    let mut lp = LpProblem::new(vec![0.0; p], floor, top);
    for f in lbs.weighted_facets() {
        lp = lp.with_row(f.normal.clone(), LpSense::Ge, f.offset);
    }
    match solver.solve(&lp)?.status {
        LpStatus::Optimal => Ok(true),
        LpStatus::Infeasible => Ok(false),
        LpStatus::Unbounded => Err(LpError::Numerical("feasibility LP unbounded".into())),
    }
}

/// Classifies a node after its bound sets have been updated.
pub fn fathom_check(
    solver: &mut LpSolver,
    instance: &MoilpInstance,
    lbs: &LowerBoundSet,
    incumbents: &IncumbentList,
    lubs: &LocalUpperBoundSet,
    test: DominanceTest,
    eps: f64,
) -> Result<FathomReport, LpError> {
    if lbs.is_empty {
        return Ok(FathomReport {
            verdict: Fathom::Infeasible,
            relevant: Vec::new(),
        });
    }
    if lbs.is_single_point() {
        let pts = integer_feasible_extremes(lbs, instance);
        if pts.len() == 1 && incumbents.contains_image(&pts[0].y) {
            return Ok(FathomReport {
                verdict: Fathom::Optimal,
                relevant: Vec::new(),
            });
        }
    }
    let relevant = relevant_upper_bounds(solver, lbs, lubs, eps)?;
    let dominated = match test {
        DominanceTest::Exact => relevant.is_empty(),
        DominanceTest::ExtremePointsOnly => {
            !incumbents.is_empty()
                && lbs.extreme_points.iter().all(|e| {
                    incumbents
                        .images()
                        .any(|u| u.iter().zip(&e.y).all(|(&ui, &li)| ui as f64 <= li + 1e-6))
                })
        }
    };
    Ok(FathomReport {
        verdict: if dominated { Fathom::Dominated } else { Fathom::Open },
        relevant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbs::{ExtremePoint, Facet};
    use crate::model::{MoilpInstance, Row, RowSense};

    fn pt(y: &[i64]) -> SolutionPoint {
        SolutionPoint {
            x: vec![],
            y: y.to_vec(),
            display_y: y.to_vec(),
        }
    }

    fn list(points: &[&[i64]]) -> IncumbentList {
        let mut l = IncumbentList::new();
        for p in points {
            l.try_insert(pt(p));
        }
        l
    }

    #[test]
    fn insert_into_empty() {
        let mut l = IncumbentList::new();
        assert_eq!(l.try_insert(pt(&[4, 2])), InsertOutcome::Accepted { removed: vec![] });
    }

    #[test]
    fn insert_incomparable() {
        let mut l = list(&[&[1, 3], &[3, 1]]);
        assert_eq!(l.try_insert(pt(&[2, 2])), InsertOutcome::Accepted { removed: vec![] });
        assert_eq!(l.len(), 3);
    }

    #[test]
    fn insert_equal_rejected() {
        let mut l = list(&[&[2, 2]]);
        assert_eq!(l.try_insert(pt(&[2, 2])), InsertOutcome::RejectedDominated);
    }

    #[test]
    fn insert_removes_dominated() {
        let mut l = list(&[&[3, 3], &[1, 5]]);
        assert_eq!(
            l.try_insert(pt(&[2, 2])),
            InsertOutcome::Accepted {
                removed: vec![pt(&[3, 3])]
            }
        );
        let mut imgs: Vec<_> = l.images().map(|y| y.to_vec()).collect();
        imgs.sort();
        assert_eq!(imgs, vec![vec![1, 5], vec![2, 2]]);
    }

    fn sorted(l: &LocalUpperBoundSet) -> Vec<Vec<i64>> {
        let mut b = l.bounds().to_vec();
        b.sort();
        b
    }

    #[test]
    fn local_upper_bound_updates() {
        let l0 = LocalUpperBoundSet::new(vec![10, 10]);
        let l1 = update_local_upper_bounds(&l0, &[2, 3]);
        assert_eq!(sorted(&l1), vec![vec![2, 10], vec![10, 3]]);
        let l2 = update_local_upper_bounds(&l1, &[3, 2]);
        assert_eq!(sorted(&l2), vec![vec![2, 10], vec![3, 3], vec![10, 2]]);
        let l3 = update_local_upper_bounds(&l2, &[4, 4]);
        assert_eq!(l3, l2);
    }

    fn single_point_lbs(y: &[f64]) -> LowerBoundSet {
        LowerBoundSet {
            extreme_points: vec![ExtremePoint {
                y: y.to_vec(),
                x: vec![1.0],
            }],
            facets: (0..y.len())
                .map(|i| {
                    let mut n = vec![0.0; y.len()];
                    n[i] = 1.0;
                    Facet {
                        normal: n,
                        offset: y[i],
                    }
                })
                .collect(),
            ideal_point: y.to_vec(),
            is_empty: false,
        }
    }

    fn one_var_instance(c1: i64, c2: i64) -> MoilpInstance {
        MoilpInstance::new(vec![vec![c1], vec![c2]], vec![Row::from_ints(&[1], RowSense::Le, 1)], vec![0], vec![1])
            .unwrap()
    }

    #[test]
    fn fathom_infeasible() {
        let inst = one_var_instance(5, 5);
        let r = fathom_check(
            &mut LpSolver::new(),
            &inst,
            &LowerBoundSet::empty(2),
            &IncumbentList::new(),
            &LocalUpperBoundSet::new(vec![100, 100]),
            DominanceTest::Exact,
            DOMINANCE_EPS,
        )
        .unwrap();
        assert_eq!(r.verdict, Fathom::Infeasible);
    }

    #[test]
    fn fathom_optimal_single_point() {
        let inst = one_var_instance(5, 5);
        let lbs = single_point_lbs(&[5.0, 5.0]);
        let mut inc = IncumbentList::new();
        inc.try_insert(SolutionPoint::new(vec![1], &inst));
        let mut lubs = LocalUpperBoundSet::new(vec![100, 100]);
        lubs.insert(&[5, 5]);
        let r = fathom_check(&mut LpSolver::new(), &inst, &lbs, &inc, &lubs, DominanceTest::Exact, DOMINANCE_EPS)
            .unwrap();
        assert_eq!(r.verdict, Fathom::Optimal);
    }

    #[test]
    fn fathom_dominated_single_point() {
        let inst = one_var_instance(5, 5);
        let lbs = single_point_lbs(&[5.0, 5.0]);
        let inc = list(&[&[4, 4]]);
        let mut lubs = LocalUpperBoundSet::new(vec![100, 100]);
        lubs.insert(&[4, 4]);
        assert_eq!(sorted(&lubs), vec![vec![4, 100], vec![100, 4]]);
        let r = fathom_check(&mut LpSolver::new(), &inst, &lbs, &inc, &lubs, DominanceTest::Exact, DOMINANCE_EPS)
            .unwrap();
        assert_eq!(r.verdict, Fathom::Dominated);
    }

    #[test]
    fn fathom_open_without_incumbents() {
        let inst = one_var_instance(5, 5);
        let lbs = single_point_lbs(&[5.0, 5.0]);
        let r = fathom_check(
            &mut LpSolver::new(),
            &inst,
            &lbs,
            &IncumbentList::new(),
            &LocalUpperBoundSet::new(vec![100, 100]),
            DominanceTest::Exact,
            DOMINANCE_EPS,
        )
        .unwrap();
        assert_eq!(r.verdict, Fathom::Open);
        assert_eq!(r.relevant, vec![0]);
    }

    #[test]
    fn dominance_lp_sees_segment_below_bound() {
        // Extreme points (0,4) and (4,0), facet y1 + y2 >= 4. Neither extreme
        // point is below (3,3), but the segment passes through (2,2).
        let lbs = LowerBoundSet {
            extreme_points: vec![
                ExtremePoint { y: vec![0.0, 4.0], x: vec![] },
                ExtremePoint { y: vec![4.0, 0.0], x: vec![] },
            ],
            facets: vec![
                Facet::normalized(vec![1.0, 0.0], 0.0),
                Facet::normalized(vec![1.0, 1.0], 4.0),
                Facet::normalized(vec![0.0, 1.0], 0.0),
            ],
            ideal_point: vec![0.0, 0.0],
            is_empty: false,
        };
        let mut s = LpSolver::new();
        assert!(reaches_below(&mut s, &lbs, &[3, 3], DOMINANCE_EPS).unwrap());
        assert!(!reaches_below(&mut s, &lbs, &[2, 2], DOMINANCE_EPS).unwrap());
    }
}
