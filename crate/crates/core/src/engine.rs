//! The branch and bound loop.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branching::{branch, BranchError, BranchRule, BranchingRule};
use crate::dominance::{
    fathom_check, relevant_upper_bounds, DominanceTest, Fathom, IncumbentList, InsertOutcome,
    LocalUpperBoundSet, DOMINANCE_EPS,
};
use crate::gap::{hvb_over, hvg_over, score_hd, woe_over};
use crate::lbs::{self, integer_feasible_extremes, BoundError, LowerBoundSet};
use crate::model::{MoilpInstance, SolutionPoint, Subproblem};
use crate::simplex::{LpError, LpSolver};

/// Node selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    /// Depth first (LIFO).
    Df,
    /// Breadth first (FIFO).
    Bf,
    /// Local hypervolume gap.
    Hvg,
    /// Hypervolume of the search-zone box.
    Hvb,
    /// Hausdorff distance.
    Hd,
    /// Width of enclosure.
    Woe,
}

impl Selection {
    pub const ALL: [Selection; 6] = [
        Selection::Df,
        Selection::Bf,
        Selection::Hvg,
        Selection::Hvb,
        Selection::Hd,
        Selection::Woe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Selection::Df => "df",
            Selection::Bf => "bf",
            Selection::Hvg => "hvg",
            Selection::Hvb => "hvb",
            Selection::Hd => "hd",
            Selection::Woe => "woe",
        }
    }

    pub fn is_score_based(self) -> bool {
        !matches!(self, Selection::Df | Selection::Bf)
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Selection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Selection::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown selection strategy `{s}` (expected df|bf|hvg|hvb|hd|woe)"))
    }
}

/// Label such as `HVG-HF`.
pub fn combo_label(selection: Selection, rule: BranchRule) -> String {
    format!("{}-{}", selection.as_str().to_uppercase(), rule.as_str().to_uppercase())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub selection: Selection,
    pub rule: BranchRule,
    pub time_limit_seconds: f64,
    pub node_limit: Option<u64>,
    pub dominance_test: DominanceTest,
    /// Recorded with results; the search itself draws no random numbers.
    pub rng_seed: u64,
    /// Re-evaluate a node's score once when it is popped.
    pub rescore_on_pop: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            selection: Selection::Hvg,
            rule: BranchRule::Hf,
            time_limit_seconds: 3600.0,
            node_limit: None,
            dominance_test: DominanceTest::Exact,
            rng_seed: 0,
            rescore_on_pop: false,
        }
    }
}

impl SearchConfig {
    pub fn new(selection: Selection, rule: BranchRule) -> Self {
        SearchConfig {
            selection,
            rule,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SearchStatus {
    Complete,
    TimeLimit,
    NodeLimit,
}

impl SearchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchStatus::Complete => "Complete",
            SearchStatus::TimeLimit => "TimeLimit",
            SearchStatus::NodeLimit => "NodeLimit",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FathomCounts {
    pub infeasible: u64,
    pub optimal: u64,
    pub dominated: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// The minimal complete set, sorted by display image.
    pub nondominated_set: Vec<SolutionPoint>,
    pub status: SearchStatus,
    pub nodes_created: u64,
    pub nodes_processed: u64,
    pub nodes_branched: u64,
    /// Open nodes left when the search stopped.
    pub nodes_queued: u64,
    pub wall_time_seconds: f64,
    pub fathomed: FathomCounts,
}

impl SearchResult {
    /// Display-sense images, sorted.
    pub fn front(&self) -> Vec<Vec<i64>> {
        let mut f: Vec<Vec<i64>> = self.nondominated_set.iter().map(|s| s.display_y.clone()).collect();
        f.sort();
        f
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("bound computation failed at node {node}: {source}")]
    Bound { node: u64, source: BoundError },
    #[error("LP failure at node {node}: {source}")]
    Lp { node: u64, source: LpError },
    #[error("branching failed at node {node}: {source}")]
    Branch { node: u64, source: BranchError },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Hooks into the search, mainly for tests and diagnostics.
pub trait SearchObserver {
    /// Called once per processed node after fathoming.
    fn on_node(&mut self, _event: &NodeEvent<'_>) {}
    /// Called for every score assigned to a child node.
    fn on_score(&mut self, _score: f64) {}
}

/// Observer that ignores every event.
pub struct NoObserver;

impl SearchObserver for NoObserver {}

pub struct NodeEvent<'a> {
    pub iteration: u64,
    pub subproblem: &'a Subproblem,
    pub lbs: &'a LowerBoundSet,
    pub verdict: Fathom,
    /// Local upper bounds still reachable from this node.
    pub relevant: &'a [usize],
    pub incumbents: &'a IncumbentList,
    pub lubs: &'a LocalUpperBoundSet,
}

#[derive(Debug, Clone, Copy)]
struct HeapKey {
    score: f64,
    seq: u64,
}

impl PartialEq for HeapKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    // larger score first, then earlier insertion
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct HeapEntry<T> {
    key: HeapKey,
    item: T,
}

impl<T> PartialEq for HeapEntry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl<T> Eq for HeapEntry<T> {}

impl<T> PartialOrd for HeapEntry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for HeapEntry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

enum Container<T> {
    Stack(Vec<T>),
    Fifo(VecDeque<T>),
    Heap(BinaryHeap<HeapEntry<T>>),
}

/// Open-node container whose pop order follows the selection strategy.
/// Scores are ignored for DF and BF.
pub struct NodeQueue<T> {
    container: Container<T>,
    seq: u64,
}

impl<T> NodeQueue<T> {
    pub fn new(selection: Selection) -> Self {
        let container = match selection {
            Selection::Df => Container::Stack(Vec::new()),
            Selection::Bf => Container::Fifo(VecDeque::new()),
            _ => Container::Heap(BinaryHeap::new()),
        };
        NodeQueue { container, seq: 0 }
    }

    pub fn push(&mut self, item: T, score: f64) {
        debug_assert!(!score.is_nan());
        let seq = self.seq;
        self.seq += 1;
        match &mut self.container {
            Container::Stack(v) => v.push(item),
            Container::Fifo(q) => q.push_back(item),
            Container::Heap(h) => h.push(HeapEntry {
                key: HeapKey { score, seq },
                item,
            }),
        }
    }

    pub fn pop(&mut self) -> Option<T> {
        match &mut self.container {
            Container::Stack(v) => v.pop(),
            Container::Fifo(q) => q.pop_front(),
            Container::Heap(h) => h.pop().map(|e| e.item),
        }
    }

    /// Score of the entry `pop` would return; `None` for DF and BF.
    pub fn peek_score(&self) -> Option<f64> {
        match &self.container {
            Container::Heap(h) => h.peek().map(|e| e.key.score),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        match &self.container {
            Container::Stack(v) => v.len(),
            Container::Fifo(q) => q.len(),
            Container::Heap(h) => h.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

struct OpenNode {
    sub: Subproblem,
    /// The parent's bound set, kept for rescoring.
    parent_lbs: Option<Rc<LowerBoundSet>>,
    rescored: bool,
}

fn node_score(
    selection: Selection,
    solver: &mut LpSolver,
    lbs: &LowerBoundSet,
    lubs: &LocalUpperBoundSet,
    incumbents: &IncumbentList,
    relevant: &[usize],
) -> Result<f64, LpError> {
    Ok(match selection {
        Selection::Df | Selection::Bf => 0.0,
        Selection::Hvg => hvg_over(lbs, lubs, relevant).value,
        Selection::Hvb => hvb_over(lbs, lubs, relevant).value,
        Selection::Hd => score_hd(lbs, incumbents).value,
        Selection::Woe => woe_over(solver, lbs, lubs, relevant)?.value,
    })
}

pub fn solve(instance: &MoilpInstance, config: &SearchConfig) -> Result<SearchResult, SearchError> {
    solve_with_observer(instance, config, &mut NoObserver)
}

pub fn solve_with_observer(
    instance: &MoilpInstance,
    config: &SearchConfig,
    observer: &mut dyn SearchObserver,
) -> Result<SearchResult, SearchError> {
    if !(config.time_limit_seconds > 0.0) {
        return Err(SearchError::Config("time limit must be positive".into()));
    }
    let start = Instant::now();
    let rule = BranchingRule::new(config.rule, instance);
    let mut solver = LpSolver::new();
    let mut incumbents = IncumbentList::new();
    let mut lubs = LocalUpperBoundSet::new(instance.reference_point());
    let mut queue: NodeQueue<OpenNode> = NodeQueue::new(config.selection);

    queue.push(
        OpenNode {
            sub: Subproblem::root(instance),
            parent_lbs: None,
            rescored: false,
        },
        f64::INFINITY,
    );
    let mut next_id: u64 = 1;
    let mut created: u64 = 1;
    let mut processed: u64 = 0;
    let mut branched: u64 = 0;
    let mut fathomed = FathomCounts::default();
    let mut status = SearchStatus::Complete;

    loop {
        if config.node_limit.is_some_and(|limit| processed >= limit) && !queue.is_empty() {
            status = SearchStatus::NodeLimit;
            break;
        }
        if start.elapsed().as_secs_f64() > config.time_limit_seconds && !queue.is_empty() {
            status = SearchStatus::TimeLimit;
            break;
        }
        let Some(mut open) = queue.pop() else { break };
        let node = open.sub.node_id;

        if config.rescore_on_pop && config.selection.is_score_based() && !open.rescored {
            if let Some(parent) = open.parent_lbs.clone() {
                let relevant = relevant_upper_bounds(&mut solver, &parent, &lubs, DOMINANCE_EPS)
                    .map_err(|source| SearchError::Lp { node, source })?;
                let fresh = node_score(config.selection, &mut solver, &parent, &lubs, &incumbents, &relevant)
                    .map_err(|source| SearchError::Lp { node, source })?;
                if queue.peek_score().is_some_and(|top| fresh < top) {
                    open.rescored = true;
                    queue.push(open, fresh);
                    continue;
                }
            }
        }
        processed += 1;

        let sub = open.sub;
        let lbs = if sub.is_syntactically_infeasible() {
            LowerBoundSet::empty(instance.num_objectives())
        } else {
            lbs::compute(&mut solver, instance, &sub).map_err(|source| SearchError::Bound { node, source })?
        };

        for point in integer_feasible_extremes(&lbs, instance) {
            let y = point.y.clone();
            if let InsertOutcome::Accepted { .. } = incumbents.try_insert(point) {
                lubs.insert(&y);
            }
        }

        let report = fathom_check(
            &mut solver,
            instance,
            &lbs,
            &incumbents,
            &lubs,
            config.dominance_test,
            DOMINANCE_EPS,
        )
        .map_err(|source| SearchError::Lp { node, source })?;

        let mut verdict = report.verdict;
        if verdict == Fathom::Open && sub.unfixed().next().is_none() {
            // every variable fixed: the bound set is the single point itself
            verdict = Fathom::Optimal;
        }
        match verdict {
            Fathom::Infeasible => fathomed.infeasible += 1,
            Fathom::Optimal => fathomed.optimal += 1,
            Fathom::Dominated => fathomed.dominated += 1,
            Fathom::Open => {}
        }

        observer.on_node(&NodeEvent {
            iteration: processed,
            subproblem: &sub,
            lbs: &lbs,
            verdict,
            relevant: &report.relevant,
            incumbents: &incumbents,
            lubs: &lubs,
        });

        if verdict != Fathom::Open {
            continue;
        }
        let (k, split) = rule
            .select(&lbs, &sub)
            .map_err(|source| SearchError::Branch { node, source })?;
        let (low, high) =
            branch(&sub, k, split, &mut next_id).map_err(|source| SearchError::Branch { node, source })?;
        branched += 1;
        let score = node_score(config.selection, &mut solver, &lbs, &lubs, &incumbents, &report.relevant)
            .map_err(|source| SearchError::Lp { node, source })?;
        let shared = Rc::new(lbs);
        for mut child in [low, high] {
            child.score = score;
            observer.on_score(score);
            queue.push(
                OpenNode {
                    sub: child,
                    parent_lbs: config.rescore_on_pop.then(|| Rc::clone(&shared)),
                    rescored: false,
                },
                score,
            );
            created += 1;
        }
    }

    let mut nondominated_set = incumbents.into_entries();
    nondominated_set.sort_by(|a, b| a.display_y.cmp(&b.display_y));
    Ok(SearchResult {
        nondominated_set,
        status,
        nodes_created: created,
        nodes_processed: processed,
        nodes_branched: branched,
        nodes_queued: queue.len() as u64,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        fathomed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::from_knapsack;

    fn drain(q: &mut NodeQueue<char>) -> String {
        std::iter::from_fn(|| q.pop()).collect()
    }

    #[test]
    fn queue_disciplines() {
        let mut df = NodeQueue::new(Selection::Df);
        let mut bf = NodeQueue::new(Selection::Bf);
        for c in ['1', '2', '3'] {
            df.push(c, 0.0);
            bf.push(c, 0.0);
        }
        assert_eq!(drain(&mut df), "321");
        assert_eq!(drain(&mut bf), "123");

        let mut hvb = NodeQueue::new(Selection::Hvb);
        hvb.push('a', 5.0);
        hvb.push('b', 12.0);
        hvb.push('c', 5.0);
        assert_eq!(drain(&mut hvb), "bac");

        let mut hvg = NodeQueue::new(Selection::Hvg);
        hvg.push('x', 1e300);
        hvg.push('y', f64::INFINITY);
        hvg.push('z', f64::INFINITY);
        assert_eq!(drain(&mut hvg), "yzx");
        assert!(hvg.pop().is_none());
    }

    #[test]
    fn three_item_knapsack_all_combos() {
        let inst = from_knapsack(&[2, 2, 1], 3, &[vec![3, 1, 1], vec![1, 3, 1]]).unwrap();
        for sel in Selection::ALL {
            for rule in BranchRule::ALL {
                let res = solve(&inst, &SearchConfig::new(sel, rule)).unwrap();
                assert_eq!(res.status, SearchStatus::Complete);
                assert_eq!(res.front(), vec![vec![2, 4], vec![4, 2]], "{sel}-{rule}");
                assert_eq!(res.nodes_created, res.nodes_processed + res.nodes_queued);
                for s in &res.nondominated_set {
                    assert!(inst.is_feasible(&s.x));
                    assert_eq!(inst.evaluate(&s.x), s.y);
                }
            }
        }
    }

    #[test]
    fn single_item() {
        let inst = from_knapsack(&[1], 1, &[vec![5], vec![7]]).unwrap();
        let res = solve(&inst, &SearchConfig::default()).unwrap();
        assert_eq!(res.front(), vec![vec![5, 7]]);
    }

    #[test]
    fn node_limit_stops_early() {
        let inst = from_knapsack(
            &[3, 5, 7, 2, 4, 6],
            12,
            &[vec![4, 8, 3, 6, 2, 7], vec![7, 1, 8, 2, 6, 3], vec![2, 5, 5, 7, 3, 4]],
        )
        .unwrap();
        let config = SearchConfig {
            node_limit: Some(1),
            ..SearchConfig::new(Selection::Bf, BranchRule::Sr)
        };
        let res = solve(&inst, &config).unwrap();
        assert_eq!(res.nodes_processed, 1);
        if res.status == SearchStatus::NodeLimit {
            assert_eq!(res.nodes_created, 1 + res.nodes_queued);
        }
    }

    #[test]
    fn rescoring_keeps_result() {
        let inst = from_knapsack(
            &[3, 5, 7, 2, 4, 6],
            12,
            &[vec![4, 8, 3, 6, 2, 7], vec![7, 1, 8, 2, 6, 3], vec![2, 5, 5, 7, 3, 4]],
        )
        .unwrap();
        let plain = solve(&inst, &SearchConfig::new(Selection::Hvg, BranchRule::Hf)).unwrap();
        let config = SearchConfig {
            rescore_on_pop: true,
            ..SearchConfig::new(Selection::Hvg, BranchRule::Hf)
        };
        let rescored = solve(&inst, &config).unwrap();
        assert_eq!(plain.front(), rescored.front());
        assert_eq!(rescored.nodes_created, rescored.nodes_processed + rescored.nodes_queued);
    }

    #[test]
    fn names_round_trip() {
        for s in Selection::ALL {
            assert_eq!(s.as_str().parse::<Selection>(), Ok(s));
        }
        assert_eq!(combo_label(Selection::Hvg, BranchRule::Hf), "HVG-HF");
        assert!(solve(
            &from_knapsack(&[1], 1, &[vec![1], vec![1]]).unwrap(),
            &SearchConfig {
                time_limit_seconds: 0.0,
                ..Default::default()
            }
        )
        .is_err());
    }
}
