//! Lower bound sets from LP relaxations.
//!
//! A [`LowerBoundSet`] describes the upper image `{Cx : x in relaxation} + R^p_+`
//! of a node twice: by its nondominated extreme points (with preimages) and
//! by supporting inequalities `lambda^T y >= d` with `lambda >= 0, sum = 1`.
//! The inequality list always contains the axis-aligned supports
//! `y_i >= ideal_i`, so the polyhedron it describes is bounded below.

use thiserror::Error;

use crate::model::{MoilpInstance, SolutionPoint, Subproblem};
use crate::simplex::{
    relaxation_lp, solve_weighted_sum, weighted_objective, LpError, LpProblem, LpRow, LpSense,
    LpSolver, LpStatus, INT_TOL,
};

/// Objective-space tolerance for vertex identity and facet tightness.
pub const OBJ_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("outer approximation did not converge within {limit} cuts")]
    IterationLimit { limit: usize },
    #[error("outer approximation stalled: {0}")]
    Stalled(String),
    #[error("bound set computation requires {expected} objectives, instance has {found}")]
    Objectives { expected: &'static str, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremePoint {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
}

/// Supporting inequality `normal^T y >= offset` of the upper image.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Facet {
    /// Builds a facet with the normal scaled to sum to one.
    pub fn normalized(normal: Vec<f64>, offset: f64) -> Self {
        let s: f64 = normal.iter().sum();
        Facet {
            normal: normal.iter().map(|v| v / s).collect(),
            offset: offset / s,
        }
    }

    pub fn slack(&self, y: &[f64]) -> f64 {
        dot(&self.normal, y) - self.offset
    }

    /// True for the supports `y_i >= ideal_i`.
    pub fn is_axis(&self) -> bool {
        self.normal.iter().filter(|&&v| v > 0.0).count() == 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundSet {
    pub extreme_points: Vec<ExtremePoint>,
    pub facets: Vec<Facet>,
    pub ideal_point: Vec<f64>,
    pub is_empty: bool,
}

impl LowerBoundSet {
    pub fn empty(p: usize) -> Self {
        LowerBoundSet {
            extreme_points: Vec::new(),
            facets: Vec::new(),
            ideal_point: vec![f64::INFINITY; p],
            is_empty: true,
        }
    }

    fn from_parts(mut extreme_points: Vec<ExtremePoint>, facets: Vec<Facet>, p: usize) -> Self {
        extreme_points.sort_by(|a, b| lex_cmp(&a.y, &b.y));
        let mut ideal_point = vec![f64::INFINITY; p];
        for e in &extreme_points {
            for (i, v) in e.y.iter().enumerate() {
                ideal_point[i] = ideal_point[i].min(*v);
            }
        }
        LowerBoundSet {
            extreme_points,
            facets,
            ideal_point,
            is_empty: false,
        }
    }

    pub fn num_objectives(&self) -> usize {
        self.ideal_point.len()
    }

    pub fn is_single_point(&self) -> bool {
        !self.is_empty && self.extreme_points.len() == 1
    }

    /// Whether `y` satisfies every facet within `tol`.
    pub fn facet_feasible(&self, y: &[f64], tol: f64) -> bool {
        !self.is_empty && self.facets.iter().all(|f| f.slack(y) >= -tol)
    }

    /// The facets that are not axis-aligned supports.
    pub fn weighted_facets(&self) -> impl Iterator<Item = &Facet> {
        self.facets.iter().filter(|f| !f.is_axis())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn unit(p: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; p];
    v[i] = 1.0;
    v
}

/// Computes the lower bound set with the method suited to `p`: dichotomic
/// search for two objectives, outer approximation otherwise.
pub fn compute(
    solver: &mut LpSolver,
    instance: &MoilpInstance,
    subproblem: &Subproblem,
) -> Result<LowerBoundSet, BoundError> {
    if instance.num_objectives() == 2 {
        dichotomic_search(solver, instance, subproblem)
    } else {
        outer_approximation(solver, instance, subproblem)
    }
}

/// Weighted-sum LP returning `(value, x, y)` or `None` if infeasible.
fn weighted(
    solver: &mut LpSolver,
    instance: &MoilpInstance,
    subproblem: &Subproblem,
    weights: &[f64],
) -> Result<Option<(f64, Vec<f64>, Vec<f64>)>, BoundError> {
    let res = solve_weighted_sum(solver, instance, subproblem, weights)?;
    match res.status {
        LpStatus::Optimal => {
            let y = instance.evaluate_f64(&res.x);
            Ok(Some((res.objective_value, res.x, y)))
        }
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(LpError::Numerical("bounded relaxation reported unbounded".into()).into()),
    }
}

/// Lexicographic minimum with objective `first` prioritized (p = 2).
fn lexmin(
    solver: &mut LpSolver,
    instance: &MoilpInstance,
    subproblem: &Subproblem,
    first: usize,
) -> Result<Option<Vec<f64>>, BoundError> {
    let p = instance.num_objectives();
    let Some((v, _, _)) = weighted(solver, instance, subproblem, &unit(p, first))? else {
        return Ok(None);
    };
    let second = 1 - first;
    let mut lp = relaxation_lp(instance, subproblem, weighted_objective(instance, &unit(p, second)));
    let row: Vec<f64> = instance.objectives()[first].iter().map(|&c| c as f64).collect();
    lp.rows.push(LpRow::new(row, LpSense::Le, v + 1e-9 * (1.0 + v.abs())));
    let res = solver.solve(&lp)?;
    match res.status {
        LpStatus::Optimal => Ok(Some(instance.evaluate_f64(&res.x))),
        _ => Err(LpError::Numerical("lexicographic stage lost feasibility".into()).into()),
    }
}

/// Finds a vertex preimage of the extreme point `y` by minimizing a weight
/// from the interior of its normal cone.
fn preimage(
    solver: &mut LpSolver,
    instance: &MoilpInstance,
    subproblem: &Subproblem,
    y: &[f64],
    facets: &[&Facet],
) -> Result<ExtremePoint, BoundError> {
    let p = instance.num_objectives();
    let mut w = vec![0.0; p];
    for f in facets {
        for (wi, ni) in w.iter_mut().zip(&f.normal) {
            *wi += ni / facets.len() as f64;
        }
    }
    if w.iter().sum::<f64>() <= 0.0 {
        w = vec![1.0 / p as f64; p];
    }
    let scale = 1.0 + y.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let tol = 1e-5 * scale;
    let last = match weighted(solver, instance, subproblem, &w)? {
        Some((_, x, yx)) if close(&yx, y, tol) => return Ok(ExtremePoint { y: yx, x }),
        Some((_, _, yx)) => yx,
        None => return Err(LpError::Numerical("relaxation became infeasible".into()).into()),
    };
    // The averaged weight can sit on the boundary of the normal cone, and a
    // vertex on a nearly flat part of the boundary may be only weakly
    // nondominated. Either way the best image below y is a valid point.
    for slack in [1e-7, 1e-5] {
        if let Some(e) = image_below(solver, instance, subproblem, y, slack * scale)? {
            return Ok(e);
        }
    }
    Err(BoundError::Stalled(format!(
        "preimage search for {y:?} returned image {last:?}"
    )))
}

/// Minimizes the objective sum over `Cx <= y + slack`.
fn image_below(
    solver: &mut LpSolver,
    instance: &MoilpInstance,
    subproblem: &Subproblem,
    y: &[f64],
    slack: f64,
) -> Result<Option<ExtremePoint>, BoundError> {
    let p = instance.num_objectives();
    let mut lp = relaxation_lp(instance, subproblem, weighted_objective(instance, &vec![1.0; p]));
    for (row, &yk) in instance.objectives().iter().zip(y) {
        let coeffs = row.iter().map(|&c| c as f64).collect();
        lp = lp.with_row(coeffs, LpSense::Le, yk + slack);
    }
    let res = solver.solve(&lp)?;
    Ok(match res.status {
        LpStatus::Optimal => Some(ExtremePoint {
            y: instance.evaluate_f64(&res.x),
            x: res.x,
        }),
        _ => None,
    })
}

/// All nondominated extreme points of a bi-objective relaxation by recursive
/// weighted-sum scalarization between adjacent points.
pub fn dichotomic_search(
    solver: &mut LpSolver,
    instance: &MoilpInstance,
    subproblem: &Subproblem,
) -> Result<LowerBoundSet, BoundError> {
    let p = instance.num_objectives();
    if p != 2 {
        return Err(BoundError::Objectives {
            expected: "2",
            found: p,
        });
    }
    if subproblem.is_syntactically_infeasible() {
        return Ok(LowerBoundSet::empty(p));
    }
    let Some(left) = lexmin(solver, instance, subproblem, 0)? else {
        return Ok(LowerBoundSet::empty(p));
    };
    let right = lexmin(solver, instance, subproblem, 1)?
        .ok_or_else(|| LpError::Numerical("relaxation became infeasible".into()))?;

    // Points ordered by increasing y1 (decreasing y2).
    let mut points = vec![left.clone()];
    if !close(&left, &right, OBJ_TOL) {
        let mut stack = vec![(left, right.clone())];
        let mut found: Vec<Vec<f64>> = Vec::new();
        while let Some((a, b)) = stack.pop() {
            let lambda = [a[1] - b[1], b[0] - a[0]];
            let s = lambda[0] + lambda[1];
            let lambda = [lambda[0] / s, lambda[1] / s];
            let (value, _, c) = weighted(solver, instance, subproblem, &lambda)?
                .ok_or_else(|| LpError::Numerical("relaxation became infeasible".into()))?;
            if value < dot(&lambda, &a) - OBJ_TOL && !close(&c, &a, OBJ_TOL) && !close(&c, &b, OBJ_TOL) {
                found.push(c.clone());
                stack.push((c.clone(), b));
                stack.push((a, c));
            }
        }
        points.extend(found);
        points.push(right);
        points.sort_by(|a, b| a[0].total_cmp(&b[0]));
    }

    // Drop points lying on the segment between their neighbours.
    let mut i = 1;
    while points.len() > 2 && i + 1 < points.len() {
        let (a, c) = (&points[i - 1], &points[i + 1]);
        let lambda = [a[1] - c[1], c[0] - a[0]];
        let s = lambda[0] + lambda[1];
        let lambda = [lambda[0] / s, lambda[1] / s];
        if dot(&lambda, &points[i]) >= dot(&lambda, a) - OBJ_TOL {
            points.remove(i);
        } else {
            i += 1;
        }
    }

    let mut facets = vec![Facet::normalized(unit(2, 0), points[0][0])];
    for w in points.windows(2) {
        let normal = vec![w[0][1] - w[1][1], w[1][0] - w[0][0]];
        let f = Facet::normalized(normal, 0.0);
        let d = points.iter().map(|y| dot(&f.normal, y)).fold(f64::INFINITY, f64::min);
        facets.push(Facet {
            normal: f.normal,
            offset: d,
        });
    }
    facets.push(Facet::normalized(unit(2, 1), points[points.len() - 1][1]));

    // Facet k and k+1 are the supports meeting at point k.
    let mut extremes = Vec::with_capacity(points.len());
    for (k, y) in points.iter().enumerate() {
        let incident = [&facets[k], &facets[k + 1]];
        extremes.push(preimage(solver, instance, subproblem, y, &incident)?);
    }
    Ok(LowerBoundSet::from_parts(extremes, facets, p))
}

#[derive(Debug, Clone)]
struct Vertex {
    y: Vec<f64>,
    /// Indices of halfspaces tight at `y`, sorted.
    active: Vec<usize>,
    verified: bool,
}

/// Outer polyhedron `{y : normal_h^T y >= offset_h}` capped by a box, kept as
/// an explicit vertex list with incidence information.
struct OuterPolytope {
    p: usize,
    halfspaces: Vec<Facet>,
    /// Halfspaces `[p, 2p)` are the caps `-y_i >= -cap_i`.
    caps: Vec<f64>,
    vertices: Vec<Vertex>,
}

impl OuterPolytope {
    fn new(ideal: &[f64], caps: &[f64]) -> Self {
        let p = ideal.len();
        let mut halfspaces: Vec<Facet> = (0..p)
            .map(|i| Facet {
                normal: unit(p, i),
                offset: ideal[i],
            })
            .collect();
        for (i, &c) in caps.iter().enumerate() {
            let mut normal = vec![0.0; p];
            normal[i] = -1.0;
            halfspaces.push(Facet { normal, offset: -c });
        }
        let vertices = (0..1usize << p)
            .map(|mask| {
                let mut y = vec![0.0; p];
                let mut active = Vec::with_capacity(p);
                for i in 0..p {
                    if (mask >> i) & 1 == 1 {
                        y[i] = caps[i];
                        active.push(p + i);
                    } else {
                        y[i] = ideal[i];
                        active.push(i);
                    }
                }
                active.sort_unstable();
                Vertex {
                    y,
                    active,
                    verified: false,
                }
            })
            .collect();
        OuterPolytope {
            p,
            halfspaces,
            caps: caps.to_vec(),
            vertices,
        }
    }

    fn on_tol(&self, h: &Facet) -> f64 {
        1e-9 * (1.0 + h.offset.abs())
    }

    fn is_cap(&self, h: usize) -> bool {
        (self.p..2 * self.p).contains(&h)
    }

    /// Intersects the polytope with a new halfspace.
    fn add(&mut self, h: Facet) {
        let hid = self.halfspaces.len();
        let tol = self.on_tol(&h);
        let slack: Vec<f64> = self.vertices.iter().map(|v| h.slack(&v.y)).collect();
        let out: Vec<usize> = (0..slack.len()).filter(|&i| slack[i] < -tol).collect();
        if out.is_empty() {
            for (v, s) in self.vertices.iter_mut().zip(&slack) {
                if s.abs() <= tol {
                    v.active.push(hid);
                }
            }
            self.halfspaces.push(h);
            return;
        }
        let inside: Vec<usize> = (0..slack.len()).filter(|&i| slack[i] > tol).collect();
        self.halfspaces.push(h);

        let mut created: Vec<Vertex> = Vec::new();
        for &a in &inside {
            for &b in &out {
                let common = intersect(&self.vertices[a].active, &self.vertices[b].active);
                if common.len() + 1 < self.p {
                    continue;
                }
                let blocked = self
                    .vertices
                    .iter()
                    .enumerate()
                    .any(|(c, v)| c != a && c != b && contains_all(&v.active, &common));
                if blocked {
                    continue;
                }
                let (sa, sb) = (slack[a], slack[b]);
                let t = sa / (sa - sb);
                let ya = &self.vertices[a].y;
                let yb = &self.vertices[b].y;
                let y: Vec<f64> = ya.iter().zip(yb).map(|(u, w)| u + t * (w - u)).collect();
                if created.iter().any(|v| close(&v.y, &y, 1e-9 * (1.0 + max_abs(&y)))) {
                    continue;
                }
                let active = self.tight_set(&y);
                created.push(Vertex {
                    y,
                    active,
                    verified: false,
                });
            }
        }
        let mut keep: Vec<Vertex> = Vec::with_capacity(self.vertices.len() + created.len());
        for (i, mut v) in std::mem::take(&mut self.vertices).into_iter().enumerate() {
            if slack[i] < -tol {
                continue;
            }
            if slack[i] <= tol {
                v.active.push(hid);
            }
            keep.push(v);
        }
        keep.extend(created);
        self.vertices = keep;
    }

    fn tight_set(&self, y: &[f64]) -> Vec<usize> {
        (0..self.halfspaces.len())
            .filter(|&h| {
                let f = &self.halfspaces[h];
                f.slack(y).abs() <= 1e-7 * (1.0 + f.offset.abs())
            })
            .collect()
    }

    fn touches_cap(&self, v: &Vertex) -> bool {
        v.active.iter().any(|&h| self.is_cap(h))
            || v.y.iter().zip(&self.caps).any(|(y, c)| *y >= c - OBJ_TOL)
    }
}

fn max_abs(y: &[f64]) -> f64 {
    y.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().filter(|x| b.contains(x)).copied().collect()
}

fn contains_all(haystack: &[usize], needles: &[usize]) -> bool {
    needles.iter().all(|x| haystack.contains(x))
}

/// Outer approximation of the upper image. Starts from the ideal-point orthant
/// cut by the equal-weight support and adds one supporting halfspace per
/// vertex found outside the upper image, until every vertex lies on it.
pub fn outer_approximation(
    solver: &mut LpSolver,
    instance: &MoilpInstance,
    subproblem: &Subproblem,
) -> Result<LowerBoundSet, BoundError> {
    let p = instance.num_objectives();
    if !(2..=3).contains(&p) {
        return Err(BoundError::Objectives {
            expected: "2 or 3",
            found: p,
        });
    }
    if subproblem.is_syntactically_infeasible() {
        return Ok(LowerBoundSet::empty(p));
    }
    let n = instance.num_vars();

    let mut ideal = vec![0.0; p];
    for (i, v) in ideal.iter_mut().enumerate() {
        match weighted(solver, instance, subproblem, &unit(p, i))? {
            Some((value, _, _)) => *v = value,
            None => return Ok(LowerBoundSet::empty(p)),
        }
    }
    // Every image lies in [ideal, ideal + range]; the cap sits strictly above.
    let caps: Vec<f64> = instance
        .objectives()
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let range: f64 = row
                .iter()
                .enumerate()
                .map(|(j, &c)| (c as f64).abs() * (subproblem.fixed_upper[j] - subproblem.fixed_lower[j]) as f64)
                .sum();
            ideal[k] + range + 1.0
        })
        .collect();
    let mut outer = OuterPolytope::new(&ideal, &caps);
    let equal = vec![1.0 / p as f64; p];
    let (d0, _, _) = weighted(solver, instance, subproblem, &equal)?
        .ok_or_else(|| LpError::Numerical("relaxation became infeasible".into()))?;
    outer.add(Facet {
        normal: equal,
        offset: d0,
    });

    // Membership LP: min t s.t. Cx - t 1 <= v, x in relaxation.
    let mut membership: LpProblem = relaxation_lp(instance, subproblem, {
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        c
    });
    membership.lower.push(f64::NEG_INFINITY);
    membership.upper.push(f64::INFINITY);
    for row in &mut membership.rows {
        row.coeffs.push(0.0);
    }
    let first_obj_row = membership.rows.len();
    for row in instance.objectives() {
        let mut coeffs: Vec<f64> = row.iter().map(|&c| c as f64).collect();
        coeffs.push(-1.0);
        membership.rows.push(LpRow::new(coeffs, LpSense::Le, 0.0));
    }

    let limit = 10 * (1usize << p) * n;
    let mut cuts = 0usize;
    loop {
        let Some(vi) = outer.vertices.iter().position(|v| !v.verified) else {
            break;
        };
        let v = outer.vertices[vi].y.clone();
        for k in 0..p {
            membership.rows[first_obj_row + k].rhs = v[k];
        }
        let res = solver.solve(&membership)?;
        if res.status != LpStatus::Optimal {
            return Err(LpError::Numerical("membership LP not optimal".into()).into());
        }
        let t = res.objective_value;
        if t <= OBJ_TOL {
            outer.vertices[vi].verified = true;
            continue;
        }
        cuts += 1;
        if cuts > limit {
            return Err(BoundError::IterationLimit { limit });
        }
        let mut lambda: Vec<f64> = (0..p).map(|k| (-res.duals[first_obj_row + k]).max(0.0)).collect();
        let s: f64 = lambda.iter().sum();
        if s <= 1e-12 {
            return Err(BoundError::Stalled("degenerate dual weights".into()));
        }
        lambda.iter_mut().for_each(|l| *l /= s);
        let (d, _, _) = weighted(solver, instance, subproblem, &lambda)?
            .ok_or_else(|| LpError::Numerical("relaxation became infeasible".into()))?;
        let cut = Facet {
            normal: lambda,
            offset: d,
        };
        if cut.slack(&v) >= -OBJ_TOL {
            return Err(BoundError::Stalled(format!("cut does not separate vertex {v:?}")));
        }
        outer.add(cut);
    }

    // Facets: non-cap halfspaces tight at p or more vertices.
    let mut facet_ids = Vec::new();
    for h in 0..outer.halfspaces.len() {
        if outer.is_cap(h) {
            continue;
        }
        let count = outer.vertices.iter().filter(|v| v.active.contains(&h)).count();
        if count >= p {
            facet_ids.push(h);
        }
    }
    let facets: Vec<Facet> = facet_ids.iter().map(|&h| outer.halfspaces[h].clone()).collect();

    let mut extremes: Vec<ExtremePoint> = Vec::new();
    let corner_vertices: Vec<Vertex> = outer
        .vertices
        .iter()
        .filter(|v| !outer.touches_cap(v))
        .cloned()
        .collect();
    for v in corner_vertices {
        if extremes.iter().any(|e| close(&e.y, &v.y, OBJ_TOL)) {
            continue;
        }
        let incident: Vec<&Facet> = v
            .active
            .iter()
            .filter(|h| facet_ids.contains(h))
            .map(|&h| &outer.halfspaces[h])
            .collect();
        let e = preimage(solver, instance, subproblem, &v.y, &incident)?;
        if !extremes.iter().any(|x| close(&x.y, &e.y, OBJ_TOL)) {
            extremes.push(e);
        }
    }
    Ok(LowerBoundSet::from_parts(extremes, facets, p))
}

/// The extreme points whose preimages are integral, as exact solutions.
pub fn integer_feasible_extremes(lbs: &LowerBoundSet, instance: &MoilpInstance) -> Vec<SolutionPoint> {
    let mut out: Vec<SolutionPoint> = Vec::new();
    for e in &lbs.extreme_points {
        if e.x.iter().any(|v| (v - v.round()).abs() > INT_TOL) {
            continue;
        }
        let x: Vec<i64> = e.x.iter().map(|v| v.round() as i64).collect();
        if !instance.is_feasible(&x) {
            continue;
        }
        let point = SolutionPoint::new(x, instance);
        if !out.iter().any(|o| o.y == point.y) {
            out.push(point);
        }
    }
    out
}
