//! Independent oracles shared by the integration suites. Nothing in here calls
//! into the solver code paths it is used to check.
#![allow(dead_code)]

use mobb::simplex::{LpProblem, LpSense};
use rand::Rng;

/// Solves a small dense system by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..k {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..k).map(|i| b[i] / a[i][i]).collect())
}

fn subsets(items: &[usize], k: usize, out: &mut Vec<Vec<usize>>, start: usize, cur: &mut Vec<usize>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..items.len() {
        cur.push(items[i]);
        subsets(items, k, out, i + 1, cur);
        cur.pop();
    }
}

/// Optimal value of a box-bounded LP by enumerating every basic solution.
/// Returns `None` when no vertex is feasible.
pub fn lp_by_vertex_enumeration(lp: &LpProblem) -> Option<f64> {
    let n = lp.num_vars();
    let all_rows: Vec<usize> = (0..lp.rows.len()).collect();
    let vars: Vec<usize> = (0..n).collect();
    let mut best: Option<f64> = None;
    // Every vertex has n linearly independent active constraints: k tight rows
    // plus n - k variables at a bound.
    for k in 0..=n.min(all_rows.len()) {
        let mut row_sets = Vec::new();
        subsets(&all_rows, k, &mut row_sets, 0, &mut Vec::new());
        let mut free_sets = Vec::new();
        subsets(&vars, k, &mut free_sets, 0, &mut Vec::new());
        for rows in &row_sets {
            for free in &free_sets {
                let fixed: Vec<usize> = (0..n).filter(|j| !free.contains(j)).collect();
                for mask in 0..(1u32 << fixed.len()) {
                    let mut x = vec![0.0; n];
                    for (t, &j) in fixed.iter().enumerate() {
                        x[j] = if (mask >> t) & 1 == 1 { lp.upper[j] } else { lp.lower[j] };
                    }
                    let a: Vec<Vec<f64>> = rows
                        .iter()
                        .map(|&r| free.iter().map(|&j| lp.rows[r].coeffs[j]).collect())
                        .collect();
                    let b: Vec<f64> = rows
                        .iter()
                        .map(|&r| {
                            lp.rows[r].rhs
                                - fixed.iter().map(|&j| lp.rows[r].coeffs[j] * x[j]).sum::<f64>()
                        })
                        .collect();
                    let Some(sol) = solve_dense(a, b) else { continue };
                    for (t, &j) in free.iter().enumerate() {
                        x[j] = sol[t];
                    }
                    if lp.max_violation(&x) <= 1e-9 {
                        let v: f64 = lp.objective.iter().zip(&x).map(|(c, xi)| c * xi).sum();
                        best = Some(best.map_or(v, |b: f64| b.min(v)));
                    }
                }
            }
        }
    }
    best
}

/// Random box-bounded LP with small integer data.
pub fn random_lp<R: Rng>(rng: &mut R, max_n: usize, max_m: usize) -> LpProblem {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(0..=max_m);
    let objective = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
    let lower: Vec<f64> = (0..n).map(|_| rng.gen_range(-2..=0) as f64).collect();
    let upper = lower.iter().map(|l| l + rng.gen_range(1..=3) as f64).collect();
    let mut lp = LpProblem::new(objective, lower, upper);
    for _ in 0..m {
        let coeffs = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        let sense = match rng.gen_range(0..6) {
            0 => LpSense::Eq,
            1 | 2 => LpSense::Ge,
            _ => LpSense::Le,
        };
        let rhs = rng.gen_range(-4..=10) as f64;
        lp = lp.with_row(coeffs, sense, rhs);
    }
    lp
}
