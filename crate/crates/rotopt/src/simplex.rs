//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Small self-contained solver for the stationary-measure polytope programs;
//! instance sizes here are at most a few hundred rows, so a dense tableau is
//! the simplest reliable choice. Duals are read off the artificial columns
//! after phase two.

use crate::error::{Error, Result};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub num_vars: usize,
    /// Objective coefficients; the solver maximizes.
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub status: Status,
    pub x: Vec<f64>,
    pub value: f64,
    /// One multiplier per input row; value(b') <= value(b) + duals . (b'-b)
    /// for maximization problems.
    pub duals: Vec<f64>,
}

impl Problem {
    pub fn new(num_vars: usize, objective: Vec<f64>) -> Self {
        assert_eq!(objective.len(), num_vars);
        Problem { num_vars, objective, rows: Vec::new() }
    }

    pub fn push_row(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.rows.push(Row { coeffs, rel, rhs });
    }
}

struct Tableau {
    /// m x (total + 1); last column is the rhs.
    t: Vec<Vec<f64>>,
    obj: Vec<f64>,
    obj_value: f64,
    basis: Vec<usize>,
    total: usize,
    iterations: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.t[row][col];
        for j in 0..=self.total {
            self.t[row][j] /= piv;
        }
        for i in 0..self.t.len() {
            if i != row {
                let f = self.t[i][col];
                if f != 0.0 {
                    for j in 0..=self.total {
                        self.t[i][j] -= f * self.t[row][j];
                    }
                    self.t[i][col] = 0.0;
                }
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for j in 0..self.total {
                self.obj[j] -= f * self.t[row][j];
            }
            self.obj_value += f * self.t[row][self.total];
            self.obj[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Bland: entering = smallest admissible index with positive reduced
    /// cost; leaving = min ratio, ties to the smallest basis variable.
    fn run(&mut self, allow: impl Fn(usize) -> bool, max_iters: usize) -> Result<Status> {
        loop {
            self.iterations += 1;
            if self.iterations > max_iters {
                return Err(Error::Internal("simplex iteration cap exceeded".into()));
            }
            let mut entering = None;
            for j in 0..self.total {
                if allow(j) && self.obj[j] > EPS {
                    entering = Some(j);
                    break;
                }
            }
            let col = match entering {
                Some(c) => c,
                None => return Ok(Status::Optimal),
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][col];
                if a > EPS {
                    let ratio = self.t[i][self.total] / a;
                    match leaving {
                        None => leaving = Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - EPS
                                || (ratio < br + EPS && self.basis[i] < self.basis[bi])
                            {
                                leaving = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return Ok(Status::Unbounded),
            }
        }
    }
}

/// Maximizes the problem objective. All variables are nonnegative.
pub(crate) fn solve(p: &Problem) -> Result<Solution> {
    let m = p.rows.len();
    let n = p.num_vars;
    let num_slack = p.rows.iter().filter(|r| r.rel != Relation::Eq).count();
    let num_real = n + num_slack;
    let total = num_real + m;

    let mut t = vec![vec![0.0; total + 1]; m];
    let mut flip = vec![false; m];
    let mut slack_idx = n;
    for (i, row) in p.rows.iter().enumerate() {
        t[i][..n].copy_from_slice(&row.coeffs);
        match row.rel {
            Relation::Eq => {}
            Relation::Le => {
                t[i][slack_idx] = 1.0;
                slack_idx += 1;
            }
            Relation::Ge => {
                t[i][slack_idx] = -1.0;
                slack_idx += 1;
            }
        }
        t[i][total] = row.rhs;
        if row.rhs < 0.0 {
            flip[i] = true;
            for v in t[i].iter_mut() {
                *v = -*v;
            }
        }
        t[i][num_real + i] = 1.0; // artificial
    }

    let basis: Vec<usize> = (0..m).map(|i| num_real + i).collect();
    // Phase-1 objective (maximize -sum of artificials): reduced costs over
    // the real columns are the column sums; objective value starts at -sum b.
    let mut obj = vec![0.0; total];
    let mut obj_value = 0.0;
    for i in 0..m {
        for j in 0..num_real {
            obj[j] += t[i][j];
        }
        obj_value -= t[i][total];
    }
    let mut tab = Tableau { t, obj, obj_value, basis, total, iterations: 0 };
    let max_iters = 4000 + 400 * (m + total);

    let status = tab.run(|j| j < num_real, max_iters)?;
    if status != Status::Optimal {
        return Err(Error::Internal("phase one cannot be unbounded".into()));
    }
    if tab.obj_value < -1e-8 {
        return Ok(Solution {
            status: Status::Infeasible,
            x: Vec::new(),
            value: 0.0,
            duals: vec![0.0; m],
        });
    }
    // Drive basic artificials out where possible; rows that stay artificial
    // are redundant and harmless because those variables sit at zero and are
    // barred from re-entering.
    for i in 0..m {
        if tab.basis[i] >= num_real {
            if let Some(col) = (0..num_real).find(|&j| tab.t[i][j].abs() > 1e-7) {
                tab.pivot(i, col);
            }
        }
    }

    // Phase 2: real objective, artificials barred.
    let mut obj = vec![0.0; total];
    obj[..n].copy_from_slice(&p.objective);
    let mut obj_value = 0.0;
    for i in 0..m {
        let b = tab.basis[i];
        let c = if b < n { p.objective[b] } else { 0.0 };
        if c != 0.0 {
            for j in 0..total {
                obj[j] -= c * tab.t[i][j];
            }
            obj_value += c * tab.t[i][total];
        }
    }
    for i in 0..m {
        let b = tab.basis[i];
        if b < total {
            obj[b] = 0.0;
        }
    }
    tab.obj = obj;
    tab.obj_value = obj_value;
    let num_real_cols = num_real;
    let status = tab.run(|j| j < num_real_cols, max_iters)?;
    if status == Status::Unbounded {
        return Ok(Solution {
            status: Status::Unbounded,
            x: Vec::new(),
            value: f64::INFINITY,
            duals: vec![0.0; m],
        });
    }

    let mut x = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.t[i][total];
        }
    }
    let value = p
        .objective
        .iter()
        .zip(&x)
        .map(|(c, xi)| c * xi)
        .sum::<f64>();
    // Dual of row i is read off the artificial column: its reduced cost in
    // phase 2 equals -y_i. Undo the rhs sign flips.
    let mut duals = vec![0.0; m];
    for i in 0..m {
        let y = -tab.obj[num_real + i];
        duals[i] = if flip[i] { -y } else { y };
    }
    Ok(Solution { status: Status::Optimal, x, value, duals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max x0 + 2 x1 s.t. x0 + x1 <= 6, x0 + 3 x1 <= 12, 2 x0 + x1 <= 10
        let mut p = Problem::new(2, vec![1.0, 2.0]);
        p.push_row(vec![1.0, 1.0], Relation::Le, 6.0);
        p.push_row(vec![1.0, 3.0], Relation::Le, 12.0);
        p.push_row(vec![2.0, 1.0], Relation::Le, 10.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.value - 9.0).abs() < 1e-9, "{}", s.value);
    }

    #[test]
    fn minimization_via_negation() {
        // min 4 x0 + 3 x1 s.t. 2 x0 + x1 >= 8, x0 + x1 >= 6, x0 + 2 x1 >= 8
        let mut p = Problem::new(2, vec![-4.0, -3.0]);
        p.push_row(vec![2.0, 1.0], Relation::Ge, 8.0);
        p.push_row(vec![1.0, 1.0], Relation::Ge, 6.0);
        p.push_row(vec![1.0, 2.0], Relation::Ge, 8.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.value + 20.0).abs() < 1e-9, "{}", s.value);
    }

    #[test]
    fn detects_infeasible() {
        // x0 = 1 and x0 = 2 cannot both hold
        let mut p = Problem::new(1, vec![1.0]);
        p.push_row(vec![1.0], Relation::Eq, 1.0);
        p.push_row(vec![1.0], Relation::Eq, 2.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut p = Problem::new(2, vec![2.0, 1.0]);
        p.push_row(vec![1.0, -2.0], Relation::Le, 4.0);
        p.push_row(vec![-1.0, 1.0], Relation::Le, 2.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Unbounded);
    }

    #[test]
    fn equality_probability_simplex() {
        // max 3 x0 + x1 over the probability simplex in 3 variables
        let mut p = Problem::new(3, vec![3.0, 1.0, 0.0]);
        p.push_row(vec![1.0, 1.0, 1.0], Relation::Eq, 1.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.value - 3.0).abs() < 1e-9);
        assert!((s.x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn duals_are_supergradients() {
        // max x0 + x1 s.t. x0 + x1 = b (b = 1): value(b) = b, dual = 1
        let mut p = Problem::new(2, vec![1.0, 1.0]);
        p.push_row(vec![1.0, 1.0], Relation::Eq, 1.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.duals[0] - 1.0).abs() < 1e-9, "{}", s.duals[0]);
    }

    #[test]
    fn duals_track_binding_rows() {
        // max 2 x0 + x1, x0 <= 3, x1 <= 4, x0 + x1 <= 5:
        // optimum x = (3, 2) = 8; duals: row0 = 1, row1 = 0, row2 = 1
        let mut p = Problem::new(2, vec![2.0, 1.0]);
        p.push_row(vec![1.0, 0.0], Relation::Le, 3.0);
        p.push_row(vec![0.0, 1.0], Relation::Le, 4.0);
        p.push_row(vec![1.0, 1.0], Relation::Le, 5.0);
        let s = solve(&p).unwrap();
        assert!((s.value - 8.0).abs() < 1e-9);
        assert!((s.duals[0] - 1.0).abs() < 1e-9);
        assert!(s.duals[1].abs() < 1e-9);
        assert!((s.duals[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_rows_are_normalized() {
        // same feasible set expressed with negated rows
        let mut p = Problem::new(2, vec![1.0, 1.0]);
        p.push_row(vec![-1.0, -1.0], Relation::Ge, -4.0); // x0 + x1 <= 4
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.value - 4.0).abs() < 1e-9);
    }
}
