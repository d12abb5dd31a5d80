//! A small dense two-phase simplex for linear programs in standard form.
//!
//! This is deliberately plain tableau simplex with Bland's rule. It backs
//! [`crate::topology::max_uniform_rate`] and serves as an algebraically
//! independent cross-check for the column-generation scheduler, so it must
//! not share code with [`crate::simplex`].

use crate::error::{Error, Result};

const RED_COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const MAX_PIVOTS: usize = 200_000;

/// `minimize c^T x  subject to  A x = b, x >= 0`.
pub struct StandardLp {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows x cols`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    n_orig: usize,
    /// Each row is `cols + 1` long; the last entry is the rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Reduced-cost row; last entry is minus the current objective.
    cost: Vec<f64>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cost.len() - 1
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let piv = self.rows[p][q];
        for v in self.rows[p].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.rows[p].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == p {
                continue;
            }
            let f = row[q];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[q] = 0.0; // clear residual rounding in the pivot column
            }
        }
        let f = self.cost[q];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[q] = 0.0;
        }
        self.basis[p] = q;
    }

    /// Runs simplex with Bland's rule over the allowed column range.
    fn run(&mut self, allowed_cols: usize) -> Result<()> {
        for _ in 0..MAX_PIVOTS {
            let Some(q) = (0..allowed_cols).find(|&j| self.cost[j] < -RED_COST_TOL) else {
                return Ok(());
            };
            let rhs_idx = self.width();
            let mut leave: Option<(usize, f64)> = None;
            for p in 0..self.rows.len() {
                let coef = self.rows[p][q];
                if coef > PIVOT_TOL {
                    let ratio = self.rows[p][rhs_idx] / coef;
                    let better = match leave {
                        None => true,
                        Some((lp, lr)) => {
                            ratio < lr - 1e-12
                                || (ratio < lr + 1e-12 && self.basis[p] < self.basis[lp])
                        }
                    };
                    if better {
                        leave = Some((p, ratio));
                    }
                }
            }
            let Some((p, _)) = leave else {
                return Err(Error::LpFailure("unbounded".into()));
            };
            self.pivot(p, q);
        }
        Err(Error::LpFailure("pivot limit exceeded".into()))
    }

    /// Rebuilds the reduced-cost row for the given objective.
    fn set_objective(&mut self, c: &[f64]) {
        let w = self.width();
        let mut cost = vec![0.0; w + 1];
        cost[..c.len()].copy_from_slice(c);
        for (p, row) in self.rows.iter().enumerate() {
            let cb = if self.basis[p] < c.len() {
                c[self.basis[p]]
            } else {
                0.0
            };
            if cb != 0.0 {
                for j in 0..=w {
                    cost[j] -= cb * row[j];
                }
            }
        }
        // Basic columns must price to exactly zero; the rhs entry now holds
        // minus the current objective value.
        for &b in &self.basis {
            cost[b] = 0.0;
        }
        self.cost = cost;
    }
}

/// Solves the LP, minimizing `c^T x`.
pub fn solve_min(lp: &StandardLp) -> Result<LpSolution> {
    let (m, n) = (lp.rows, lp.cols);
    assert_eq!(lp.a.len(), m * n);
    assert_eq!(lp.b.len(), m);
    assert_eq!(lp.c.len(), n);

    // Phase 1: artificial basis, normalized so the rhs is nonnegative.
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let flip = if lp.b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width + 1];
        for j in 0..n {
            row[j] = flip * lp.a[i * n + j];
        }
        row[n + i] = 1.0;
        row[width] = flip * lp.b[i];
        rows.push(row);
    }
    let basis: Vec<usize> = (n..n + m).collect();
    let mut t = Tableau {
        n_orig: n,
        rows,
        basis,
        cost: vec![0.0; width + 1],
    };
    // Phase-1 reduced costs: minimize the sum of artificials.
    let mut phase1_c = vec![0.0; width];
    for j in n..width {
        phase1_c[j] = 1.0;
    }
    t.set_objective(&phase1_c);
    t.run(width)?;
    let infeas = -t.cost[t.width()];
    if infeas > FEAS_TOL {
        return Err(Error::LpFailure(format!(
            "infeasible (phase-1 residual {infeas:.3e})"
        )));
    }

    // Drive artificials out of the basis; drop rows that are redundant.
    let mut p = 0;
    while p < t.rows.len() {
        if t.basis[p] >= t.n_orig {
            if let Some(q) = (0..t.n_orig).find(|&j| t.rows[p][j].abs() > PIVOT_TOL) {
                t.pivot(p, q);
            } else {
                t.rows.remove(p);
                t.basis.remove(p);
                continue;
            }
        }
        p += 1;
    }

    // Phase 2 over the original columns only.
    t.set_objective(&lp.c);
    t.run(n)?;

    let mut x = vec![0.0; n];
    let rhs_idx = t.width();
    for (p, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rows[p][rhs_idx];
        }
    }
    Ok(LpSolution {
        x,
        objective: -t.cost[rhs_idx],
    })
}

/// Optimal throughput gap of the relaxed scheduling problem, by a dense
/// solve over every enumerated independent-set column:
/// minimize `gamma` s.t. `M x + gamma a = a`, `1^T x = 1`, `gamma <= 1`,
/// all variables nonnegative. This is the cross-check oracle for the
/// column-generation scheduler and shares no code with it.
pub fn rel_optimum(
    g: &crate::topology::InterferenceGraph,
    rates: &[f64],
) -> Result<f64> {
    assert_eq!(rates.len(), g.n());
    let sets = crate::topology::enumerate_independent_sets(g)?;
    let n = g.n();
    let m = sets.len();
    // columns: x per set (the empty set keeps gamma = 1 feasible), gamma,
    // and the slack of gamma <= 1
    let cols = m + 2;
    let rows = n + 2;
    let mut a = vec![0.0; rows * cols];
    for (j, s) in sets.iter().enumerate() {
        for i in s.links() {
            a[i * cols + j] = 1.0;
        }
        a[n * cols + j] = 1.0;
    }
    for i in 0..n {
        a[i * cols + m] = rates[i];
    }
    a[(n + 1) * cols + m] = 1.0;
    a[(n + 1) * cols + m + 1] = 1.0;
    let mut b = vec![0.0; rows];
    b[..n].copy_from_slice(rates);
    b[n] = 1.0;
    b[n + 1] = 1.0;
    let mut c = vec![0.0; cols];
    c[m] = 1.0;
    let sol = solve_min(&StandardLp {
        rows,
        cols,
        a,
        b,
        c,
    })?;
    Ok(sol.objective)
}

/// Convenience wrapper: maximize `c^T x` over the same constraints.
pub fn solve_max(lp: &StandardLp) -> Result<LpSolution> {
    let neg = StandardLp {
        rows: lp.rows,
        cols: lp.cols,
        a: lp.a.clone(),
        b: lp.b.clone(),
        c: lp.c.iter().map(|v| -v).collect(),
    };
    let sol = solve_min(&neg)?;
    Ok(LpSolution {
        x: sol.x,
        objective: -sol.objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_bounded_max() {
        // max x + y s.t. x + y + s = 1  ->  1
        let lp = StandardLp {
            rows: 1,
            cols: 3,
            a: vec![1.0, 1.0, 1.0],
            b: vec![1.0],
            c: vec![1.0, 1.0, 0.0],
        };
        let sol = solve_max(&lp).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_constraint_min() {
        // min 2x + 3y s.t. x + y = 4, x - y = 0  ->  x = y = 2, obj 10
        let lp = StandardLp {
            rows: 2,
            cols: 2,
            a: vec![1.0, 1.0, 1.0, -1.0],
            b: vec![4.0, 0.0],
            c: vec![2.0, 3.0],
        };
        let sol = solve_min(&lp).unwrap();
        assert!((sol.objective - 10.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9);
        assert!((sol.x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        // x + y = 1 and x + y = 2 cannot both hold
        let lp = StandardLp {
            rows: 2,
            cols: 2,
            a: vec![1.0, 1.0, 1.0, 1.0],
            b: vec![1.0, 2.0],
            c: vec![0.0, 0.0],
        };
        assert!(matches!(solve_min(&lp), Err(Error::LpFailure(_))));
    }

    #[test]
    fn detects_unbounded() {
        // min -x1 s.t. x1 - x2 = 0 with x free to grow along x1 = x2
        let lp = StandardLp {
            rows: 1,
            cols: 2,
            a: vec![1.0, -1.0],
            b: vec![0.0],
            c: vec![-1.0, 0.0],
        };
        assert!(matches!(solve_min(&lp), Err(Error::LpFailure(_))));
    }

    #[test]
    fn tolerates_redundant_rows() {
        // duplicated constraint row
        let lp = StandardLp {
            rows: 2,
            cols: 2,
            a: vec![1.0, 1.0, 1.0, 1.0],
            b: vec![1.0, 1.0],
            c: vec![-1.0, -2.0],
        };
        let sol = solve_min(&lp).unwrap();
        assert!((sol.objective + 2.0).abs() < 1e-9);
        assert!((sol.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // -x - y = -4, x - y = 0  ->  same as two_constraint_min
        let lp = StandardLp {
            rows: 2,
            cols: 2,
            a: vec![-1.0, -1.0, 1.0, -1.0],
            b: vec![-4.0, 0.0],
            c: vec![2.0, 3.0],
        };
        let sol = solve_min(&lp).unwrap();
        assert!((sol.objective - 10.0).abs() < 1e-9);
    }
}
