//! Centralized simplex scheduling over independent-set columns.
//!
//! The scheduler minimizes the throughput gap `gamma` subject to
//! `M x = (1 - gamma) a`, `1^T x = 1`, `x >= 0`, `0 <= gamma <= 1`,
//! by holding an invertible basis of `n` schedules, pricing candidate
//! columns with the exact max-weight oracle, and moving to an adjacent
//! vertex along the single degree of freedom the entering column opens.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::topology::{max_weight_independent_set, InterferenceGraph, Schedule};

/// Components at or below this magnitude count as zero in ratio tests and
/// feasibility checks; the same threshold judges factorization pivots.
pub const ZERO_TOL: f64 = 1e-10;

/// An invertible `n x n` 0/1 matrix of schedules, factorized on
/// construction. Pricing weights (the back-solve of `B^T c = 1`) are cached
/// and reused across all candidate columns.
#[derive(Debug, Clone)]
pub struct Basis {
    n: usize,
    columns: Vec<Schedule>,
    lu: Lu,
    pricing: Vec<f64>,
}

impl Basis {
    pub fn new(columns: Vec<Schedule>) -> Result<Basis> {
        let n = columns.len();
        assert!(n > 0, "basis needs at least one column");
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.n(), n, "column width must match basis size");
            if col.is_empty() {
                return Err(Error::EmptyBasisColumn(j));
            }
        }
        let mut b = vec![0.0; n * n];
        for (j, col) in columns.iter().enumerate() {
            for i in col.links() {
                b[i * n + j] = 1.0;
            }
        }
        let lu = Lu::factor_with_tol(&b, n, ZERO_TOL)?;
        let pricing = lu.solve_transpose(&vec![1.0; n]);
        Ok(Basis {
            n,
            columns,
            lu,
            pricing,
        })
    }

    /// The identity basis of singleton schedules.
    pub fn identity(g: &InterferenceGraph) -> Basis {
        let columns = (0..g.n()).map(|i| Schedule::singleton(g, i)).collect();
        Basis::new(columns).expect("identity basis is invertible")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> &[Schedule] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &Schedule {
        &self.columns[j]
    }

    pub fn contains(&self, s: &Schedule) -> bool {
        self.columns.iter().any(|c| c.mask() == s.mask())
    }

    /// Solves `B x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.lu.solve(rhs)
    }

    /// `c = B^{-T} 1`; a candidate's score is `c^T sigma`.
    pub fn pricing_weights(&self) -> &[f64] {
        &self.pricing
    }

    /// Rebuilds the basis with column `j` swapped for `entering`.
    /// Refactorizes from scratch; a singular result is rejected.
    pub fn replace_column(&self, j: usize, entering: Schedule) -> Result<Basis> {
        assert!(j < self.n);
        let mut columns = self.columns.clone();
        columns[j] = entering;
        Basis::new(columns).map_err(|_| Error::PivotSingular(j))
    }
}

/// A vertex of the relaxed problem: time fractions of the basic schedules
/// plus the throughput gap.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub x_basic: Vec<f64>,
    pub gap: f64,
}

/// Initial vertex: identity basis with `x = a / 1^T a` and
/// `gap = 1 - 1 / 1^T a`. Underloaded inputs (`1^T a < 1`) are already
/// schedulable by singletons plus idle time, so the gap is zero and the
/// fractions are the rates themselves, leaving `1 - 1^T a` implicit idle
/// slack.
pub fn initial_vertex(g: &InterferenceGraph, rates: &[f64]) -> Result<(Basis, Vertex)> {
    validate_rates(g, rates)?;
    let basis = Basis::identity(g);
    let total: f64 = rates.iter().sum();
    let vertex = if total >= 1.0 {
        Vertex {
            x_basic: rates.iter().map(|a| a / total).collect(),
            gap: 1.0 - 1.0 / total,
        }
    } else {
        Vertex {
            x_basic: rates.to_vec(),
            gap: 0.0,
        }
    };
    Ok((basis, vertex))
}

fn validate_rates(g: &InterferenceGraph, rates: &[f64]) -> Result<()> {
    if rates.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: rates.len(),
        });
    }
    for (i, &a) in rates.iter().enumerate() {
        if a < 0.0 || !a.is_finite() {
            return Err(Error::NegativeRate { link: i, value: a });
        }
    }
    Ok(())
}

/// Unique `(x_B, gap)` determined by the basis, using
/// `(1 - gap) (1^T B^{-1} a) = 1`. Valid in the `1^T a >= 1` regime; a
/// solution with negative fractions or a gap outside `[0, 1]` is reported
/// as an infeasible vertex rather than returned.
pub fn solve_vertex(basis: &Basis, rates: &[f64]) -> Result<Vertex> {
    assert_eq!(rates.len(), basis.n());
    let y = basis.solve(rates);
    let scale: f64 = y.iter().sum();
    if scale.abs() <= ZERO_TOL {
        return Err(Error::InfeasibleVertex(
            "1^T B^{-1} a vanishes; the bordered system is singular".into(),
        ));
    }
    let gap = 1.0 - 1.0 / scale;
    if !(-ZERO_TOL..=1.0 + ZERO_TOL).contains(&gap) {
        return Err(Error::InfeasibleVertex(format!(
            "gap {gap:.6} outside [0, 1]"
        )));
    }
    let mut x_basic = Vec::with_capacity(y.len());
    for (j, v) in y.iter().enumerate() {
        let frac = v / scale;
        if frac < -ZERO_TOL {
            return Err(Error::InfeasibleVertex(format!(
                "fraction {frac:.6} of basic schedule {j} is negative"
            )));
        }
        x_basic.push(frac.max(0.0));
    }
    Ok(Vertex {
        x_basic,
        gap: gap.clamp(0.0, 1.0),
    })
}

/// Pricing score `1^T B^{-1} sigma` of a candidate column.
pub fn direction_score(basis: &Basis, sigma: &Schedule) -> f64 {
    sigma.weight(basis.pricing_weights())
}

/// Per-unit change of the gap along the edge opened by a column with this
/// score: `(1 - gap) (1 - score)`.
pub fn delta_gamma(gap: f64, score: f64) -> f64 {
    (1.0 - gap) * (1.0 - score)
}

/// Best moving direction: the max-weight independent set under the pricing
/// weights, via the exact oracle.
pub fn simplex_search(basis: &Basis, g: &InterferenceGraph) -> Result<Schedule> {
    max_weight_independent_set(g, basis.pricing_weights())
}

/// Which constraint ended the line search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leaving {
    /// A basic fraction hit zero; this column leaves the basis.
    Column(usize),
    /// The gap hit zero; the scheduler terminates at an optimum.
    GapBound,
    /// The entering column does not improve (score <= 1); nothing moved.
    Null,
}

impl fmt::Display for Leaving {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Leaving::Column(j) => write!(f, "{j}"),
            Leaving::GapBound => write!(f, "gap"),
            Leaving::Null => write!(f, "none"),
        }
    }
}

/// Outcome of the line search along the entering column.
#[derive(Debug, Clone)]
pub struct PivotReport {
    pub entering: Schedule,
    pub leaving: Leaving,
    /// Maximal step, i.e. the time fraction handed to the entering column.
    pub step: f64,
    /// Fractions of the (old) basic columns after the move.
    pub x_basic_after: Vec<f64>,
    pub gap_after: f64,
    /// All column indices that tied in the ratio test, ascending; used to
    /// retry when the preferred swap would be singular.
    pub tied_leaving: Vec<usize>,
}

/// Moves from `vertex` along the entering column as far as feasibility
/// allows. The move keeps the equality constraints tight, so the basic
/// fractions and the gap are linear in the step `s`:
/// `x(s) = x - s (r - (score - 1) x)` and `gap(s) = gap - s (1 - gap)(score - 1)`
/// with `r = B^{-1} sigma`. The step stops at the first of `x >= 0` and
/// `gap >= 0`; ties among columns are broken toward the smallest index
/// (Bland-style), and a tie between the gap bound and a column prefers the
/// gap so the caller terminates.
pub fn move_to_vertex(basis: &Basis, vertex: &Vertex, entering: &Schedule) -> Result<PivotReport> {
    assert_eq!(entering.n(), basis.n());
    let score = direction_score(basis, entering);
    if score <= 1.0 + ZERO_TOL {
        return Ok(PivotReport {
            entering: *entering,
            leaving: Leaving::Null,
            step: 0.0,
            x_basic_after: vertex.x_basic.clone(),
            gap_after: vertex.gap,
            tied_leaving: Vec::new(),
        });
    }
    let r = basis.solve(&entering.dense_column());
    let excess = score - 1.0;
    let u: Vec<f64> = r
        .iter()
        .zip(&vertex.x_basic)
        .map(|(ri, xi)| ri - excess * xi)
        .collect();
    let gap_rate = (1.0 - vertex.gap) * excess;

    let mut step_x = f64::INFINITY;
    for (xi, ui) in vertex.x_basic.iter().zip(&u) {
        if *ui > ZERO_TOL {
            step_x = step_x.min(xi / ui);
        }
    }
    let step_gap = if gap_rate > ZERO_TOL {
        vertex.gap / gap_rate
    } else {
        f64::INFINITY
    };
    if !step_x.is_finite() && !step_gap.is_finite() {
        return Err(Error::UnboundedStep);
    }

    let tie = 1e-12 * (1.0 + step_x.min(step_gap).abs());
    let (step, leaving, tied) = if step_gap <= step_x + tie {
        (step_gap, Leaving::GapBound, Vec::new())
    } else {
        let tied: Vec<usize> = (0..u.len())
            .filter(|&i| u[i] > ZERO_TOL && vertex.x_basic[i] / u[i] <= step_x + tie)
            .collect();
        (step_x, Leaving::Column(tied[0]), tied)
    };

    let x_basic_after: Vec<f64> = vertex
        .x_basic
        .iter()
        .zip(&u)
        .map(|(xi, ui)| {
            let v = xi - step * ui;
            if v.abs() <= ZERO_TOL {
                0.0
            } else {
                v
            }
        })
        .collect();
    let gap_after = {
        let v = vertex.gap - step * gap_rate;
        if v.abs() <= ZERO_TOL {
            0.0
        } else {
            v
        }
    };
    Ok(PivotReport {
        entering: *entering,
        leaving,
        step,
        x_basic_after,
        gap_after,
        tied_leaving: tied,
    })
}

/// Column swap; kept as a thin wrapper so callers can retry tied leaving
/// candidates when a swap is rejected as singular.
pub fn pivot(basis: &Basis, entering: Schedule, leaving_index: usize) -> Result<Basis> {
    basis.replace_column(leaving_index, entering)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimStatus {
    /// Gap zero; the rates are schedulable and the support carries them.
    Optimal,
    /// Gap positive and no column prices above one: the rates are outside
    /// the capacity region and the gap is the certified optimum.
    NoImprovingDirection,
}

#[derive(Debug, Clone)]
pub struct SimIterRecord {
    pub iteration: usize,
    /// Gap after this pivot.
    pub gap: f64,
    pub entering: Schedule,
    pub leaving: Leaving,
    pub step: f64,
}

#[derive(Debug)]
pub struct SimResult {
    pub basis: Basis,
    pub x_basic: Vec<f64>,
    pub gap: f64,
    /// Entering column and its fraction when the run ended on the gap
    /// bound; the optimal support then has `n + 1` columns.
    pub extra: Option<(Schedule, f64)>,
    pub iterations: usize,
    pub status: SimStatus,
    pub log: Vec<SimIterRecord>,
}

impl SimResult {
    /// Schedules with positive fractions, including the extra column.
    pub fn support(&self) -> Vec<(Schedule, f64)> {
        let mut out: Vec<(Schedule, f64)> = self
            .basis
            .columns()
            .iter()
            .zip(&self.x_basic)
            .filter(|(_, &x)| x > 0.0)
            .map(|(s, &x)| (*s, x))
            .collect();
        if let Some((s, x)) = self.extra {
            out.push((s, x));
        }
        out
    }

    /// `M x`: per-link service rate delivered by the support.
    pub fn scheduled_rates(&self) -> Vec<f64> {
        let n = self.basis.n();
        let mut rates = vec![0.0; n];
        for (s, x) in self.support() {
            for i in s.links() {
                rates[i] += x;
            }
        }
        rates
    }

    /// Total time fraction used, including the extra column.
    pub fn time_total(&self) -> f64 {
        self.x_basic.iter().sum::<f64>() + self.extra.map_or(0.0, |(_, x)| x)
    }
}

/// Full scheduler run: price, move, swap, until the gap reaches zero or no
/// column improves. Each pivot refactorizes the basis and recomputes the
/// vertex from scratch.
pub fn sim_run(g: &InterferenceGraph, rates: &[f64], iteration_cap: usize) -> Result<SimResult> {
    let (mut basis, mut vertex) = initial_vertex(g, rates)?;
    let mut log = Vec::new();
    let total: f64 = rates.iter().sum();
    if total < 1.0 {
        // underloaded: singletons plus idle slack already meet the rates
        return Ok(SimResult {
            basis,
            x_basic: vertex.x_basic,
            gap: 0.0,
            extra: None,
            iterations: 0,
            status: SimStatus::Optimal,
            log,
        });
    }

    let mut iterations = 0;
    loop {
        if vertex.gap <= ZERO_TOL {
            return Ok(SimResult {
                basis,
                x_basic: vertex.x_basic,
                gap: 0.0,
                extra: None,
                iterations,
                status: SimStatus::Optimal,
                log,
            });
        }
        if iterations >= iteration_cap {
            return Err(Error::IterationCap {
                cap: iteration_cap,
                gap: vertex.gap,
            });
        }
        let entering = simplex_search(&basis, g)?;
        if direction_score(&basis, &entering) <= 1.0 + ZERO_TOL {
            return Ok(SimResult {
                basis,
                x_basic: vertex.x_basic,
                gap: vertex.gap,
                extra: None,
                iterations,
                status: SimStatus::NoImprovingDirection,
                log,
            });
        }
        let report = move_to_vertex(&basis, &vertex, &entering)?;
        iterations += 1;
        log.push(SimIterRecord {
            iteration: iterations,
            gap: report.gap_after,
            entering,
            leaving: report.leaving,
            step: report.step,
        });
        match report.leaving {
            Leaving::GapBound => {
                return Ok(SimResult {
                    basis,
                    x_basic: report.x_basic_after,
                    gap: 0.0,
                    extra: Some((entering, report.step)),
                    iterations,
                    status: SimStatus::Optimal,
                    log,
                });
            }
            Leaving::Column(_) => {
                let mut swapped = None;
                for &j in &report.tied_leaving {
                    if let Ok(next) = pivot(&basis, entering, j) {
                        swapped = Some(next);
                        break;
                    }
                }
                basis = swapped.ok_or(Error::PivotSingular(report.tied_leaving[0]))?;
                vertex = solve_vertex(&basis, rates)?;
            }
            Leaving::Null => {
                // score was checked above; a null move here means the
                // pricing state is inconsistent
                return Err(Error::UnboundedStep);
            }
        }
    }
}

/// Writes the per-pivot log as `iteration,gamma,entering,leaving,step` CSV.
pub fn write_sim_log_csv(log: &[SimIterRecord], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "iteration,gamma,entering,leaving,step")?;
    for rec in log {
        writeln!(
            out,
            "{},{},{},{},{}",
            rec.iteration,
            rec.gap,
            rec.entering.to_bitstring(),
            rec.leaving,
            rec.step
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::lp;
    use crate::topology::enumerate_independent_sets;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform_rates(n: usize, a: f64) -> Vec<f64> {
        vec![a; n]
    }

    #[test]
    fn initial_vertex_values() {
        let ring = InterferenceGraph::ring(6).unwrap();
        let (_, v) = initial_vertex(&ring, &uniform_rates(6, 0.475)).unwrap();
        assert!((v.gap - (1.0 - 1.0 / 2.85)).abs() < 1e-12);
        for x in &v.x_basic {
            assert!((x - 0.475 / 2.85).abs() < 1e-12);
        }

        let path = InterferenceGraph::path(3).unwrap();
        let (_, v) = initial_vertex(&path, &uniform_rates(3, 0.45)).unwrap();
        assert!((v.gap - (1.0 - 1.0 / 1.35)).abs() < 1e-12);
        for x in &v.x_basic {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }

        let (_, v) = initial_vertex(&path, &[0.0; 3]).unwrap();
        assert_eq!(v.gap, 0.0);
        assert_eq!(v.x_basic, vec![0.0; 3]);

        assert!(matches!(
            initial_vertex(&path, &[0.1, -0.2, 0.3]),
            Err(Error::NegativeRate { link: 1, .. })
        ));
    }

    #[test]
    fn solve_vertex_matches_initial_vertex() {
        let path = InterferenceGraph::path(3).unwrap();
        let rates = uniform_rates(3, 0.45);
        let (basis, v0) = initial_vertex(&path, &rates).unwrap();
        let v = solve_vertex(&basis, &rates).unwrap();
        assert!((v.gap - v0.gap).abs() < 1e-12);
        assert!(max_abs_diff(&v.x_basic, &v0.x_basic) < 1e-12);
    }

    #[test]
    fn duplicate_columns_are_singular() {
        let path = InterferenceGraph::path(3).unwrap();
        let s = Schedule::from_bits(&path, &[1, 0, 1]).unwrap();
        let e1 = Schedule::singleton(&path, 1);
        assert!(matches!(
            Basis::new(vec![s, s, e1]),
            Err(Error::SingularMatrix { .. })
        ));
        assert!(matches!(
            Basis::new(vec![Schedule::empty(3), s, e1]),
            Err(Error::EmptyBasisColumn(0))
        ));
    }

    #[test]
    fn direction_score_on_identity_basis() {
        let path = InterferenceGraph::path(3).unwrap();
        let basis = Basis::identity(&path);
        let s = Schedule::from_bits(&path, &[1, 0, 1]).unwrap();
        assert!((direction_score(&basis, &s) - 2.0).abs() < 1e-12);
        for j in 0..3 {
            assert!((direction_score(&basis, basis.column(j)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_gamma_values() {
        assert_eq!(delta_gamma(0.3, 1.0), 0.0);
        // identity basis on the 6-ring at 95% load, entering alternating mode
        let gap = 1.0 - 1.0 / 2.85;
        let dg = delta_gamma(gap, 3.0);
        assert!((dg - (-2.0 / 2.85)).abs() < 1e-12);
        assert!((dg + 0.70175).abs() < 1e-4);
        // cost-reduction bound for the maximizing direction
        assert!(dg <= -gap + 1e-10);
    }

    #[test]
    fn search_finds_the_expected_modes() {
        let path = InterferenceGraph::path(3).unwrap();
        let basis = Basis::identity(&path);
        assert_eq!(
            simplex_search(&basis, &path).unwrap().to_bitstring(),
            "101"
        );

        let ring = InterferenceGraph::ring(6).unwrap();
        let basis = Basis::identity(&ring);
        assert_eq!(
            simplex_search(&basis, &ring).unwrap().to_bitstring(),
            "101010"
        );
    }

    #[test]
    fn worked_line_search_on_path3() {
        let path = InterferenceGraph::path(3).unwrap();
        let rates = uniform_rates(3, 0.45);
        let (basis, vertex) = initial_vertex(&path, &rates).unwrap();
        let entering = Schedule::from_bits(&path, &[1, 0, 1]).unwrap();
        let report = move_to_vertex(&basis, &vertex, &entering).unwrap();

        assert_eq!(report.leaving, Leaving::GapBound);
        assert!((report.step - 0.35).abs() < 1e-12);
        assert!(report.gap_after.abs() < 1e-12);
        let expect = [0.1, 0.45, 0.1];
        assert!(max_abs_diff(&report.x_basic_after, &expect) < 1e-12);

        // the moved point still carries the rates exactly
        let mut served = vec![0.0; 3];
        for (j, x) in report.x_basic_after.iter().enumerate() {
            for i in basis.column(j).links() {
                served[i] += x;
            }
        }
        for i in entering.links() {
            served[i] += report.step;
        }
        assert!(max_abs_diff(&served, &rates) < 1e-12);
    }

    #[test]
    fn null_pivot_for_basis_column() {
        let path = InterferenceGraph::path(3).unwrap();
        let rates = uniform_rates(3, 0.45);
        let (basis, vertex) = initial_vertex(&path, &rates).unwrap();
        let report = move_to_vertex(&basis, &vertex, basis.column(1)).unwrap();
        assert_eq!(report.leaving, Leaving::Null);
        assert_eq!(report.step, 0.0);
        assert_eq!(report.gap_after, vertex.gap);
    }

    #[test]
    fn pivot_swap_and_cross_check() {
        let path = InterferenceGraph::path(3).unwrap();
        let rates = uniform_rates(3, 0.45);
        let (basis, _) = initial_vertex(&path, &rates).unwrap();
        let entering = Schedule::from_bits(&path, &[1, 0, 1]).unwrap();

        let swapped = pivot(&basis, entering, 0).unwrap();
        assert_eq!(swapped.column(0).to_bitstring(), "101");

        // swapping in a duplicate of an existing column must fail
        assert!(matches!(
            pivot(&swapped, *swapped.column(1), 2),
            Err(Error::PivotSingular(2))
        ));
    }

    #[test]
    fn pivot_then_solve_matches_line_search() {
        // on the 6-ring the first pivot leaves by a column bound, so the
        // recomputed vertex must match the line-search prediction
        let ring = InterferenceGraph::ring(6).unwrap();
        let rates = uniform_rates(6, 0.475);
        let (basis, vertex) = initial_vertex(&ring, &rates).unwrap();
        let entering = simplex_search(&basis, &ring).unwrap();
        let report = move_to_vertex(&basis, &vertex, &entering).unwrap();
        let Leaving::Column(j) = report.leaving else {
            panic!("expected a column to leave, got {:?}", report.leaving);
        };
        let next = pivot(&basis, entering, j).unwrap();
        let v = solve_vertex(&next, &rates).unwrap();
        assert!((v.gap - report.gap_after).abs() < 1e-10);
        // the entering column sits at slot j of the new basis
        assert!((v.x_basic[j] - report.step).abs() < 1e-10);
        for i in 0..6 {
            if i != j {
                assert!((v.x_basic[i] - report.x_basic_after[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sim_solves_path3_in_one_iteration() {
        let path = InterferenceGraph::path(3).unwrap();
        let res = sim_run(&path, &uniform_rates(3, 0.45), 50).unwrap();
        assert_eq!(res.status, SimStatus::Optimal);
        assert_eq!(res.iterations, 1);
        assert_eq!(res.gap, 0.0);
    }

    #[test]
    fn sim_solves_ring6() {
        let ring = InterferenceGraph::ring(6).unwrap();
        let rates = uniform_rates(6, 0.475);
        let res = sim_run(&ring, &rates, 50).unwrap();
        assert_eq!(res.status, SimStatus::Optimal);
        assert!(max_abs_diff(&res.scheduled_rates(), &rates) < 1e-9);
        assert!((res.time_total() - 1.0).abs() < 1e-9);
        // gap is non-increasing across the log
        let mut last = f64::INFINITY;
        for rec in &res.log {
            assert!(rec.gap <= last + 1e-12);
            last = rec.gap;
        }
    }

    #[test]
    fn sim_reports_infeasible_rates() {
        let star = InterferenceGraph::star(7).unwrap();
        let rates = uniform_rates(7, 0.6);
        let res = sim_run(&star, &rates, 50).unwrap();
        assert_eq!(res.status, SimStatus::NoImprovingDirection);
        assert!(res.gap > 0.0);
        // certified against the dense LP over all enumerated columns
        let lp_gap = lp::rel_optimum(&star, &rates).unwrap();
        assert!((res.gap - lp_gap).abs() < 1e-7);
        assert!((lp_gap - 1.0 / 6.0).abs() < 1e-7);
    }

    #[test]
    fn sim_iteration_cap_is_an_error() {
        let ring = InterferenceGraph::ring(6).unwrap();
        assert!(matches!(
            sim_run(&ring, &uniform_rates(6, 0.475), 0),
            Err(Error::IterationCap { cap: 0, .. })
        ));
    }

    #[test]
    fn sim_underloaded_returns_immediately() {
        let path = InterferenceGraph::path(3).unwrap();
        let res = sim_run(&path, &uniform_rates(3, 0.2), 50).unwrap();
        assert_eq!(res.status, SimStatus::Optimal);
        assert_eq!(res.iterations, 0);
        assert!(max_abs_diff(&res.scheduled_rates(), &uniform_rates(3, 0.2)) < 1e-12);
        assert!(res.time_total() < 1.0);
    }

    fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> InterferenceGraph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        InterferenceGraph::new(n, edges).unwrap()
    }

    /// Random rate vector as a convex combination of schedules, optionally
    /// scaled; `1^T a >= 1` is enforced by rejection.
    fn random_rates(
        g: &InterferenceGraph,
        rng: &mut ChaCha8Rng,
        scale: f64,
        min_total: f64,
    ) -> Option<Vec<f64>> {
        let sets = enumerate_independent_sets(g).unwrap();
        let nonempty: Vec<_> = sets.iter().filter(|s| !s.is_empty()).collect();
        if nonempty.is_empty() {
            return None;
        }
        for _ in 0..200 {
            let mut weights: Vec<f64> = (0..nonempty.len())
                .map(|_| -rng.random::<f64>().max(1e-12).ln())
                .collect();
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            let mut rates = vec![0.0; g.n()];
            for (s, w) in nonempty.iter().zip(&weights) {
                for i in s.links() {
                    rates[i] += w * scale;
                }
            }
            if rates.iter().sum::<f64>() >= min_total {
                return Some(rates);
            }
        }
        None
    }

    #[test]
    fn sim_matches_dense_lp_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut tested = 0;
        while tested < 30 {
            let n = rng.random_range(2..=8);
            let g = random_graph(&mut rng, n, 0.4);
            // scale around 1.0 mixes schedulable and overloaded instances
            let scale = rng.random_range(0.7..1.3);
            let Some(rates) = random_rates(&g, &mut rng, scale, 1.0) else {
                continue;
            };
            let res = sim_run(&g, &rates, 200).unwrap();
            let lp_gap = lp::rel_optimum(&g, &rates).unwrap();
            assert!(
                (res.gap - lp_gap).abs() < 1e-7,
                "gap {} vs dense LP {}",
                res.gap,
                lp_gap
            );
            tested += 1;
        }
    }

    #[test]
    fn accepted_pivots_are_nondegenerate_with_one_binder() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut tested = 0;
        while tested < 40 {
            let n = rng.random_range(2..=8);
            let g = random_graph(&mut rng, n, 0.35);
            let Some(rates) = random_rates(&g, &mut rng, 1.0, 1.0) else {
                continue;
            };
            let (basis, vertex) = initial_vertex(&g, &rates).unwrap();
            let entering = simplex_search(&basis, &g).unwrap();
            if direction_score(&basis, &entering) <= 1.0 + 1e-9 {
                continue;
            }
            let report = move_to_vertex(&basis, &vertex, &entering).unwrap();
            assert!(report.step > 0.0);
            assert!(report.gap_after <= vertex.gap + 1e-12);
            if let Leaving::Column(_) = report.leaving {
                assert_eq!(report.tied_leaving.len(), 1, "degenerate tie unexpected");
            }
            tested += 1;
        }
    }

    #[test]
    fn feasibility_and_monotonicity_along_manual_iterations() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut tested = 0;
        while tested < 20 {
            let n = rng.random_range(2..=8);
            let g = random_graph(&mut rng, n, 0.4);
            let Some(rates) = random_rates(&g, &mut rng, 1.0, 1.0) else {
                continue;
            };
            let (mut basis, mut vertex) = initial_vertex(&g, &rates).unwrap();
            for _ in 0..50 {
                if vertex.gap <= ZERO_TOL {
                    break;
                }
                let entering = simplex_search(&basis, &g).unwrap();
                if direction_score(&basis, &entering) <= 1.0 + ZERO_TOL {
                    break;
                }
                let report = move_to_vertex(&basis, &vertex, &entering).unwrap();
                assert!(report.gap_after <= vertex.gap + 1e-12);
                match report.leaving {
                    Leaving::GapBound => break,
                    Leaving::Column(j) => {
                        basis = pivot(&basis, entering, j).unwrap();
                        vertex = solve_vertex(&basis, &rates).unwrap();
                        // feasibility at every iterate
                        assert!(vertex.x_basic.iter().all(|&x| x >= 0.0));
                        assert!((0.0..=1.0).contains(&vertex.gap));
                        let mut served = vec![0.0; g.n()];
                        for (col, x) in basis.columns().iter().zip(&vertex.x_basic) {
                            for i in col.links() {
                                served[i] += x;
                            }
                        }
                        let want: Vec<f64> =
                            rates.iter().map(|a| (1.0 - vertex.gap) * a).collect();
                        assert!(max_abs_diff(&served, &want) < 1e-9);
                        assert!((vertex.x_basic.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                    }
                    Leaving::Null => unreachable!(),
                }
            }
            tested += 1;
        }
    }

    #[test]
    fn log_csv_format() {
        let ring = InterferenceGraph::ring(6).unwrap();
        let res = sim_run(&ring, &uniform_rates(6, 0.475), 50).unwrap();
        let mut buf = Vec::new();
        write_sim_log_csv(&res.log, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iteration,gamma,entering,leaving,step\n"));
        assert_eq!(text.lines().count(), res.log.len() + 1);
    }
}
