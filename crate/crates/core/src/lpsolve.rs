//! Dense linear-programming solver.
//!
//! Problems are `min/max cᵀx` subject to equality rows, `≤`/`≥` rows and
//! `x ≥ 0`. The built-in [`DenseSimplex`] is a two-phase revised simplex
//! method with an explicit basis inverse. Entering variables are chosen by
//! Dantzig's rule; after a run of degenerate pivots it switches to Bland's
//! rule (smallest index, smallest-index ties in the ratio test) until the
//! objective moves again, which rules out cycling. Redundant equality rows are
//! removed beforehand by rank-revealing elimination.
//!
//! Every optimum is re-checked against the original rows: primal residuals,
//! dual feasibility of the reduced costs, and the primal/dual objective gap.
//! If any check fails the status is [`LpStatus::NumericalFailure`].

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

/// Absolute primal feasibility tolerance per constraint.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Tolerance on reduced costs and on the relative duality gap.
pub const OPTIMALITY_TOL: f64 = 1e-8;
/// Pivot tolerance of the redundancy elimination.
pub const RANK_TOL: f64 = 1e-10;

const PIVOT_TOL: f64 = 1e-9;
const PRICE_TOL: f64 = 1e-10;
/// Primal slack allowed by the Harris ratio test.
const HARRIS_TOL: f64 = 1e-11;
/// Pivots between reinversions, at least the row count.
const REINVERT_EVERY: usize = 64;
/// Row count from which the `B⁻¹` update runs on the thread pool.
const PARALLEL_ROWS: usize = 256;
const DEGENERATE_RUN: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed LP: {0}")]
    Malformed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub eq_constraints: Vec<(Vec<f64>, f64)>,
    pub ineq_constraints: Vec<(Vec<f64>, f64, Sense)>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        LpProblem { num_vars: objective.len(), objective, ..Default::default() }
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.eq_constraints.push((row, rhs));
    }

    pub fn add_ineq(&mut self, row: Vec<f64>, rhs: f64, sense: Sense) {
        self.ineq_constraints.push((row, rhs, sense));
    }

    pub fn num_constraints(&self) -> usize {
        self.eq_constraints.len() + self.ineq_constraints.len()
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars;
        if self.objective.len() != n {
            return Err(LpError::Malformed(format!("objective has {} entries, expected {n}", self.objective.len())));
        }
        let rows = self.eq_constraints.iter().map(|(r, b)| (r, *b)).chain(self.ineq_constraints.iter().map(|(r, b, _)| (r, *b)));
        for (k, (row, rhs)) in rows.enumerate() {
            if row.len() != n {
                return Err(LpError::Malformed(format!("row {k} has {} entries, expected {n}", row.len())));
            }
            if !rhs.is_finite() || row.iter().any(|v| !v.is_finite()) {
                return Err(LpError::Malformed(format!("row {k} has a non-finite entry")));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(LpError::Malformed("objective has a non-finite entry".into()));
        }
        Ok(())
    }

    /// Largest absolute violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let mut worst = x.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
        for (row, rhs) in &self.eq_constraints {
            worst = worst.max((dot(row) - rhs).abs());
        }
        for (row, rhs, sense) in &self.ineq_constraints {
            let lhs = dot(row);
            let v = match sense {
                Sense::Le => lhs - rhs,
                Sense::Ge => rhs - lhs,
            };
            worst = worst.max(v.max(0.0));
        }
        worst
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// CPLEX LP text with every coefficient in 17-significant-digit
    /// scientific notation. Variables are `x0..`, equality rows `e0..`,
    /// inequality rows `i0..`; all variables have the default bound `≥ 0`.
    pub fn to_lp_format(&self, direction: Direction) -> String {
        fn terms(out: &mut String, row: &[f64]) {
            let mut any = false;
            for (j, &a) in row.iter().enumerate() {
                if a != 0.0 {
                    let _ = write!(out, " {:+.16e} x{j}", a);
                    any = true;
                }
            }
            if !any {
                out.push_str(" 0 x0");
            }
        }
        let mut out = String::from("\\ bitstuff LP export\n");
        out.push_str(match direction {
            Direction::Min => "Minimize\n",
            Direction::Max => "Maximize\n",
        });
        out.push_str(" obj:");
        terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for (k, (row, rhs)) in self.eq_constraints.iter().enumerate() {
            let _ = write!(out, " e{k}:");
            terms(&mut out, row);
            let _ = writeln!(out, " = {:.16e}", rhs);
        }
        for (k, (row, rhs, sense)) in self.ineq_constraints.iter().enumerate() {
            let _ = write!(out, " i{k}:");
            terms(&mut out, row);
            let op = if *sense == Sense::Le { "<=" } else { ">=" };
            let _ = writeln!(out, " {op} {:.16e}", rhs);
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    pub primal: Vec<f64>,
    /// One multiplier per constraint: equality rows first, then inequality
    /// rows, signed for the requested direction.
    pub dual: Vec<f64>,
    pub duality_gap: f64,
    pub max_primal_violation: f64,
    pub max_dual_violation: f64,
    pub iterations: usize,
    pub removed_rows: usize,
    pub diagnostics: String,
}

impl LpSolution {
    fn failed(status: LpStatus, diagnostics: impl Into<String>, iterations: usize) -> Self {
        LpSolution {
            status,
            objective_value: f64::NAN,
            primal: Vec::new(),
            dual: Vec::new(),
            duality_gap: f64::NAN,
            max_primal_violation: f64::NAN,
            max_dual_violation: f64::NAN,
            iterations,
            removed_rows: 0,
            diagnostics: diagnostics.into(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Pluggable solver backend.
pub trait LpSolver: Send + Sync {
    fn solve(&self, problem: &LpProblem, direction: Direction) -> Result<LpSolution, LpError>;
}

#[derive(Clone, Copy, Debug)]
pub struct DenseSimplex {
    pub max_iterations: usize,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        DenseSimplex { max_iterations: 200_000 }
    }
}

/// Solves with the default [`DenseSimplex`].
pub fn solve(problem: &LpProblem, direction: Direction) -> Result<LpSolution, LpError> {
    DenseSimplex::default().solve(problem, direction)
}

impl LpSolver for DenseSimplex {
    fn solve(&self, problem: &LpProblem, direction: Direction) -> Result<LpSolution, LpError> {
        problem.check()?;
        let sign = match direction {
            Direction::Min => 1.0,
            Direction::Max => -1.0,
        };
        let std = match StandardForm::build(problem, sign) {
            Ok(s) => s,
            Err(row) => {
                return Ok(LpSolution::failed(LpStatus::Infeasible, format!("equality row {row} is inconsistent"), 0))
            }
        };
        let mut tab = Revised::new(&std, self.max_iterations);
        let sol = tab.run();
        Ok(match sol {
            Outcome::Optimal => certify(problem, &std, &mut tab, sign),
            Outcome::Infeasible(v) => {
                LpSolution::failed(LpStatus::Infeasible, format!("phase-1 residual {v:.3e}"), tab.iterations)
            }
            Outcome::Unbounded(j) => {
                LpSolution::failed(LpStatus::Unbounded, format!("column {j} has no blocking row"), tab.iterations)
            }
            Outcome::Stalled(msg) => LpSolution::failed(LpStatus::NumericalFailure, msg, tab.iterations),
        })
    }
}

/// `min cᵀx, Ax = b, x ≥ 0, b ≥ 0` after slacks, sign flips and row removal.
struct StandardForm {
    m: usize,
    /// Structural + slack columns as `(row, value)` nonzeros (artificials
    /// are added by the solver).
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    b: Vec<f64>,
    /// For each standard row: (original row index, sign applied).
    origin: Vec<(usize, f64)>,
    /// Column already usable as an initial basic variable for each row.
    unit: Vec<Option<usize>>,
    removed: usize,
}

impl StandardForm {
    fn build(p: &LpProblem, sign: f64) -> Result<StandardForm, usize> {
        let n = p.num_vars;
        let kept = independent_rows(&p.eq_constraints)?;
        let removed = p.eq_constraints.len() - kept.len();
        let mut rows: Vec<(Vec<f64>, f64, usize, Option<f64>)> = Vec::new();
        for &k in &kept {
            let (r, b) = &p.eq_constraints[k];
            rows.push((r.clone(), *b, k, None));
        }
        for (k, (r, b, s)) in p.ineq_constraints.iter().enumerate() {
            let slack = if *s == Sense::Le { 1.0 } else { -1.0 };
            rows.push((r.clone(), *b, p.eq_constraints.len() + k, Some(slack)));
        }
        let m = rows.len();
        let num_slack = p.ineq_constraints.len();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n + num_slack];
        let mut b = vec![0.0; m];
        let mut origin = Vec::with_capacity(m);
        let mut unit = vec![None; m];
        let mut slack_col = n;
        for (i, (r, rhs, orig, slack)) in rows.into_iter().enumerate() {
            let flip = if rhs < 0.0 { -1.0 } else { 1.0 };
            for (j, v) in r.into_iter().enumerate() {
                if v != 0.0 {
                    cols[j].push((i, flip * v));
                }
            }
            b[i] = flip * rhs;
            if let Some(s) = slack {
                cols[slack_col].push((i, flip * s));
                if flip * s > 0.0 {
                    unit[i] = Some(slack_col);
                }
                slack_col += 1;
            }
            origin.push((orig, flip));
        }
        let mut cost: Vec<f64> = p.objective.iter().map(|c| sign * c).collect();
        cost.resize(n + num_slack, 0.0);
        Ok(StandardForm { m, cols, cost, b, origin, unit, removed })
    }
}

/// Indices of a maximal linearly independent subset of the equality rows,
/// kept in input order. Errors with the index of an inconsistent row.
fn independent_rows(rows: &[(Vec<f64>, f64)]) -> Result<Vec<usize>, usize> {
    let mut basis: Vec<(usize, Vec<f64>, f64)> = Vec::new();
    let mut kept = Vec::new();
    for (k, (row, rhs)) in rows.iter().enumerate() {
        let scale = row.iter().fold(rhs.abs(), |a, v| a.max(v.abs())).max(1.0);
        let mut r = row.clone();
        let mut b = *rhs;
        for (p, v, vb) in &basis {
            let f = r[*p];
            if f != 0.0 {
                for (x, y) in r.iter_mut().zip(v) {
                    *x -= f * y;
                }
                b -= f * vb;
            }
        }
        let (piv, big) = r.iter().enumerate().fold((0, 0.0), |acc, (j, v)| if v.abs() > acc.1 { (j, v.abs()) } else { acc });
        if big <= RANK_TOL * scale {
            if b.abs() > FEASIBILITY_TOL * scale {
                return Err(k);
            }
            continue;
        }
        let inv = 1.0 / r[piv];
        r.iter_mut().for_each(|x| *x *= inv);
        b *= inv;
        basis.push((piv, r, b));
        kept.push(k);
    }
    Ok(kept)
}

enum Outcome {
    Optimal,
    Infeasible(f64),
    Unbounded(usize),
    Stalled(String),
}

struct Revised<'a> {
    sf: &'a StandardForm,
    m: usize,
    /// Total columns including artificials.
    ncols: usize,
    art: Vec<[(usize, f64); 1]>,
    art_start: usize,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
    /// No pivot since the last reinversion.
    fresh: bool,
}

impl<'a> Revised<'a> {
    fn new(sf: &'a StandardForm, max_iterations: usize) -> Self {
        let m = sf.m;
        let art_start = sf.cols.len();
        let mut art = Vec::new();
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            match sf.unit[i] {
                Some(j) => basis.push(j),
                None => {
                    art.push([(i, 1.0)]);
                    basis.push(art_start + art.len() - 1);
                }
            }
        }
        let ncols = art_start + art.len();
        let mut is_basic = vec![false; ncols];
        for &j in &basis {
            is_basic[j] = true;
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let xb = sf.b.clone();
        Revised { sf, m, ncols, art, art_start, basis, is_basic, binv, xb, iterations: 0, max_iterations, fresh: true }
    }

    fn col(&self, j: usize) -> &[(usize, f64)] {
        if j < self.art_start {
            &self.sf.cols[j]
        } else {
            &self.art[j - self.art_start]
        }
    }

    fn cost(&self, j: usize, phase1: bool) -> f64 {
        match (phase1, j >= self.art_start) {
            (true, true) => 1.0,
            (true, false) => 0.0,
            (false, true) => 0.0,
            (false, false) => self.sf.cost[j],
        }
    }

    fn duals(&self, phase1: bool) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &bj) in self.basis.iter().enumerate() {
            let c = self.cost(bj, phase1);
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, &v) in y.iter_mut().zip(row) {
                    *yk += c * v;
                }
            }
        }
        y
    }

    fn ftran(&self, a: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..m).map(|i| self.binv[i * m..(i + 1) * m].iter().zip(a).map(|(x, y)| x * y).sum()).collect()
    }

    fn ftran_col(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let a = self.col(j);
        (0..m).map(|i| a.iter().map(|&(k, v)| self.binv[i * m + k] * v).sum()).collect()
    }

    /// `c_j − yᵀa_j`.
    fn reduced_cost(&self, j: usize, y: &[f64], phase1: bool) -> f64 {
        self.cost(j, phase1) - sparse_dot(self.col(j), y)
    }

    fn reinvert(&mut self) -> bool {
        let m = self.m;
        let mut mat = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            for &(i, v) in self.col(j) {
                mat[i * m + k] = v;
            }
        }
        match invert(&mat, m) {
            Some(inv) => {
                self.binv = inv;
                self.xb = self.ftran(&self.sf.b);
                self.fresh = true;
                true
            }
            None => false,
        }
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let ar = alpha[r];
        let theta = self.xb[r].max(0.0) / ar;
        for i in 0..m {
            if i != r {
                self.xb[i] -= theta * alpha[i];
            }
        }
        self.xb[r] = theta;
        let prow: Vec<f64> = self.binv[r * m..(r + 1) * m].iter().map(|v| v / ar).collect();
        let update = |(i, row): (usize, &mut [f64])| {
            if i == r {
                row.copy_from_slice(&prow);
            } else if alpha[i] != 0.0 {
                let f = alpha[i];
                for (x, &p) in row.iter_mut().zip(&prow) {
                    *x -= f * p;
                }
            }
        };
        if m >= PARALLEL_ROWS {
            self.binv.par_chunks_mut(m).enumerate().for_each(update);
        } else {
            self.binv.chunks_mut(m).enumerate().for_each(update);
        }
        self.is_basic[self.basis[r]] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
        self.iterations += 1;
        self.fresh = false;
        if self.iterations.is_multiple_of(REINVERT_EVERY.max(m)) {
            self.reinvert();
        }
    }

    /// Runs simplex iterations for one phase.
    fn iterate(&mut self, phase1: bool) -> Result<(), Outcome> {
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(Outcome::Stalled(format!("iteration limit {} reached", self.max_iterations)));
            }
            let y = self.duals(phase1);
            let mut entering = None;
            let mut best = -PRICE_TOL;
            for j in 0..self.ncols {
                if self.is_basic[j] || (!phase1 && j >= self.art_start) {
                    continue;
                }
                let d = self.reduced_cost(j, &y, phase1);
                if bland {
                    if d < -PRICE_TOL {
                        entering = Some(j);
                        break;
                    }
                } else if d < best {
                    best = d;
                    entering = Some(j);
                }
            }
            let Some(q) = entering else {
                // Confirm optimality against a freshly inverted basis.
                if self.fresh {
                    return Ok(());
                }
                if !self.reinvert() {
                    return Err(Outcome::Stalled("singular basis".into()));
                }
                continue;
            };
            let alpha = self.ftran_col(q);
            let leave = if bland { self.ratio_bland(&alpha) } else { self.ratio_harris(&alpha) };
            let Some(r) = leave else {
                return Err(Outcome::Unbounded(q));
            };
            if self.xb[r].max(0.0) / alpha[r] <= 1e-12 {
                degenerate += 1;
                if degenerate >= DEGENERATE_RUN.max(2 * self.m) {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            self.pivot(r, q, &alpha);
        }
    }

    /// Smallest ratio, ties broken by the smallest basic column.
    fn ratio_bland(&self, alpha: &[f64]) -> Option<usize> {
        let mut leave: Option<(usize, f64)> = None;
        for i in (0..self.m).filter(|&i| alpha[i] > PIVOT_TOL) {
            let ratio = self.xb[i].max(0.0) / alpha[i];
            leave = match leave {
                Some((l, best)) if ratio > best + 1e-12 || (ratio >= best - 1e-12 && self.basis[l] < self.basis[i]) => Some((l, best)),
                _ => Some((i, ratio)),
            };
        }
        leave.map(|(i, _)| i)
    }

    /// Harris two-pass ratio test: among rows whose ratio is within the
    /// feasibility tolerance of the minimum, take the largest pivot.
    fn ratio_harris(&self, alpha: &[f64]) -> Option<usize> {
        let rows = || (0..self.m).filter(|&i| alpha[i] > PIVOT_TOL);
        let bound = rows().map(|i| (self.xb[i].max(0.0) + HARRIS_TOL) / alpha[i]).fold(f64::INFINITY, f64::min);
        rows()
            .filter(|&i| self.xb[i].max(0.0) / alpha[i] <= bound)
            .max_by(|&a, &b| alpha[a].total_cmp(&alpha[b]))
    }

    fn run(&mut self) -> Outcome {
        if !self.art.is_empty() {
            if let Err(o) = self.iterate(true) {
                return match o {
                    Outcome::Unbounded(_) => Outcome::Stalled("phase 1 reported unboundedness".into()),
                    other => other,
                };
            }
            if !self.reinvert() {
                return Outcome::Stalled("singular basis after phase 1".into());
            }
            let infeas: f64 = self.basis.iter().zip(&self.xb).filter(|(&j, _)| j >= self.art_start).map(|(_, &v)| v).sum();
            let scale = self.sf.b.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            if infeas > FEASIBILITY_TOL * scale {
                return Outcome::Infeasible(infeas);
            }
            self.drive_out_artificials();
        }
        if let Err(o) = self.iterate(false) {
            return o;
        }
        Outcome::Optimal
    }

    /// Pivots zero-level artificials out of the basis where possible. Rows
    /// where no structural column has a nonzero entry are dependent and keep
    /// their artificial at zero.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.art_start {
                continue;
            }
            let row: Vec<f64> = self.binv[r * self.m..(r + 1) * self.m].to_vec();
            let cand = (0..self.art_start).filter(|&j| !self.is_basic[j]).find(|&j| {
                sparse_dot(self.col(j), &row).abs() > 1e-7
            });
            if let Some(q) = cand {
                let alpha = self.ftran_col(q);
                self.pivot(r, q, &alpha);
            }
        }
    }
}

fn certify(p: &LpProblem, sf: &StandardForm, tab: &mut Revised<'_>, sign: f64) -> LpSolution {
    if !tab.reinvert() {
        return LpSolution::failed(LpStatus::NumericalFailure, "singular final basis", tab.iterations);
    }
    let n = p.num_vars;
    let mut x = vec![0.0; sf.cols.len()];
    for (i, &j) in tab.basis.iter().enumerate() {
        if j < sf.cols.len() {
            x[j] = tab.xb[i];
        }
    }
    if let Some(v) = x.iter().copied().find(|&v| v < -FEASIBILITY_TOL) {
        return LpSolution::failed(LpStatus::NumericalFailure, format!("basic variable at {v:.3e}"), tab.iterations);
    }
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    let primal: Vec<f64> = x[..n].to_vec();
    let max_primal_violation = p.max_violation(&primal);

    let y = tab.duals(false);
    let max_dual_violation = (0..sf.cols.len())
        .map(|j| {
            let d = sf.cost[j] - sparse_dot(&sf.cols[j], &y);
            (-d).max(0.0)
        })
        .fold(0.0, f64::max);
    let mut dual = vec![0.0; p.num_constraints()];
    for (i, &(orig, flip)) in sf.origin.iter().enumerate() {
        dual[orig] = sign * flip * y[i];
    }
    let objective_value = p.objective_at(&primal);
    let rhs = p.eq_constraints.iter().map(|r| r.1).chain(p.ineq_constraints.iter().map(|r| r.1));
    let dual_objective: f64 = rhs.zip(&dual).map(|(b, y)| b * y).sum();
    let duality_gap = (objective_value - dual_objective).abs();

    let mut sol = LpSolution {
        status: LpStatus::Optimal,
        objective_value,
        primal,
        dual,
        duality_gap,
        max_primal_violation,
        max_dual_violation,
        iterations: tab.iterations,
        removed_rows: sf.removed,
        diagnostics: String::new(),
    };
    let gap_ok = duality_gap <= OPTIMALITY_TOL * (1.0 + objective_value.abs());
    if max_primal_violation > FEASIBILITY_TOL || max_dual_violation > OPTIMALITY_TOL || !gap_ok {
        sol.status = LpStatus::NumericalFailure;
        sol.diagnostics = format!(
            "certificate failed: primal violation {max_primal_violation:.3e}, dual violation {max_dual_violation:.3e}, gap {duality_gap:.3e}"
        );
    }
    sol
}

fn sparse_dot(a: &[(usize, f64)], y: &[f64]) -> f64 {
    a.iter().map(|&(k, v)| v * y[k]).sum()
}

/// Gauss-Jordan inverse with partial pivoting of a row-major `m×m` matrix.
fn invert(a: &[f64], m: usize) -> Option<Vec<f64>> {
    let w = 2 * m;
    let mut aug = vec![0.0; m * w];
    for i in 0..m {
        aug[i * w..i * w + m].copy_from_slice(&a[i * m..(i + 1) * m]);
        aug[i * w + m + i] = 1.0;
    }
    for c in 0..m {
        let (p, big) = (c..m).map(|r| (r, aug[r * w + c].abs())).fold((c, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if big < 1e-13 {
            return None;
        }
        if p != c {
            for k in 0..w {
                aug.swap(p * w + k, c * w + k);
            }
        }
        let d = 1.0 / aug[c * w + c];
        let prow: Vec<f64> = aug[c * w..(c + 1) * w].iter().map(|v| v * d).collect();
        // Columns left of `c` are already zero in the pivot row.
        let update = |(r, row): (usize, &mut [f64])| {
            if r == c {
                row.copy_from_slice(&prow);
            } else if row[c] != 0.0 {
                let f = row[c];
                for (x, &v) in row[c..].iter_mut().zip(&prow[c..]) {
                    *x -= f * v;
                }
            }
        };
        if m >= PARALLEL_ROWS {
            aug.par_chunks_mut(w).enumerate().for_each(update);
        } else {
            aug.chunks_mut(w).enumerate().for_each(update);
        }
    }
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m..(i + 1) * m].copy_from_slice(&aug[i * w + m..(i + 1) * w]);
    }
    Some(inv)
}
