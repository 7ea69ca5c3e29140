//! Bounded-variable revised simplex.
//!
//! Nonbasic variables sit at their lower bound, their upper bound, or (when
//! free) at zero. Every row carries an artificial column, which forms the
//! starting basis, except where a singleton column can take up the row's
//! residual within its bounds. When the starting point then satisfies
//! `A·x = b`, as for clearing problems at `x = 0`, the artificials are fixed
//! at zero and phase one is skipped; otherwise phase one drives them out
//! first.
//!
//! The basis inverse is an LU factorization followed by a product-form eta
//! file, rebuilt every `refactor_interval` basis changes.

mod kkt;
mod lu;

pub use kkt::{verify_kkt, KktReport};

use std::fmt;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::lp::{LinearProgram, Sense};
use lu::LuFactors;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub pivot_tolerance: f64,
    pub feasibility_tolerance: f64,
    pub optimality_tolerance: f64,
    /// Defaults to `50 * (rows + cols)` when unset.
    pub max_iterations: Option<usize>,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_threshold: usize,
    pub refactor_interval: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            pivot_tolerance: 1e-9,
            feasibility_tolerance: 1e-8,
            optimality_tolerance: 1e-8,
            max_iterations: None,
            stall_threshold: 50,
            refactor_interval: 64,
        }
    }
}

impl SolverConfig {
    pub fn iteration_limit(&self, lp: &LinearProgram) -> usize {
        self.max_iterations.unwrap_or(50 * (lp.num_rows() + lp.num_cols()).max(1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::IterationLimit => "iteration_limit",
        };
        f.write_str(s)
    }
}

/// Solver output in the program's own orientation.
///
/// `row_duals` are the sensitivities of the optimal objective to the right
/// hand side, and `reduced_costs = c − Aᵀ·row_duals`. For a maximization at
/// optimum a column at its upper bound has a non-negative reduced cost and a
/// column at its lower bound a non-positive one.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverResult {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub row_duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl SolverResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Wraps an externally supplied primal/dual point so it can be checked
    /// with [`verify_kkt`].
    pub fn from_point(lp: &LinearProgram, x: Vec<f64>, row_duals: Vec<f64>) -> Self {
        let aty = lp.column_activity(&row_duals).unwrap_or_else(|_| vec![f64::NAN; lp.num_cols()]);
        let reduced_costs = lp.objective.iter().zip(&aty).map(|(c, a)| c - a).collect();
        let objective = if x.len() == lp.num_cols() { lp.objective_value(&x) } else { f64::NAN };
        SolverResult { status: SolveStatus::Optimal, x, row_duals, reduced_costs, objective, iterations: 0 }
    }
}

pub fn solve(lp: &LinearProgram, cfg: &SolverConfig) -> SolverResult {
    let mut s = Simplex::new(lp, cfg);
    let status = s.run();
    let result = s.into_result(status);
    debug!(
        "simplex: {} rows, {} cols, status {}, {} iterations, objective {}",
        lp.num_rows(),
        lp.num_cols(),
        result.status,
        result.iterations,
        result.objective
    );
    result
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Free variable resting at zero.
    Zero,
}

struct Eta {
    pos: usize,
    pivot: f64,
    index: Vec<usize>,
    value: Vec<f64>,
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    cfg: &'a SolverConfig,
    m: usize,
    n: usize,
    /// Sign of each row's artificial column.
    art_sign: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Phase-two costs in minimization orientation.
    cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    pos_of: Vec<usize>,
    lu: LuFactors,
    etas: Vec<Eta>,
    iterations: usize,
    limit: usize,
    final_duals: Vec<f64>,
}

const NOT_BASIC: usize = usize::MAX;

enum Step {
    Optimal,
    Unbounded,
    Continue,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram, cfg: &'a SolverConfig) -> Self {
        let m = lp.num_rows();
        let n = lp.num_cols();
        let total = n + m;
        let flip = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
        let mut cost: Vec<f64> = lp.objective.iter().map(|c| flip * c).collect();
        cost.resize(total, 0.0);

        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut x = vec![0.0; total];
        let mut state = vec![VarState::AtLower; total];
        for j in 0..n {
            let (lo, hi) = (lower[j], upper[j]);
            if lo.is_finite() {
                x[j] = lo;
                state[j] = VarState::AtLower;
            } else if hi.is_finite() {
                x[j] = hi;
                state[j] = VarState::AtUpper;
            } else {
                x[j] = 0.0;
                state[j] = VarState::Zero;
            }
        }
        let mut residual = lp.rhs.clone();
        for (j, &xj) in x.iter().enumerate().take(n) {
            if xj != 0.0 {
                let (rows, vals) = lp.column(j);
                for (&r, &v) in rows.iter().zip(vals) {
                    residual[r] -= v * xj;
                }
            }
        }
        // crash: a singleton column that can absorb a row's residual within
        // its bounds replaces that row's artificial, cheapest first
        let mut crash: Vec<Option<(usize, f64)>> = vec![None; m];
        for j in 0..n {
            let (rows, vals) = lp.column(j);
            if rows.len() != 1 || residual[rows[0]] == 0.0 {
                continue;
            }
            let r = rows[0];
            let v = x[j] + residual[r] / vals[0];
            if v < lower[j] || v > upper[j] {
                continue;
            }
            if crash[r].is_none_or(|(k, _)| cost[j] < cost[k]) {
                crash[r] = Some((j, v));
            }
        }
        let mut art_sign = vec![1.0; m];
        let mut basis: Vec<usize> = (n..total).collect();
        for i in 0..m {
            if let Some((j, v)) = crash[i] {
                x[j] = v;
                state[j] = VarState::Basic;
                basis[i] = j;
                x[n + i] = 0.0;
                state[n + i] = VarState::AtLower;
                continue;
            }
            if residual[i] < 0.0 {
                art_sign[i] = -1.0;
            }
            x[n + i] = residual[i].abs();
            state[n + i] = VarState::Basic;
        }
        lower.resize(total, 0.0);
        upper.resize(total, 0.0);

        let mut pos_of = vec![NOT_BASIC; total];
        for (p, &v) in basis.iter().enumerate() {
            pos_of[v] = p;
        }
        let limit = cfg.iteration_limit(lp);
        let mut s = Simplex {
            lp,
            cfg,
            m,
            n,
            art_sign,
            lower,
            upper,
            cost,
            x,
            state,
            basis,
            pos_of,
            lu: LuFactors::default(),
            etas: Vec::new(),
            iterations: 0,
            limit,
            final_duals: vec![0.0; m],
        };
        s.refactor();
        s
    }

    fn rhs_scale(&self) -> f64 {
        1.0 + self.lp.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()))
    }

    fn run(&mut self) -> SolveStatus {
        let infeasibility: f64 = (0..self.m).map(|i| self.x[self.n + i]).sum();
        if infeasibility > self.cfg.feasibility_tolerance * self.rhs_scale() {
            let mut phase_one = vec![0.0; self.n + self.m];
            for i in 0..self.m {
                self.upper[self.n + i] = f64::INFINITY;
                phase_one[self.n + i] = 1.0;
            }
            match self.optimize(&phase_one) {
                Some(SolveStatus::Optimal) => {}
                Some(other) => return other,
                None => unreachable!(),
            }
            let remaining: f64 = (0..self.m).map(|i| self.x[self.n + i]).sum();
            if remaining > self.cfg.feasibility_tolerance * self.rhs_scale() {
                return SolveStatus::Infeasible;
            }
            for i in 0..self.m {
                let v = self.n + i;
                self.upper[v] = 0.0;
                if self.state[v] != VarState::Basic {
                    self.x[v] = 0.0;
                    self.state[v] = VarState::AtLower;
                }
            }
            self.refactor();
        }
        let cost = self.cost.clone();
        self.optimize(&cost).unwrap_or(SolveStatus::Optimal)
    }

    /// Runs primal simplex iterations against `cost` until optimal,
    /// unbounded, or out of iterations.
    fn optimize(&mut self, cost: &[f64]) -> Option<SolveStatus> {
        let mut degenerate_run = 0usize;
        let mut bland = false;
        let mut y = vec![0.0; self.m];
        let mut w = vec![0.0; self.m];
        loop {
            if self.etas.len() >= self.cfg.refactor_interval {
                self.refactor();
            }
            self.duals(cost, &mut y);
            if self.iterations >= self.limit {
                self.final_duals.copy_from_slice(&y);
                return Some(SolveStatus::IterationLimit);
            }
            match self.iterate(cost, &y, &mut w, bland, &mut degenerate_run) {
                Step::Optimal => {
                    self.final_duals.copy_from_slice(&y);
                    return Some(SolveStatus::Optimal);
                }
                Step::Unbounded => {
                    self.final_duals.copy_from_slice(&y);
                    return Some(SolveStatus::Unbounded);
                }
                Step::Continue => {}
            }
            self.iterations += 1;
            if degenerate_run >= self.cfg.stall_threshold {
                bland = true;
            } else if degenerate_run == 0 {
                bland = false;
            }
        }
    }

    fn column_dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            let (rows, vals) = self.lp.column(j);
            rows.iter().zip(vals).map(|(&r, &v)| v * y[r]).sum()
        } else {
            self.art_sign[j - self.n] * y[j - self.n]
        }
    }

    fn column_entries(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            let (rows, vals) = self.lp.column(j);
            rows.iter().copied().zip(vals.iter().copied()).collect()
        } else {
            vec![(j - self.n, self.art_sign[j - self.n])]
        }
    }

    fn iterate(
        &mut self,
        cost: &[f64],
        y: &[f64],
        w: &mut [f64],
        bland: bool,
        degenerate_run: &mut usize,
    ) -> Step {
        let tol = self.cfg.optimality_tolerance;
        // pricing: most attractive reduced cost, lowest index on ties
        let mut entering = None;
        let mut best = 0.0;
        for j in 0..self.n + self.m {
            let st = self.state[j];
            if st == VarState::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = cost[j] - self.column_dot(j, y);
            let gain = match st {
                VarState::AtLower if d < -tol => -d,
                VarState::AtUpper if d > tol => d,
                VarState::Zero if d.abs() > tol => d.abs(),
                _ => continue,
            };
            let dir = if d < 0.0 { 1.0 } else { -1.0 };
            if bland {
                entering = Some((j, dir));
                break;
            }
            if gain > best {
                best = gain;
                entering = Some((j, dir));
            }
        }
        let Some((q, dir)) = entering else {
            return Step::Optimal;
        };

        self.ftran(&self.column_entries(q), w);

        // ratio test; a basic variable leaving beats a bound flip on ties
        let ptol = self.cfg.pivot_tolerance;
        let mut theta = f64::INFINITY;
        let mut leave: Option<usize> = None;
        for p in 0..self.m {
            let alpha = dir * w[p];
            if alpha.abs() <= ptol {
                continue;
            }
            let v = self.basis[p];
            let limit = if alpha > 0.0 {
                if self.lower[v].is_finite() {
                    ((self.x[v] - self.lower[v]) / alpha).max(0.0)
                } else {
                    continue;
                }
            } else if self.upper[v].is_finite() {
                ((self.upper[v] - self.x[v]) / -alpha).max(0.0)
            } else {
                continue;
            };
            let band = 1e-12 * (1.0 + theta.min(limit).abs());
            let replace = match leave {
                None => true,
                Some(cur) => {
                    if limit < theta - band {
                        true
                    } else if limit <= theta + band {
                        let cur_var = self.basis[cur];
                        if bland {
                            v < cur_var
                        } else {
                            let (a_new, a_cur) = (w[p].abs(), w[cur].abs());
                            a_new > a_cur || (a_new == a_cur && v < cur_var)
                        }
                    } else {
                        false
                    }
                }
            };
            if replace {
                theta = theta.min(limit);
                leave = Some(p);
            }
        }
        let range = self.upper[q] - self.lower[q];
        let flip = range.is_finite() && range < theta - 1e-12 * (1.0 + range.abs());
        if flip {
            theta = range;
        }
        if !theta.is_finite() {
            return Step::Unbounded;
        }

        if theta <= self.cfg.feasibility_tolerance {
            *degenerate_run += 1;
        } else {
            *degenerate_run = 0;
        }

        let step = dir * theta;
        if step != 0.0 {
            for p in 0..self.m {
                if w[p] != 0.0 {
                    let v = self.basis[p];
                    self.x[v] -= step * w[p];
                }
            }
            self.x[q] += step;
        }

        if flip {
            if dir > 0.0 {
                self.x[q] = self.upper[q];
                self.state[q] = VarState::AtUpper;
            } else {
                self.x[q] = self.lower[q];
                self.state[q] = VarState::AtLower;
            }
            return Step::Continue;
        }

        let p = leave.expect("finite ratio without a leaving row");
        let out = self.basis[p];
        let alpha = dir * w[p];
        if alpha > 0.0 {
            self.x[out] = self.lower[out];
            self.state[out] = VarState::AtLower;
        } else {
            self.x[out] = self.upper[out];
            self.state[out] = VarState::AtUpper;
        }
        if self.lower[out] == self.upper[out] {
            self.state[out] = VarState::AtLower;
        }
        self.pos_of[out] = NOT_BASIC;
        self.basis[p] = q;
        self.pos_of[q] = p;
        self.state[q] = VarState::Basic;

        let mut eta = Eta { pos: p, pivot: w[p], index: Vec::new(), value: Vec::new() };
        for (i, &wi) in w.iter().enumerate() {
            if i != p && wi != 0.0 {
                eta.index.push(i);
                eta.value.push(wi);
            }
        }
        self.etas.push(eta);
        Step::Continue
    }

    /// `w = B⁻¹·a` for a sparse column `a`.
    fn ftran(&self, col: &[(usize, f64)], w: &mut [f64]) {
        let mut v = vec![0.0; self.m];
        for &(r, a) in col {
            v[r] += a;
        }
        self.lu.solve(&mut v, w);
        for eta in &self.etas {
            let xp = w[eta.pos] / eta.pivot;
            w[eta.pos] = xp;
            if xp != 0.0 {
                for (&i, &wi) in eta.index.iter().zip(&eta.value) {
                    w[i] -= wi * xp;
                }
            }
        }
    }

    /// `y = B⁻ᵀ·c_B`.
    fn duals(&self, cost: &[f64], y: &mut [f64]) {
        let mut c: Vec<f64> = self.basis.iter().map(|&v| cost[v]).collect();
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.pos];
            for (&i, &wi) in eta.index.iter().zip(&eta.value) {
                s -= wi * c[i];
            }
            c[eta.pos] = s / eta.pivot;
        }
        self.lu.solve_transpose(&mut c, y);
    }

    /// Rebuilds the LU factors from scratch and recomputes basic values.
    /// Dependent basis columns are swapped for the artificials of the rows
    /// they leave uncovered.
    fn refactor(&mut self) {
        loop {
            let cols: Vec<Vec<(usize, f64)>> = self.basis.iter().map(|&v| self.column_entries(v)).collect();
            match LuFactors::factorize(self.m, &cols) {
                Ok(lu) => {
                    self.lu = lu;
                    break;
                }
                Err(singular) => {
                    debug!("simplex: repairing {} dependent basis column(s)", singular.positions.len());
                    for (&p, &r) in singular.positions.iter().zip(&singular.rows) {
                        let out = self.basis[p];
                        let art = self.n + r;
                        self.pos_of[out] = NOT_BASIC;
                        let (lo, hi) = (self.lower[out], self.upper[out]);
                        let (val, st) = if lo.is_finite() && (self.x[out] - lo).abs() <= (hi - self.x[out]).abs() {
                            (lo, VarState::AtLower)
                        } else if hi.is_finite() {
                            (hi, VarState::AtUpper)
                        } else {
                            (0.0, VarState::Zero)
                        };
                        self.x[out] = val;
                        self.state[out] = st;
                        // an unpivoted row cannot already hold its own artificial
                        debug_assert_eq!(self.pos_of[art], NOT_BASIC);
                        self.basis[p] = art;
                        self.pos_of[art] = p;
                        self.state[art] = VarState::Basic;
                    }
                }
            }
        }
        self.etas.clear();

        let mut v = self.lp.rhs.clone();
        for j in 0..self.n + self.m {
            if self.state[j] == VarState::Basic || self.x[j] == 0.0 {
                continue;
            }
            for (r, a) in self.column_entries(j) {
                v[r] -= a * self.x[j];
            }
        }
        let mut xb = vec![0.0; self.m];
        self.lu.solve(&mut v, &mut xb);
        for (p, &var) in self.basis.iter().enumerate() {
            self.x[var] = xb[p];
        }
    }

    fn into_result(self, status: SolveStatus) -> SolverResult {
        let lp = self.lp;
        let flip = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
        let mut x: Vec<f64> = self.x[..self.n].to_vec();
        // snap values within tolerance of a bound onto it
        let snap = self.cfg.feasibility_tolerance;
        for (j, xj) in x.iter_mut().enumerate() {
            if lp.lower[j].is_finite() && (*xj - lp.lower[j]).abs() <= snap * (1.0 + lp.lower[j].abs()) {
                *xj = lp.lower[j];
            } else if lp.upper[j].is_finite() && (*xj - lp.upper[j]).abs() <= snap * (1.0 + lp.upper[j].abs()) {
                *xj = lp.upper[j];
            }
        }
        let row_duals: Vec<f64> = self.final_duals.iter().map(|y| flip * y).collect();
        let aty = lp.column_activity(&row_duals).expect("row dual length");
        let reduced_costs = lp.objective.iter().zip(&aty).map(|(c, a)| c - a).collect();
        let objective = lp.objective_value(&x);
        SolverResult { status, x, row_duals, reduced_costs, objective, iterations: self.iterations }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var_market() -> LinearProgram {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let r = lp.add_row("balance", 0.0);
        lp.add_column("g", -2.0, 0.0, 10.0, &[(r, 1.0)]);
        lp.add_column("d", 8.0, 0.0, 5.0, &[(r, -1.0)]);
        lp
    }

    #[test]
    fn two_variable_market() {
        let res = solve(&two_var_market(), &SolverConfig::default());
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.x, vec![5.0, 5.0]);
        assert_eq!(res.objective, 30.0);
        // the balance row is written supply − demand, so its price is the
        // negated sensitivity
        assert_eq!(-res.row_duals[0], 2.0);
        assert_eq!(res.reduced_costs, vec![0.0, 6.0]);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        lp.add_column("x", 1.0, 0.0, f64::INFINITY, &[]);
        assert_eq!(solve(&lp, &SolverConfig::default()).status, SolveStatus::Unbounded);
    }

    #[test]
    fn infeasible_row() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let r = lp.add_row("r", -1.0);
        lp.add_column("x", 1.0, 0.0, 1.0, &[(r, 1.0)]);
        assert_eq!(solve(&lp, &SolverConfig::default()).status, SolveStatus::Infeasible);
    }

    #[test]
    fn empty_program() {
        let lp = LinearProgram::new(Sense::Minimize);
        let res = solve(&lp, &SolverConfig::default());
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.objective, 0.0);
    }

    #[test]
    fn phase_one_with_free_columns() {
        // min |style| problem: min y s.t. y - x = 3, x free, y >= 0 -> 0 at x = -3
        let mut lp = LinearProgram::new(Sense::Minimize);
        let r = lp.add_row("r", 3.0);
        lp.add_column("x", 0.0, f64::NEG_INFINITY, f64::INFINITY, &[(r, -1.0)]);
        lp.add_column("y", 1.0, 0.0, f64::INFINITY, &[(r, 1.0)]);
        let res = solve(&lp, &SolverConfig::default());
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!(res.objective.abs() < 1e-12, "{res:?}");
        assert!((res.x[0] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let cfg = SolverConfig { max_iterations: Some(1), ..Default::default() };
        assert_eq!(solve(&two_var_market(), &cfg).status, SolveStatus::IterationLimit);
    }

    #[test]
    fn degenerate_duplicates_terminate() {
        // many identical suppliers and consumers on one balance row
        let mut lp = LinearProgram::new(Sense::Maximize);
        let r = lp.add_row("b", 0.0);
        for k in 0..30 {
            lp.add_column(format!("g{k}"), -1.0, 0.0, 1.0, &[(r, 1.0)]);
            lp.add_column(format!("d{k}"), 3.0, 0.0, 1.0, &[(r, -1.0)]);
        }
        let res = solve(&lp, &SolverConfig::default());
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.objective - 60.0).abs() < 1e-9);
        assert!(res.iterations <= SolverConfig::default().iteration_limit(&lp));
    }

    #[test]
    fn deterministic() {
        let lp = two_var_market();
        let a = solve(&lp, &SolverConfig::default());
        let b = solve(&lp, &SolverConfig::default());
        assert_eq!(a, b);
    }
}
