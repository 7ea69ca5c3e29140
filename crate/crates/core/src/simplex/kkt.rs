//! Optimality certificate check, independent of how the point was produced.
//!
//! Reduced costs `r = c − Aᵀy` are split into multipliers on the upper and
//! lower bounds. A maximization needs `r = λ_hi − λ_lo`, a minimization
//! `r = λ_lo − λ_hi`, with both parts non-negative, only on finite bounds,
//! and each zero unless its bound is active.

use serde::{Deserialize, Serialize};

use super::SolverResult;
use crate::lp::{LinearProgram, Sense};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub primal_residual: f64,
    pub bound_violation: f64,
    pub dual_infeasibility: f64,
    pub complementarity: f64,
    pub duality_gap: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl KktReport {
    pub fn worst(&self) -> f64 {
        self.primal_residual
            .max(self.bound_violation)
            .max(self.dual_infeasibility)
            .max(self.complementarity)
            .max(self.duality_gap)
    }
}

pub fn verify_kkt(lp: &LinearProgram, result: &SolverResult, tol: f64) -> KktReport {
    let n = lp.num_cols();
    let m = lp.num_rows();
    if result.x.len() != n || result.row_duals.len() != m {
        return KktReport {
            primal_residual: f64::INFINITY,
            bound_violation: f64::INFINITY,
            dual_infeasibility: f64::INFINITY,
            complementarity: f64::INFINITY,
            duality_gap: f64::INFINITY,
            primal_objective: f64::NAN,
            dual_objective: f64::NAN,
            tolerance: tol,
            passed: false,
        };
    }
    let x = &result.x;
    let y = &result.row_duals;

    let ax = lp.row_activity(x).expect("checked length");
    let primal_residual = ax.iter().zip(&lp.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut bound_violation = 0.0f64;
    for j in 0..n {
        bound_violation = bound_violation.max(lp.lower[j] - x[j]).max(x[j] - lp.upper[j]);
    }

    let aty = lp.column_activity(y).expect("checked length");
    let orient = if lp.sense == Sense::Maximize { 1.0 } else { -1.0 };
    let mut dual_infeasibility = 0.0f64;
    let mut complementarity = 0.0f64;
    let mut dual_objective: f64 = lp.rhs.iter().zip(y).map(|(b, v)| b * v).sum();
    for j in 0..n {
        let r = orient * (lp.objective[j] - aty[j]);
        let on_upper = r.max(0.0);
        let on_lower = (-r).max(0.0);
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if on_upper > 0.0 {
            if hi.is_finite() {
                complementarity = complementarity.max((on_upper * (hi - x[j])).abs());
                dual_objective += orient * on_upper * hi;
            } else {
                dual_infeasibility = dual_infeasibility.max(on_upper);
            }
        }
        if on_lower > 0.0 {
            if lo.is_finite() {
                complementarity = complementarity.max((on_lower * (x[j] - lo)).abs());
                dual_objective -= orient * on_lower * lo;
            } else {
                dual_infeasibility = dual_infeasibility.max(on_lower);
            }
        }
    }
    let primal_objective = lp.objective_value(x);
    let duality_gap = (primal_objective - dual_objective).abs();

    let mut report = KktReport {
        primal_residual,
        bound_violation,
        dual_infeasibility,
        complementarity,
        duality_gap,
        primal_objective,
        dual_objective,
        tolerance: tol,
        passed: false,
    };
    report.passed = report.worst() <= tol;
    report
}
