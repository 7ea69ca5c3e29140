//! Economic property checks on a cleared market.
//!
//! Every check reports a relative residual: the worst violation divided by
//! `1 + magnitude` of the quantities compared, passing when it is at most
//! the audit tolerance.

use serde::{Deserialize, Serialize};

use crate::clearing::{assemble_dual, assemble_primal, VariableIndex};
use crate::error::Result;
use crate::lp::LinearProgram;
use crate::market::{MarketInstance, StakeholderClass};
use crate::scenario::restrict_to_qss;
use crate::settlement::{clear_assembled, settle, ClearingSolution, Saturation, SettlementReport};
use crate::simplex::{solve, verify_kkt, SolveStatus, SolverConfig, SolverResult};

pub const PROFIT_NONNEGATIVITY: &str = "profit_nonnegativity";
pub const SURPLUS_DOMINANCE: &str = "surplus_dominance";
pub const COMPETITIVE_EQUILIBRIUM: &str = "competitive_equilibrium";
pub const REVENUE_ADEQUACY: &str = "revenue_adequacy";
pub const CLEARED_PRICE_BOUNDS: &str = "cleared_price_bounds";
pub const CAPACITY_PRICE_BOUNDS: &str = "capacity_price_bounds";
pub const PROFIT_CAPACITY_RULE: &str = "profit_capacity_rule";
pub const AT_LEAST_ONE_SATURATED: &str = "at_least_one_saturated";
pub const VOLATILITY_CORRIDOR: &str = "volatility_corridor";
pub const AGGREGATION_IDENTITIES: &str = "aggregation_identities";
pub const KKT: &str = "kkt";
pub const SOLVE: &str = "solve";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub residual: f64,
    pub tolerance: f64,
    pub offender: Option<String>,
    pub detail: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        matches!(self.status, CheckStatus::Pass | CheckStatus::Skipped)
    }

    fn skipped(name: &str, tol: f64, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            status: CheckStatus::Skipped,
            residual: 0.0,
            tolerance: tol,
            offender: None,
            detail: detail.into(),
        }
    }

    fn inconclusive(name: &str, tol: f64, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            status: CheckStatus::Inconclusive,
            residual: f64::NAN,
            tolerance: tol,
            offender: None,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub status: SolveStatus,
    pub passed: bool,
    pub surplus: Option<f64>,
    pub checks: Vec<CheckResult>,
}

impl AuditReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed())
    }

    fn from_checks(status: SolveStatus, surplus: Option<f64>, checks: Vec<CheckResult>) -> Self {
        let passed = checks.iter().all(CheckResult::passed);
        AuditReport { status, passed, surplus, checks }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditConfig {
    /// Relative tolerance shared by all checks.
    pub tol: f64,
    pub solver: SolverConfig,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig { tol: 1e-6, solver: SolverConfig::default() }
    }
}

impl AuditConfig {
    /// Tolerance tightened a hundredfold.
    pub fn strict() -> Self {
        AuditConfig { tol: 1e-8, ..Default::default() }
    }
}

/// Running maximum of relative violations with the stakeholder responsible.
struct Worst {
    name: &'static str,
    tol: f64,
    residual: f64,
    offender: Option<String>,
    detail: String,
}

impl Worst {
    fn new(name: &'static str, tol: f64) -> Self {
        Worst { name, tol, residual: 0.0, offender: None, detail: String::new() }
    }

    /// Records `violation` (positive means violated) relative to `scale`.
    fn see(&mut self, id: &str, violation: f64, scale: f64, detail: impl FnOnce() -> String) {
        let r = violation.max(0.0) / (1.0 + scale.abs());
        if r > self.residual || r.is_nan() {
            self.residual = r;
            self.offender = Some(id.to_owned());
            self.detail = detail();
        }
    }

    fn finish(self) -> CheckResult {
        let status = if self.residual <= self.tol { CheckStatus::Pass } else { CheckStatus::Fail };
        let offender = if status == CheckStatus::Fail { self.offender } else { None };
        let detail = if status == CheckStatus::Fail { self.detail } else { String::new() };
        CheckResult { name: self.name.into(), status, residual: self.residual, tolerance: self.tol, offender, detail }
    }
}

pub fn audit_profit_nonnegativity(settlement: &SettlementReport, tol: f64) -> CheckResult {
    let mut w = Worst::new(PROFIT_NONNEGATIVITY, tol);
    for s in &settlement.stakeholders {
        let scale = (s.price * s.allocation).abs() + (s.bid * s.allocation).abs();
        w.see(&s.id, -s.profit, scale, || format!("profit {}", s.profit));
    }
    w.finish()
}

/// Clears the market and its quasi-steady-state restriction and checks the
/// full surplus is not below the restricted one. `full_surplus` skips the
/// first solve when a solution is already at hand.
pub fn audit_surplus_dominance(
    instance: &MarketInstance,
    full_surplus: Option<f64>,
    cfg: &AuditConfig,
) -> Result<CheckResult> {
    let full = match full_surplus {
        Some(v) => v,
        None => {
            let (lp, index) = assemble_primal(instance)?;
            let sol = clear_assembled(&lp, index, &cfg.solver);
            if !sol.is_optimal() {
                return Ok(CheckResult::inconclusive(SURPLUS_DOMINANCE, cfg.tol, format!("full solve {}", sol.status)));
            }
            sol.surplus
        }
    };
    let (lp, index) = assemble_primal(&restrict_to_qss(instance))?;
    let qss = clear_assembled(&lp, index, &cfg.solver);
    if !qss.is_optimal() {
        return Ok(CheckResult::inconclusive(SURPLUS_DOMINANCE, cfg.tol, format!("restricted solve {}", qss.status)));
    }
    let mut w = Worst::new(SURPLUS_DOMINANCE, cfg.tol);
    w.see("market", qss.surplus - full, full.abs() + qss.surplus.abs(), || {
        format!("full surplus {full} below restricted {}", qss.surplus)
    });
    Ok(w.finish())
}

/// The primal point and its prices satisfy the optimality conditions, and
/// an independent solve of the explicit dual reaches the same objective.
pub fn audit_competitive_equilibrium(
    instance: &MarketInstance,
    lp: &LinearProgram,
    result: &SolverResult,
    cfg: &AuditConfig,
) -> Result<CheckResult> {
    let mut w = Worst::new(COMPETITIVE_EQUILIBRIUM, cfg.tol);
    let primal = lp.objective_value(&result.x);
    let kkt = verify_kkt(lp, result, f64::INFINITY);
    w.see("kkt", kkt.worst(), primal.abs(), || format!("optimality residual {}", kkt.worst()));
    let (dual, _) = assemble_dual(instance)?;
    let dres = solve(&dual, &cfg.solver);
    if !dres.is_optimal() {
        return Ok(CheckResult::inconclusive(COMPETITIVE_EQUILIBRIUM, cfg.tol, format!("dual solve {}", dres.status)));
    }
    w.see("duality_gap", (dres.objective - primal).abs(), primal.abs() + dres.objective.abs(), || {
        format!("primal {primal} vs dual {}", dres.objective)
    });
    Ok(w.finish())
}

/// Payments grouped by who is a revenue source: non-negative-bid consumers
/// and negative-bid suppliers pay in, everyone else is paid. Sources on the
/// supply side and sinks on the demand side enter with flipped sign, since
/// their payment runs against their class.
pub fn audit_revenue_adequacy(settlement: &SettlementReport, tol: f64) -> CheckResult {
    let (mut inflow, mut outflow, mut scale) = (0.0, 0.0, 0.0);
    for s in &settlement.stakeholders {
        let v = s.price * s.allocation;
        scale += v.abs();
        match s.class {
            StakeholderClass::Consumer if s.bid >= 0.0 => inflow += v,
            StakeholderClass::Consumer => outflow -= v,
            StakeholderClass::Supplier if s.bid < 0.0 => inflow -= v,
            _ => outflow += v,
        }
    }
    let mut w = Worst::new(REVENUE_ADEQUACY, tol);
    w.see("market", (inflow - outflow).abs(), scale, || format!("collected {inflow}, paid {outflow}"));
    w.finish()
}

fn cleared(s: &crate::settlement::StakeholderSettlement) -> bool {
    s.saturation != Saturation::Dry
}

pub fn audit_cleared_price_bounds(settlement: &SettlementReport, tol: f64) -> CheckResult {
    let mut w = Worst::new(CLEARED_PRICE_BOUNDS, tol);
    for s in settlement.stakeholders.iter().filter(|s| cleared(s)) {
        let violation = match s.class {
            StakeholderClass::Consumer => s.price - s.bid,
            _ => s.bid - s.price,
        };
        w.see(&s.id, violation, s.bid.abs() + s.price.abs(), || format!("price {} against bid {}", s.price, s.bid));
    }
    w.finish()
}

/// Prices within bid plus capacity dual; stakeholders below capacity see
/// their bid as a hard bound. A zero-capacity stakeholder sits on its bound
/// while dry, so its dual counts as slack too.
pub fn audit_capacity_price_bounds(settlement: &SettlementReport, tol: f64) -> CheckResult {
    let mut w = Worst::new(CAPACITY_PRICE_BOUNDS, tol);
    for s in &settlement.stakeholders {
        let on_bound = s.saturation == Saturation::AtCapacity || s.capacity <= tol;
        let slack = if on_bound { s.capacity_dual } else { 0.0 };
        let violation = match s.class {
            StakeholderClass::Consumer => (s.bid - slack) - s.price,
            _ => s.price - (s.bid + slack),
        };
        w.see(&s.id, violation, s.bid.abs() + s.price.abs() + slack, || {
            format!("price {} bid {} capacity dual {} ({})", s.price, s.bid, s.capacity_dual, s.saturation.name())
        });
    }
    w.finish()
}

pub fn audit_profit_capacity_rule(settlement: &SettlementReport, tol: f64) -> CheckResult {
    let mut w = Worst::new(PROFIT_CAPACITY_RULE, tol);
    for s in &settlement.stakeholders {
        let scale = (s.price * s.allocation).abs() + (s.bid * s.allocation).abs();
        if s.saturation == Saturation::AtCapacity {
            let cap_value = s.capacity_dual * s.capacity;
            w.see(&s.id, s.profit - cap_value, scale + cap_value, || {
                format!("profit {} above capacity value {cap_value}", s.profit)
            });
        } else {
            w.see(&s.id, s.profit, scale, || format!("profit {} while {}", s.profit, s.saturation.name()));
        }
    }
    w.finish()
}

pub fn audit_at_least_one_saturated(settlement: &SettlementReport, tol: f64) -> CheckResult {
    if settlement.stakeholders.iter().all(|s| s.saturation == Saturation::Dry) {
        return CheckResult::skipped(AT_LEAST_ONE_SATURATED, tol, "market is dry");
    }
    let any = settlement.stakeholders.iter().any(|s| s.saturation == Saturation::AtCapacity);
    CheckResult {
        name: AT_LEAST_ONE_SATURATED.into(),
        status: if any { CheckStatus::Pass } else { CheckStatus::Fail },
        residual: if any { 0.0 } else { 1.0 },
        tolerance: tol,
        offender: None,
        detail: if any { String::new() } else { "cleared market with nobody at capacity".into() },
    }
}

/// Transporters strictly inside their capacity are paid exactly their bid.
pub fn audit_volatility_corridor(settlement: &SettlementReport, tol: f64) -> CheckResult {
    let mut w = Worst::new(VOLATILITY_CORRIDOR, tol);
    for s in &settlement.stakeholders {
        if s.class == StakeholderClass::Transporter && s.saturation == Saturation::Partial {
            w.see(&s.id, (s.price - s.bid).abs(), s.bid.abs() + s.price.abs(), || {
                format!("interior transporter price {} against bid {}", s.price, s.bid)
            });
        }
    }
    w.finish()
}

pub fn audit_aggregation_identities(settlement: &SettlementReport, tol: f64) -> CheckResult {
    let mut w = Worst::new(AGGREGATION_IDENTITIES, tol);
    let scale = settlement.surplus.abs() + settlement.streams.magnitude;
    for (r, class) in settlement.identity_residuals.iter().zip(["supplier", "consumer", "transporter", "technology"]) {
        w.see(class, *r, scale, || format!("{class} identity off by {r}"));
    }
    w.finish()
}

pub fn audit_kkt(lp: &LinearProgram, result: &SolverResult, tol: f64) -> CheckResult {
    let kkt = verify_kkt(lp, result, f64::INFINITY);
    let mut w = Worst::new(KKT, tol);
    let scale = kkt.primal_objective.abs();
    for (part, v) in [
        ("primal_residual", kkt.primal_residual),
        ("bound_violation", kkt.bound_violation),
        ("dual_infeasibility", kkt.dual_infeasibility),
        ("complementarity", kkt.complementarity),
        ("duality_gap", kkt.duality_gap),
    ] {
        w.see(part, v, scale, || format!("{part} {v}"));
    }
    w.finish()
}

/// Solves, settles and runs every check.
pub fn run_full_audit(instance: &MarketInstance, cfg: &AuditConfig) -> Result<AuditReport> {
    let (lp, index) = assemble_primal(instance)?;
    let result = solve(&lp, &cfg.solver);
    if !result.is_optimal() {
        let check = match result.status {
            SolveStatus::IterationLimit => CheckResult::inconclusive(SOLVE, cfg.tol, "iteration limit reached"),
            s => CheckResult {
                name: SOLVE.into(),
                status: CheckStatus::Fail,
                residual: f64::NAN,
                tolerance: cfg.tol,
                offender: None,
                detail: format!("solver returned {s}"),
            },
        };
        return Ok(AuditReport::from_checks(result.status, None, vec![check]));
    }
    let solution = ClearingSolution::from_point(index.clone(), &lp, result.x.clone(), prices_of(&index, &result))?;
    audit_with(instance, &lp, &solution, &result, cfg)
}

/// Audits a solution produced elsewhere.
pub fn audit_solution(instance: &MarketInstance, solution: &ClearingSolution, cfg: &AuditConfig) -> Result<AuditReport> {
    let (lp, _) = assemble_primal(instance)?;
    let point = SolverResult::from_point(&lp, solution.allocations.clone(), solution.row_duals());
    audit_with(instance, &lp, solution, &point, cfg)
}

fn prices_of(index: &VariableIndex, result: &SolverResult) -> std::collections::BTreeMap<crate::market::BalanceKey, f64> {
    index.rows.iter().cloned().zip(result.row_duals.iter().map(|y| -y)).collect()
}

fn audit_with(
    instance: &MarketInstance,
    lp: &LinearProgram,
    solution: &ClearingSolution,
    result: &SolverResult,
    cfg: &AuditConfig,
) -> Result<AuditReport> {
    let tol = cfg.tol;
    let settlement = settle(instance, solution, tol)?;
    let checks = vec![
        audit_profit_nonnegativity(&settlement, tol),
        audit_surplus_dominance(instance, Some(solution.surplus), cfg)?,
        audit_competitive_equilibrium(instance, lp, result, cfg)?,
        audit_revenue_adequacy(&settlement, tol),
        audit_cleared_price_bounds(&settlement, tol),
        audit_capacity_price_bounds(&settlement, tol),
        audit_profit_capacity_rule(&settlement, tol),
        audit_at_least_one_saturated(&settlement, tol),
        audit_volatility_corridor(&settlement, tol),
        audit_aggregation_identities(&settlement, tol),
        audit_kkt(lp, result, tol),
    ];
    Ok(AuditReport::from_checks(solution.status, Some(solution.surplus), checks))
}
