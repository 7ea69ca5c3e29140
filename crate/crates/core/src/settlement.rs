//! Prices, profits, saturation classes and revenue streams of a cleared
//! market.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clearing::{assemble_primal, VariableIndex};
use crate::error::{Error, Result};
use crate::lp::LinearProgram;
use crate::market::{BalanceKey, MarketIndex, MarketInstance, StakeholderClass};
use crate::simplex::{solve, SolveStatus, SolverConfig, SolverResult};
use crate::stgraph::{classify_arc, ArcClass};

/// Outcome of clearing one instance. Vectors are indexed by
/// [`VariableIndex`] column.
#[derive(Clone, Debug)]
pub struct ClearingSolution {
    pub status: SolveStatus,
    pub index: VariableIndex,
    pub allocations: Vec<f64>,
    /// One price per balance row. Balances nobody participates in have no
    /// row and no price.
    pub nodal_prices: BTreeMap<BalanceKey, f64>,
    pub capacity_duals: Vec<f64>,
    pub surplus: f64,
    pub iterations: usize,
}

impl ClearingSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn ensure_optimal(&self) -> Result<()> {
        if self.is_optimal() {
            Ok(())
        } else {
            Err(Error::NotOptimal(self.status.to_string()))
        }
    }

    pub fn price(&self, key: &BalanceKey) -> Option<f64> {
        self.nodal_prices.get(key).copied()
    }

    pub fn allocation(&self, id: &str) -> Option<f64> {
        self.index.column_of(id).map(|k| self.allocations[k])
    }

    /// Solver-orientation row duals (the negated prices) in row order.
    /// Missing prices read as zero.
    pub fn row_duals(&self) -> Vec<f64> {
        self.index.rows.iter().map(|k| -self.nodal_prices.get(k).copied().unwrap_or(0.0)).collect()
    }

    /// Rebuilds the solution from a primal point and nodal prices, deriving
    /// surplus and capacity duals from the clearing program.
    pub fn from_point(
        index: VariableIndex,
        lp: &LinearProgram,
        allocations: Vec<f64>,
        nodal_prices: BTreeMap<BalanceKey, f64>,
    ) -> Result<Self> {
        if allocations.len() != lp.num_cols() {
            return Err(Error::DimensionMismatch { expected: lp.num_cols(), actual: allocations.len() });
        }
        let mut sol = ClearingSolution {
            status: SolveStatus::Optimal,
            index,
            surplus: lp.objective_value(&allocations),
            allocations,
            nodal_prices,
            capacity_duals: Vec::new(),
            iterations: 0,
        };
        let point = SolverResult::from_point(lp, sol.allocations.clone(), sol.row_duals());
        sol.capacity_duals = point.reduced_costs.iter().map(|r| r.max(0.0)).collect();
        Ok(sol)
    }
}

fn from_result(index: VariableIndex, result: SolverResult) -> ClearingSolution {
    let nodal_prices = index.rows.iter().cloned().zip(result.row_duals.iter().map(|y| -y)).collect();
    // max orientation: a positive reduced cost is the value of one more unit
    // of capacity
    let capacity_duals = result.reduced_costs.iter().map(|r| r.max(0.0)).collect();
    ClearingSolution {
        status: result.status,
        index,
        allocations: result.x,
        nodal_prices,
        capacity_duals,
        surplus: result.objective,
        iterations: result.iterations,
    }
}

/// Assembles and solves the clearing program. Solver failures are reported
/// through `status`, not as errors.
pub fn clear(instance: &MarketInstance, cfg: &SolverConfig) -> Result<ClearingSolution> {
    let (lp, index) = assemble_primal(instance)?;
    Ok(clear_assembled(&lp, index, cfg))
}

pub fn clear_assembled(lp: &LinearProgram, index: VariableIndex, cfg: &SolverConfig) -> ClearingSolution {
    let result = solve(lp, cfg);
    log::debug!("cleared {} rows x {} cols: {} in {} iterations", lp.num_rows(), lp.num_cols(), result.status, result.iterations);
    from_result(index, result)
}

/// Capacity duals of an optimal solution.
pub fn capacity_duals(solution: &ClearingSolution) -> Result<&[f64]> {
    solution.ensure_optimal()?;
    Ok(&solution.capacity_duals)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Saturation {
    AtCapacity,
    Partial,
    Dry,
}

impl Saturation {
    pub fn name(self) -> &'static str {
        match self {
            Saturation::AtCapacity => "at_capacity",
            Saturation::Partial => "partial",
            Saturation::Dry => "dry",
        }
    }
}

/// Bid, capacity and the balances a column touches with their coefficients.
pub(crate) struct Terms {
    pub bid: f64,
    pub capacity: f64,
    pub entries: Vec<(BalanceKey, f64)>,
}

pub(crate) fn terms(instance: &MarketInstance, index: &VariableIndex) -> Vec<Terms> {
    index
        .columns
        .iter()
        .map(|c| match c.class {
            StakeholderClass::Supplier => {
                let s = &instance.suppliers[c.index];
                Terms { bid: s.bid, capacity: s.capacity, entries: vec![(BalanceKey::new(&s.node, &s.product), 1.0)] }
            }
            StakeholderClass::Consumer => {
                let s = &instance.consumers[c.index];
                Terms { bid: s.bid, capacity: s.capacity, entries: vec![(BalanceKey::new(&s.node, &s.product), 1.0)] }
            }
            StakeholderClass::Transporter => {
                let l = &instance.transporters[c.index];
                Terms {
                    bid: l.bid,
                    capacity: l.capacity,
                    entries: vec![
                        (BalanceKey::new(&l.arc.receiving, &l.product), 1.0),
                        (BalanceKey::new(&l.arc.base, &l.product), -1.0),
                    ],
                }
            }
            StakeholderClass::Technology => {
                let m = &instance.technologies[c.index];
                let entries = m
                    .outputs
                    .iter()
                    .map(|(p, g)| (BalanceKey::new(&m.node, p), *g))
                    .chain(m.inputs.iter().map(|(p, g)| (BalanceKey::new(&m.node, p), -g)))
                    .collect();
                Terms { bid: m.bid, capacity: m.capacity, entries }
            }
        })
        .collect()
}

/// Stakeholder prices by column: the local price for suppliers and
/// consumers, receiving minus base price for transporters, and
/// yield-weighted outputs minus inputs for technologies.
///
/// A dry stakeholder on an unpriced balance gets price 0.
pub fn stakeholder_prices(solution: &ClearingSolution, instance: &MarketInstance) -> Result<Vec<f64>> {
    let tol = 1e-9;
    terms(instance, &solution.index)
        .iter()
        .zip(&solution.index.columns)
        .zip(&solution.allocations)
        .map(|((t, c), &x)| {
            let mut price = 0.0;
            for (key, g) in &t.entries {
                match solution.price(key) {
                    Some(p) => price += g * p,
                    None if x <= tol => return Ok(0.0),
                    None => return Err(Error::UndefinedNodalPrice(c.id.clone())),
                }
            }
            Ok(price)
        })
        .collect()
}

/// `(π − α)·x` for providers, `(α − π)·x` for consumers.
pub fn stakeholder_profits(solution: &ClearingSolution, prices: &[f64], instance: &MarketInstance) -> Vec<f64> {
    terms(instance, &solution.index)
        .iter()
        .zip(&solution.index.columns)
        .zip(prices.iter().zip(&solution.allocations))
        .map(|((t, c), (&p, &x))| {
            if c.class == StakeholderClass::Consumer {
                (t.bid - p) * x
            } else {
                (p - t.bid) * x
            }
        })
        .collect()
}

/// Saturation class. Dry below `tol`; at capacity within
/// `tol·(1 + capacity)` of the bound.
pub fn classify_allocation(x: f64, capacity: f64, tol: f64) -> Saturation {
    if capacity <= tol || x <= tol {
        Saturation::Dry
    } else if x >= capacity - tol * (1.0 + capacity.abs()) {
        Saturation::AtCapacity
    } else {
        Saturation::Partial
    }
}

pub fn classify(solution: &ClearingSolution, instance: &MarketInstance, tol: f64) -> Vec<Saturation> {
    terms(instance, &solution.index)
        .iter()
        .zip(&solution.allocations)
        .map(|(t, &x)| classify_allocation(x, t.capacity, tol))
        .collect()
}

/// Aggregate payments. Consumers pay (negative), providers are paid
/// (positive); the grand total is their sum.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RevenueStreams {
    pub consumers: f64,
    pub suppliers: f64,
    pub temporal_transport: f64,
    /// Spatial and spatiotemporal arcs together.
    pub spatial_transport: f64,
    /// The spatiotemporal share of `spatial_transport`, present only when
    /// such arcs carry a transporter.
    pub spatiotemporal_transport: Option<f64>,
    pub technology: f64,
    pub grand_total: f64,
    /// Sum of the absolute values of the component streams.
    pub magnitude: f64,
}

impl RevenueStreams {
    /// `(label, value)` rows in report order.
    pub fn lines(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![
            ("consumers", self.consumers),
            ("suppliers", self.suppliers),
            ("transport_temporal", self.temporal_transport),
            ("transport_spatial", self.spatial_transport),
        ];
        if let Some(v) = self.spatiotemporal_transport {
            out.push(("transport_spatial_of_which_spatiotemporal", v));
        }
        out.push(("technology", self.technology));
        out.push(("grand_total", self.grand_total));
        out
    }
}

pub fn revenue_streams(solution: &ClearingSolution, prices: &[f64], instance: &MarketInstance) -> RevenueStreams {
    let mut rs = RevenueStreams::default();
    let mut mixed = None;
    for ((c, &p), &x) in solution.index.columns.iter().zip(prices).zip(&solution.allocations) {
        let v = p * x;
        match c.class {
            StakeholderClass::Supplier => rs.suppliers += v,
            StakeholderClass::Consumer => rs.consumers -= v,
            StakeholderClass::Technology => rs.technology += v,
            StakeholderClass::Transporter => match classify_arc(&instance.transporters[c.index].arc) {
                ArcClass::Temporal => rs.temporal_transport += v,
                ArcClass::Spatial => rs.spatial_transport += v,
                ArcClass::SpatioTemporal => {
                    rs.spatial_transport += v;
                    *mixed.get_or_insert(0.0) += v;
                }
            },
        }
    }
    rs.spatiotemporal_transport = mixed;
    let parts = [rs.consumers, rs.suppliers, rs.temporal_transport, rs.spatial_transport, rs.technology];
    rs.grand_total = parts.iter().sum();
    rs.magnitude = parts.iter().map(|v| v.abs()).sum();
    rs
}

/// Residuals of the nodal-versus-stakeholder payment identities, one per
/// class in the order suppliers, consumers, transporters, technologies.
/// The nodal side is accumulated balance by balance from the participant
/// index; the stakeholder side from the stakeholder prices.
pub fn aggregation_identity_check(solution: &ClearingSolution, prices: &[f64], instance: &MarketInstance) -> [f64; 4] {
    let market = MarketIndex::build(instance);
    let x_of = |class: StakeholderClass, k: usize| -> f64 {
        let id = match class {
            StakeholderClass::Supplier => &instance.suppliers[k].id,
            StakeholderClass::Consumer => &instance.consumers[k].id,
            StakeholderClass::Transporter => &instance.transporters[k].id,
            StakeholderClass::Technology => &instance.technologies[k].id,
        };
        solution.allocation(id).unwrap_or(0.0)
    };
    let mut nodal = [0.0f64; 4];
    for (key, local) in &market.balances {
        let Some(pi) = solution.price(key) else { continue };
        let sup: f64 = local.suppliers.iter().map(|&k| x_of(StakeholderClass::Supplier, k)).sum();
        let con: f64 = local.consumers.iter().map(|&k| x_of(StakeholderClass::Consumer, k)).sum();
        let tin: f64 = local.transport_in.iter().map(|&k| x_of(StakeholderClass::Transporter, k)).sum();
        let tout: f64 = local.transport_out.iter().map(|&k| x_of(StakeholderClass::Transporter, k)).sum();
        let gen: f64 = local
            .tech_gen
            .iter()
            .map(|&k| instance.technologies[k].outputs[&key.product] * x_of(StakeholderClass::Technology, k))
            .sum();
        let cons: f64 = local
            .tech_con
            .iter()
            .map(|&k| instance.technologies[k].inputs[&key.product] * x_of(StakeholderClass::Technology, k))
            .sum();
        nodal[0] += pi * sup;
        nodal[1] += pi * con;
        nodal[2] += pi * (tin - tout);
        nodal[3] += pi * (gen - cons);
    }
    let mut direct = [0.0f64; 4];
    for ((c, &p), &x) in solution.index.columns.iter().zip(prices).zip(&solution.allocations) {
        let slot = match c.class {
            StakeholderClass::Supplier => 0,
            StakeholderClass::Consumer => 1,
            StakeholderClass::Transporter => 2,
            StakeholderClass::Technology => 3,
        };
        direct[slot] += p * x;
    }
    std::array::from_fn(|k| (nodal[k] - direct[k]).abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StakeholderSettlement {
    pub id: String,
    pub class: StakeholderClass,
    pub allocation: f64,
    pub capacity: f64,
    pub bid: f64,
    pub price: f64,
    pub profit: f64,
    pub capacity_dual: f64,
    pub saturation: Saturation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettlementReport {
    /// In column order.
    pub stakeholders: Vec<StakeholderSettlement>,
    pub streams: RevenueStreams,
    pub identity_residuals: [f64; 4],
    pub surplus: f64,
}

impl SettlementReport {
    pub fn get(&self, id: &str) -> Option<&StakeholderSettlement> {
        self.stakeholders.iter().find(|s| s.id == id)
    }
}

/// Runs every settlement step on an optimal solution.
pub fn settle(instance: &MarketInstance, solution: &ClearingSolution, tol: f64) -> Result<SettlementReport> {
    solution.ensure_optimal()?;
    let prices = stakeholder_prices(solution, instance)?;
    let profits = stakeholder_profits(solution, &prices, instance);
    let classes = classify(solution, instance, tol);
    let streams = revenue_streams(solution, &prices, instance);
    let identity_residuals = aggregation_identity_check(solution, &prices, instance);
    let stakeholders = terms(instance, &solution.index)
        .into_iter()
        .enumerate()
        .map(|(k, t)| StakeholderSettlement {
            id: solution.index.columns[k].id.clone(),
            class: solution.index.columns[k].class,
            allocation: solution.allocations[k],
            capacity: t.capacity,
            bid: t.bid,
            price: prices[k],
            profit: profits[k],
            capacity_dual: solution.capacity_duals[k],
            saturation: classes[k],
        })
        .collect();
    Ok(SettlementReport { stakeholders, streams, identity_residuals, surplus: solution.surplus })
}
