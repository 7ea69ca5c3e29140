//! Assembly of the clearing program and its explicit dual.
//!
//! Primal: maximize total surplus
//! `Σ α^d·d − Σ α^g·g − Σ α^f·f − Σ α^ξ·ξ`
//! subject to one balance row per touched `(node, time, product)`:
//! `supply + inflow + γ·generation − demand − outflow − γ·consumption = 0`,
//! and `0 <= x <= capacity` for every stakeholder column.
//!
//! Columns are ordered suppliers, consumers, transporters, technologies, each
//! class sorted by id. Rows follow [`BalanceKey`] order.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Sense};
use crate::market::{BalanceKey, MarketIndex, MarketInstance, StakeholderClass};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnRef {
    pub class: StakeholderClass,
    /// Position in the instance's vector for that class.
    pub index: usize,
    pub id: String,
}

/// Column and row bookkeeping for an assembled clearing program.
#[derive(Clone, Debug, Default)]
pub struct VariableIndex {
    pub columns: Vec<ColumnRef>,
    pub rows: Vec<BalanceKey>,
    col_of_id: HashMap<String, usize>,
    row_of_key: HashMap<BalanceKey, usize>,
}

impl VariableIndex {
    pub fn build(instance: &MarketInstance) -> Self {
        let mut columns = Vec::with_capacity(instance.stakeholder_count());
        let mut push_class = |class: StakeholderClass, ids: Vec<&str>| {
            let mut order: Vec<usize> = (0..ids.len()).collect();
            order.sort_by(|&a, &b| ids[a].cmp(ids[b]));
            for k in order {
                columns.push(ColumnRef { class, index: k, id: ids[k].to_owned() });
            }
        };
        push_class(StakeholderClass::Supplier, instance.suppliers.iter().map(|s| s.id.as_str()).collect());
        push_class(StakeholderClass::Consumer, instance.consumers.iter().map(|s| s.id.as_str()).collect());
        push_class(StakeholderClass::Transporter, instance.transporters.iter().map(|s| s.id.as_str()).collect());
        push_class(StakeholderClass::Technology, instance.technologies.iter().map(|s| s.id.as_str()).collect());

        let rows: Vec<BalanceKey> = MarketIndex::build(instance).balances.into_keys().collect();
        let col_of_id = columns.iter().enumerate().map(|(k, c)| (c.id.clone(), k)).collect();
        let row_of_key = rows.iter().enumerate().map(|(k, r)| (r.clone(), k)).collect();
        VariableIndex { columns, rows, col_of_id, row_of_key }
    }

    pub fn column_of(&self, id: &str) -> Option<usize> {
        self.col_of_id.get(id).copied()
    }

    pub fn row_of(&self, key: &BalanceKey) -> Option<usize> {
        self.row_of_key.get(key).copied()
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Per-column data shared by the primal and dual assembly.
struct ColumnData {
    bid: f64,
    capacity: f64,
    /// `(row, coefficient)` in the primal balance rows.
    entries: Vec<(usize, f64)>,
}

fn column_data(instance: &MarketInstance, index: &VariableIndex) -> Vec<ColumnData> {
    let row = |s: &crate::stgraph::SpaceTimeNode, p: &crate::market::ProductId| {
        index.row_of(&BalanceKey::new(s, p)).expect("every stakeholder touches a registered balance")
    };
    index
        .columns
        .iter()
        .map(|c| match c.class {
            StakeholderClass::Supplier => {
                let s = &instance.suppliers[c.index];
                ColumnData { bid: s.bid, capacity: s.capacity, entries: vec![(row(&s.node, &s.product), 1.0)] }
            }
            StakeholderClass::Consumer => {
                let s = &instance.consumers[c.index];
                ColumnData { bid: s.bid, capacity: s.capacity, entries: vec![(row(&s.node, &s.product), -1.0)] }
            }
            StakeholderClass::Transporter => {
                let l = &instance.transporters[c.index];
                ColumnData {
                    bid: l.bid,
                    capacity: l.capacity,
                    entries: vec![(row(&l.arc.base, &l.product), -1.0), (row(&l.arc.receiving, &l.product), 1.0)],
                }
            }
            StakeholderClass::Technology => {
                let m = &instance.technologies[c.index];
                let entries = m
                    .inputs
                    .iter()
                    .map(|(p, g)| (row(&m.node, p), -g))
                    .chain(m.outputs.iter().map(|(p, g)| (row(&m.node, p), *g)))
                    .collect();
                ColumnData { bid: m.bid, capacity: m.capacity, entries }
            }
        })
        .collect()
}

/// Objective sign for a class in the surplus maximization.
fn surplus_sign(class: StakeholderClass) -> f64 {
    if class == StakeholderClass::Consumer {
        1.0
    } else {
        -1.0
    }
}

pub fn assemble_primal(instance: &MarketInstance) -> Result<(LinearProgram, VariableIndex)> {
    instance.ensure_valid()?;
    let index = VariableIndex::build(instance);
    let data = column_data(instance, &index);
    let mut lp = LinearProgram::new(Sense::Maximize);
    for key in &index.rows {
        lp.add_row(key.to_string(), 0.0);
    }
    for (c, d) in index.columns.iter().zip(&data) {
        lp.add_column(c.id.clone(), surplus_sign(c.class) * d.bid, 0.0, d.capacity, &d.entries);
    }
    Ok((lp, index))
}

/// Column layout of the program built by [`assemble_dual`]: nodal prices
/// first (one per balance row, free), then capacity duals (one per
/// stakeholder, non-negative), then one slack per stakeholder constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualLayout {
    pub prices: usize,
    pub stakeholders: usize,
}

impl DualLayout {
    pub fn price_col(&self, row: usize) -> usize {
        row
    }

    pub fn capacity_col(&self, col: usize) -> usize {
        self.prices + col
    }

    pub fn slack_col(&self, col: usize) -> usize {
        self.prices + self.stakeholders + col
    }
}

/// Builds the explicit dual: minimize `Σ capacity·λ̄` over free prices and
/// `λ̄ >= 0` subject to, per stakeholder,
///
/// * supplier: `π − λ̄ <= α^g`
/// * consumer: `π + λ̄ >= α^d`
/// * transporter: `π_receiving − π_base − λ̄ <= α^f`
/// * technology: `Σ γ·π_out − Σ γ·π_in − λ̄ <= α^ξ`
///
/// Inequalities carry explicit slack columns.
pub fn assemble_dual(instance: &MarketInstance) -> Result<(LinearProgram, DualLayout)> {
    instance.ensure_valid()?;
    let index = VariableIndex::build(instance);
    let data = column_data(instance, &index);
    let layout = DualLayout { prices: index.num_rows(), stakeholders: index.num_columns() };

    let mut lp = LinearProgram::new(Sense::Minimize);
    for (c, d) in index.columns.iter().zip(&data) {
        lp.add_row(c.id.clone(), d.bid);
    }
    // A stakeholder's price is its surplus-signed transposed column:
    // consumers see −π in the primal row, so their constraint reads
    // −(−π) = π with λ̄ entering positively.
    let mut price_entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); index.num_rows()];
    for (k, (c, d)) in index.columns.iter().zip(&data).enumerate() {
        let sign = surplus_sign(c.class);
        for &(row, a) in &d.entries {
            price_entries[row].push((k, -sign * a));
        }
    }
    for (row, key) in index.rows.iter().enumerate() {
        lp.add_column(format!("pi{key}"), 0.0, f64::NEG_INFINITY, f64::INFINITY, &price_entries[row]);
    }
    for (k, (c, d)) in index.columns.iter().zip(&data).enumerate() {
        let sign = if c.class == StakeholderClass::Consumer { 1.0 } else { -1.0 };
        lp.add_column(format!("lambda:{}", c.id), d.capacity, 0.0, f64::INFINITY, &[(k, sign)]);
    }
    for (k, c) in index.columns.iter().enumerate() {
        let sign = if c.class == StakeholderClass::Consumer { -1.0 } else { 1.0 };
        lp.add_column(format!("slack:{}", c.id), 0.0, 0.0, f64::INFINITY, &[(k, sign)]);
    }
    Ok((lp, layout))
}

/// Total surplus per period: each column is charged to the period of its
/// node (transporters: their base node).
pub fn surplus_by_period(instance: &MarketInstance, index: &VariableIndex, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != index.num_columns() {
        return Err(Error::DimensionMismatch { expected: index.num_columns(), actual: x.len() });
    }
    let mut per = vec![0.0; instance.grid.len()];
    for (c, &v) in index.columns.iter().zip(x) {
        let (t, bid) = match c.class {
            StakeholderClass::Supplier => {
                let s = &instance.suppliers[c.index];
                (s.node.time, s.bid)
            }
            StakeholderClass::Consumer => {
                let s = &instance.consumers[c.index];
                (s.node.time, s.bid)
            }
            StakeholderClass::Transporter => {
                let l = &instance.transporters[c.index];
                (l.arc.base.time, l.bid)
            }
            StakeholderClass::Technology => {
                let m = &instance.technologies[c.index];
                (m.node.time, m.bid)
            }
        };
        per[t] += surplus_sign(c.class) * bid * v;
    }
    Ok(per)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn two_variable_market_transcription() {
        let (lp, index) = assemble_primal(&fixtures::two_variable_market()).unwrap();
        assert_eq!(lp.num_rows(), 1);
        assert_eq!(index.columns.iter().map(|c| c.id.as_str()).collect::<Vec<_>>(), ["g", "d"]);
        assert_eq!(lp.objective, vec![-2.0, 8.0]);
        assert_eq!(lp.upper, vec![10.0, 5.0]);
        assert_eq!(lp.lower, vec![0.0, 0.0]);
        assert_eq!(lp.coefficient(0, 0), 1.0);
        assert_eq!(lp.coefficient(0, 1), -1.0);
        assert_eq!(lp.rhs, vec![0.0]);
    }

    #[test]
    fn storage_incidence() {
        let (lp, index) = assemble_primal(&fixtures::storage_market()).unwrap();
        assert_eq!(lp.num_rows(), 2);
        let col = index.column_of("storage").unwrap();
        assert_eq!(lp.column(col), (&[0usize, 1][..], &[-1.0, 1.0][..]));
    }

    #[test]
    fn technology_yields() {
        let (lp, index) = assemble_primal(&fixtures::digester_market()).unwrap();
        let col = index.column_of("digester").unwrap();
        let waste = index.rows.iter().position(|k| k.product.as_str() == "waste").unwrap();
        let gas = index.rows.iter().position(|k| k.product.as_str() == "biogas").unwrap();
        assert_eq!(lp.coefficient(waste, col), -1.0);
        assert_eq!(lp.coefficient(gas, col), 2.0);
    }

    #[test]
    fn dual_of_two_variable_market() {
        let (lp, layout) = assemble_dual(&fixtures::two_variable_market()).unwrap();
        assert_eq!(layout, DualLayout { prices: 1, stakeholders: 2 });
        assert_eq!(lp.sense, Sense::Minimize);
        assert_eq!(lp.objective, vec![0.0, 10.0, 5.0, 0.0, 0.0]);
        // supplier row: π − λ̄_g + s = 2 ; consumer row: π + λ̄_d − s = 8
        assert_eq!(lp.rhs, vec![2.0, 8.0]);
        assert_eq!(lp.coefficient(0, 0), 1.0);
        assert_eq!(lp.coefficient(1, 0), 1.0);
        assert_eq!(lp.coefficient(0, 1), -1.0);
        assert_eq!(lp.coefficient(1, 2), 1.0);
        assert_eq!(lp.coefficient(0, 3), 1.0);
        assert_eq!(lp.coefficient(1, 4), -1.0);
    }

    #[test]
    fn empty_instance_has_empty_programs() {
        let inst = fixtures::empty_market();
        let (lp, index) = assemble_primal(&inst).unwrap();
        assert_eq!((lp.num_rows(), lp.num_cols(), index.num_rows()), (0, 0, 0));
        let (dual, _) = assemble_dual(&inst).unwrap();
        assert_eq!((dual.num_rows(), dual.num_cols()), (0, 0));
    }

    #[test]
    fn rejects_invalid_instance() {
        let mut inst = fixtures::two_variable_market();
        inst.suppliers[0].capacity = -1.0;
        assert!(matches!(assemble_primal(&inst), Err(Error::InvalidInstance(_))));
        assert!(matches!(assemble_dual(&inst), Err(Error::InvalidInstance(_))));
    }
}
