//! Small hand-solvable markets used by tests, examples and the CLI docs.

use std::collections::BTreeMap;

use crate::market::{Consumer, MarketInstance, ProductId, Supplier, TechnologyProvider, TransportProvider};
use crate::stgraph::{Arc, NodeId, SpaceTimeNode, TimeGrid};

fn st(node: &str, t: usize) -> SpaceTimeNode {
    SpaceTimeNode::new(node, t)
}

fn market(periods: usize, nodes: &[&str], products: &[&str]) -> MarketInstance {
    let mut inst = MarketInstance::empty(TimeGrid::uniform(periods, 1.0).expect("positive grid"));
    inst.nodes = nodes.iter().map(|n| NodeId::new(*n)).collect();
    inst.products = products.iter().map(|p| ProductId::new(*p)).collect();
    inst
}

pub fn supplier(id: &str, at: SpaceTimeNode, product: &str, capacity: f64, bid: f64) -> Supplier {
    Supplier { id: id.into(), node: at, product: product.into(), capacity, bid }
}

pub fn consumer(id: &str, at: SpaceTimeNode, product: &str, capacity: f64, bid: f64) -> Consumer {
    Consumer { id: id.into(), node: at, product: product.into(), capacity, bid }
}

/// Adds the arc to the instance if needed and returns the transporter.
pub fn transporter(
    inst: &mut MarketInstance,
    id: &str,
    from: SpaceTimeNode,
    to: SpaceTimeNode,
    product: &str,
    capacity: f64,
    bid: f64,
) -> TransportProvider {
    let arc = Arc::new(from, to).expect("fixture arcs are forward");
    if !inst.arcs.contains(&arc) {
        inst.arcs.push(arc.clone());
    }
    TransportProvider { id: id.into(), arc, product: product.into(), capacity, bid }
}

pub fn technology(
    id: &str,
    at: SpaceTimeNode,
    inputs: &[(&str, f64)],
    outputs: &[(&str, f64)],
    capacity: f64,
    bid: f64,
) -> TechnologyProvider {
    let map = |v: &[(&str, f64)]| v.iter().map(|(p, g)| (ProductId::new(*p), *g)).collect::<BTreeMap<_, _>>();
    TechnologyProvider {
        id: id.into(),
        node: at,
        inputs: map(inputs),
        outputs: map(outputs),
        reference: ProductId::new(inputs[0].0),
        capacity,
        bid,
    }
}

pub fn empty_market() -> MarketInstance {
    MarketInstance::empty(TimeGrid::uniform(1, 1.0).expect("positive grid"))
}

/// Supplier `g` (capacity 10, bid 2) and consumer `d` (capacity 5, bid 8)
/// at one node. Clears at 5 units, price 2, surplus 30.
pub fn two_variable_market() -> MarketInstance {
    let mut inst = market(1, &["n1"], &["p1"]);
    inst.suppliers.push(supplier("g", st("n1", 0), "p1", 10.0, 2.0));
    inst.consumers.push(consumer("d", st("n1", 0), "p1", 5.0, 8.0));
    inst
}

/// Consumer bids below the supplier: nothing clears.
pub fn dry_market() -> MarketInstance {
    let mut inst = market(1, &["n1"], &["p1"]);
    inst.suppliers.push(supplier("g", st("n1", 0), "p1", 10.0, 5.0));
    inst.consumers.push(consumer("d", st("n1", 0), "p1", 5.0, 3.0));
    inst
}

/// Supply at t0, demand at t1, storage arc between them bid 0.5.
/// Clears 5 units through storage; prices 1 and 1.5, surplus 42.5.
pub fn storage_market() -> MarketInstance {
    let mut inst = market(2, &["n1"], &["p1"]);
    inst.suppliers.push(supplier("supply", st("n1", 0), "p1", 5.0, 1.0));
    inst.consumers.push(consumer("demand", st("n1", 1), "p1", 5.0, 10.0));
    let l = transporter(&mut inst, "storage", st("n1", 0), st("n1", 1), "p1", 5.0, 0.5);
    inst.transporters.push(l);
    inst
}

/// Supplier at n1, consumer at n2, spatial transporter with slack capacity.
/// Prices 1 and 2, transport price 1 equal to its bid.
pub fn two_node_transport() -> MarketInstance {
    let mut inst = market(1, &["n1", "n2"], &["p1"]);
    inst.suppliers.push(supplier("supply", st("n1", 0), "p1", 10.0, 1.0));
    inst.consumers.push(consumer("demand", st("n2", 0), "p1", 4.0, 5.0));
    let l = transporter(&mut inst, "line", st("n1", 0), st("n2", 0), "p1", 10.0, 1.0);
    inst.transporters.push(l);
    inst
}

/// A waste supplier paying a tipping fee (bid −1), a digester turning one
/// unit of waste into two of biogas (bid 0.5, capacity 8) and a biogas
/// consumer (bid 3, capacity 10). Clears ξ = 5; prices waste −1,
/// biogas −0.25; surplus 32.5.
pub fn digester_market() -> MarketInstance {
    let mut inst = market(1, &["n1"], &["biogas", "waste"]);
    inst.suppliers.push(supplier("farm", st("n1", 0), "waste", 10.0, -1.0));
    inst.consumers.push(consumer("grid", st("n1", 0), "biogas", 10.0, 3.0));
    inst.technologies.push(technology("digester", st("n1", 0), &[("waste", 1.0)], &[("biogas", 2.0)], 8.0, 0.5));
    inst
}

/// Two periods with cheap supply first and free, uncapacitated storage.
/// Storage flow stays interior so both periods share one price.
pub fn free_storage_market() -> MarketInstance {
    let mut inst = market(2, &["n1"], &["p1"]);
    inst.suppliers.push(supplier("cheap", st("n1", 0), "p1", 10.0, 1.0));
    inst.suppliers.push(supplier("dear", st("n1", 1), "p1", 10.0, 4.0));
    inst.consumers.push(consumer("early", st("n1", 0), "p1", 3.0, 10.0));
    inst.consumers.push(consumer("late", st("n1", 1), "p1", 5.0, 10.0));
    let l = transporter(&mut inst, "storage", st("n1", 0), st("n1", 1), "p1", 1e9, 0.0);
    inst.transporters.push(l);
    inst
}

/// Every fixture by name.
pub fn all() -> Vec<(&'static str, MarketInstance)> {
    vec![
        ("empty", empty_market()),
        ("two_variable", two_variable_market()),
        ("dry", dry_market()),
        ("storage", storage_market()),
        ("two_node_transport", two_node_transport()),
        ("digester", digester_market()),
        ("free_storage", free_storage_market()),
    ]
}
