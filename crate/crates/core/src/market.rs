//! Stakeholder declarations, bids and capacities, and instance validation.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stgraph::{build_graph, Arc, Graph, NodeId, SpaceTimeNode, TimeGrid};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProductId(pub String);

impl ProductId {
    pub fn new(id: impl Into<String>) -> Self {
        ProductId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ProductId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ProductId {
    fn from(s: &str) -> Self {
        ProductId(s.to_owned())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Supplier {
    pub id: String,
    pub node: SpaceTimeNode,
    pub product: ProductId,
    pub capacity: f64,
    /// May be negative: a supplier paying to have product taken away.
    pub bid: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Consumer {
    pub id: String,
    pub node: SpaceTimeNode,
    pub product: ProductId,
    pub capacity: f64,
    pub bid: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportProvider {
    pub id: String,
    pub arc: Arc,
    pub product: ProductId,
    pub capacity: f64,
    pub bid: f64,
}

/// Converts `inputs` into `outputs` at fixed yields, with activity measured
/// in units of the reference input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TechnologyProvider {
    pub id: String,
    pub node: SpaceTimeNode,
    pub inputs: BTreeMap<ProductId, f64>,
    pub outputs: BTreeMap<ProductId, f64>,
    pub reference: ProductId,
    pub capacity: f64,
    pub bid: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StakeholderClass {
    Supplier,
    Consumer,
    Transporter,
    Technology,
}

impl StakeholderClass {
    pub fn name(self) -> &'static str {
        match self {
            StakeholderClass::Supplier => "supplier",
            StakeholderClass::Consumer => "consumer",
            StakeholderClass::Transporter => "transporter",
            StakeholderClass::Technology => "technology",
        }
    }
}

/// One product balance: a product at a space-time node. Ordered by time,
/// then node, then product.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BalanceKey {
    pub node: NodeId,
    pub time: usize,
    pub product: ProductId,
}

impl BalanceKey {
    pub fn new(s: &SpaceTimeNode, product: &ProductId) -> Self {
        BalanceKey { node: s.node.clone(), time: s.time, product: product.clone() }
    }

    pub fn space_time(&self) -> SpaceTimeNode {
        SpaceTimeNode::new(self.node.clone(), self.time)
    }
}

impl Ord for BalanceKey {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, &self.node, &self.product).cmp(&(other.time, &other.node, &other.product))
    }
}

impl PartialOrd for BalanceKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BalanceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},t{},{})", self.node, self.time, self.product)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarketInstance {
    pub products: Vec<ProductId>,
    pub grid: TimeGrid,
    pub nodes: Vec<NodeId>,
    pub arcs: Vec<Arc>,
    pub suppliers: Vec<Supplier>,
    pub consumers: Vec<Consumer>,
    pub transporters: Vec<TransportProvider>,
    pub technologies: Vec<TechnologyProvider>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    DuplicateProduct,
    DuplicateNode,
    DuplicateId,
    EmptyId,
    UnknownNode,
    UnknownProduct,
    TimeOutOfRange,
    BackwardTimeArc,
    SelfLoopArc,
    UnregisteredArc,
    NonFiniteValue,
    NegativeCapacity,
    NegativeTransportBid,
    NegativeTechnologyBid,
    EmptyInputs,
    EmptyOutputs,
    OverlappingProducts,
    NonPositiveYield,
    ReferenceNotInput,
    ReferenceYieldNotUnity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} [{}]: {}", self.kind, self.subject, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    fn push(&mut self, kind: ViolationKind, subject: &str, detail: impl Into<String>) {
        self.violations.push(Violation { kind, subject: subject.to_owned(), detail: detail.into() });
    }
}

/// Stakeholders touching one product balance, as indices into the
/// instance's stakeholder vectors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LocalParticipants {
    pub suppliers: Vec<usize>,
    pub consumers: Vec<usize>,
    pub transport_in: Vec<usize>,
    pub transport_out: Vec<usize>,
    pub tech_gen: Vec<usize>,
    pub tech_con: Vec<usize>,
}

impl LocalParticipants {
    pub fn is_empty(&self) -> bool {
        self.suppliers.is_empty()
            && self.consumers.is_empty()
            && self.transport_in.is_empty()
            && self.transport_out.is_empty()
            && self.tech_gen.is_empty()
            && self.tech_con.is_empty()
    }
}

/// Bid-sign split of suppliers and consumers. A zero bid counts as
/// non-negative.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignPartition {
    pub suppliers_nonneg: Vec<usize>,
    pub suppliers_neg: Vec<usize>,
    pub consumers_nonneg: Vec<usize>,
    pub consumers_neg: Vec<usize>,
}

impl MarketInstance {
    pub fn empty(grid: TimeGrid) -> Self {
        MarketInstance {
            products: Vec::new(),
            grid,
            nodes: Vec::new(),
            arcs: Vec::new(),
            suppliers: Vec::new(),
            consumers: Vec::new(),
            transporters: Vec::new(),
            technologies: Vec::new(),
        }
    }

    pub fn stakeholder_count(&self) -> usize {
        self.suppliers.len() + self.consumers.len() + self.transporters.len() + self.technologies.len()
    }

    pub fn graph(&self) -> Result<Graph> {
        build_graph(&self.nodes, self.grid.clone(), &self.arcs)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(report.violations))
        }
    }

    /// Stakeholders attached to `(s, p)`.
    pub fn stakeholders_at(&self, s: &SpaceTimeNode, p: &ProductId) -> Result<LocalParticipants> {
        if !self.nodes.contains(&s.node) {
            return Err(Error::UnknownNode(s.node.0.clone()));
        }
        self.grid.check(s.time)?;
        if !self.products.contains(p) {
            return Err(Error::UnknownProduct(p.0.clone()));
        }
        let mut out = LocalParticipants::default();
        for (k, sup) in self.suppliers.iter().enumerate() {
            if &sup.node == s && &sup.product == p {
                out.suppliers.push(k);
            }
        }
        for (k, con) in self.consumers.iter().enumerate() {
            if &con.node == s && &con.product == p {
                out.consumers.push(k);
            }
        }
        for (k, tr) in self.transporters.iter().enumerate() {
            if &tr.product == p {
                if &tr.arc.receiving == s {
                    out.transport_in.push(k);
                }
                if &tr.arc.base == s {
                    out.transport_out.push(k);
                }
            }
        }
        for (k, tech) in self.technologies.iter().enumerate() {
            if &tech.node == s {
                if tech.outputs.contains_key(p) {
                    out.tech_gen.push(k);
                }
                if tech.inputs.contains_key(p) {
                    out.tech_con.push(k);
                }
            }
        }
        Ok(out)
    }

    pub fn sign_partition(&self) -> SignPartition {
        let mut part = SignPartition::default();
        for (k, s) in self.suppliers.iter().enumerate() {
            if s.bid >= 0.0 {
                part.suppliers_nonneg.push(k);
            } else {
                part.suppliers_neg.push(k);
            }
        }
        for (k, c) in self.consumers.iter().enumerate() {
            if c.bid >= 0.0 {
                part.consumers_nonneg.push(k);
            } else {
                part.consumers_neg.push(k);
            }
        }
        part
    }
}

/// Per-balance participant lists for the whole instance, keyed in
/// `(time, node, product)` order. Balances nobody touches are absent.
#[derive(Clone, Debug, Default)]
pub struct MarketIndex {
    pub balances: BTreeMap<BalanceKey, LocalParticipants>,
}

impl MarketIndex {
    pub fn build(instance: &MarketInstance) -> Self {
        let mut balances: BTreeMap<BalanceKey, LocalParticipants> = BTreeMap::new();
        fn at<'a>(
            balances: &'a mut BTreeMap<BalanceKey, LocalParticipants>,
            s: &SpaceTimeNode,
            p: &ProductId,
        ) -> &'a mut LocalParticipants {
            balances.entry(BalanceKey::new(s, p)).or_default()
        }
        for (k, s) in instance.suppliers.iter().enumerate() {
            at(&mut balances, &s.node, &s.product).suppliers.push(k);
        }
        for (k, c) in instance.consumers.iter().enumerate() {
            at(&mut balances, &c.node, &c.product).consumers.push(k);
        }
        for (k, l) in instance.transporters.iter().enumerate() {
            at(&mut balances, &l.arc.base, &l.product).transport_out.push(k);
            at(&mut balances, &l.arc.receiving, &l.product).transport_in.push(k);
        }
        for (k, m) in instance.technologies.iter().enumerate() {
            for p in m.inputs.keys() {
                at(&mut balances, &m.node, p).tech_con.push(k);
            }
            for p in m.outputs.keys() {
                at(&mut balances, &m.node, p).tech_gen.push(k);
            }
        }
        MarketIndex { balances }
    }

    pub fn get(&self, key: &BalanceKey) -> Option<&LocalParticipants> {
        self.balances.get(key)
    }
}

fn check_finite(report: &mut ValidationReport, id: &str, what: &str, v: f64) -> bool {
    if v.is_finite() {
        true
    } else {
        report.push(ViolationKind::NonFiniteValue, id, format!("{what} is {v}"));
        false
    }
}

fn check_capacity(report: &mut ValidationReport, id: &str, cap: f64) {
    if check_finite(report, id, "capacity", cap) && cap < 0.0 {
        report.push(ViolationKind::NegativeCapacity, id, format!("capacity {cap} < 0"));
    }
}

struct Registry<'a> {
    nodes: HashSet<&'a NodeId>,
    products: HashSet<&'a ProductId>,
    periods: usize,
}

impl Registry<'_> {
    fn check_node(&self, report: &mut ValidationReport, id: &str, s: &SpaceTimeNode) {
        if !self.nodes.contains(&s.node) {
            report.push(ViolationKind::UnknownNode, id, format!("node `{}` not registered", s.node));
        }
        if s.time >= self.periods {
            report.push(
                ViolationKind::TimeOutOfRange,
                id,
                format!("time {} outside grid of {}", s.time, self.periods),
            );
        }
    }

    fn check_product(&self, report: &mut ValidationReport, id: &str, p: &ProductId) {
        if !self.products.contains(p) {
            report.push(ViolationKind::UnknownProduct, id, format!("product `{p}` not registered"));
        }
    }
}

/// Checks every structural and numeric invariant of an instance. Returns an
/// empty report for a valid instance.
pub fn validate(instance: &MarketInstance) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut seen_products = HashSet::new();
    for p in &instance.products {
        if !seen_products.insert(p) {
            report.push(ViolationKind::DuplicateProduct, p.as_str(), "product listed twice");
        }
    }
    let mut seen_nodes = HashSet::new();
    for n in &instance.nodes {
        if !seen_nodes.insert(n) {
            report.push(ViolationKind::DuplicateNode, n.as_str(), "node listed twice");
        }
    }
    let reg = Registry { nodes: seen_nodes, products: seen_products, periods: instance.grid.len() };

    let mut arc_set = BTreeSet::new();
    for arc in &instance.arcs {
        let name = arc.to_string();
        reg.check_node(&mut report, &name, &arc.base);
        reg.check_node(&mut report, &name, &arc.receiving);
        if arc.base == arc.receiving {
            report.push(ViolationKind::SelfLoopArc, &name, "arc starts and ends at the same node");
        } else if arc.receiving.time < arc.base.time {
            report.push(ViolationKind::BackwardTimeArc, &name, "arc runs backward in time");
        }
        arc_set.insert(arc);
    }

    let mut ids = HashSet::new();
    let mut check_id = |report: &mut ValidationReport, id: &str| {
        if id.is_empty() {
            report.push(ViolationKind::EmptyId, id, "empty stakeholder id");
        } else if !ids.insert(id.to_owned()) {
            report.push(ViolationKind::DuplicateId, id, "stakeholder id used twice");
        }
    };

    for s in &instance.suppliers {
        check_id(&mut report, &s.id);
        reg.check_node(&mut report, &s.id, &s.node);
        reg.check_product(&mut report, &s.id, &s.product);
        check_capacity(&mut report, &s.id, s.capacity);
        check_finite(&mut report, &s.id, "bid", s.bid);
    }
    for c in &instance.consumers {
        check_id(&mut report, &c.id);
        reg.check_node(&mut report, &c.id, &c.node);
        reg.check_product(&mut report, &c.id, &c.product);
        check_capacity(&mut report, &c.id, c.capacity);
        check_finite(&mut report, &c.id, "bid", c.bid);
    }
    for l in &instance.transporters {
        check_id(&mut report, &l.id);
        reg.check_node(&mut report, &l.id, &l.arc.base);
        reg.check_node(&mut report, &l.id, &l.arc.receiving);
        if !arc_set.contains(&l.arc) {
            report.push(ViolationKind::UnregisteredArc, &l.id, format!("arc {} not registered", l.arc));
        }
        reg.check_product(&mut report, &l.id, &l.product);
        check_capacity(&mut report, &l.id, l.capacity);
        if check_finite(&mut report, &l.id, "bid", l.bid) && l.bid < 0.0 {
            report.push(ViolationKind::NegativeTransportBid, &l.id, format!("bid {} < 0", l.bid));
        }
    }
    for m in &instance.technologies {
        check_id(&mut report, &m.id);
        reg.check_node(&mut report, &m.id, &m.node);
        check_capacity(&mut report, &m.id, m.capacity);
        if check_finite(&mut report, &m.id, "bid", m.bid) && m.bid < 0.0 {
            report.push(ViolationKind::NegativeTechnologyBid, &m.id, format!("bid {} < 0", m.bid));
        }
        if m.inputs.is_empty() {
            report.push(ViolationKind::EmptyInputs, &m.id, "technology consumes nothing");
        }
        if m.outputs.is_empty() {
            report.push(ViolationKind::EmptyOutputs, &m.id, "technology produces nothing");
        }
        for p in m.inputs.keys() {
            if m.outputs.contains_key(p) {
                report.push(ViolationKind::OverlappingProducts, &m.id, format!("`{p}` is both input and output"));
            }
        }
        for (p, &gamma) in m.inputs.iter().chain(m.outputs.iter()) {
            reg.check_product(&mut report, &m.id, p);
            if check_finite(&mut report, &m.id, "yield", gamma) && gamma <= 0.0 {
                report.push(ViolationKind::NonPositiveYield, &m.id, format!("yield of `{p}` is {gamma}"));
            }
        }
        match m.inputs.get(&m.reference) {
            None => report.push(
                ViolationKind::ReferenceNotInput,
                &m.id,
                format!("reference `{}` is not an input", m.reference),
            ),
            Some(&g) if g != 1.0 => report.push(
                ViolationKind::ReferenceYieldNotUnity,
                &m.id,
                format!("reference yield is {g}, must be 1"),
            ),
            Some(_) => {}
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(n: &str, t: usize) -> SpaceTimeNode {
        SpaceTimeNode::new(n, t)
    }

    fn base(periods: usize) -> MarketInstance {
        let mut inst = MarketInstance::empty(TimeGrid::uniform(periods, 1.0).unwrap());
        inst.products = vec!["p1".into(), "waste".into(), "biogas".into(), "digestate".into()];
        inst.nodes = vec!["n1".into(), "n2".into()];
        inst
    }

    fn supplier(id: &str, s: SpaceTimeNode, p: &str, cap: f64, bid: f64) -> Supplier {
        Supplier { id: id.into(), node: s, product: p.into(), capacity: cap, bid }
    }

    fn digester(id: &str, s: SpaceTimeNode, ref_yield: f64) -> TechnologyProvider {
        TechnologyProvider {
            id: id.into(),
            node: s,
            inputs: [("waste".into(), ref_yield)].into_iter().collect(),
            outputs: [("biogas".into(), 2.0), ("digestate".into(), 0.5)].into_iter().collect(),
            reference: "waste".into(),
            capacity: 10.0,
            bid: 1.0,
        }
    }

    #[test]
    fn empty_instance_is_valid() {
        let inst = MarketInstance::empty(TimeGrid::uniform(1, 1.0).unwrap());
        assert!(inst.validate().is_valid());
    }

    #[test]
    fn unknown_product_is_reported() {
        let mut inst = base(1);
        inst.suppliers.push(supplier("i1", st("n1", 0), "nope", 1.0, 1.0));
        let report = inst.validate();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, ViolationKind::UnknownProduct);
    }

    #[test]
    fn reference_yield_must_be_unity() {
        let mut inst = base(1);
        inst.technologies.push(digester("m1", st("n1", 0), 2.0));
        let report = inst.validate();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, ViolationKind::ReferenceYieldNotUnity);
    }

    #[test]
    fn catches_numeric_and_reference_problems() {
        let mut inst = base(2);
        inst.suppliers.push(supplier("i1", st("n1", 0), "p1", f64::NAN, 1.0));
        inst.suppliers.push(supplier("i1", st("n9", 4), "p1", -1.0, f64::INFINITY));
        inst.transporters.push(TransportProvider {
            id: "l1".into(),
            arc: Arc { base: st("n1", 0), receiving: st("n2", 0) },
            product: "p1".into(),
            capacity: 1.0,
            bid: -1.0,
        });
        let r = inst.validate();
        assert_eq!(r.count(ViolationKind::NonFiniteValue), 2);
        assert_eq!(r.count(ViolationKind::DuplicateId), 1);
        assert_eq!(r.count(ViolationKind::UnknownNode), 1);
        assert_eq!(r.count(ViolationKind::TimeOutOfRange), 1);
        assert_eq!(r.count(ViolationKind::NegativeCapacity), 1);
        assert_eq!(r.count(ViolationKind::UnregisteredArc), 1);
        assert_eq!(r.count(ViolationKind::NegativeTransportBid), 1);
        assert!(inst.ensure_valid().is_err());
    }

    #[test]
    fn stakeholders_at_membership() {
        let mut inst = base(2);
        inst.suppliers.push(supplier("i1", st("n1", 0), "p1", 1.0, 1.0));
        let here = inst.stakeholders_at(&st("n1", 0), &"p1".into()).unwrap();
        assert_eq!(here.suppliers, vec![0]);
        assert!(here.consumers.is_empty() && here.transport_in.is_empty() && here.tech_gen.is_empty());
        assert!(inst.stakeholders_at(&st("n1", 1), &"p1".into()).unwrap().is_empty());
        assert!(matches!(inst.stakeholders_at(&st("zz", 0), &"p1".into()), Err(Error::UnknownNode(_))));
        assert!(matches!(inst.stakeholders_at(&st("n1", 0), &"zz".into()), Err(Error::UnknownProduct(_))));
    }

    #[test]
    fn technology_appears_in_generation_set_for_outputs() {
        let mut inst = base(1);
        inst.technologies.push(digester("m1", st("n1", 0), 1.0));
        let gas = inst.stakeholders_at(&st("n1", 0), &"biogas".into()).unwrap();
        assert_eq!(gas.tech_gen, vec![0]);
        assert!(gas.tech_con.is_empty());
        let waste = inst.stakeholders_at(&st("n1", 0), &"waste".into()).unwrap();
        assert_eq!(waste.tech_con, vec![0]);
        assert!(waste.tech_gen.is_empty());
    }

    #[test]
    fn sign_partition_cases() {
        let mut inst = base(1);
        for (k, bid) in [-1.0, 0.0, 2.0].into_iter().enumerate() {
            inst.suppliers.push(supplier(&format!("i{k}"), st("n1", 0), "p1", 1.0, bid));
        }
        inst.consumers.push(Consumer { id: "j".into(), node: st("n1", 0), product: "p1".into(), capacity: 1.0, bid: 0.0 });
        let part = inst.sign_partition();
        assert_eq!(part.suppliers_neg, vec![0]);
        assert_eq!(part.suppliers_nonneg, vec![1, 2]);
        assert_eq!(part.consumers_nonneg, vec![0]);
        assert!(part.consumers_neg.is_empty());
    }

    #[test]
    fn index_touch_counts() {
        let mut inst = base(2);
        inst.suppliers.push(supplier("i1", st("n1", 0), "waste", 1.0, -5.0));
        inst.consumers.push(Consumer { id: "j1".into(), node: st("n2", 1), product: "biogas".into(), capacity: 1.0, bid: 3.0 });
        let arc = Arc::new(st("n1", 0), st("n1", 1)).unwrap();
        inst.arcs.push(arc.clone());
        inst.transporters.push(TransportProvider { id: "l1".into(), arc, product: "waste".into(), capacity: 1.0, bid: 0.0 });
        inst.technologies.push(digester("m1", st("n1", 1), 1.0));
        assert!(inst.validate().is_valid());

        let index = MarketIndex::build(&inst);
        let mut touches = std::collections::HashMap::<(StakeholderClass, usize), usize>::new();
        for local in index.balances.values() {
            for &k in &local.suppliers {
                *touches.entry((StakeholderClass::Supplier, k)).or_default() += 1;
            }
            for &k in &local.consumers {
                *touches.entry((StakeholderClass::Consumer, k)).or_default() += 1;
            }
            for &k in local.transport_in.iter().chain(&local.transport_out) {
                *touches.entry((StakeholderClass::Transporter, k)).or_default() += 1;
            }
            for &k in local.tech_gen.iter().chain(&local.tech_con) {
                *touches.entry((StakeholderClass::Technology, k)).or_default() += 1;
            }
        }
        assert_eq!(touches[&(StakeholderClass::Supplier, 0)], 1);
        assert_eq!(touches[&(StakeholderClass::Consumer, 0)], 1);
        assert_eq!(touches[&(StakeholderClass::Transporter, 0)], 2);
        assert_eq!(touches[&(StakeholderClass::Technology, 0)], 3);

        // the index agrees with the filtering query
        for (key, local) in &index.balances {
            let q = inst.stakeholders_at(&key.space_time(), &key.product).unwrap();
            assert_eq!(&q, local);
        }
    }
}
