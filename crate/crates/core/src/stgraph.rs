//! Time-expanded graph: space-time nodes and the arcs that move product
//! between them.
//!
//! Every arc is stored as an oriented `base -> receiving` pair. An arc whose
//! endpoints share a time period is spatial, one whose endpoints share a
//! location is temporal (storage), and one that changes both is
//! spatiotemporal.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of a spatial location.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

/// Uniform grid of time labels.
///
/// The step is kept for reference only; flows are per-period quantities and
/// the clearing problem never multiplies by it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
    step: f64,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>, step: f64) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidTimeGrid("no time periods".into()));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidTimeGrid(format!("step {step} is not positive")));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidTimeGrid("non-finite time label".into()));
        }
        for w in times.windows(2) {
            let gap = w[1] - w[0];
            if gap <= 0.0 {
                return Err(Error::InvalidTimeGrid(format!(
                    "times not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
            if (gap - step).abs() > 1e-9 * step.max(1.0) {
                return Err(Error::InvalidTimeGrid(format!(
                    "gap {gap} between {} and {} differs from step {step}",
                    w[0], w[1]
                )));
            }
        }
        Ok(TimeGrid { times, step })
    }

    /// `len` periods labelled `0, step, 2*step, ...`.
    pub fn uniform(len: usize, step: f64) -> Result<Self> {
        Self::new((0..len).map(|k| k as f64 * step).collect(), step)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn label(&self, index: usize) -> Option<f64> {
        self.times.get(index).copied()
    }

    pub fn check(&self, index: usize) -> Result<()> {
        if index < self.times.len() {
            Ok(())
        } else {
            Err(Error::TimeOutOfRange { index, len: self.times.len() })
        }
    }
}

/// A `(location, period)` pair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpaceTimeNode {
    pub node: NodeId,
    pub time: usize,
}

impl SpaceTimeNode {
    pub fn new(node: impl Into<NodeId>, time: usize) -> Self {
        SpaceTimeNode { node: node.into(), time }
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

impl fmt::Display for SpaceTimeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},t{})", self.node, self.time)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Arc {
    pub base: SpaceTimeNode,
    pub receiving: SpaceTimeNode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcClass {
    Spatial,
    Temporal,
    SpatioTemporal,
}

impl ArcClass {
    pub fn name(self) -> &'static str {
        match self {
            ArcClass::Spatial => "spatial",
            ArcClass::Temporal => "temporal",
            ArcClass::SpatioTemporal => "spatiotemporal",
        }
    }
}

impl Arc {
    /// Builds an arc, rejecting self-loops and backward-in-time transport.
    pub fn new(base: SpaceTimeNode, receiving: SpaceTimeNode) -> Result<Self> {
        let arc = Arc { base, receiving };
        arc.check_shape()?;
        Ok(arc)
    }

    pub(crate) fn check_shape(&self) -> Result<()> {
        if self.base == self.receiving {
            return Err(Error::SelfLoopArc(self.to_string()));
        }
        if self.receiving.time < self.base.time {
            return Err(Error::BackwardTimeArc(self.to_string()));
        }
        Ok(())
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.base, self.receiving)
    }
}

/// Classifies a well-formed arc.
pub fn classify_arc(arc: &Arc) -> ArcClass {
    let same_time = arc.base.time == arc.receiving.time;
    let same_node = arc.base.node == arc.receiving.node;
    match (same_time, same_node) {
        (true, _) => ArcClass::Spatial,
        (false, true) => ArcClass::Temporal,
        (false, false) => ArcClass::SpatioTemporal,
    }
}

/// Index of an arc inside a [`Graph`].
pub type ArcIdx = usize;

#[derive(Clone, Debug)]
pub struct Graph {
    nodes: Vec<NodeId>,
    grid: TimeGrid,
    arcs: Vec<Arc>,
    arc_lookup: HashMap<Arc, ArcIdx>,
    incoming: HashMap<SpaceTimeNode, Vec<ArcIdx>>,
    outgoing: HashMap<SpaceTimeNode, Vec<ArcIdx>>,
}

impl Graph {
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn space_time_node_count(&self) -> usize {
        self.nodes.len() * self.grid.len()
    }

    /// All space-time nodes, time-major.
    pub fn space_time_nodes(&self) -> impl Iterator<Item = SpaceTimeNode> + '_ {
        (0..self.grid.len())
            .flat_map(move |t| self.nodes.iter().map(move |n| SpaceTimeNode::new(n.clone(), t)))
    }

    pub fn contains_node(&self, node: &NodeId) -> bool {
        self.nodes.binary_search(node).is_ok()
    }

    pub fn arc_index(&self, arc: &Arc) -> Option<ArcIdx> {
        self.arc_lookup.get(arc).copied()
    }

    pub fn incoming(&self, s: &SpaceTimeNode) -> &[ArcIdx] {
        self.incoming.get(s).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn outgoing(&self, s: &SpaceTimeNode) -> &[ArcIdx] {
        self.outgoing.get(s).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn arcs_of_class(&self, class: ArcClass) -> impl Iterator<Item = &Arc> + '_ {
        self.arcs.iter().filter(move |a| classify_arc(a) == class)
    }
}

fn check_endpoint(nodes: &BTreeSet<&NodeId>, grid: &TimeGrid, s: &SpaceTimeNode) -> Result<()> {
    if !nodes.contains(&s.node) {
        return Err(Error::UnknownNode(s.node.0.clone()));
    }
    grid.check(s.time)
}

/// Builds the time-expanded graph. Duplicate arcs collapse to one entry;
/// arcs keep first-seen order.
pub fn build_graph(nodes: &[NodeId], grid: TimeGrid, arcs: &[Arc]) -> Result<Graph> {
    let node_set: BTreeSet<&NodeId> = nodes.iter().collect();
    let mut stored = Vec::with_capacity(arcs.len());
    let mut arc_lookup = HashMap::with_capacity(arcs.len());
    let mut incoming: HashMap<SpaceTimeNode, Vec<ArcIdx>> = HashMap::new();
    let mut outgoing: HashMap<SpaceTimeNode, Vec<ArcIdx>> = HashMap::new();

    for arc in arcs {
        check_endpoint(&node_set, &grid, &arc.base)?;
        check_endpoint(&node_set, &grid, &arc.receiving)?;
        arc.check_shape()?;
        if arc_lookup.contains_key(arc) {
            continue;
        }
        let idx = stored.len();
        arc_lookup.insert(arc.clone(), idx);
        outgoing.entry(arc.base.clone()).or_default().push(idx);
        incoming.entry(arc.receiving.clone()).or_default().push(idx);
        stored.push(arc.clone());
    }

    Ok(Graph {
        nodes: node_set.into_iter().cloned().collect(),
        grid,
        arcs: stored,
        arc_lookup,
        incoming,
        outgoing,
    })
}
