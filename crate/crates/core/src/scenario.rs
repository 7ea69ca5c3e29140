//! Scenario restrictions, the desk-scale waste-to-energy case, and random
//! markets for property suites.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{Consumer, MarketInstance, ProductId, Supplier, TechnologyProvider, TransportProvider};
use crate::stgraph::{classify_arc, Arc, ArcClass, NodeId, SpaceTimeNode, TimeGrid};

/// Zeroes the capacity of every transporter on a temporal or spatiotemporal
/// arc, leaving a market that clears period by period.
pub fn restrict_to_qss(instance: &MarketInstance) -> MarketInstance {
    let mut out = instance.clone();
    for l in &mut out.transporters {
        if classify_arc(&l.arc) != ArcClass::Spatial {
            l.capacity = 0.0;
        }
    }
    out
}

/// The single-period market formed by the stakeholders at period `t` and
/// the spatial arcs within it. The period is renumbered to 0 and keeps its
/// time label.
pub fn restrict_to_snapshot(instance: &MarketInstance, t: usize) -> Result<MarketInstance> {
    instance.grid.check(t)?;
    let label = instance.grid.times()[t];
    let mut out = MarketInstance::empty(TimeGrid::new(vec![label], instance.grid.step())?);
    out.products = instance.products.clone();
    out.nodes = instance.nodes.clone();
    let at = |s: &SpaceTimeNode| SpaceTimeNode::new(s.node.clone(), 0);
    out.arcs = instance
        .arcs
        .iter()
        .filter(|a| a.base.time == t && a.receiving.time == t)
        .map(|a| Arc { base: at(&a.base), receiving: at(&a.receiving) })
        .collect();
    out.suppliers = instance
        .suppliers
        .iter()
        .filter(|s| s.node.time == t)
        .map(|s| Supplier { node: at(&s.node), ..s.clone() })
        .collect();
    out.consumers = instance
        .consumers
        .iter()
        .filter(|s| s.node.time == t)
        .map(|s| Consumer { node: at(&s.node), ..s.clone() })
        .collect();
    out.transporters = instance
        .transporters
        .iter()
        .filter(|l| l.arc.base.time == t && l.arc.receiving.time == t)
        .map(|l| TransportProvider { arc: Arc { base: at(&l.arc.base), receiving: at(&l.arc.receiving) }, ..l.clone() })
        .collect();
    out.technologies = instance
        .technologies
        .iter()
        .filter(|m| m.node.time == t)
        .map(|m| TechnologyProvider { node: at(&m.node), ..m.clone() })
        .collect();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Base,
    NoStorage,
    UnlimitedStorage,
    TripleWaste,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Base, Variant::NoStorage, Variant::UnlimitedStorage, Variant::TripleWaste];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::NoStorage => "nostorage",
            Variant::UnlimitedStorage => "unlimited",
            Variant::TripleWaste => "triple",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Variant::ALL.into_iter().find(|v| v.name() == s)
    }
}

/// Capacity and bid used for storage in the unlimited variant.
pub const UNLIMITED_STORAGE: f64 = 1e9;

/// Parameters of the waste-to-energy case. Money in USD, energy in MWh,
/// waste in tonnes, distances in km, one period per hour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseParams {
    pub farms: usize,
    /// Farms equipped with a digester and waste storage.
    pub processors: usize,
    pub hours: usize,
    pub seed: u64,
    pub variant: Variant,
    /// Ratio of peak to trough hourly demand.
    pub demand_peak_ratio: f64,
    pub annual_demand_mwh: f64,
    /// Clock hour (0-23) of the daily demand peak.
    pub peak_hour: usize,
    /// Clock hour of the first period. The default starts each simulated
    /// day at the hour the daily storage cycle turns over.
    pub start_hour: usize,
    pub off_peak_price: f64,
    pub on_peak_price: f64,
    pub generator_betas: [f64; 3],
    pub block_size: f64,
    /// Generator blocks are offered up to this multiple of the on-peak price.
    pub block_price_cap_factor: f64,
    /// Demand bid as a multiple of the on-peak price.
    pub demand_bid_factor: f64,
    pub electricity_transport_bid: f64,
    pub waste_transport_bid: f64,
    /// Per-farm waste rate range, tonne/h.
    pub waste_rate_range: (f64, f64),
    /// Per-farm waste bid range; non-positive bids are tipping fees.
    pub waste_bid_range: (f64, f64),
    /// MWh of electricity per tonne of waste.
    pub digester_yield: f64,
    pub digester_bid: f64,
    /// Digester capacity as a multiple of the processor's base inflow.
    pub digester_capacity_factor: f64,
    /// Storage capacity in hours of the processor's base inflow.
    pub storage_hours: f64,
    pub storage_bid: f64,
    /// Side of the square region farms are placed in.
    pub region_km: f64,
}

impl Default for CaseParams {
    fn default() -> Self {
        CaseParams {
            farms: 8,
            processors: 4,
            hours: 72,
            seed: 7,
            variant: Variant::Base,
            demand_peak_ratio: 1.9,
            annual_demand_mwh: 68.8e6,
            peak_hour: 18,
            start_hour: 23,
            off_peak_price: 50.0,
            on_peak_price: 180.0,
            generator_betas: [1.66e-5, 8.31e-6, 4.15e-5],
            block_size: 100.0,
            block_price_cap_factor: 2.0,
            demand_bid_factor: 10.0,
            electricity_transport_bid: 7.5e-6,
            waste_transport_bid: 0.005,
            waste_rate_range: (100.0, 200.0),
            waste_bid_range: (-1.0, 0.0),
            digester_yield: 0.08,
            digester_bid: 1.5,
            digester_capacity_factor: 3.0,
            storage_hours: 10.0,
            storage_bid: 0.01,
            region_km: 300.0,
        }
    }
}

impl CaseParams {
    pub fn with_variant(&self, variant: Variant) -> Self {
        CaseParams { variant, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.farms == 0 || self.hours == 0 {
            return bad("farms and hours must be at least 1".into());
        }
        if self.processors == 0 || self.processors > self.farms {
            return bad(format!("processors must be in 1..={}, got {}", self.farms, self.processors));
        }
        if self.peak_hour >= 24 || self.start_hour >= 24 {
            return bad(format!("peak_hour {} and start_hour {} must be in 0..24", self.peak_hour, self.start_hour));
        }
        let positive = [
            ("demand_peak_ratio", self.demand_peak_ratio),
            ("annual_demand_mwh", self.annual_demand_mwh),
            ("off_peak_price", self.off_peak_price),
            ("on_peak_price", self.on_peak_price),
            ("block_size", self.block_size),
            ("block_price_cap_factor", self.block_price_cap_factor),
            ("demand_bid_factor", self.demand_bid_factor),
            ("digester_yield", self.digester_yield),
            ("digester_capacity_factor", self.digester_capacity_factor),
            ("region_km", self.region_km),
            ("beta[0]", self.generator_betas[0]),
            ("beta[1]", self.generator_betas[1]),
            ("beta[2]", self.generator_betas[2]),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        let non_negative = [
            ("electricity_transport_bid", self.electricity_transport_bid),
            ("waste_transport_bid", self.waste_transport_bid),
            ("digester_bid", self.digester_bid),
            ("storage_hours", self.storage_hours),
            ("storage_bid", self.storage_bid),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if self.demand_peak_ratio < 1.0 {
            return bad("demand_peak_ratio below 1".into());
        }
        for (name, (lo, hi)) in [("waste_rate_range", self.waste_rate_range), ("waste_bid_range", self.waste_bid_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("{name} ({lo}, {hi}) is not an interval"));
            }
        }
        if self.waste_rate_range.0 < 0.0 {
            return bad("negative waste rate".into());
        }
        Ok(())
    }

    /// Clock hour of period `t`.
    pub fn clock_hour(&self, t: usize) -> usize {
        (self.start_hour + t) % 24
    }
}

/// Hourly electricity demand at the hub.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandCurve {
    pub demand: Vec<f64>,
    pub bid: Vec<f64>,
}

/// A sinusoid with period 24 h whose mean is the annual demand spread over
/// 8760 hours and whose peak/trough ratio is `demand_peak_ratio`.
pub fn demand_curve(params: &CaseParams) -> DemandCurve {
    let mean = params.annual_demand_mwh / 8760.0;
    let r = params.demand_peak_ratio;
    let amp = (r - 1.0) / (r + 1.0);
    let demand = (0..params.hours)
        .map(|t| {
            let h = params.clock_hour(t) as f64;
            mean * (1.0 + amp * (2.0 * PI * (h - params.peak_hour as f64) / 24.0).cos())
        })
        .collect();
    let bid = vec![params.demand_bid_factor * params.on_peak_price; params.hours];
    DemandCurve { demand, bid }
}

/// Offers of one generator fleet: block `k` (1-based) of `block_size` MW
/// bids `β·(k·block_size)²`, up to the price cap.
pub fn fleet_blocks(beta: f64, block_size: f64, price_cap: f64) -> Vec<f64> {
    (1..)
        .map(|k| beta * (k as f64 * block_size).powi(2))
        .take_while(|&bid| bid <= price_cap)
        .collect()
}

pub const WASTE: &str = "waste";
pub const ELECTRICITY: &str = "electricity";
pub const HUB: &str = "hub";

pub fn farm_node(f: usize) -> NodeId {
    NodeId::new(format!("farm{f:03}"))
}

/// Layout drawn from the seed: farm positions, waste rates and bids, and
/// the processor each farm ships to.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseLayout {
    pub positions: Vec<(f64, f64)>,
    pub hub: (f64, f64),
    pub waste_rate: Vec<f64>,
    pub waste_bid: Vec<f64>,
    /// Index of the serving processor per farm; processors serve themselves.
    pub serves: Vec<usize>,
}

impl CaseLayout {
    pub fn draw(params: &CaseParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut positions = Vec::with_capacity(params.farms);
        let mut waste_rate = Vec::with_capacity(params.farms);
        let mut waste_bid = Vec::with_capacity(params.farms);
        let draw = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| if hi > lo { rng.random_range(lo..hi) } else { lo };
        for _ in 0..params.farms {
            let x = rng.random_range(0.0..params.region_km);
            let y = rng.random_range(0.0..params.region_km);
            positions.push((x, y));
            waste_rate.push(draw(&mut rng, params.waste_rate_range));
            waste_bid.push(draw(&mut rng, params.waste_bid_range));
        }
        let hub = (params.region_km / 2.0, params.region_km / 2.0);
        let serves = (0..params.farms)
            .map(|f| {
                if f < params.processors {
                    return f;
                }
                (0..params.processors)
                    .min_by(|&a, &b| distance(positions[f], positions[a]).total_cmp(&distance(positions[f], positions[b])))
                    .expect("at least one processor")
            })
            .collect();
        CaseLayout { positions, hub, waste_rate, waste_bid, serves }
    }

    /// Base waste inflow reaching processor `p`, tonne/h.
    pub fn processor_inflow(&self, p: usize) -> f64 {
        self.serves.iter().zip(&self.waste_rate).filter(|(s, _)| **s == p).map(|(_, r)| r).sum()
    }
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Builds the waste-to-energy market: a hub with hourly demand and three
/// conventional fleets, farms supplying waste, and processors that digest
/// waste into electricity, store waste between hours and ship electricity
/// to the hub.
pub fn generate_waste_case(params: &CaseParams) -> Result<MarketInstance> {
    params.validate()?;
    let layout = CaseLayout::draw(params);
    let hours = params.hours;
    let mut inst = MarketInstance::empty(TimeGrid::uniform(hours, 1.0)?);
    inst.products = vec![ProductId::new(ELECTRICITY), ProductId::new(WASTE)];
    inst.nodes = std::iter::once(NodeId::new(HUB)).chain((0..params.farms).map(farm_node)).collect();

    let curve = demand_curve(params);
    let cap = params.block_price_cap_factor * params.on_peak_price;
    let fleets: Vec<Vec<f64>> =
        params.generator_betas.iter().map(|&b| fleet_blocks(b, params.block_size, cap)).collect();

    let waste_factor = if params.variant == Variant::TripleWaste { 3.0 } else { 1.0 };
    let (storage_cap_hours, storage_bid) = match params.variant {
        Variant::NoStorage => (0.0, params.storage_bid),
        Variant::UnlimitedStorage => (f64::INFINITY, 0.0),
        _ => (params.storage_hours, params.storage_bid),
    };

    let hub = |t| SpaceTimeNode::new(HUB, t);
    let farm = |f, t| SpaceTimeNode::new(farm_node(f), t);
    let push_arc = |inst: &mut MarketInstance, base: SpaceTimeNode, receiving: SpaceTimeNode| -> Result<Arc> {
        let arc = Arc::new(base, receiving)?;
        inst.arcs.push(arc.clone());
        Ok(arc)
    };

    for t in 0..hours {
        inst.consumers.push(Consumer {
            id: format!("demand:t{t:03}"),
            node: hub(t),
            product: ELECTRICITY.into(),
            capacity: curve.demand[t],
            bid: curve.bid[t],
        });
        for (k, blocks) in fleets.iter().enumerate() {
            for (b, &bid) in blocks.iter().enumerate() {
                inst.suppliers.push(Supplier {
                    id: format!("gen{}:b{:03}:t{t:03}", k + 1, b + 1),
                    node: hub(t),
                    product: ELECTRICITY.into(),
                    capacity: params.block_size,
                    bid,
                });
            }
        }
        for f in 0..params.farms {
            inst.suppliers.push(Supplier {
                id: format!("waste:{}:t{t:03}", farm_node(f)),
                node: farm(f, t),
                product: WASTE.into(),
                capacity: layout.waste_rate[f] * waste_factor,
                bid: layout.waste_bid[f],
            });
            let p = layout.serves[f];
            if p != f {
                let d = distance(layout.positions[f], layout.positions[p]);
                let arc = push_arc(&mut inst, farm(f, t), farm(p, t))?;
                inst.transporters.push(TransportProvider {
                    id: format!("truck:{}:t{t:03}", farm_node(f)),
                    arc,
                    product: WASTE.into(),
                    capacity: layout.waste_rate[f] * 3.0,
                    bid: params.waste_transport_bid * d,
                });
            }
        }
        for p in 0..params.processors {
            let inflow = layout.processor_inflow(p);
            inst.technologies.push(TechnologyProvider {
                id: format!("digester:{}:t{t:03}", farm_node(p)),
                node: farm(p, t),
                inputs: BTreeMap::from([(ProductId::new(WASTE), 1.0)]),
                outputs: BTreeMap::from([(ProductId::new(ELECTRICITY), params.digester_yield)]),
                reference: ProductId::new(WASTE),
                capacity: params.digester_capacity_factor * inflow,
                bid: params.digester_bid,
            });
            let d = distance(layout.positions[p], layout.hub);
            let arc = push_arc(&mut inst, farm(p, t), hub(t))?;
            inst.transporters.push(TransportProvider {
                id: format!("line:{}:t{t:03}", farm_node(p)),
                arc,
                product: ELECTRICITY.into(),
                capacity: 3.0 * params.digester_capacity_factor * inflow * params.digester_yield,
                bid: params.electricity_transport_bid * d,
            });
            if t + 1 < hours {
                let arc = push_arc(&mut inst, farm(p, t), farm(p, t + 1))?;
                let capacity = if storage_cap_hours.is_finite() { storage_cap_hours * inflow } else { UNLIMITED_STORAGE };
                inst.transporters.push(TransportProvider {
                    id: format!("storage:{}:t{t:03}", farm_node(p)),
                    arc,
                    product: WASTE.into(),
                    capacity,
                    bid: storage_bid,
                });
            }
        }
    }
    Ok(inst)
}

/// Size limits for [`random_market`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomLimits {
    pub nodes: usize,
    pub periods: usize,
    pub products: usize,
    pub stakeholders: usize,
}

impl Default for RandomLimits {
    fn default() -> Self {
        RandomLimits { nodes: 10, periods: 12, products: 3, stakeholders: 40 }
    }
}

/// A valid random market within `limits`. Bids are drawn from a coarse
/// grid half of the time so ties and degenerate optima are common.
pub fn random_market(seed: u64, limits: RandomLimits) -> MarketInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_nodes = rng.random_range(1..=limits.nodes.max(1));
    let n_periods = rng.random_range(1..=limits.periods.max(1));
    let n_products = rng.random_range(1..=limits.products.max(1));
    let n_stake = rng.random_range(2..=limits.stakeholders.max(2));
    let coarse = rng.random_bool(0.5);

    let mut inst = MarketInstance::empty(TimeGrid::uniform(n_periods, 1.0).expect("positive grid"));
    inst.nodes = (0..n_nodes).map(|k| NodeId::new(format!("n{k}"))).collect();
    inst.products = (0..n_products).map(|k| ProductId::new(format!("p{k}"))).collect();

    let value = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| {
        let v = rng.random_range(lo..hi);
        if coarse {
            (v * 2.0).round() / 2.0
        } else {
            v
        }
    };
    let capacity = |rng: &mut ChaCha8Rng| if rng.random_bool(0.05) { 0.0 } else { value(rng, 0.5, 20.0) };
    let node = |rng: &mut ChaCha8Rng| SpaceTimeNode::new(format!("n{}", rng.random_range(0..n_nodes)), rng.random_range(0..n_periods));
    let product = |rng: &mut ChaCha8Rng| ProductId::new(format!("p{}", rng.random_range(0..n_products)));

    let can_move = n_nodes > 1 || n_periods > 1;
    for k in 0..n_stake {
        let roll = rng.random_range(0..100);
        if roll < 30 {
            let bid = value(&mut rng, -3.0, 10.0);
            let (at, p, cap) = (node(&mut rng), product(&mut rng), capacity(&mut rng));
            inst.suppliers.push(Supplier { id: format!("g{k:02}"), node: at, product: p, capacity: cap, bid });
        } else if roll < 60 {
            let bid = value(&mut rng, -1.0, 15.0);
            let (at, p, cap) = (node(&mut rng), product(&mut rng), capacity(&mut rng));
            inst.consumers.push(Consumer { id: format!("d{k:02}"), node: at, product: p, capacity: cap, bid });
        } else if roll < 85 && can_move {
            let arc = random_arc(&mut rng, n_nodes, n_periods);
            if !inst.arcs.contains(&arc) {
                inst.arcs.push(arc.clone());
            }
            let (p, cap, bid) = (product(&mut rng), capacity(&mut rng), value(&mut rng, 0.0, 3.0));
            inst.transporters.push(TransportProvider { id: format!("l{k:02}"), arc, product: p, capacity: cap, bid });
        } else if n_products > 1 {
            let mut pool: Vec<usize> = (0..n_products).collect();
            for i in (1..pool.len()).rev() {
                pool.swap(i, rng.random_range(0..=i));
            }
            let n_in = rng.random_range(1..n_products);
            let n_out = rng.random_range(1..=n_products - n_in);
            let pid = |k: usize| ProductId::new(format!("p{k}"));
            let inputs: BTreeMap<ProductId, f64> = pool[..n_in]
                .iter()
                .enumerate()
                .map(|(i, &k)| (pid(k), if i == 0 { 1.0 } else { value(&mut rng, 0.25, 2.0).max(0.25) }))
                .collect();
            let reference = pid(pool[0]);
            let outputs = pool[n_in..n_in + n_out].iter().map(|&k| (pid(k), value(&mut rng, 0.25, 3.0).max(0.25))).collect();
            let (at, cap, bid) = (node(&mut rng), capacity(&mut rng), value(&mut rng, 0.0, 3.0));
            inst.technologies.push(TechnologyProvider { id: format!("m{k:02}"), node: at, inputs, outputs, reference, capacity: cap, bid });
        } else {
            let bid = value(&mut rng, 0.0, 10.0);
            let (at, p, cap) = (node(&mut rng), product(&mut rng), capacity(&mut rng));
            inst.suppliers.push(Supplier { id: format!("g{k:02}"), node: at, product: p, capacity: cap, bid });
        }
    }
    inst
}

fn random_arc(rng: &mut ChaCha8Rng, n_nodes: usize, n_periods: usize) -> Arc {
    loop {
        let nb = rng.random_range(0..n_nodes);
        let tb = rng.random_range(0..n_periods);
        let class = rng.random_range(0..3);
        let (nr, tr) = match class {
            0 if n_nodes > 1 => (rng.random_range(0..n_nodes), tb),
            1 if tb + 1 < n_periods => (nb, tb + 1),
            2 if n_nodes > 1 && tb + 1 < n_periods => (rng.random_range(0..n_nodes), rng.random_range(tb + 1..n_periods)),
            _ => continue,
        };
        if let Ok(arc) = Arc::new(SpaceTimeNode::new(format!("n{nb}"), tb), SpaceTimeNode::new(format!("n{nr}"), tr)) {
            return arc;
        }
    }
}
