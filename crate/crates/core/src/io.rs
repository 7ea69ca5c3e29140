//! Instance files (JSON) and solution tables (CSV plus an audit JSON).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audit::AuditReport;
use crate::clearing::assemble_primal;
use crate::error::{Error, Result};
use crate::market::{BalanceKey, Consumer, MarketInstance, ProductId, Supplier, TechnologyProvider, TransportProvider};
use crate::scenario::CaseParams;
use crate::settlement::{ClearingSolution, SettlementReport};
use crate::stgraph::{Arc, NodeId, SpaceTimeNode, TimeGrid};

pub const FORMAT: &str = "stclear-instance";
pub const VERSION: u32 = 1;

pub const ALLOCATIONS_CSV: &str = "allocations.csv";
pub const PRICES_CSV: &str = "prices.csv";
pub const SETTLEMENT_CSV: &str = "settlement.csv";
pub const STREAMS_CSV: &str = "streams.csv";
pub const AUDIT_JSON: &str = "audit.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format: String,
    pub version: u32,
    /// Parameters of the generator run that produced the file, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<CaseParams>,
    pub products: Vec<String>,
    pub times: Vec<f64>,
    pub step: f64,
    pub nodes: Vec<String>,
    pub arcs: Vec<ArcRecord>,
    pub suppliers: Vec<PointRecord>,
    pub consumers: Vec<PointRecord>,
    pub transporters: Vec<TransportRecord>,
    pub technologies: Vec<TechnologyRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcRecord {
    pub from_node: String,
    pub from_time: usize,
    pub to_node: String,
    pub to_time: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRecord {
    pub id: String,
    pub node: String,
    pub time: usize,
    pub product: String,
    pub capacity: f64,
    pub bid: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportRecord {
    pub id: String,
    pub from_node: String,
    pub from_time: usize,
    pub to_node: String,
    pub to_time: usize,
    pub product: String,
    pub capacity: f64,
    pub bid: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechnologyRecord {
    pub id: String,
    pub node: String,
    pub time: usize,
    pub inputs: BTreeMap<String, f64>,
    pub outputs: BTreeMap<String, f64>,
    pub reference: String,
    pub capacity: f64,
    pub bid: f64,
}

fn arc_record(a: &Arc) -> ArcRecord {
    ArcRecord {
        from_node: a.base.node.0.clone(),
        from_time: a.base.time,
        to_node: a.receiving.node.0.clone(),
        to_time: a.receiving.time,
    }
}

fn yields(m: &BTreeMap<ProductId, f64>) -> BTreeMap<String, f64> {
    m.iter().map(|(p, g)| (p.0.clone(), *g)).collect()
}

fn products(m: &BTreeMap<String, f64>) -> BTreeMap<ProductId, f64> {
    m.iter().map(|(p, g)| (ProductId::new(p.clone()), *g)).collect()
}

fn point(node: &str, time: usize) -> SpaceTimeNode {
    SpaceTimeNode::new(node, time)
}

impl InstanceFile {
    pub fn from_instance(instance: &MarketInstance, generator: Option<CaseParams>) -> Self {
        let pt = |id: &str, at: &SpaceTimeNode, p: &ProductId, capacity: f64, bid: f64| PointRecord {
            id: id.to_string(),
            node: at.node.0.clone(),
            time: at.time,
            product: p.0.clone(),
            capacity,
            bid,
        };
        InstanceFile {
            format: FORMAT.into(),
            version: VERSION,
            generator,
            products: instance.products.iter().map(|p| p.0.clone()).collect(),
            times: instance.grid.times().to_vec(),
            step: instance.grid.step(),
            nodes: instance.nodes.iter().map(|n| n.0.clone()).collect(),
            arcs: instance.arcs.iter().map(arc_record).collect(),
            suppliers: instance.suppliers.iter().map(|s| pt(&s.id, &s.node, &s.product, s.capacity, s.bid)).collect(),
            consumers: instance.consumers.iter().map(|d| pt(&d.id, &d.node, &d.product, d.capacity, d.bid)).collect(),
            transporters: instance
                .transporters
                .iter()
                .map(|l| {
                    let a = arc_record(&l.arc);
                    TransportRecord {
                        id: l.id.clone(),
                        from_node: a.from_node,
                        from_time: a.from_time,
                        to_node: a.to_node,
                        to_time: a.to_time,
                        product: l.product.0.clone(),
                        capacity: l.capacity,
                        bid: l.bid,
                    }
                })
                .collect(),
            technologies: instance
                .technologies
                .iter()
                .map(|m| TechnologyRecord {
                    id: m.id.clone(),
                    node: m.node.node.0.clone(),
                    time: m.node.time,
                    inputs: yields(&m.inputs),
                    outputs: yields(&m.outputs),
                    reference: m.reference.0.clone(),
                    capacity: m.capacity,
                    bid: m.bid,
                })
                .collect(),
        }
    }

    /// Builds the instance without validating it.
    pub fn to_instance(&self) -> Result<MarketInstance> {
        if self.format != FORMAT {
            return Err(Error::Schema(format!("field `format`: expected \"{FORMAT}\", found \"{}\"", self.format)));
        }
        if self.version != VERSION {
            return Err(Error::Schema(format!("field `version`: unsupported version {}", self.version)));
        }
        let arc = |fnode: &str, ft: usize, tnode: &str, tt: usize| Arc::new(point(fnode, ft), point(tnode, tt));
        let mut inst = MarketInstance::empty(TimeGrid::new(self.times.clone(), self.step)?);
        inst.products = self.products.iter().map(|p| ProductId::new(p.clone())).collect();
        inst.nodes = self.nodes.iter().map(|n| NodeId::new(n.clone())).collect();
        inst.arcs = self
            .arcs
            .iter()
            .map(|a| arc(&a.from_node, a.from_time, &a.to_node, a.to_time))
            .collect::<Result<_>>()?;
        inst.suppliers = self
            .suppliers
            .iter()
            .map(|s| Supplier {
                id: s.id.clone(),
                node: point(&s.node, s.time),
                product: ProductId::new(s.product.clone()),
                capacity: s.capacity,
                bid: s.bid,
            })
            .collect();
        inst.consumers = self
            .consumers
            .iter()
            .map(|d| Consumer {
                id: d.id.clone(),
                node: point(&d.node, d.time),
                product: ProductId::new(d.product.clone()),
                capacity: d.capacity,
                bid: d.bid,
            })
            .collect();
        inst.transporters = self
            .transporters
            .iter()
            .map(|l| {
                Ok(TransportProvider {
                    id: l.id.clone(),
                    arc: arc(&l.from_node, l.from_time, &l.to_node, l.to_time)?,
                    product: ProductId::new(l.product.clone()),
                    capacity: l.capacity,
                    bid: l.bid,
                })
            })
            .collect::<Result<_>>()?;
        inst.technologies = self
            .technologies
            .iter()
            .map(|m| TechnologyProvider {
                id: m.id.clone(),
                node: point(&m.node, m.time),
                inputs: products(&m.inputs),
                outputs: products(&m.outputs),
                reference: ProductId::new(m.reference.clone()),
                capacity: m.capacity,
                bid: m.bid,
            })
            .collect();
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance files always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.display().to_string(), source }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn write(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

fn schema_at(path: &Path, e: Error) -> Error {
    match e {
        Error::Schema(msg) => Error::Schema(format!("{}: {msg}", path.display())),
        other => other,
    }
}

/// Reads and validates an instance file, keeping any generator metadata.
pub fn load_instance_file(path: &Path) -> Result<(MarketInstance, InstanceFile)> {
    let file = InstanceFile::from_json(&read(path)?).map_err(|e| schema_at(path, e))?;
    let inst = file.to_instance().map_err(|e| schema_at(path, e))?;
    inst.ensure_valid()?;
    Ok((inst, file))
}

pub fn load_instance(path: &Path) -> Result<MarketInstance> {
    load_instance_file(path).map(|(inst, _)| inst)
}

pub fn save_instance(path: &Path, instance: &MarketInstance, generator: Option<CaseParams>) -> Result<()> {
    write(path, InstanceFile::from_instance(instance, generator).to_json().as_bytes())
}

/// Fixed nine-decimal rendering; negative zero prints as zero.
pub fn fmt_num(v: f64) -> String {
    let s = format!("{v:.9}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Schema(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Schema(e.to_string()))
}

pub fn allocations_csv(report: &SettlementReport) -> Result<Vec<u8>> {
    csv_bytes(
        &["stakeholder", "class", "allocation", "capacity", "saturation"],
        report.stakeholders.iter().map(|s| {
            vec![
                s.id.clone(),
                s.class.name().to_string(),
                fmt_num(s.allocation),
                fmt_num(s.capacity),
                s.saturation.name().to_string(),
            ]
        }),
    )
}

/// Sorted by time, then node, then product.
pub fn prices_csv(solution: &ClearingSolution) -> Result<Vec<u8>> {
    csv_bytes(
        &["node", "time", "product", "price"],
        solution
            .nodal_prices
            .iter()
            .map(|(k, p)| vec![k.node.0.clone(), k.time.to_string(), k.product.0.clone(), fmt_num(*p)]),
    )
}

pub fn settlement_csv(report: &SettlementReport) -> Result<Vec<u8>> {
    csv_bytes(
        &["stakeholder", "price", "profit"],
        report.stakeholders.iter().map(|s| vec![s.id.clone(), fmt_num(s.price), fmt_num(s.profit)]),
    )
}

pub fn streams_csv(report: &SettlementReport) -> Result<Vec<u8>> {
    csv_bytes(
        &["stream", "value"],
        report.streams.lines().into_iter().map(|(name, v)| vec![name.to_string(), fmt_num(v)]),
    )
}

pub fn audit_json(report: &AuditReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("audit reports always serialize");
    s.push('\n');
    s
}

/// Writes the five solution tables into `dir`, creating it if needed.
pub fn write_solution(dir: &Path, solution: &ClearingSolution, report: &SettlementReport, audit: &AuditReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write(&dir.join(ALLOCATIONS_CSV), &allocations_csv(report)?)?;
    write(&dir.join(PRICES_CSV), &prices_csv(solution)?)?;
    write(&dir.join(SETTLEMENT_CSV), &settlement_csv(report)?)?;
    write(&dir.join(STREAMS_CSV), &streams_csv(report)?)?;
    write(&dir.join(AUDIT_JSON), audit_json(audit).as_bytes())
}

fn read_table(path: &Path) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let text = read(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let bad = |e: csv::Error| Error::Schema(format!("{}: {e}", path.display()));
    let header = r.headers().map_err(bad)?.clone();
    let rows = r.records().collect::<Result<Vec<_>, _>>().map_err(bad)?;
    Ok((header, rows))
}

fn column(path: &Path, header: &csv::StringRecord, name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Schema(format!("{}: missing column `{name}`", path.display())))
}

fn number(path: &Path, line: usize, field: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| Error::Schema(format!("{}: line {line}, field `{field}`: `{text}` is not a number", path.display())))
}

/// Reads `allocations.csv` and `prices.csv` from `dir` and rebuilds the
/// solution against the instance. Stakeholders missing from the table are
/// allocated zero; balances missing from the price table carry no price.
pub fn load_solution(dir: &Path, instance: &MarketInstance) -> Result<ClearingSolution> {
    let (lp, index) = assemble_primal(instance)?;

    let path = dir.join(ALLOCATIONS_CSV);
    let (header, rows) = read_table(&path)?;
    let (id_col, x_col) = (column(&path, &header, "stakeholder")?, column(&path, &header, "allocation")?);
    let mut x = vec![0.0; index.num_columns()];
    for (i, r) in rows.iter().enumerate() {
        let id = r.get(id_col).unwrap_or_default();
        let k = index
            .column_of(id)
            .ok_or_else(|| Error::Schema(format!("{}: line {}: unknown stakeholder `{id}`", path.display(), i + 2)))?;
        x[k] = number(&path, i + 2, "allocation", r.get(x_col).unwrap_or_default())?;
    }

    let path = dir.join(PRICES_CSV);
    let (header, rows) = read_table(&path)?;
    let cols = ["node", "time", "product", "price"]
        .iter()
        .map(|c| column(&path, &header, c))
        .collect::<Result<Vec<_>>>()?;
    let mut prices = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        let line = i + 2;
        let field = |c: usize| r.get(cols[c]).unwrap_or_default();
        let time = field(1)
            .trim()
            .parse()
            .map_err(|_| Error::Schema(format!("{}: line {line}, field `time`: `{}` is not an index", path.display(), field(1))))?;
        let key = BalanceKey { node: NodeId::new(field(0)), time, product: ProductId::new(field(2)) };
        if index.row_of(&key).is_none() {
            return Err(Error::Schema(format!("{}: line {line}: no balance {key} in the instance", path.display())));
        }
        prices.insert(key, number(&path, line, "price", field(3))?);
    }
    ClearingSolution::from_point(index, &lp, x, prices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{audit_solution, AuditConfig};
    use crate::fixtures;
    use crate::scenario::{generate_waste_case, random_market, RandomLimits};
    use crate::settlement::{clear, settle};
    use crate::simplex::SolverConfig;

    #[test]
    fn fixtures_round_trip() {
        for (name, inst) in fixtures::all() {
            let text = InstanceFile::from_instance(&inst, None).to_json();
            let back = InstanceFile::from_json(&text).unwrap().to_instance().unwrap();
            assert_eq!(back, inst, "{name}");
            assert_eq!(InstanceFile::from_instance(&back, None).to_json(), text);
        }
    }

    #[test]
    fn random_markets_round_trip_bit_exact() {
        for seed in 0..30 {
            let inst = random_market(seed, RandomLimits::default());
            let text = InstanceFile::from_instance(&inst, None).to_json();
            let back = InstanceFile::from_json(&text).unwrap().to_instance().unwrap();
            assert_eq!(back, inst, "seed {seed}");
        }
    }

    #[test]
    fn generator_metadata_survives() {
        let params = CaseParams { farms: 3, processors: 1, hours: 4, ..CaseParams::default() };
        let inst = generate_waste_case(&params).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("case.json");
        save_instance(&path, &inst, Some(params.clone())).unwrap();
        let (back, file) = load_instance_file(&path).unwrap();
        assert_eq!(back, inst);
        assert_eq!(file.generator, Some(params));
    }

    #[test]
    fn truncated_file_is_a_schema_error() {
        let text = InstanceFile::from_instance(&fixtures::storage_market(), None).to_json();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cut.json");
        fs::write(&path, &text[..text.len() / 2]).unwrap();
        let err = load_instance(&path).unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err}");
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn unknown_field_is_named() {
        let text = InstanceFile::from_instance(&fixtures::two_variable_market(), None)
            .to_json()
            .replacen("\"capacity\"", "\"capacty\"", 1);
        let err = InstanceFile::from_json(&text).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
        assert!(err.to_string().contains("capacty"), "{err}");
    }

    #[test]
    fn wrong_format_tag_rejected() {
        let mut file = InstanceFile::from_instance(&fixtures::two_variable_market(), None);
        file.version = 9;
        assert!(matches!(file.to_instance(), Err(Error::Schema(_))));
    }

    #[test]
    fn invalid_instance_fails_validation() {
        let mut inst = fixtures::two_variable_market();
        inst.suppliers[0].capacity = -1.0;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        save_instance(&path, &inst, None).unwrap();
        assert!(matches!(load_instance(&path), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn missing_file_is_io() {
        let err = load_instance(Path::new("/nonexistent/instance.json")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(2.0), "2.000000000");
        assert_eq!(fmt_num(-0.0), "0.000000000");
        assert_eq!(fmt_num(-1e-12), "0.000000000");
        assert_eq!(fmt_num(-0.25), "-0.250000000");
    }

    fn cleared(inst: &MarketInstance) -> (ClearingSolution, SettlementReport) {
        let sol = clear(inst, &SolverConfig::default()).unwrap();
        let rep = settle(inst, &sol, 1e-6).unwrap();
        (sol, rep)
    }

    #[test]
    fn two_variable_tables() {
        let (sol, rep) = cleared(&fixtures::two_variable_market());
        let alloc = String::from_utf8(allocations_csv(&rep).unwrap()).unwrap();
        assert!(alloc.contains("d,consumer,5.000000000,5.000000000,at_capacity"), "{alloc}");
        assert!(alloc.contains("g,supplier,5.000000000,10.000000000,partial"), "{alloc}");
        let prices = String::from_utf8(prices_csv(&sol).unwrap()).unwrap();
        assert_eq!(prices, "node,time,product,price\nn1,0,p1,2.000000000\n");
    }

    #[test]
    fn storage_grand_total_prints_zero() {
        let (_, rep) = cleared(&fixtures::storage_market());
        let streams = String::from_utf8(streams_csv(&rep).unwrap()).unwrap();
        assert!(streams.contains("grand_total,0.000000000"), "{streams}");
    }

    #[test]
    fn empty_tables_have_headers_only() {
        let (sol, rep) = cleared(&fixtures::empty_market());
        assert_eq!(String::from_utf8(prices_csv(&sol).unwrap()).unwrap(), "node,time,product,price\n");
        assert_eq!(String::from_utf8(settlement_csv(&rep).unwrap()).unwrap(), "stakeholder,price,profit\n");
    }

    #[test]
    fn solution_tables_reload_and_audit() {
        let inst = fixtures::digester_market();
        let (sol, rep) = cleared(&inst);
        let cfg = AuditConfig::default();
        let audit = audit_solution(&inst, &sol, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_solution(dir.path(), &sol, &rep, &audit).unwrap();
        let back = load_solution(dir.path(), &inst).unwrap();
        assert_eq!(back.allocations, sol.allocations);
        assert!(audit_solution(&inst, &back, &cfg).unwrap().passed);
    }

    #[test]
    fn corrupted_allocation_fails_audit() {
        let inst = fixtures::two_variable_market();
        let (sol, rep) = cleared(&inst);
        let cfg = AuditConfig::default();
        let audit = audit_solution(&inst, &sol, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_solution(dir.path(), &sol, &rep, &audit).unwrap();
        let path = dir.path().join(ALLOCATIONS_CSV);
        let text = fs::read_to_string(&path).unwrap().replace("g,supplier,5.000000000", "g,supplier,4.000000000");
        fs::write(&path, text).unwrap();
        let back = load_solution(dir.path(), &inst).unwrap();
        assert!(!audit_solution(&inst, &back, &cfg).unwrap().passed);
    }

    #[test]
    fn unknown_stakeholder_in_solution_rejected() {
        let inst = fixtures::two_variable_market();
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(ALLOCATIONS_CSV), "stakeholder,allocation\nghost,1\n").unwrap();
        fs::write(dir.path().join(PRICES_CSV), "node,time,product,price\n").unwrap();
        let err = load_solution(dir.path(), &inst).unwrap_err();
        assert!(err.to_string().contains("ghost"), "{err}");
    }
}
