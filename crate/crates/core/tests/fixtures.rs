use stclear::audit::{run_full_audit, AuditConfig};
use stclear::fixtures;
use stclear::market::BalanceKey;
use stclear::scenario::restrict_to_qss;
use stclear::settlement::{clear, settle, Saturation, SettlementReport};
use stclear::simplex::SolverConfig;
use stclear::stgraph::SpaceTimeNode;
use stclear::MarketInstance;

const EXACT: f64 = 1e-9;

fn settled(inst: &MarketInstance) -> (f64, SettlementReport, impl Fn(&str, usize, &str) -> f64) {
    let sol = clear(inst, &SolverConfig::default()).unwrap();
    let rep = settle(inst, &sol, 1e-6).unwrap();
    let surplus = sol.surplus;
    let price = move |n: &str, t: usize, p: &str| sol.price(&BalanceKey::new(&SpaceTimeNode::new(n, t), &p.into())).unwrap();
    (surplus, rep, price)
}

fn close(a: f64, b: f64) {
    assert!((a - b).abs() <= EXACT, "{a} != {b}");
}

#[test]
fn two_variable_market() {
    let (surplus, rep, price) = settled(&fixtures::two_variable_market());
    close(surplus, 30.0);
    close(price("n1", 0, "p1"), 2.0);
    let d = rep.get("d").unwrap();
    close(d.allocation, 5.0);
    close(d.capacity_dual, 6.0);
    close(d.profit, 30.0);
    assert_eq!(d.saturation, Saturation::AtCapacity);
    let g = rep.get("g").unwrap();
    close(g.allocation, 5.0);
    close(g.profit, 0.0);
    close(g.capacity_dual, 0.0);
    assert_eq!(g.saturation, Saturation::Partial);
}

#[test]
fn storage_market_and_its_restriction() {
    let inst = fixtures::storage_market();
    let (surplus, rep, price) = settled(&inst);
    close(surplus, 42.5);
    close(price("n1", 0, "p1"), 1.0);
    close(price("n1", 1, "p1"), 1.5);
    close(rep.get("storage").unwrap().price, 0.5);
    close(rep.streams.grand_total, 0.0);
    let (qss, _, _) = settled(&restrict_to_qss(&inst));
    close(qss, 0.0);
}

#[test]
fn transport_price_equals_bid_when_slack() {
    let (surplus, rep, price) = settled(&fixtures::two_node_transport());
    close(price("n1", 0, "p1"), 1.0);
    close(price("n2", 0, "p1"), 2.0);
    let line = rep.get("line").unwrap();
    close(line.price, 1.0);
    close(line.profit, 0.0);
    assert_eq!(line.saturation, Saturation::Partial);
    close(surplus, 4.0 * (5.0 - 1.0 - 1.0));
}

#[test]
fn digester_with_tipping_fee() {
    let (surplus, rep, price) = settled(&fixtures::digester_market());
    close(surplus, 32.5);
    close(price("n1", 0, "waste"), -1.0);
    close(price("n1", 0, "biogas"), -0.25);
    let m = rep.get("digester").unwrap();
    close(m.allocation, 5.0);
    close(m.price, 0.5);
    close(rep.streams.grand_total, 0.0);
}

#[test]
fn free_storage_equalizes_prices() {
    let (_, _, price) = settled(&fixtures::free_storage_market());
    close(price("n1", 0, "p1"), price("n1", 1, "p1"));
}

#[test]
fn dry_market_clears_nothing() {
    let (surplus, rep, _) = settled(&fixtures::dry_market());
    close(surplus, 0.0);
    assert!(rep.stakeholders.iter().all(|s| s.saturation == Saturation::Dry));
}

#[test]
fn every_fixture_passes_strict_audit() {
    for (name, inst) in fixtures::all() {
        let report = run_full_audit(&inst, &AuditConfig::strict()).unwrap();
        assert!(report.passed, "{name}: {:?}", report.failures().collect::<Vec<_>>());
    }
}
