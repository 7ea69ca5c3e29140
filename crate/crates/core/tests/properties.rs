mod common;

use common::{rel, scale_bids};
use proptest::prelude::*;
use stclear::audit::{run_full_audit, AuditConfig};
use stclear::clearing::{assemble_dual, assemble_primal};
use stclear::lp::row_residuals;
use stclear::scenario::{random_market, restrict_to_qss, restrict_to_snapshot, RandomLimits};
use stclear::settlement::{clear, settle};
use stclear::simplex::{solve, SolverConfig};
use stclear::MarketInstance;

fn market(seed: u64) -> MarketInstance {
    random_market(seed, RandomLimits::default())
}

fn surplus(inst: &MarketInstance) -> f64 {
    let sol = clear(inst, &SolverConfig::default()).unwrap();
    assert!(sol.is_optimal(), "{}", sol.status);
    sol.surplus
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nothing_traded_is_feasible(seed in any::<u64>()) {
        let inst = market(seed);
        let (lp, _) = assemble_primal(&inst).unwrap();
        let zero = vec![0.0; lp.num_cols()];
        prop_assert!(row_residuals(&lp, &zero).unwrap().iter().all(|r| *r == 0.0));
        prop_assert!(surplus(&inst) >= -1e-9);
    }

    #[test]
    fn explicit_dual_closes_the_gap(seed in any::<u64>()) {
        let inst = market(seed);
        let (primal, _) = assemble_primal(&inst).unwrap();
        let (dual, _) = assemble_dual(&inst).unwrap();
        let p = solve(&primal, &SolverConfig::default());
        let d = solve(&dual, &SolverConfig::default());
        prop_assert!(p.is_optimal() && d.is_optimal());
        prop_assert!(rel(p.objective, d.objective) <= 1e-9, "primal {} dual {}", p.objective, d.objective);
    }

    #[test]
    fn quasi_steady_state_is_idempotent_and_dominated(seed in any::<u64>()) {
        let inst = market(seed);
        let qss = restrict_to_qss(&inst);
        prop_assert_eq!(&restrict_to_qss(&qss), &qss);
        let (full, restricted) = (surplus(&inst), surplus(&qss));
        prop_assert!(full >= restricted - 1e-9 * (1.0 + full.abs()), "{} < {}", full, restricted);
    }

    #[test]
    fn snapshots_sum_to_quasi_steady_state(seed in any::<u64>()) {
        let inst = market(seed);
        let qss = surplus(&restrict_to_qss(&inst));
        let total: f64 = (0..inst.grid.len()).map(|t| surplus(&restrict_to_snapshot(&inst, t).unwrap())).sum();
        prop_assert!(rel(total, qss) <= 1e-9, "snapshots {} vs {}", total, qss);
    }

    #[test]
    fn tripled_bids_triple_surplus_prices_and_duals(seed in any::<u64>()) {
        let inst = market(seed);
        let scaled = scale_bids(&inst, 3.0);
        let cfg = SolverConfig::default();
        let (a, b) = (clear(&inst, &cfg).unwrap(), clear(&scaled, &cfg).unwrap());
        prop_assert!(rel(3.0 * a.surplus, b.surplus) <= 1e-9);
        for (k, p) in &a.nodal_prices {
            prop_assert!(rel(3.0 * p, b.nodal_prices[k]) <= 1e-9, "{}: {} vs {}", k, p, b.nodal_prices[k]);
        }
        for (x, y) in a.capacity_duals.iter().zip(&b.capacity_duals) {
            prop_assert!(rel(3.0 * x, *y) <= 1e-9);
        }
        // the original allocation stays optimal for the scaled program
        let (lp, _) = assemble_primal(&scaled).unwrap();
        prop_assert!(rel(lp.objective_value(&a.allocations), b.surplus) <= 1e-9);
    }

    #[test]
    fn settlement_balances(seed in any::<u64>()) {
        let inst = market(seed);
        let sol = clear(&inst, &SolverConfig::default()).unwrap();
        let rep = settle(&inst, &sol, 1e-6).unwrap();
        prop_assert!(rep.streams.grand_total.abs() <= 1e-9 * (1.0 + rep.streams.magnitude));
        prop_assert!(rep.stakeholders.iter().all(|s| s.profit >= -1e-9 * (1.0 + s.profit.abs())));
    }

    #[test]
    fn full_audit_passes(seed in any::<u64>()) {
        let report = run_full_audit(&market(seed), &AuditConfig::default()).unwrap();
        prop_assert!(report.passed, "{:?}", report.failures().collect::<Vec<_>>());
    }
}
