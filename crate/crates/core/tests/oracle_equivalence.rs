mod common;

use common::{enumerate, random_lp, Oracle};
use proptest::prelude::*;
use stclear::clearing::{assemble_dual, assemble_primal};
use stclear::fixtures;
use stclear::simplex::{solve, verify_kkt, SolveStatus, SolverConfig};

fn agrees(seed: u64) -> Result<(), String> {
    let lp = random_lp(seed);
    let res = solve(&lp, &SolverConfig::default());
    match (enumerate(&lp), res.status) {
        (Oracle::Optimal { objective, .. }, SolveStatus::Optimal) => {
            if (objective - res.objective).abs() > 1e-7 {
                return Err(format!("seed {seed}: oracle {objective}, simplex {}", res.objective));
            }
            let kkt = verify_kkt(&lp, &res, 1e-7);
            if !kkt.passed {
                return Err(format!("seed {seed}: {kkt:?}"));
            }
            Ok(())
        }
        (Oracle::Infeasible, SolveStatus::Infeasible) => Ok(()),
        (o, s) => Err(format!("seed {seed}: oracle {o:?}, simplex {s}")),
    }
}

#[test]
fn hundred_small_programs_match_enumeration() {
    let mut feasible = 0;
    for seed in 0..100 {
        agrees(seed).unwrap();
        if enumerate(&random_lp(seed)).objective().is_some() {
            feasible += 1;
        }
    }
    assert!(feasible >= 60, "only {feasible} feasible programs");
}

proptest! {
    #[test]
    fn simplex_matches_enumeration(seed in any::<u64>()) {
        prop_assert!(agrees(seed).is_ok(), "{}", agrees(seed).unwrap_err());
    }
}

#[test]
fn fixtures_match_enumeration() {
    for (name, inst) in fixtures::all() {
        let (lp, _) = assemble_primal(&inst).unwrap();
        let res = solve(&lp, &SolverConfig::default());
        let oracle = enumerate(&lp).objective().unwrap();
        assert!((oracle - res.objective).abs() <= 1e-9, "{name}: {oracle} vs {}", res.objective);
    }
}

#[test]
fn fixture_duals_match_enumeration() {
    for (name, inst) in fixtures::all() {
        if inst.stakeholder_count() == 0 {
            continue;
        }
        let (dual, _) = assemble_dual(&inst).unwrap();
        let (primal, _) = assemble_primal(&inst).unwrap();
        let p = enumerate(&primal).objective().unwrap();
        let d = enumerate(&dual).objective().unwrap();
        assert!((p - d).abs() <= 1e-9, "{name}: primal {p}, dual {d}");
    }
}
