//! Temporary probe: stage LP sizes, iteration counts, solve times.

use std::collections::BTreeMap;

use epx_core::builder::{build_stage_lp, BuildOptions, Carryover};
use epx_core::demo;
use epx_core::policy::{builtin, compile_scenario};
use epx_core::simplex::{solve, Tolerances};
use epx_core::system::validate_system;

#[test]
#[ignore]
fn probe_stage_solve() {
    let system = validate_system(demo::two_zone_system()).unwrap();
    let scenario = builtin::builtin_scenario(builtin::NO_REGULATIONS).unwrap();
    let constraints = compile_scenario(&scenario, &system, 0, &BTreeMap::new()).unwrap();
    let carry = Carryover::initial(system.spec());
    let stage = build_stage_lp(
        &system,
        &scenario,
        &constraints,
        0,
        &carry,
        &BuildOptions::default(),
    )
    .unwrap();
    let nnz: usize = stage.lp.rows.iter().map(|r| r.coeffs.len()).sum();
    eprintln!(
        "stage LP: {} vars, {} rows, {} nnz",
        stage.lp.num_vars(),
        stage.lp.num_rows(),
        nnz
    );
    let t0 = std::time::Instant::now();
    let sol = solve(&stage.lp, &Tolerances::default()).unwrap();
    eprintln!(
        "solved in {:?}: status {:?}, {} iterations, obj {:.6e}",
        t0.elapsed(),
        sol.status,
        sol.iterations,
        sol.objective
    );

    // dispatch-only variant (enumeration inner problem)
    let mut opts = BuildOptions::default();
    opts.fixed_new_capacity = Some(
        [("new-ngcc".to_string(), 160.0), ("wind-2".to_string(), 200.0)]
            .into_iter()
            .collect(),
    );
    let stage2 = build_stage_lp(&system, &scenario, &constraints, 0, &carry, &opts).unwrap();
    let t0 = std::time::Instant::now();
    let sol2 = solve(&stage2.lp, &Tolerances::default()).unwrap();
    eprintln!(
        "pinned solve in {:?}: {} iterations, obj {:.6e}",
        t0.elapsed(),
        sol2.iterations,
        sol2.objective
    );
}
