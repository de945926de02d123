//! Solver correctness against an independent dense implementation.

use epx_core::lp::{LinearProgram, Sense, VarId};
use epx_core::simplex::{self, Status, Tolerances};
use epx_testkit::reference::{solve_dense, RefOutcome};
use epx_testkit::{assert_optimal_certificates, random_lp, SplitMix64};

#[test]
fn random_lps_match_dense_reference() {
    let mut rng = SplitMix64::new(0x5eed_cafe);
    let tol = Tolerances::default();
    let mut optimal = 0;
    let mut infeasible = 0;
    let mut unbounded = 0;
    for case in 0..500 {
        let lp = random_lp(&mut rng, 30, 15);
        let got = simplex::solve(&lp, &tol)
            .unwrap_or_else(|e| panic!("case {case}: solve failed: {e}"));
        let want = solve_dense(&lp);
        match (&got.status, &want) {
            (Status::Optimal, RefOutcome::Optimal { objective, .. }) => {
                optimal += 1;
                let scale = 1.0 + objective.abs();
                assert!(
                    (got.objective - objective).abs() <= 1e-6 * scale,
                    "case {case}: objective {} vs reference {objective}",
                    got.objective
                );
                assert_optimal_certificates(&lp, &got);
            }
            (Status::Infeasible, RefOutcome::Infeasible) => infeasible += 1,
            (Status::Unbounded, RefOutcome::Unbounded) => unbounded += 1,
            (s, w) => panic!("case {case}: status {s:?} vs reference {w:?}"),
        }
    }
    // the generator must exercise all three outcomes
    assert!(optimal > 100, "only {optimal} optimal cases");
    assert!(infeasible > 10, "only {infeasible} infeasible cases");
    assert!(unbounded > 10, "only {unbounded} unbounded cases");
}

#[test]
fn adding_a_row_never_decreases_the_minimum() {
    let mut rng = SplitMix64::new(0xadd_a_505);
    let tol = Tolerances::default();
    let mut checked = 0;
    for _case in 0..200 {
        let mut lp = random_lp(&mut rng, 12, 6);
        let base = simplex::solve(&lp, &tol).unwrap();
        if base.status != Status::Optimal {
            continue;
        }
        // a random extra row that keeps the current optimum feasible
        let n = lp.num_vars();
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.next_f64() < 0.5 {
                let c = rng.grid(-4.0, 4.0);
                if c != 0.0 {
                    coeffs.push((VarId(j), c));
                }
            }
        }
        if coeffs.is_empty() {
            continue;
        }
        let act: f64 = coeffs.iter().map(|(v, c)| c * base.values[v.0]).sum();
        let slacked = act + rng.grid(0.0, 2.0);
        lp.add_row("extra", Sense::Le, slacked, coeffs);
        let tightened = simplex::solve(&lp, &tol).unwrap();
        assert_eq!(tightened.status, Status::Optimal);
        let scale = 1.0 + base.objective.abs();
        assert!(
            tightened.objective >= base.objective - 1e-6 * scale,
            "optimum decreased from {} to {} after adding a row",
            base.objective,
            tightened.objective
        );
        checked += 1;
    }
    assert!(checked > 50, "only {checked} cases reached the property");
}

#[test]
fn deterministic_solutions_for_identical_inputs() {
    let mut rng = SplitMix64::new(7);
    let tol = Tolerances::default();
    for _ in 0..25 {
        let lp = random_lp(&mut rng, 20, 10);
        let a = simplex::solve(&lp, &tol).unwrap();
        let b = simplex::solve(&lp, &tol).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.iterations, b.iterations);
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x == y));
        assert!(a.duals.iter().zip(&b.duals).all(|(x, y)| x == y));
        assert_eq!(a.objective, b.objective);
    }
}

#[test]
fn iteration_budget_terminates_on_fixtures() {
    let mut rng = SplitMix64::new(99);
    let tol = Tolerances::default();
    for _ in 0..100 {
        let lp = random_lp(&mut rng, 25, 12);
        let budget = tol.iteration_factor * (lp.num_rows() as u64 + lp.num_vars() as u64 + 1);
        if let Ok(sol) = simplex::solve(&lp, &tol) {
            assert!(
                sol.iterations <= budget,
                "{} iterations exceeded budget {budget}",
                sol.iterations
            );
        }
    }
}

#[test]
fn mps_round_trip_solves_identically() {
    let mut rng = SplitMix64::new(0x315);
    let tol = Tolerances::default();
    for _ in 0..50 {
        let mut lp = random_lp(&mut rng, 15, 8);
        lp.objective_offset = rng.grid(-10.0, 10.0);
        let text = epx_core::mps::write_standard_format(&lp);
        let back = epx_core::mps::read_standard_format(&text).unwrap();
        let a = simplex::solve(&lp, &tol).unwrap();
        let b = simplex::solve(&back, &tol).unwrap();
        assert_eq!(a.status, b.status);
        if a.status == Status::Optimal {
            assert_eq!(a.objective, b.objective, "objective changed after round-trip");
        }
    }
}

#[test]
fn fixed_variables_and_degenerate_rows() {
    let mut lp = LinearProgram::new("degenerate");
    let x = lp.add_var("x", 2.0, 2.0, 5.0); // fixed
    let y = lp.add_var("y", 0.0, 10.0, 1.0);
    let z = lp.add_var("z", 0.0, 10.0, 1.0);
    lp.add_row("r1", Sense::Eq, 6.0, vec![(x, 1.0), (y, 1.0), (z, 1.0)]);
    lp.add_row("r2", Sense::Le, 4.0, vec![(y, 1.0), (z, 1.0)]);
    lp.add_row("r3", Sense::Le, 4.0, vec![(y, 1.0), (z, 1.0)]); // duplicate row
    let sol = simplex::solve(&lp, &Tolerances::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.objective - 14.0).abs() < 1e-9);
    assert_eq!(sol.values[0], 2.0);
}
