//! Test-support oracles for the workspace.
//!
//! Everything in this crate exists to check the production code from an
//! independent direction: a dense, from-scratch simplex implementation used
//! as a solver oracle, a deterministic RNG, and random-program generators.
//! Nothing here is part of the shipped engine.

pub mod reference;

use epx_core::lp::{LinearProgram, Sense};
use epx_core::simplex::LpSolution;

/// SplitMix64: tiny, deterministic, portable across toolchains.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range_usize(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.next_u64() % (hi_inclusive - lo + 1) as u64) as usize
    }

    /// Uniform on a 0.25-step grid in [lo, hi]; crisp values keep random LPs
    /// away from tolerance-boundary ambiguity.
    pub fn grid(&mut self, lo: f64, hi: f64) -> f64 {
        let steps = ((hi - lo) / 0.25) as u64;
        lo + 0.25 * (self.next_u64() % (steps + 1)) as f64
    }
}

/// Random bounded LP with a mix of senses, bound shapes and signs.
pub fn random_lp(rng: &mut SplitMix64, max_vars: usize, max_rows: usize) -> LinearProgram {
    let n = rng.range_usize(1, max_vars);
    let m = rng.range_usize(1, max_rows);
    let mut lp = LinearProgram::new("random");
    for j in 0..n {
        let shape = rng.range_usize(0, 9);
        let (lo, up) = match shape {
            0 => (f64::NEG_INFINITY, f64::INFINITY),
            1 => (f64::NEG_INFINITY, rng.grid(0.0, 10.0)),
            2 | 3 => {
                let lo = rng.grid(-5.0, 0.0);
                (lo, lo + rng.grid(0.0, 10.0))
            }
            _ => (0.0, rng.grid(0.5, 12.0)),
        };
        let cost = rng.grid(-10.0, 10.0);
        lp.add_var(format!("x{j}"), lo, up, cost);
    }
    for r in 0..m {
        let sense = match rng.range_usize(0, 5) {
            0 => Sense::Eq,
            1 | 2 => Sense::Ge,
            _ => Sense::Le,
        };
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.next_f64() < 0.45 {
                let c = rng.grid(-5.0, 5.0);
                if c != 0.0 {
                    coeffs.push((epx_core::lp::VarId(j), c));
                }
            }
        }
        if coeffs.is_empty() {
            coeffs.push((epx_core::lp::VarId(rng.range_usize(0, n - 1)), 1.0));
        }
        let rhs = rng.grid(-10.0, 10.0);
        lp.add_row(format!("r{r}"), sense, rhs, coeffs);
    }
    lp
}

/// Largest row violation relative to `1 + |rhs|`.
pub fn max_relative_infeasibility(lp: &LinearProgram, values: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for row in &lp.rows {
        let act: f64 = row.coeffs.iter().map(|(v, c)| c * values[v.0]).sum();
        let viol = match row.sense {
            Sense::Le => (act - row.rhs).max(0.0),
            Sense::Ge => (row.rhs - act).max(0.0),
            Sense::Eq => (act - row.rhs).abs(),
        };
        worst = worst.max(viol / (1.0 + row.rhs.abs()));
    }
    for (j, v) in lp.variables.iter().enumerate() {
        let x = values[j];
        let viol = (v.lower - x).max(0.0).max(x - v.upper);
        worst = worst.max(viol / (1.0 + v.upper.abs().min(v.lower.abs())));
    }
    worst
}

/// Asserts primal feasibility and weak duality on an Optimal solution.
pub fn assert_optimal_certificates(lp: &LinearProgram, sol: &LpSolution) {
    assert!(
        max_relative_infeasibility(lp, &sol.values) <= 1e-6,
        "primal infeasibility beyond tolerance on {}",
        lp.name
    );
    let dual = epx_core::simplex::dual_objective(lp, &sol.duals);
    let scale = 1.0 + sol.objective.abs();
    assert!(
        dual <= sol.objective + 1e-6 * scale,
        "weak duality violated on {}: dual {dual} > primal {}",
        lp.name,
        sol.objective
    );
    assert!(
        (dual - sol.objective).abs() <= 1e-6 * scale,
        "duality gap at optimum on {}: dual {dual}, primal {}",
        lp.name,
        sol.objective
    );
}
