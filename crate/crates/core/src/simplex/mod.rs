//! Deterministic bounded-variable revised simplex.
//!
//! Two-phase method: artificial variables repair an infeasible slack start,
//! then the original objective is minimised. The basis is held as a sparse
//! LU factorisation with product-form updates (see [`lu`]). Pricing is
//! Dantzig (most negative reduced cost, lowest index on ties); Bland's rule
//! engages after a degeneracy streak, which guarantees termination.
//!
//! Identical input programs produce bit-identical solutions: every loop runs
//! in a fixed order and no randomised or hashed containers are involved.

pub mod lu;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::lp::{LinearProgram, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a solve. `values` and `duals` are meaningful for `Optimal`;
/// for the other statuses they hold the point at which the proof occurred.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: Status,
    pub values: Vec<f64>,
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid program: {0}")]
    InvalidLp(String),
    #[error("iteration limit {limit} reached (objective {best_objective} at last basis)")]
    IterationLimit { limit: u64, best_objective: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Solver tolerances. The defaults satisfy the accuracy contract
/// (row feasibility within `1e-6·(1+|rhs|)`, objective within `1e-6`
/// relative of the optimum on well-scaled inputs).
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Reduced-cost threshold, scaled by `1 + max|c|`.
    pub optimality: f64,
    /// Row-feasibility acceptance threshold, scaled by `1 + |rhs|`.
    pub feasibility: f64,
    /// Minimum pivot magnitude in the ratio test.
    pub pivot: f64,
    /// Step length at or below which a pivot counts as degenerate.
    pub degenerate_step: f64,
    /// Consecutive degenerate pivots before Bland's rule engages.
    pub bland_streak: u32,
    /// Refactorise after this many eta updates.
    pub refactor_interval: usize,
    /// Iteration budget as a multiple of rows + columns.
    pub iteration_factor: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            optimality: 1e-9,
            feasibility: 1e-6,
            pivot: 1e-9,
            degenerate_step: 1e-9,
            bland_streak: 40,
            refactor_interval: 64,
            iteration_factor: 50,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    Free,
}

struct Worker {
    m: usize,
    n_total: usize,
    n_struct: usize,
    /// CSC over all columns (structural, slack, artificial).
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    beta: Vec<f64>,
    factor: Option<lu::Factorization>,
    tol: Tolerances,
    rc_eps: f64,
    iterations: u64,
    degen_streak: u32,
    bland: bool,
    price_cursor: usize,
    // scratch
    alpha: Vec<f64>,
    alpha_pos: Vec<usize>,
    y: Vec<f64>,
    cb: Vec<f64>,
}

/// Solves a linear program.
pub fn solve(lp: &LinearProgram, tol: &Tolerances) -> Result<LpSolution, SolveError> {
    if let Err(errors) = lp.validate() {
        return Err(SolveError::InvalidLp(crate::lp::fmt_errors(&errors)));
    }
    // bound-infeasible variables are an immediate infeasibility proof
    for v in &lp.variables {
        if v.lower > v.upper {
            return Err(SolveError::InvalidLp(alloc::format!(
                "variable {} has lower > upper",
                v.name
            )));
        }
    }

    let mut w = Worker::new(lp, *tol);
    w.run(lp)
}

impl Worker {
    fn new(lp: &LinearProgram, tol: Tolerances) -> Self {
        let m = lp.num_rows();
        let n_struct = lp.num_vars();
        // transpose rows into structural columns
        let mut counts = vec![0usize; n_struct];
        for row in &lp.rows {
            for (v, _) in &row.coeffs {
                counts[v.0] += 1;
            }
        }
        // total capacity: structural nnz + slack units + artificial units
        let nnz: usize = counts.iter().sum();
        let mut col_ptr = Vec::with_capacity(n_struct + 2 * m + 1);
        col_ptr.push(0);
        let mut fill = vec![0usize; n_struct];
        for c in &counts {
            col_ptr.push(col_ptr.last().unwrap() + c);
        }
        let mut col_rows = vec![0usize; nnz];
        let mut col_vals = vec![0.0f64; nnz];
        for (r, row) in lp.rows.iter().enumerate() {
            for (v, c) in &row.coeffs {
                let slot = col_ptr[v.0] + fill[v.0];
                col_rows[slot] = r;
                col_vals[slot] = *c;
                fill[v.0] += 1;
            }
        }
        // slack columns
        for r in 0..m {
            col_rows.push(r);
            col_vals.push(1.0);
            col_ptr.push(col_rows.len());
        }

        let mut lower = Vec::with_capacity(n_struct + 2 * m);
        let mut upper = Vec::with_capacity(n_struct + 2 * m);
        let mut cost = Vec::with_capacity(n_struct + 2 * m);
        for v in &lp.variables {
            lower.push(v.lower);
            upper.push(v.upper);
            cost.push(v.objective);
        }
        let mut rhs = Vec::with_capacity(m);
        for row in &lp.rows {
            rhs.push(row.rhs);
            let (lo, up) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lower.push(lo);
            upper.push(up);
            cost.push(0.0);
        }

        let max_c = lp
            .variables
            .iter()
            .map(|v| v.objective.abs())
            .fold(0.0f64, f64::max);
        let rc_eps = tol.optimality * (1.0 + max_c);

        Worker {
            m,
            n_total: n_struct + m,
            n_struct,
            col_ptr,
            col_rows,
            col_vals,
            lower,
            upper,
            cost,
            rhs,
            state: Vec::new(),
            basis: Vec::new(),
            beta: Vec::new(),
            factor: None,
            tol,
            rc_eps,
            iterations: 0,
            degen_streak: 0,
            bland: false,
            price_cursor: 0,
            alpha: Vec::new(),
            alpha_pos: Vec::new(),
            y: Vec::new(),
            cb: Vec::new(),
        }
    }

    fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let lo = self.col_ptr[j];
        let hi = self.col_ptr[j + 1];
        (&self.col_rows[lo..hi], &self.col_vals[lo..hi])
    }

    fn nb_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::Free => 0.0,
            VarState::Basic(p) => self.beta[p],
        }
    }

    /// Initial point: structurals at a finite bound (lower preferred), slacks
    /// basic. Rows whose slack value violates its bounds get an artificial.
    fn setup(&mut self) -> Vec<usize> {
        let n_struct = self.n_struct;
        self.state = Vec::with_capacity(self.n_total);
        for j in 0..n_struct {
            let st = if self.lower[j].is_finite() {
                VarState::AtLower
            } else if self.upper[j].is_finite() {
                VarState::AtUpper
            } else {
                VarState::Free
            };
            self.state.push(st);
        }
        // slack activity = rhs − A·x_nonbasic
        let mut act = self.rhs.clone();
        for j in 0..n_struct {
            let xv = self.nb_value(j);
            if xv != 0.0 {
                let (rows, vals) = self.col(j);
                for (r, v) in rows.iter().zip(vals) {
                    act[*r] -= v * xv;
                }
            }
        }
        // first pass: slack states and positions needing an artificial
        let mut needs_artificial: Vec<(usize, f64)> = Vec::new();
        self.basis = vec![usize::MAX; self.m];
        self.beta = vec![0.0; self.m];
        for r in 0..self.m {
            let s = n_struct + r;
            let v = act[r];
            if v >= self.lower[s] && v <= self.upper[s] {
                self.state.push(VarState::Basic(r));
                self.basis[r] = s;
                self.beta[r] = v;
            } else {
                // slack rests at its nearest bound; artificial absorbs the rest
                let at_lower = v < self.lower[s];
                let sb = if at_lower { self.lower[s] } else { self.upper[s] };
                self.state.push(if at_lower {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                });
                needs_artificial.push((r, v - sb));
                self.beta[r] = v - sb;
            }
        }
        // second pass: allocate artificial columns so that state indices keep
        // matching variable indices
        let mut artificials = Vec::new();
        for &(r, a_val) in &needs_artificial {
            let a = self.n_total + artificials.len();
            artificials.push(a);
            self.col_rows.push(r);
            self.col_vals.push(1.0);
            self.col_ptr.push(self.col_rows.len());
            if a_val >= 0.0 {
                self.lower.push(0.0);
                self.upper.push(f64::INFINITY);
            } else {
                self.lower.push(f64::NEG_INFINITY);
                self.upper.push(0.0);
            }
            self.cost.push(0.0);
            self.state.push(VarState::Basic(r));
            self.basis[r] = a;
        }
        artificials
    }

    fn refactorize(&mut self) -> Result<(), SolveError> {
        let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(self.m);
        for &j in &self.basis {
            let (rows, vals) = self.col(j);
            cols.push(rows.iter().copied().zip(vals.iter().copied()).collect());
        }
        let f = lu::Factorization::factorize(self.m, &cols)
            .map_err(|e| SolveError::Numerical(alloc::format!("{e}")))?;
        self.factor = Some(f);
        self.recompute_beta();
        Ok(())
    }

    /// beta = B⁻¹ (rhs − N x_N), recomputed from scratch.
    fn recompute_beta(&mut self) {
        let mut w = self.rhs.clone();
        for j in 0..self.n_active() {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let xv = self.nb_value(j);
            if xv != 0.0 {
                let (rows, vals) = self.col(j);
                for (r, v) in rows.iter().zip(vals) {
                    w[*r] -= v * xv;
                }
            }
        }
        let mut rows = Vec::with_capacity(self.m);
        let mut vals = Vec::with_capacity(self.m);
        for (r, v) in w.iter().enumerate() {
            if *v != 0.0 {
                rows.push(r);
                vals.push(*v);
            }
        }
        let factor = self.factor.as_mut().expect("factorized");
        let mut out = Vec::new();
        let mut pos = Vec::new();
        factor.ftran(&rows, &vals, &mut out, &mut pos);
        self.beta = out;
    }

    fn n_active(&self) -> usize {
        self.state.len()
    }

    /// One simplex phase over the given cost vector. Returns None when the
    /// phase reached its optimum, or Some(status) on an early exit.
    fn iterate(&mut self, max_iter: u64) -> Result<Option<Status>, SolveError> {
        loop {
            if self.iterations >= max_iter {
                let obj = self.objective_value();
                return Err(SolveError::IterationLimit {
                    limit: max_iter,
                    best_objective: obj,
                });
            }
            // duals for the current costs
            self.cb.clear();
            for &j in &self.basis {
                self.cb.push(self.cost[j]);
            }
            let factor = self.factor.as_mut().expect("factorized");
            factor.btran(&self.cb, &mut self.y);

            // pricing
            let entering = self.price();
            let Some((q, d_q)) = entering else {
                return Ok(None); // phase optimal
            };
            let dir: f64 = match self.state[q] {
                VarState::AtLower => 1.0,
                VarState::AtUpper => -1.0,
                VarState::Free => {
                    if d_q < 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                VarState::Basic(_) => unreachable!(),
            };

            // column image in basis coordinates
            {
                let lo = self.col_ptr[q];
                let hi = self.col_ptr[q + 1];
                let factor = self.factor.as_mut().expect("factorized");
                let mut alpha = core::mem::take(&mut self.alpha);
                let mut apos = core::mem::take(&mut self.alpha_pos);
                factor.ftran(
                    &self.col_rows[lo..hi],
                    &self.col_vals[lo..hi],
                    &mut alpha,
                    &mut apos,
                );
                self.alpha = alpha;
                self.alpha_pos = apos;
            }

            // ratio test over the nonzero pattern of alpha
            let span = self.upper[q] - self.lower[q]; // may be inf
            let mut t_best = if span.is_finite() { span } else { f64::INFINITY };
            let mut leave: Option<(usize, bool)> = None; // (position, hits_lower)
            for pi in 0..self.alpha_pos.len() {
                let p = self.alpha_pos[pi];
                let a = self.alpha[p];
                if a == 0.0 {
                    continue;
                }
                let rate = -dir * a; // d beta[p] / dt
                if rate > self.tol.pivot {
                    let up = self.upper[self.basis[p]];
                    if up.is_finite() {
                        let t = (up - self.beta[p]) / rate;
                        if self.better_ratio(t, t_best, p, &leave) {
                            t_best = t.max(0.0);
                            leave = Some((p, false));
                        }
                    }
                } else if rate < -self.tol.pivot {
                    let lo = self.lower[self.basis[p]];
                    if lo.is_finite() {
                        let t = (lo - self.beta[p]) / rate;
                        if self.better_ratio(t, t_best, p, &leave) {
                            t_best = t.max(0.0);
                            leave = Some((p, true));
                        }
                    }
                }
            }

            if t_best.is_infinite() {
                return Ok(Some(Status::Unbounded));
            }

            self.iterations += 1;
            if t_best <= self.tol.degenerate_step {
                self.degen_streak += 1;
                if self.degen_streak > self.tol.bland_streak {
                    self.bland = true;
                }
            } else {
                self.degen_streak = 0;
                self.bland = false;
            }

            match leave {
                None => {
                    // bound flip: entering runs to its opposite bound
                    let t = t_best;
                    if t != 0.0 {
                        for pi in 0..self.alpha_pos.len() {
                            let p = self.alpha_pos[pi];
                            self.beta[p] -= dir * t * self.alpha[p];
                        }
                    }
                    self.state[q] = match self.state[q] {
                        VarState::AtLower => VarState::AtUpper,
                        VarState::AtUpper => VarState::AtLower,
                        other => other,
                    };
                }
                Some((r, hits_lower)) => {
                    let t = t_best;
                    let x_q = self.nb_value(q) + dir * t;
                    if t != 0.0 {
                        for pi in 0..self.alpha_pos.len() {
                            let p = self.alpha_pos[pi];
                            self.beta[p] -= dir * t * self.alpha[p];
                        }
                    }
                    let leaving = self.basis[r];
                    self.state[leaving] = if hits_lower {
                        VarState::AtLower
                    } else {
                        VarState::AtUpper
                    };
                    self.basis[r] = q;
                    self.state[q] = VarState::Basic(r);
                    self.beta[r] = x_q;
                    let alpha_r = self.alpha[r];
                    if alpha_r.abs() < 1e-10 {
                        // numerically unsound pivot: rebuild instead of updating
                        self.refactorize()?;
                    } else {
                        let factor = self.factor.as_mut().expect("factorized");
                        factor.push_eta(r, &self.alpha, &self.alpha_pos);
                        if factor.updates_since_refactor() >= self.tol.refactor_interval {
                            self.refactorize()?;
                        }
                    }
                }
            }
        }
    }

    fn better_ratio(&self, t: f64, t_best: f64, p: usize, cur: &Option<(usize, bool)>) -> bool {
        let t = t.max(0.0);
        if t < t_best - 1e-12 {
            return true;
        }
        if t > t_best + 1e-12 {
            return false;
        }
        match cur {
            None => true,
            Some((p0, _)) => {
                if self.bland {
                    // Bland: lowest leaving variable index
                    self.basis[p] < self.basis[*p0]
                } else {
                    // stability: larger pivot magnitude, then lowest position
                    let a = self.alpha[p].abs();
                    let a0 = self.alpha[*p0].abs();
                    a > a0 || (a == a0 && p < *p0)
                }
            }
        }
    }

    fn reduced_cost(&self, j: usize) -> f64 {
        let (rows, vals) = self.col(j);
        let mut d = self.cost[j];
        for (r, v) in rows.iter().zip(vals) {
            d -= self.y[*r] * v;
        }
        d
    }

    fn eligible(&self, j: usize, d: f64) -> bool {
        match self.state[j] {
            VarState::AtLower => d < -self.rc_eps,
            VarState::AtUpper => d > self.rc_eps,
            VarState::Free => d.abs() > self.rc_eps,
            VarState::Basic(_) => false,
        }
    }

    /// Entering-variable selection. Dantzig pricing over rotating segments
    /// (the first segment with any eligible column wins); Bland mode scans
    /// everything and takes the lowest eligible index. Both are
    /// deterministic.
    fn price(&mut self) -> Option<(usize, f64)> {
        let n = self.n_active();
        if self.bland {
            for j in 0..n {
                if matches!(self.state[j], VarState::Basic(_)) || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = self.reduced_cost(j);
                if self.eligible(j, d) {
                    return Some((j, d));
                }
            }
            return None;
        }
        const SEGMENTS: usize = 8;
        let seg_len = n.div_ceil(SEGMENTS).max(1);
        for s in 0..SEGMENTS {
            let seg = (self.price_cursor + s) % SEGMENTS;
            let start = seg * seg_len;
            if start >= n {
                continue;
            }
            let end = (start + seg_len).min(n);
            let mut best: Option<(usize, f64, f64)> = None;
            for j in start..end {
                if matches!(self.state[j], VarState::Basic(_)) || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = self.reduced_cost(j);
                if !self.eligible(j, d) {
                    continue;
                }
                let score = d.abs();
                match best {
                    None => best = Some((j, d, score)),
                    Some((_, _, s0)) if score > s0 => best = Some((j, d, score)),
                    _ => {}
                }
            }
            if let Some((j, d, _)) = best {
                self.price_cursor = seg;
                return Some((j, d));
            }
        }
        None
    }

    fn objective_value(&self) -> f64 {
        let mut obj = 0.0;
        for j in 0..self.n_active() {
            obj += self.cost[j] * self.nb_value(j);
        }
        obj
    }

    fn run(&mut self, lp: &LinearProgram) -> Result<LpSolution, SolveError> {
        let artificials = self.setup();
        let max_iter = self.tol.iteration_factor * (self.m as u64 + self.n_total as u64 + 1);
        self.refactorize()?;

        // phase 1: drive artificial infeasibility to zero
        if !artificials.is_empty() {
            let saved_cost = core::mem::take(&mut self.cost);
            self.cost = vec![0.0; self.n_active()];
            for &a in &artificials {
                // artificial bounded on one side; minimising the signed value
                // shrinks the violation
                self.cost[a] = if self.lower[a] == 0.0 { 1.0 } else { -1.0 };
            }
            let old_rc = self.rc_eps;
            self.rc_eps = self.tol.optimality * 2.0; // phase-1 costs are ±1
            let phase1 = self.iterate(max_iter)?;
            self.rc_eps = old_rc;
            if phase1.is_some() {
                return Err(SolveError::Numerical(String::from(
                    "phase 1 reported unbounded",
                )));
            }
            let infeas: f64 = artificials
                .iter()
                .map(|&a| self.nb_value(a).abs())
                .sum();
            // restore original costs (artificials keep cost 0)
            let mut cost = saved_cost;
            cost.resize(self.n_active(), 0.0);
            self.cost = cost;
            if infeas > self.tol.feasibility {
                return Ok(self.finish(lp, Status::Infeasible));
            }
            // pin artificials at zero for phase 2
            for &a in &artificials {
                self.lower[a] = 0.0;
                self.upper[a] = 0.0;
                if !matches!(self.state[a], VarState::Basic(_)) {
                    self.state[a] = VarState::AtLower;
                }
            }
        }

        // phase 2
        self.degen_streak = 0;
        self.bland = false;
        match self.iterate(max_iter)? {
            Some(Status::Unbounded) => Ok(self.finish(lp, Status::Unbounded)),
            Some(other) => Ok(self.finish(lp, other)),
            None => {
                // final cleanup: fresh factorisation and recomputed point
                self.refactorize()?;
                self.verify_feasibility(lp)?;
                Ok(self.finish(lp, Status::Optimal))
            }
        }
    }

    fn verify_feasibility(&mut self, lp: &LinearProgram) -> Result<(), SolveError> {
        let values = self.structural_values();
        for (r, row) in lp.rows.iter().enumerate() {
            let act: f64 = row.coeffs.iter().map(|(v, c)| c * values[v.0]).sum();
            let tol = self.tol.feasibility * (1.0 + row.rhs.abs());
            let viol = match row.sense {
                Sense::Le => (act - row.rhs).max(0.0),
                Sense::Ge => (row.rhs - act).max(0.0),
                Sense::Eq => (act - row.rhs).abs(),
            };
            if viol > tol {
                return Err(SolveError::Numerical(alloc::format!(
                    "row {} violated by {viol:e} after solve",
                    lp.rows[r].name
                )));
            }
        }
        Ok(())
    }

    fn structural_values(&self) -> Vec<f64> {
        let mut values = Vec::with_capacity(self.n_struct);
        for j in 0..self.n_struct {
            let v = self.nb_value(j);
            // snap basic values that drifted a hair outside their bounds
            let v = v.max(self.lower[j]).min(self.upper[j]);
            values.push(v);
        }
        values
    }

    fn finish(&mut self, lp: &LinearProgram, status: Status) -> LpSolution {
        let values = self.structural_values();
        let duals = if status == Status::Optimal {
            self.cb.clear();
            for &j in &self.basis {
                self.cb.push(self.cost[j]);
            }
            let factor = self.factor.as_mut().expect("factorized");
            factor.btran(&self.cb, &mut self.y);
            self.y.clone()
        } else {
            vec![0.0; self.m]
        };
        let objective = lp.objective_at(&values);
        LpSolution {
            status,
            values,
            duals,
            objective,
            iterations: self.iterations,
        }
    }
}

/// Reduced costs `c − Aᵀy` for the structural variables.
pub fn reduced_costs(lp: &LinearProgram, duals: &[f64]) -> Vec<f64> {
    let mut d: Vec<f64> = lp.variables.iter().map(|v| v.objective).collect();
    for (r, row) in lp.rows.iter().enumerate() {
        let y = duals[r];
        if y != 0.0 {
            for (v, c) in &row.coeffs {
                d[v.0] -= y * c;
            }
        }
    }
    d
}

/// Lagrangian dual bound for a candidate `y`: `yᵀb + Σ_j min(d_j·lo_j, d_j·up_j)`
/// over structural variables plus the implicit slack terms. Returns −∞ when a
/// sign condition is violated against an infinite bound. For any `y` this is
/// a lower bound on the optimal objective (weak duality); at an optimal basis
/// it equals the primal objective.
///
/// Reduced costs within `1e-7·(1+max|c|)` of zero are treated as exactly
/// complementary; without this, floating-point residue against an infinite
/// bound would poison the sum.
pub fn dual_objective(lp: &LinearProgram, duals: &[f64]) -> f64 {
    let max_c = lp
        .variables
        .iter()
        .map(|v| v.objective.abs())
        .fold(0.0f64, f64::max);
    let zero_tol = 1e-7 * (1.0 + max_c);
    let mut g = lp.objective_offset;
    for (r, row) in lp.rows.iter().enumerate() {
        g += duals[r] * row.rhs;
        // slack with cost 0: d_s = −y_r, domain by sense
        let d_s = -duals[r];
        let term = match row.sense {
            Sense::Le => bound_term(d_s, 0.0, f64::INFINITY, zero_tol),
            Sense::Ge => bound_term(d_s, f64::NEG_INFINITY, 0.0, zero_tol),
            Sense::Eq => 0.0,
        };
        g += term;
        if g == f64::NEG_INFINITY {
            return g;
        }
    }
    let d = reduced_costs(lp, duals);
    for (j, v) in lp.variables.iter().enumerate() {
        g += bound_term(d[j], v.lower, v.upper, zero_tol);
        if g == f64::NEG_INFINITY {
            return g;
        }
    }
    g
}

fn bound_term(d: f64, lo: f64, up: f64, zero_tol: f64) -> f64 {
    let at = if d > 0.0 { lo } else { up };
    if at.is_infinite() {
        if d.abs() <= zero_tol {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else if d == 0.0 {
        0.0
    } else {
        d * at
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LinearProgram;

    #[test]
    fn min_x_with_lower_row() {
        // min x s.t. x >= 1, 0 <= x <= 10
        let mut lp = LinearProgram::new("t");
        let x = lp.add_var("x", 0.0, 10.0, 1.0);
        lp.add_row("r", Sense::Ge, 1.0, vec![(x, 1.0)]);
        let sol = solve(&lp, &Tolerances::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.values[0] - 1.0).abs() < 1e-9);
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn max_form_via_negation() {
        // max x s.t. x <= 3  ==  min -x
        let mut lp = LinearProgram::new("t");
        let x = lp.add_var("x", 0.0, f64::INFINITY, -1.0);
        lp.add_row("r", Sense::Le, 3.0, vec![(x, 1.0)]);
        let sol = solve(&lp, &Tolerances::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.values[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded_are_statuses() {
        let mut lp = LinearProgram::new("inf");
        let x = lp.add_var("x", 0.0, 1.0, 1.0);
        lp.add_row("r", Sense::Ge, 2.0, vec![(x, 1.0)]);
        let sol = solve(&lp, &Tolerances::default()).unwrap();
        assert_eq!(sol.status, Status::Infeasible);

        let mut lp = LinearProgram::new("unb");
        let x = lp.add_var("x", 0.0, f64::INFINITY, -1.0);
        lp.add_row("r", Sense::Ge, 0.0, vec![(x, 1.0)]);
        let sol = solve(&lp, &Tolerances::default()).unwrap();
        assert_eq!(sol.status, Status::Unbounded);
    }

    #[test]
    fn bounded_two_var_problem_with_equality() {
        // min 2x + 3y s.t. x + y = 5, x <= 3, y <= 4
        let mut lp = LinearProgram::new("t");
        let x = lp.add_var("x", 0.0, 3.0, 2.0);
        let y = lp.add_var("y", 0.0, 4.0, 3.0);
        lp.add_row("bal", Sense::Eq, 5.0, vec![(x, 1.0), (y, 1.0)]);
        let sol = solve(&lp, &Tolerances::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.values[0] - 3.0).abs() < 1e-9);
        assert!((sol.values[1] - 2.0).abs() < 1e-9);
        assert!((sol.objective - 12.0).abs() < 1e-9);
        // weak duality with equality at the optimum
        let g = dual_objective(&lp, &sol.duals);
        assert!((g - sol.objective).abs() < 1e-9);
    }

    #[test]
    fn free_variable_and_negative_bounds() {
        // min x + y s.t. x + y >= -2, -5 <= x <= 0, y free
        let mut lp = LinearProgram::new("t");
        let x = lp.add_var("x", -5.0, 0.0, 1.0);
        let y = lp.add_var("y", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        lp.add_row("r", Sense::Ge, -2.0, vec![(x, 1.0), (y, 1.0)]);
        let sol = solve(&lp, &Tolerances::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.objective - (-2.0)).abs() < 1e-9);
    }
}
