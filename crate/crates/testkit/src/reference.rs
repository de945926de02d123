//! Dense reference simplex, written from the textbook as an oracle.
//!
//! Deliberately naive: the basis inverse is recomputed from scratch by
//! Gauss-Jordan elimination at every iteration, Bland's rule is used
//! unconditionally, and all vectors are dense. It shares no solver code
//! with the production implementation.

use epx_core::lp::{LinearProgram, Sense};

#[derive(Debug, Clone, PartialEq)]
pub enum RefOutcome {
    Optimal { objective: f64, values: Vec<f64> },
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, PartialEq)]
enum St {
    Basic,
    AtLower,
    AtUpper,
    FreeZero,
}

struct Dense {
    m: usize,
    cols: Vec<Vec<f64>>, // column-major, length m each
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    state: Vec<St>,
    basis: Vec<usize>,
}

const EPS: f64 = 1e-9;

pub fn solve_dense(lp: &LinearProgram) -> RefOutcome {
    let m = lp.num_rows();
    let n = lp.num_vars();
    let mut d = Dense {
        m,
        cols: Vec::new(),
        lower: Vec::new(),
        upper: Vec::new(),
        cost: Vec::new(),
        rhs: lp.rows.iter().map(|r| r.rhs).collect(),
        state: Vec::new(),
        basis: vec![usize::MAX; m],
    };
    for j in 0..n {
        let mut col = vec![0.0; m];
        for (r, row) in lp.rows.iter().enumerate() {
            for (v, c) in &row.coeffs {
                if v.0 == j {
                    col[r] += c;
                }
            }
        }
        d.cols.push(col);
        let v = &lp.variables[j];
        d.lower.push(v.lower);
        d.upper.push(v.upper);
        d.cost.push(v.objective);
        d.state.push(if v.lower.is_finite() {
            St::AtLower
        } else if v.upper.is_finite() {
            St::AtUpper
        } else {
            St::FreeZero
        });
    }
    for (r, row) in lp.rows.iter().enumerate() {
        let mut col = vec![0.0; m];
        col[r] = 1.0;
        d.cols.push(col);
        let (lo, up) = match row.sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
            Sense::Eq => (0.0, 0.0),
        };
        d.lower.push(lo);
        d.upper.push(up);
        d.cost.push(0.0);
        d.state.push(St::Basic);
        d.basis[r] = n + r;
    }

    // slack start; patch infeasible rows with artificials
    let beta = d.compute_beta();
    let mut artificials = Vec::new();
    for r in 0..m {
        let s = n + r;
        let v = beta[r];
        if v < d.lower[s] - EPS || v > d.upper[s] + EPS {
            let bound = if v < d.lower[s] { d.lower[s] } else { d.upper[s] };
            d.state[s] = if v < d.lower[s] { St::AtLower } else { St::AtUpper };
            let a_val = v - bound;
            let mut col = vec![0.0; m];
            col[r] = 1.0;
            d.cols.push(col);
            if a_val >= 0.0 {
                d.lower.push(0.0);
                d.upper.push(f64::INFINITY);
            } else {
                d.lower.push(f64::NEG_INFINITY);
                d.upper.push(0.0);
            }
            d.cost.push(0.0);
            d.state.push(St::Basic);
            let a = d.cols.len() - 1;
            d.basis[r] = a;
            artificials.push(a);
        }
    }

    if !artificials.is_empty() {
        let mut phase1_cost = vec![0.0; d.cols.len()];
        for &a in &artificials {
            phase1_cost[a] = if d.lower[a] == 0.0 { 1.0 } else { -1.0 };
        }
        match d.iterate(&phase1_cost) {
            Phase::Done => {}
            Phase::Unbounded => panic!("reference phase 1 unbounded"),
        }
        let beta = d.compute_beta();
        let infeas: f64 = artificials
            .iter()
            .map(|&a| match d.state[a] {
                St::Basic => {
                    let pos = d.basis.iter().position(|&b| b == a).unwrap();
                    beta[pos].abs()
                }
                _ => d.nb_value(a).abs(),
            })
            .sum();
        if infeas > 1e-7 {
            return RefOutcome::Infeasible;
        }
        for &a in &artificials {
            d.lower[a] = 0.0;
            d.upper[a] = 0.0;
            if d.state[a] != St::Basic {
                d.state[a] = St::AtLower;
            }
        }
    }

    let mut phase2_cost = vec![0.0; d.cols.len()];
    phase2_cost[..d.cost.len()].copy_from_slice(&d.cost);
    match d.iterate(&phase2_cost) {
        Phase::Unbounded => RefOutcome::Unbounded,
        Phase::Done => {
            let beta = d.compute_beta();
            let mut values = vec![0.0; n];
            for j in 0..n {
                values[j] = match d.state[j] {
                    St::Basic => {
                        let pos = d.basis.iter().position(|&b| b == j).unwrap();
                        beta[pos]
                    }
                    _ => d.nb_value(j),
                };
            }
            RefOutcome::Optimal {
                objective: lp.objective_at(&values),
                values,
            }
        }
    }
}

enum Phase {
    Done,
    Unbounded,
}

impl Dense {
    fn nb_value(&self, j: usize) -> f64 {
        match self.state[j] {
            St::AtLower => self.lower[j],
            St::AtUpper => self.upper[j],
            St::FreeZero => 0.0,
            St::Basic => unreachable!("basic value requested as nonbasic"),
        }
    }

    /// Gauss-Jordan inverse of the current basis matrix.
    fn basis_inverse(&self) -> Vec<Vec<f64>> {
        let m = self.m;
        let mut aug: Vec<Vec<f64>> = (0..m)
            .map(|r| {
                let mut row = vec![0.0; 2 * m];
                for (pos, &bj) in self.basis.iter().enumerate() {
                    row[pos] = self.cols[bj][r];
                }
                row[m + r] = 1.0;
                row
            })
            .collect();
        for k in 0..m {
            let piv = (k..m)
                .max_by(|&a, &b| aug[a][k].abs().partial_cmp(&aug[b][k].abs()).unwrap())
                .unwrap();
            assert!(aug[piv][k].abs() > 1e-12, "reference basis singular");
            aug.swap(k, piv);
            let p = aug[k][k];
            for c in 0..2 * m {
                aug[k][c] /= p;
            }
            for r in 0..m {
                if r != k && aug[r][k] != 0.0 {
                    let f = aug[r][k];
                    for c in 0..2 * m {
                        aug[r][c] -= f * aug[k][c];
                    }
                }
            }
        }
        aug.into_iter().map(|row| row[m..].to_vec()).collect()
    }

    fn compute_beta(&self) -> Vec<f64> {
        let m = self.m;
        let mut w = self.rhs.clone();
        for j in 0..self.cols.len() {
            if self.state[j] != St::Basic {
                let x = self.nb_value(j);
                if x != 0.0 {
                    for r in 0..m {
                        w[r] -= self.cols[j][r] * x;
                    }
                }
            }
        }
        let binv = self.basis_inverse();
        (0..m)
            .map(|r| (0..m).map(|c| binv[r][c] * w[c]).sum())
            .collect()
    }

    fn iterate(&mut self, cost: &[f64]) -> Phase {
        for _round in 0..200_000 {
            let binv = self.basis_inverse();
            let m = self.m;
            let mut w = self.rhs.clone();
            for j in 0..self.cols.len() {
                if self.state[j] != St::Basic {
                    let x = self.nb_value(j);
                    if x != 0.0 {
                        for r in 0..m {
                            w[r] -= self.cols[j][r] * x;
                        }
                    }
                }
            }
            let beta: Vec<f64> = (0..m)
                .map(|r| (0..m).map(|c| binv[r][c] * w[c]).sum())
                .collect();
            let y: Vec<f64> = (0..m)
                .map(|c| {
                    (0..m)
                        .map(|r| cost[self.basis[r]] * binv[r][c])
                        .sum()
                })
                .collect();

            // Bland: lowest eligible index enters
            let mut entering = None;
            for j in 0..self.cols.len() {
                if self.state[j] == St::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d: f64 = cost[j] - (0..m).map(|r| y[r] * self.cols[j][r]).sum::<f64>();
                let ok = match self.state[j] {
                    St::AtLower => d < -EPS,
                    St::AtUpper => d > EPS,
                    St::FreeZero => d.abs() > EPS,
                    St::Basic => false,
                };
                if ok {
                    entering = Some((j, d));
                    break;
                }
            }
            let Some((q, dq)) = entering else {
                return Phase::Done;
            };
            let dir = match self.state[q] {
                St::AtLower => 1.0,
                St::AtUpper => -1.0,
                St::FreeZero => {
                    if dq < 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                St::Basic => unreachable!(),
            };
            let alpha: Vec<f64> = (0..m)
                .map(|r| (0..m).map(|c| binv[r][c] * self.cols[q][c]).sum())
                .collect();
            let span = self.upper[q] - self.lower[q];
            let mut t_best = if span.is_finite() { span } else { f64::INFINITY };
            let mut leave: Option<(usize, bool)> = None;
            for p in 0..m {
                let rate = -dir * alpha[p];
                if rate.abs() <= EPS {
                    continue;
                }
                let bj = self.basis[p];
                let (t, to_lower) = if rate > 0.0 {
                    if !self.upper[bj].is_finite() {
                        continue;
                    }
                    ((self.upper[bj] - beta[p]) / rate, false)
                } else {
                    if !self.lower[bj].is_finite() {
                        continue;
                    }
                    ((self.lower[bj] - beta[p]) / rate, true)
                };
                let t = t.max(0.0);
                let replace = match leave {
                    None => t < t_best - 1e-12,
                    // Bland tie-break: lowest leaving variable index
                    Some((p0, _)) => {
                        t < t_best - 1e-12
                            || (t <= t_best + 1e-12 && self.basis[p] < self.basis[p0])
                    }
                };
                if replace {
                    t_best = t.min(t_best);
                    leave = Some((p, to_lower));
                }
            }
            if t_best.is_infinite() {
                return Phase::Unbounded;
            }
            match leave {
                None => {
                    self.state[q] = match self.state[q] {
                        St::AtLower => St::AtUpper,
                        St::AtUpper => St::AtLower,
                        other => other,
                    };
                }
                Some((p, to_lower)) => {
                    let out = self.basis[p];
                    self.state[out] = if to_lower { St::AtLower } else { St::AtUpper };
                    self.basis[p] = q;
                    self.state[q] = St::Basic;
                }
            }
        }
        panic!("reference simplex did not terminate");
    }
}
