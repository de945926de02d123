//! Sparse LU factorisation of the simplex basis with product-form updates.
//!
//! The basis is refactorised periodically; between refactorisations each
//! pivot appends an eta vector (product-form of the inverse). Solves are
//! performed against the LU factors plus the eta file.
//!
//! Coordinate conventions: "original rows" index the LP rows; "steps" index
//! elimination order; "positions" index slots in the basis. `ftran` returns
//! vectors in position space, `btran` in original-row space.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LuError {
    #[error("basis is numerically singular at elimination step {0}")]
    Singular(usize),
}

/// One product-form update: the basis column at `pos` was replaced by a
/// column whose basis-space representation was `alpha`.
struct Eta {
    pos: usize,
    pivot: f64,
    /// Entries of alpha excluding the pivot position.
    entries: Vec<(usize, f64)>,
}

pub struct Factorization {
    m: usize,
    /// step -> basis position eliminated at that step
    col_of_step: Vec<usize>,
    /// step -> original row chosen as pivot
    pivot_row: Vec<usize>,
    /// original row -> step
    step_of_row: Vec<usize>,
    /// L multipliers per step: (original row, multiplier)
    l_cols: Vec<Vec<(usize, f64)>>,
    /// U off-diagonal entries per step-column: (earlier step, value)
    u_cols: Vec<Vec<(usize, f64)>>,
    u_diag: Vec<f64>,
    etas: Vec<Eta>,
    work: Vec<f64>,
    mark: Vec<bool>,
    z_buf: Vec<f64>,
    t_buf: Vec<f64>,
}

const UNSET: usize = usize::MAX;

impl Factorization {
    /// Factorises the basis given by `columns`, one sparse column per basis
    /// position. Columns are eliminated in order of increasing fill
    /// (ties by position) with partial pivoting by magnitude.
    pub fn factorize(m: usize, columns: &[Vec<(usize, f64)>]) -> Result<Self, LuError> {
        assert_eq!(columns.len(), m);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&p| (columns[p].len(), p));

        let mut f = Factorization {
            m,
            col_of_step: Vec::with_capacity(m),
            pivot_row: Vec::with_capacity(m),
            step_of_row: vec![UNSET; m],
            l_cols: Vec::with_capacity(m),
            u_cols: Vec::with_capacity(m),
            u_diag: Vec::with_capacity(m),
            etas: Vec::new(),
            work: vec![0.0; m],
            mark: vec![false; m],
            z_buf: vec![0.0; m],
            t_buf: vec![0.0; m],
        };

        let mut touched: Vec<usize> = Vec::with_capacity(64);
        // dedupes heap pushes per column; stamped with the column's step
        let mut seen = vec![UNSET; m];
        let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
        for step in 0..m {
            let pos = order[step];
            // scatter the column into the dense accumulator and queue the
            // elimination steps its rows depend on
            for &(r, v) in &columns[pos] {
                if v != 0.0 {
                    f.work[r] = v;
                    touched.push(r);
                    let j = f.step_of_row[r];
                    if j != UNSET && seen[j] != step {
                        seen[j] = step;
                        heap.push(Reverse(j));
                    }
                }
            }
            // left-looking elimination in increasing step order over the
            // reachable set only
            let mut u_col = Vec::new();
            while let Some(Reverse(j)) = heap.pop() {
                let pr = f.pivot_row[j];
                let x = f.work[pr];
                if x == 0.0 {
                    continue; // cancelled exactly; no contribution
                }
                u_col.push((j, x));
                f.work[pr] = 0.0;
                for &(r, mult) in &f.l_cols[j] {
                    if f.work[r] == 0.0 {
                        touched.push(r);
                        let js = f.step_of_row[r];
                        if js != UNSET && seen[js] != step {
                            seen[js] = step;
                            heap.push(Reverse(js));
                        }
                    }
                    f.work[r] -= mult * x;
                }
            }
            // partial pivot: largest magnitude among not-yet-pivotal rows,
            // lowest row index on ties
            let mut best_row = UNSET;
            let mut best_mag = 0.0f64;
            for &r in &touched {
                if f.step_of_row[r] != UNSET || r == best_row {
                    continue;
                }
                let mag = f.work[r].abs();
                if mag > best_mag || (mag == best_mag && mag > 0.0 && r < best_row) {
                    best_mag = mag;
                    best_row = r;
                }
            }
            if best_row == UNSET || best_mag < 1e-13 {
                for &r in &touched {
                    f.work[r] = 0.0;
                }
                return Err(LuError::Singular(step));
            }
            let diag = f.work[best_row];
            f.work[best_row] = 0.0;
            let mut l_col = Vec::new();
            for &r in &touched {
                let v = f.work[r];
                f.work[r] = 0.0;
                if v != 0.0 && f.step_of_row[r] == UNSET {
                    l_col.push((r, v / diag));
                }
            }
            l_col.sort_unstable_by_key(|&(r, _)| r);
            touched.clear();

            f.col_of_step.push(pos);
            f.pivot_row.push(best_row);
            f.step_of_row[best_row] = step;
            f.l_cols.push(l_col);
            f.u_cols.push(u_col);
            f.u_diag.push(diag);
        }
        Ok(f)
    }

    pub fn updates_since_refactor(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B v = a` with `a` given as parallel row/value slices. `out`
    /// is dense in basis-position space; `positions` collects the indices of
    /// (possibly) nonzero entries.
    pub fn ftran(
        &mut self,
        rhs_rows: &[usize],
        rhs_vals: &[f64],
        out: &mut Vec<f64>,
        positions: &mut Vec<usize>,
    ) {
        out.clear();
        out.resize(self.m, 0.0);
        positions.clear();
        let w = &mut self.work;
        for (r, v) in rhs_rows.iter().zip(rhs_vals) {
            w[*r] += v;
        }
        // L-solve in step order
        for k in 0..self.m {
            let x = w[self.pivot_row[k]];
            if x != 0.0 {
                for &(r, mult) in &self.l_cols[k] {
                    w[r] -= mult * x;
                }
            }
        }
        // U-solve backward; y_k lands at the basis position of step k
        for k in (0..self.m).rev() {
            let pr = self.pivot_row[k];
            let x = w[pr];
            w[pr] = 0.0;
            if x == 0.0 {
                continue;
            }
            let y = x / self.u_diag[k];
            out[self.col_of_step[k]] = y;
            positions.push(self.col_of_step[k]);
            for &(j, u) in &self.u_cols[k] {
                w[self.pivot_row[j]] -= u * y;
            }
        }
        // product-form updates, oldest first; the mark array keeps the
        // position list duplicate-free
        if !self.etas.is_empty() {
            for &p in positions.iter() {
                self.mark[p] = true;
            }
            for eta in &self.etas {
                let xp = out[eta.pos] / eta.pivot;
                out[eta.pos] = xp;
                if xp != 0.0 {
                    if !self.mark[eta.pos] {
                        self.mark[eta.pos] = true;
                        positions.push(eta.pos);
                    }
                    for &(i, v) in &eta.entries {
                        out[i] -= v * xp;
                        if !self.mark[i] {
                            self.mark[i] = true;
                            positions.push(i);
                        }
                    }
                }
            }
            for &p in positions.iter() {
                self.mark[p] = false;
            }
        }
    }

    /// Solves `Bᵀ y = c` with `c` dense in basis-position space. The result
    /// is dense in original-row space.
    pub fn btran(&mut self, c: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(c.len(), self.m);
        let z = &mut self.z_buf;
        z.copy_from_slice(c);
        // eta transposes, newest first
        for eta in self.etas.iter().rev() {
            let mut acc = z[eta.pos];
            for &(i, v) in &eta.entries {
                acc -= v * z[i];
            }
            z[eta.pos] = acc / eta.pivot;
        }
        // Uᵀ t = Qᵀ z, forward over steps
        let t = &mut self.t_buf;
        for k in 0..self.m {
            let mut acc = z[self.col_of_step[k]];
            for &(j, u) in &self.u_cols[k] {
                acc -= u * t[j];
            }
            t[k] = acc / self.u_diag[k];
        }
        // Lᵀ s = t, backward over steps
        for k in (0..self.m).rev() {
            let mut acc = t[k];
            for &(r, mult) in &self.l_cols[k] {
                acc -= mult * t[self.step_of_row[r]];
            }
            t[k] = acc;
        }
        out.clear();
        out.resize(self.m, 0.0);
        for k in 0..self.m {
            out[self.pivot_row[k]] = t[k];
        }
    }

    /// Records a pivot: the basis column at `pos` is replaced by the column
    /// whose `ftran` image is `alpha` (with nonzeros at `positions`).
    pub fn push_eta(&mut self, pos: usize, alpha: &[f64], positions: &[usize]) {
        let mut entries = Vec::with_capacity(positions.len());
        for &i in positions {
            let v = alpha[i];
            if i != pos && v != 0.0 {
                entries.push((i, v));
            }
        }
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            entries,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(cols: &[Vec<(usize, f64)>], x: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (p, col) in cols.iter().enumerate() {
            for &(r, v) in col {
                out[r] += v * x[p];
            }
        }
        out
    }

    fn ftran_pairs(f: &mut Factorization, rhs: &[(usize, f64)]) -> Vec<f64> {
        let rows: Vec<usize> = rhs.iter().map(|(r, _)| *r).collect();
        let vals: Vec<f64> = rhs.iter().map(|(_, v)| *v).collect();
        let mut out = Vec::new();
        let mut pos = Vec::new();
        f.ftran(&rows, &vals, &mut out, &mut pos);
        // the position list must cover every nonzero
        for (i, v) in out.iter().enumerate() {
            if *v != 0.0 {
                assert!(pos.contains(&i), "position list missing {i}");
            }
        }
        out
    }

    #[test]
    fn ftran_btran_match_dense_arithmetic() {
        // 4x4 basis with a mix of unit and general columns
        let cols: Vec<Vec<(usize, f64)>> = vec![
            vec![(0, 2.0), (2, 1.0)],
            vec![(1, 1.0)],
            vec![(0, -1.0), (2, 3.0), (3, 0.5)],
            vec![(3, 4.0), (1, -2.0)],
        ];
        let mut f = Factorization::factorize(4, &cols).unwrap();

        let rhs = vec![(0, 1.0), (3, -2.0)];
        let v = ftran_pairs(&mut f, &rhs);
        let bx = dense_mul(&cols, &v, 4);
        let mut dense_rhs = vec![0.0; 4];
        for &(r, val) in &rhs {
            dense_rhs[r] += val;
        }
        for i in 0..4 {
            assert!((bx[i] - dense_rhs[i]).abs() < 1e-12, "ftran residual at {i}");
        }

        let c = vec![1.0, -1.0, 0.5, 2.0];
        let mut y = Vec::new();
        f.btran(&c, &mut y);
        // check Bᵀ y = c, i.e. for each position p: col_p · y = c_p
        for (p, col) in cols.iter().enumerate() {
            let dot: f64 = col.iter().map(|&(r, v)| v * y[r]).sum();
            assert!((dot - c[p]).abs() < 1e-12, "btran residual at {p}");
        }
    }

    #[test]
    fn eta_updates_track_column_replacement() {
        let mut cols: Vec<Vec<(usize, f64)>> = vec![
            vec![(0, 1.0)],
            vec![(1, 2.0), (0, 1.0)],
            vec![(2, 1.0), (1, 0.5)],
        ];
        let mut f = Factorization::factorize(3, &cols).unwrap();
        // replace position 1 with a new column
        let newcol = vec![(0, 1.0), (1, 1.0), (2, 1.0)];
        let mut alpha = Vec::new();
        let mut pos = Vec::new();
        let rows: Vec<usize> = newcol.iter().map(|(r, _)| *r).collect();
        let vals: Vec<f64> = newcol.iter().map(|(_, v)| *v).collect();
        f.ftran(&rows, &vals, &mut alpha, &mut pos);
        f.push_eta(1, &alpha, &pos);
        cols[1] = newcol.clone();

        let v = ftran_pairs(&mut f, &[(0, 3.0), (2, 1.0)]);
        let bx = dense_mul(&cols, &v, 3);
        assert!((bx[0] - 3.0).abs() < 1e-12);
        assert!(bx[1].abs() < 1e-12);
        assert!((bx[2] - 1.0).abs() < 1e-12);

        let c = vec![0.3, 0.7, -1.1];
        let mut y = Vec::new();
        f.btran(&c, &mut y);
        for (p, col) in cols.iter().enumerate() {
            let dot: f64 = col.iter().map(|&(r, v)| v * y[r]).sum();
            assert!((dot - c[p]).abs() < 1e-12, "btran with eta at {p}");
        }
    }

    #[test]
    fn singular_basis_is_detected() {
        let cols: Vec<Vec<(usize, f64)>> = vec![
            vec![(0, 1.0), (1, 1.0)],
            vec![(0, 2.0), (1, 2.0)],
        ];
        assert!(matches!(
            Factorization::factorize(2, &cols),
            Err(LuError::Singular(_))
        ));
    }

    #[test]
    fn random_bases_round_trip() {
        // moderately sized random sparse bases against dense checking
        let mut seed = 0x0DDBA11u64;
        let mut rnd = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let m = 40;
            let mut cols: Vec<Vec<(usize, f64)>> = Vec::new();
            for i in 0..m {
                let mut col = vec![(i, 1.0 + rnd())]; // diagonal keeps it nonsingular
                for r in 0..m {
                    if r != i && rnd() < 0.08 {
                        col.push((r, rnd() * 4.0 - 2.0));
                    }
                }
                cols.push(col);
            }
            let mut f = Factorization::factorize(m, &cols).unwrap();
            let mut rhs: Vec<(usize, f64)> = Vec::new();
            for r in 0..m {
                if rnd() < 0.2 {
                    rhs.push((r, rnd()));
                }
            }
            if rhs.is_empty() {
                continue;
            }
            let v = ftran_pairs(&mut f, &rhs);
            let bx = dense_mul(&cols, &v, m);
            let mut want = vec![0.0; m];
            for &(r, val) in &rhs {
                want[r] += val;
            }
            for i in 0..m {
                assert!((bx[i] - want[i]).abs() < 1e-9);
            }
        }
    }
}
