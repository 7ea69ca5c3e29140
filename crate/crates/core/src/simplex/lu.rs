//! LU factorization of the simplex basis.
//!
//! Elimination keeps the active submatrix in sparse row form. Each step picks
//! the active column with the fewest nonzeros and, within it, the sparsest row
//! whose entry passes a threshold test against the column maximum. The
//! factors are kept in compressed per-step form so the triangular solves
//! cost O(nnz) instead of O(m²).

use std::collections::BTreeSet;

/// Relative threshold a pivot candidate must reach against its column max.
const PIVOT_THRESHOLD: f64 = 0.1;

/// Columns whose largest active entry falls below this are treated as
/// dependent.
const SINGULAR_TOL: f64 = 1e-11;

#[derive(Debug)]
pub(crate) struct Singular {
    /// Basis positions that could not be pivoted.
    pub positions: Vec<usize>,
    /// Rows left without a pivot, same length as `positions`.
    pub rows: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct LuFactors {
    pivot_rows: Vec<usize>,
    pivot_cols: Vec<usize>,
    l_start: Vec<usize>,
    l_index: Vec<usize>,
    l_value: Vec<f64>,
    u_diag: Vec<f64>,
    u_start: Vec<usize>,
    u_index: Vec<usize>,
    u_value: Vec<f64>,
}

impl LuFactors {
    /// Factorizes the square matrix whose column `k` is `columns[k]`, given
    /// as `(row, value)` pairs.
    pub fn factorize(m: usize, columns: &[Vec<(usize, f64)>]) -> Result<Self, Singular> {
        debug_assert_eq!(columns.len(), m);
        // active submatrix, row-wise; `col_rows` may hold stale row ids
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut col_count = vec![0usize; m];
        let mut pos = vec![usize::MAX; m];
        for (c, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                if v == 0.0 {
                    continue;
                }
                match rows[r].iter_mut().find(|e| e.0 == c) {
                    Some(e) => e.1 += v,
                    None => {
                        rows[r].push((c, v));
                        col_rows[c].push(r);
                        col_count[c] += 1;
                    }
                }
            }
        }

        let mut by_count: BTreeSet<(usize, usize)> = (0..m).map(|c| (col_count[c], c)).collect();
        let mut row_active = vec![true; m];
        let mut col_active = vec![true; m];
        let mut dead_cols = Vec::new();

        let mut lu = LuFactors {
            l_start: vec![0],
            u_start: vec![0],
            ..Default::default()
        };
        let entry = |rows: &[Vec<(usize, f64)>], r: usize, c: usize| {
            rows[r].iter().find(|e| e.0 == c).map_or(0.0, |e| e.1)
        };

        for _step in 0..m {
            // sparsest live column, lowest index on ties
            let Some((_, c)) = by_count.pop_first() else { break };

            let mut cands = std::mem::take(&mut col_rows[c]);
            cands.retain(|&r| row_active[r]);
            cands.sort_unstable();
            cands.dedup();
            let vals: Vec<f64> = cands.iter().map(|&r| entry(&rows, r, c)).collect();
            let col_max = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
            if col_max < SINGULAR_TOL {
                col_active[c] = false;
                dead_cols.push(c);
                col_rows[c] = cands;
                continue;
            }
            let mut piv_at = usize::MAX;
            let mut piv_key = (usize::MAX, 0.0f64);
            for (k, &r) in cands.iter().enumerate() {
                let a = vals[k].abs();
                if a < PIVOT_THRESHOLD * col_max {
                    continue;
                }
                let len = rows[r].len();
                if len < piv_key.0 || (len == piv_key.0 && a > piv_key.1) {
                    piv_key = (len, a);
                    piv_at = k;
                }
            }
            let r = cands[piv_at];
            let piv = vals[piv_at];

            let pivot_row: Vec<(usize, f64)> = std::mem::take(&mut rows[r])
                .into_iter()
                .filter(|&(j, v)| j != c && col_active[j] && v != 0.0)
                .collect();
            row_active[r] = false;
            col_active[c] = false;

            for (k, &i) in cands.iter().enumerate() {
                if i == r || vals[k] == 0.0 {
                    continue;
                }
                let l = vals[k] / piv;
                lu.l_index.push(i);
                lu.l_value.push(l);
                let row = &mut rows[i];
                row.retain(|e| e.0 != c);
                for (q, e) in row.iter().enumerate() {
                    pos[e.0] = q;
                }
                for &(j, u) in &pivot_row {
                    if pos[j] != usize::MAX {
                        row[pos[j]].1 -= l * u;
                    } else {
                        pos[j] = row.len();
                        row.push((j, -l * u));
                        col_rows[j].push(i);
                        by_count.remove(&(col_count[j], j));
                        col_count[j] += 1;
                        by_count.insert((col_count[j], j));
                    }
                }
                for e in row.iter() {
                    pos[e.0] = usize::MAX;
                }
            }
            for &(j, u) in &pivot_row {
                by_count.remove(&(col_count[j], j));
                col_count[j] = col_count[j].saturating_sub(1);
                by_count.insert((col_count[j], j));
                lu.u_index.push(j);
                lu.u_value.push(u);
            }
            lu.l_start.push(lu.l_index.len());
            lu.u_start.push(lu.u_index.len());
            lu.u_diag.push(piv);
            lu.pivot_rows.push(r);
            lu.pivot_cols.push(c);
        }

        if dead_cols.is_empty() {
            Ok(lu)
        } else {
            let rows: Vec<usize> = (0..m).filter(|&r| row_active[r]).collect();
            debug_assert_eq!(rows.len(), dead_cols.len());
            Err(Singular { positions: dead_cols, rows })
        }
    }

    /// Solves `B·x = v`. `v` is indexed by row; the result by basis position.
    pub fn solve(&self, v: &mut [f64], out: &mut [f64]) {
        for k in 0..self.pivot_rows.len() {
            let t = v[self.pivot_rows[k]];
            if t == 0.0 {
                continue;
            }
            for e in self.l_start[k]..self.l_start[k + 1] {
                v[self.l_index[e]] -= self.l_value[e] * t;
            }
        }
        for k in (0..self.pivot_rows.len()).rev() {
            let mut s = v[self.pivot_rows[k]];
            for e in self.u_start[k]..self.u_start[k + 1] {
                s -= self.u_value[e] * out[self.u_index[e]];
            }
            out[self.pivot_cols[k]] = s / self.u_diag[k];
        }
    }

    /// Solves `Bᵀ·y = c`. `c` is indexed by basis position (and is
    /// clobbered); the result by row.
    pub fn solve_transpose(&self, c: &mut [f64], out: &mut [f64]) {
        for k in 0..self.pivot_rows.len() {
            let z = c[self.pivot_cols[k]] / self.u_diag[k];
            out[self.pivot_rows[k]] = z;
            if z == 0.0 {
                continue;
            }
            for e in self.u_start[k]..self.u_start[k + 1] {
                c[self.u_index[e]] -= self.u_value[e] * z;
            }
        }
        for k in (0..self.pivot_rows.len()).rev() {
            let r = self.pivot_rows[k];
            let mut s = out[r];
            for e in self.l_start[k]..self.l_start[k + 1] {
                s -= self.l_value[e] * out[self.l_index[e]];
            }
            out[r] = s;
        }
    }
}
