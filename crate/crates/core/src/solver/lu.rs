//! Sparse LU factorization with partial pivoting, built column by column with
//! a reachability pass per column (a left-looking factorization): each new
//! column is solved against the L computed so far, touching only the rows
//! reachable from its nonzeros, then the largest remaining entry is chosen as
//! the pivot.
//!
//! The factors satisfy `P * B * Q = L * U` where `P` reorders rows by pivot
//! choice and `Q` is the column order given by the caller. Solves run in
//! pivot-position space; [`SparseLu::ftran`] and [`SparseLu::btran`] handle
//! the permutations at the boundaries.

use crate::error::{Error, Result};

/// A column-major sparse matrix view: `cols[j]` lists `(row, value)`.
pub type SparseCols = Vec<Vec<(usize, f64)>>;

const PIVOT_TINY: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    /// Strictly-lower multipliers per column, rows in pivot-position space
    /// (every entry's row position exceeds its column index).
    l_cols: SparseCols,
    /// Strictly-upper entries per column, rows in pivot-position space.
    u_cols: SparseCols,
    u_diag: Vec<f64>,
    /// `rowperm[k]` = original row pivoted at position `k`.
    rowperm: Vec<usize>,
    /// `colperm[k]` = caller column factored at position `k`.
    colperm: Vec<usize>,
}

/// Dense scratch shared across factorizations and solves to avoid
/// re-allocation.
#[derive(Debug, Default, Clone)]
pub struct LuScratch {
    x: Vec<f64>,
    visited: Vec<bool>,
    topo: Vec<usize>,
    stack: Vec<(usize, usize)>,
}

impl LuScratch {
    fn reset(&mut self, n: usize) {
        self.x.clear();
        self.x.resize(n, 0.0);
        self.visited.clear();
        self.visited.resize(n, false);
        self.topo.clear();
        self.stack.clear();
    }
}

/// Factors the `n`-square matrix whose columns are `cols[order[k]]` for
/// `k = 0..n`. Fails with [`Error::Numerical`] when no acceptable pivot
/// remains for some column (the matrix is singular or hopelessly
/// ill-conditioned).
pub fn factorize(
    n: usize,
    cols: &SparseCols,
    order: &[usize],
    scratch: &mut LuScratch,
) -> Result<SparseLu> {
    assert_eq!(order.len(), n, "column order must cover the matrix");
    scratch.reset(n);

    // During elimination, L columns carry original row indices; they are
    // remapped to pivot positions once every row has a position.
    let mut l_orig: SparseCols = Vec::with_capacity(n);
    let mut u_cols: SparseCols = Vec::with_capacity(n);
    let mut u_diag = Vec::with_capacity(n);
    let mut rowperm = Vec::with_capacity(n);
    const NONE: usize = usize::MAX;
    let mut rowpos = vec![NONE; n];

    for (step, &cj) in order.iter().enumerate() {
        // Reachable rows from the column pattern across the L graph,
        // collected in reverse DFS-postorder (a topological order).
        scratch.topo.clear();
        for &(r, _) in &cols[cj] {
            if scratch.visited[r] {
                continue;
            }
            scratch.stack.push((r, 0));
            scratch.visited[r] = true;
            while let Some(&(node, edge)) = scratch.stack.last() {
                let succ = if rowpos[node] == NONE {
                    None
                } else {
                    l_orig[rowpos[node]].get(edge).map(|&(r2, _)| r2)
                };
                match succ {
                    Some(r2) => {
                        scratch.stack.last_mut().unwrap().1 += 1;
                        if !scratch.visited[r2] {
                            scratch.visited[r2] = true;
                            scratch.stack.push((r2, 0));
                        }
                    }
                    None => {
                        scratch.stack.pop();
                        scratch.topo.push(node);
                    }
                }
            }
        }
        scratch.topo.reverse();

        for &(r, v) in &cols[cj] {
            scratch.x[r] += v;
        }
        for idx in 0..scratch.topo.len() {
            let i = scratch.topo[idx];
            let k = rowpos[i];
            if k == NONE {
                continue;
            }
            let xi = scratch.x[i];
            if xi != 0.0 {
                for &(r, m) in &l_orig[k] {
                    scratch.x[r] -= m * xi;
                }
            }
        }

        // Pivot: the largest entry among rows without a position yet.
        let mut pivot_row = NONE;
        let mut pivot_abs = PIVOT_TINY;
        for &i in &scratch.topo {
            if rowpos[i] == NONE && scratch.x[i].abs() > pivot_abs {
                pivot_abs = scratch.x[i].abs();
                pivot_row = i;
            }
        }
        if pivot_row == NONE {
            for &i in &scratch.topo {
                scratch.x[i] = 0.0;
                scratch.visited[i] = false;
            }
            return Err(Error::Numerical(format!(
                "singular basis: no pivot for column {cj} (step {step})"
            )));
        }
        let pivot = scratch.x[pivot_row];

        let mut ucol = Vec::new();
        let mut lcol = Vec::new();
        for &i in &scratch.topo {
            let v = scratch.x[i];
            scratch.x[i] = 0.0;
            scratch.visited[i] = false;
            if v == 0.0 {
                continue;
            }
            if rowpos[i] != NONE {
                ucol.push((rowpos[i], v));
            } else if i != pivot_row {
                lcol.push((i, v / pivot));
            }
        }
        rowpos[pivot_row] = step;
        rowperm.push(pivot_row);
        u_diag.push(pivot);
        u_cols.push(ucol);
        l_orig.push(lcol);
    }

    let l_cols = l_orig
        .into_iter()
        .map(|col| col.into_iter().map(|(r, m)| (rowpos[r], m)).collect())
        .collect();

    Ok(SparseLu {
        n,
        l_cols,
        u_cols,
        u_diag,
        rowperm,
        colperm: order.to_vec(),
    })
}

impl SparseLu {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Nonzeros in both factors (diagnostics).
    pub fn fill(&self) -> usize {
        self.n
            + self.l_cols.iter().map(Vec::len).sum::<usize>()
            + self.u_cols.iter().map(Vec::len).sum::<usize>()
    }

    /// Solves `B x = b`; `b` is indexed by row, `x` by caller column.
    pub fn ftran(&self, b: &[f64], x: &mut Vec<f64>, work: &mut Vec<f64>) {
        let n = self.n;
        work.clear();
        work.resize(n, 0.0);
        for k in 0..n {
            work[k] = b[self.rowperm[k]];
        }
        for k in 0..n {
            let yk = work[k];
            if yk != 0.0 {
                for &(r, m) in &self.l_cols[k] {
                    work[r] -= m * yk;
                }
            }
        }
        x.clear();
        x.resize(n, 0.0);
        for k in (0..n).rev() {
            let xk = work[k] / self.u_diag[k];
            x[self.colperm[k]] = xk;
            if xk != 0.0 {
                for &(r, v) in &self.u_cols[k] {
                    work[r] -= v * xk;
                }
            }
        }
    }

    /// Solves `B^T y = c`; `c` is indexed by caller column, `y` by row.
    pub fn btran(&self, c: &[f64], y: &mut Vec<f64>, work: &mut Vec<f64>) {
        let n = self.n;
        work.clear();
        work.resize(n, 0.0);
        for k in 0..n {
            let mut zk = c[self.colperm[k]];
            for &(r, v) in &self.u_cols[k] {
                zk -= v * work[r];
            }
            work[k] = zk / self.u_diag[k];
        }
        for k in (0..n).rev() {
            let mut wk = work[k];
            for &(r, m) in &self.l_cols[k] {
                wk -= m * work[r];
            }
            work[k] = wk;
        }
        y.clear();
        y.resize(n, 0.0);
        for k in 0..n {
            y[self.rowperm[k]] = work[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_to_cols(a: &[&[f64]]) -> SparseCols {
        let n = a.len();
        (0..n)
            .map(|j| {
                (0..n)
                    .filter(|&i| a[i][j] != 0.0)
                    .map(|i| (i, a[i][j]))
                    .collect()
            })
            .collect()
    }

    fn mul(a: &[&[f64]], x: &[f64]) -> Vec<f64> {
        a.iter()
            .map(|row| row.iter().zip(x).map(|(c, v)| c * v).sum())
            .collect()
    }

    fn mul_t(a: &[&[f64]], y: &[f64]) -> Vec<f64> {
        let n = a.len();
        (0..n)
            .map(|j| (0..n).map(|i| a[i][j] * y[i]).sum())
            .collect()
    }

    fn assert_close(a: &[f64], b: &[f64]) {
        for (u, v) in a.iter().zip(b) {
            assert!((u - v).abs() < 1e-9, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn solves_small_dense_system() {
        let a: &[&[f64]] = &[
            &[2.0, 1.0, 0.0],
            &[1.0, 3.0, 1.0],
            &[0.0, 1.0, 4.0],
        ];
        let cols = dense_to_cols(a);
        let lu = factorize(3, &cols, &[0, 1, 2], &mut LuScratch::default()).unwrap();
        let (mut x, mut w) = (Vec::new(), Vec::new());
        let b = vec![3.0, 9.0, 14.0];
        lu.ftran(&b, &mut x, &mut w);
        assert_close(&mul(a, &x), &b);

        let c = vec![1.0, -2.0, 0.5];
        let mut y = Vec::new();
        lu.btran(&c, &mut y, &mut w);
        assert_close(&mul_t(a, &y), &c);
    }

    #[test]
    fn respects_column_order() {
        let a: &[&[f64]] = &[&[0.0, 1.0], &[1.0, 0.0]];
        let cols = dense_to_cols(a);
        // Factor the second caller column first; solutions must still be in
        // caller-column order.
        let lu = factorize(2, &cols, &[1, 0], &mut LuScratch::default()).unwrap();
        let (mut x, mut w) = (Vec::new(), Vec::new());
        lu.ftran(&[5.0, 7.0], &mut x, &mut w);
        assert_close(&mul(a, &x), &[5.0, 7.0]);
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let a: &[&[f64]] = &[
            &[0.0, 2.0, 1.0],
            &[1.0, 0.0, 0.0],
            &[4.0, 1.0, 0.0],
        ];
        let cols = dense_to_cols(a);
        let lu = factorize(3, &cols, &[0, 1, 2], &mut LuScratch::default()).unwrap();
        let (mut x, mut w) = (Vec::new(), Vec::new());
        let b = vec![1.0, 2.0, 3.0];
        lu.ftran(&b, &mut x, &mut w);
        assert_close(&mul(a, &x), &b);
    }

    #[test]
    fn detects_singular_matrix() {
        let a: &[&[f64]] = &[
            &[1.0, 2.0, 3.0],
            &[2.0, 4.0, 6.0],
            &[0.0, 0.0, 1.0],
        ];
        let cols = dense_to_cols(a);
        assert!(factorize(3, &cols, &[0, 1, 2], &mut LuScratch::default()).is_err());
    }

    /// Random sparse diagonally-dominant systems, checked by multiplying back.
    #[test]
    fn random_sparse_round_trip() {
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..20 {
            let n = 40 + trial;
            let mut dense = vec![vec![0.0f64; n]; n];
            for (i, row) in dense.iter_mut().enumerate() {
                row[i] = 5.0 + rng();
                for _ in 0..3 {
                    let j = (rng() * n as f64) as usize % n;
                    if j != i {
                        row[j] = rng() * 2.0 - 1.0;
                    }
                }
            }
            let rows: Vec<&[f64]> = dense.iter().map(|r| r.as_slice()).collect();
            let cols = dense_to_cols(&rows);
            // Factor in an arbitrary interleaved column order.
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&j| (cols[j].len(), j));
            let lu = factorize(n, &cols, &order, &mut LuScratch::default()).unwrap();

            let b: Vec<f64> = (0..n).map(|_| rng() * 10.0 - 5.0).collect();
            let (mut x, mut w) = (Vec::new(), Vec::new());
            lu.ftran(&b, &mut x, &mut w);
            assert_close(&mul(&rows, &x), &b);

            let c: Vec<f64> = (0..n).map(|_| rng() * 10.0 - 5.0).collect();
            let mut y = Vec::new();
            lu.btran(&c, &mut y, &mut w);
            assert_close(&mul_t(&rows, &y), &c);
        }
    }
}
