//! Sparse LU factorization of a simplex basis (left-looking Gilbert–Peierls
//! with threshold partial pivoting) plus the product-form eta file used
//! between refactorizations.
//!
//! Storage conventions after factorization of `P B = L U`:
//! * `pinv[orig_row] = pivot position`, `rperm[pos] = orig_row`.
//! * `L` is unit lower triangular, stored by columns with row indices in
//!   pivot-position space (all strictly below the diagonal).
//! * `U` is upper triangular; off-diagonal entries stored by columns in
//!   position space, diagonal in `u_diag`.

const NONE: usize = usize::MAX;

pub struct LuFactors {
    pub m: usize,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
    // Transposed copies so that both solve directions can run sparsely.
    lt_ptr: Vec<usize>,
    lt_idx: Vec<usize>,
    lt_val: Vec<f64>,
    ut_ptr: Vec<usize>,
    ut_idx: Vec<usize>,
    ut_val: Vec<f64>,
    pub pinv: Vec<usize>,
    pub rperm: Vec<usize>,
}

/// Scratch space reused across factorizations and solves.
pub struct Workspace {
    pub x: Vec<f64>,
    mark: Vec<u32>,
    epoch: u32,
    dfs_stack: Vec<(usize, usize)>,
    topo: Vec<usize>,
    touched: Vec<usize>,
    pairs: Vec<(usize, f64)>,
}

impl Workspace {
    pub fn new(m: usize) -> Self {
        Workspace {
            x: vec![0.0; m],
            mark: vec![0; m],
            epoch: 0,
            dfs_stack: Vec::with_capacity(64),
            topo: Vec::with_capacity(64),
            touched: Vec::with_capacity(64),
            pairs: Vec::with_capacity(64),
        }
    }

    fn resize(&mut self, m: usize) {
        if self.x.len() < m {
            self.x.resize(m, 0.0);
            self.mark.resize(m, 0);
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        self.epoch
    }
}

#[derive(Debug)]
pub struct Singular {
    /// Index into the factorization order at which no acceptable pivot existed.
    pub order_pos: usize,
}

impl LuFactors {
    /// Factorizes the basis given by `order` (a permutation of `0..m`
    /// mapping factorization step -> caller column id). `load_col` fills the
    /// sparse pattern of a caller column into the provided buffers. Pivots
    /// are chosen by maximum magnitude among unpivoted rows; anything below
    /// `abs_tol` counts as structurally singular.
    pub fn factorize(
        m: usize,
        order: &[usize],
        mut load_col: impl FnMut(usize, &mut Vec<usize>, &mut Vec<f64>),
        abs_tol: f64,
        ws: &mut Workspace,
    ) -> Result<LuFactors, Singular> {
        assert_eq!(order.len(), m);
        ws.resize(m);
        let mut lu = LuFactors {
            m,
            l_ptr: Vec::with_capacity(m + 1),
            l_idx: Vec::new(),
            l_val: Vec::new(),
            u_ptr: Vec::with_capacity(m + 1),
            u_idx: Vec::new(),
            u_val: Vec::new(),
            u_diag: vec![0.0; m],
            lt_ptr: Vec::new(),
            lt_idx: Vec::new(),
            lt_val: Vec::new(),
            ut_ptr: Vec::new(),
            ut_idx: Vec::new(),
            ut_val: Vec::new(),
            pinv: vec![NONE; m],
            rperm: vec![NONE; m],
        };
        lu.l_ptr.push(0);
        lu.u_ptr.push(0);
        // L columns hold ORIGINAL row indices during factorization; renumbered
        // to position space at the end.
        let mut col_rows: Vec<usize> = Vec::with_capacity(64);
        let mut col_vals: Vec<f64> = Vec::with_capacity(64);

        for k in 0..m {
            col_rows.clear();
            col_vals.clear();
            load_col(order[k], &mut col_rows, &mut col_vals);

            // Symbolic: reach of the column pattern through the L DAG.
            let epoch = ws.next_epoch();
            ws.topo.clear();
            ws.touched.clear();
            for &i in col_rows.iter() {
                if ws.mark[i] == epoch {
                    continue;
                }
                // Depth-first search through pivotal rows.
                ws.dfs_stack.clear();
                ws.dfs_stack.push((i, 0));
                ws.mark[i] = epoch;
                while let Some(&mut (node, ref mut child)) = ws.dfs_stack.last_mut() {
                    let p = lu.pinv[node];
                    if p == NONE {
                        // Unpivoted row: no L column to traverse.
                        ws.dfs_stack.pop();
                        ws.touched.push(node);
                        continue;
                    }
                    let (a, b) = (lu.l_ptr[p], lu.l_ptr[p + 1]);
                    let mut descended = false;
                    while *child < b - a {
                        let next = lu.l_idx[a + *child];
                        *child += 1;
                        if ws.mark[next] != epoch {
                            ws.mark[next] = epoch;
                            ws.dfs_stack.push((next, 0));
                            descended = true;
                            break;
                        }
                    }
                    if !descended && !ws.dfs_stack.is_empty() {
                        if let Some((done, _)) = ws.dfs_stack.pop() {
                            if lu.pinv[done] != NONE {
                                ws.topo.push(done);
                            }
                            ws.touched.push(done);
                        }
                    }
                }
            }

            // Numeric: scatter then eliminate in topological order (reverse
            // of the DFS postorder).
            for (&i, &v) in col_rows.iter().zip(col_vals.iter()) {
                ws.x[i] += v;
            }
            for idx in (0..ws.topo.len()).rev() {
                let node = ws.topo[idx];
                let p = lu.pinv[node];
                let xp = ws.x[node];
                if xp != 0.0 {
                    let (a, b) = (lu.l_ptr[p], lu.l_ptr[p + 1]);
                    for t in a..b {
                        ws.x[lu.l_idx[t]] -= lu.l_val[t] * xp;
                    }
                }
            }

            // Pivot among unpivoted rows.
            let mut best = 0.0f64;
            let mut best_row = NONE;
            for &i in ws.touched.iter() {
                if lu.pinv[i] == NONE {
                    let a = ws.x[i].abs();
                    if a > best || (a == best && best_row != NONE && i < best_row) {
                        best = a;
                        best_row = i;
                    }
                }
            }
            if best_row == NONE || best < abs_tol {
                for &i in ws.touched.iter() {
                    ws.x[i] = 0.0;
                }
                return Err(Singular { order_pos: k });
            }
            let pivot = ws.x[best_row];

            // Emit U column k (pivotal rows) and L column k (unpivoted rows).
            for &i in ws.touched.iter() {
                let v = ws.x[i];
                ws.x[i] = 0.0;
                if v == 0.0 || i == best_row {
                    continue;
                }
                let p = lu.pinv[i];
                if p != NONE {
                    lu.u_idx.push(p);
                    lu.u_val.push(v);
                } else {
                    lu.l_idx.push(i); // original row; renumbered below
                    lu.l_val.push(v / pivot);
                }
            }
            lu.u_diag[k] = pivot;
            lu.u_ptr.push(lu.u_idx.len());
            lu.l_ptr.push(lu.l_idx.len());
            lu.pinv[best_row] = k;
            lu.rperm[k] = best_row;
        }

        // Renumber L rows into position space.
        for idx in lu.l_idx.iter_mut() {
            *idx = lu.pinv[*idx];
        }
        lu.build_transposes();
        Ok(lu)
    }

    fn build_transposes(&mut self) {
        let m = self.m;
        let transpose = |ptr: &[usize], idx: &[usize], val: &[f64]| {
            let nnz = idx.len();
            let mut counts = vec![0usize; m + 1];
            for &i in idx {
                counts[i + 1] += 1;
            }
            for k in 0..m {
                counts[k + 1] += counts[k];
            }
            let tptr = counts;
            let mut tidx = vec![0usize; nnz];
            let mut tval = vec![0f64; nnz];
            let mut fill = tptr.clone();
            for col in 0..m {
                for t in ptr[col]..ptr[col + 1] {
                    let row = idx[t];
                    let slot = fill[row];
                    tidx[slot] = col;
                    tval[slot] = val[t];
                    fill[row] += 1;
                }
            }
            (tptr, tidx, tval)
        };
        let (lt_ptr, lt_idx, lt_val) = transpose(&self.l_ptr, &self.l_idx, &self.l_val);
        self.lt_ptr = lt_ptr;
        self.lt_idx = lt_idx;
        self.lt_val = lt_val;
        let (ut_ptr, ut_idx, ut_val) = transpose(&self.u_ptr, &self.u_idx, &self.u_val);
        self.ut_ptr = ut_ptr;
        self.ut_idx = ut_idx;
        self.ut_val = ut_val;
    }

    /// In-place solve of `B x = b`. On entry `x` is `b` scattered in
    /// original-row space; on exit `x[k]` is the solution for basis position `k`.
    pub fn ftran_dense(&self, x: &mut [f64], scratch: &mut [f64]) {
        // Apply P: position space.
        for i in 0..self.m {
            scratch[self.pinv[i]] = x[i];
        }
        x[..self.m].copy_from_slice(&scratch[..self.m]);
        // L solve (unit diagonal).
        for k in 0..self.m {
            let xk = x[k];
            if xk != 0.0 {
                let (a, b) = (self.l_ptr[k], self.l_ptr[k + 1]);
                for t in a..b {
                    x[self.l_idx[t]] -= self.l_val[t] * xk;
                }
            }
        }
        // U solve.
        for k in (0..self.m).rev() {
            let xk = x[k];
            if xk != 0.0 {
                let v = xk / self.u_diag[k];
                x[k] = v;
                let (a, b) = (self.u_ptr[k], self.u_ptr[k + 1]);
                for t in a..b {
                    x[self.u_idx[t]] -= self.u_val[t] * v;
                }
            }
        }
    }

    /// In-place solve of `B' y = c`. On entry `x[k]` holds `c` for basis
    /// position `k`; on exit `x[i]` is the dual value for original row `i`.
    pub fn btran_dense(&self, x: &mut [f64], scratch: &mut [f64]) {
        // U' solve (lower triangular): ascending positions.
        for k in 0..self.m {
            let (a, b) = (self.u_ptr[k], self.u_ptr[k + 1]);
            let mut acc = x[k];
            for t in a..b {
                acc -= self.u_val[t] * x[self.u_idx[t]];
            }
            x[k] = acc / self.u_diag[k];
        }
        // L' solve (upper triangular): descending positions.
        for k in (0..self.m).rev() {
            let (a, b) = (self.l_ptr[k], self.l_ptr[k + 1]);
            let mut acc = x[k];
            for t in a..b {
                acc -= self.l_val[t] * x[self.l_idx[t]];
            }
            x[k] = acc;
        }
        // Undo P: back to original-row space.
        for k in 0..self.m {
            scratch[self.rperm[k]] = x[k];
        }
        x[..self.m].copy_from_slice(&scratch[..self.m]);
    }

    pub fn fill(&self) -> usize {
        self.l_idx.len() + self.u_idx.len() + self.m
    }

    /// Sparse solve of `B x = b`. On entry `vals`/`support` hold `b` in
    /// original-row space; on exit they hold the solution indexed by basis
    /// position. Only reachable entries are touched.
    pub fn ftran_sparse(&self, vals: &mut [f64], support: &mut Vec<usize>, ws: &mut Workspace) {
        // Permute into position space.
        permute_support(vals, support, &self.pinv, ws);
        // L solve: unit diagonal, push-style.
        push_solve(
            &self.l_ptr,
            &self.l_idx,
            &self.l_val,
            None,
            vals,
            support,
            ws,
        );
        // U solve: divide by the diagonal, then push updates upward.
        push_solve(
            &self.u_ptr,
            &self.u_idx,
            &self.u_val,
            Some(&self.u_diag),
            vals,
            support,
            ws,
        );
    }

    /// Sparse solve of `B' y = c`. On entry `vals`/`support` hold `c` in
    /// basis-position space; on exit, `y` in original-row space.
    pub fn btran_sparse(&self, vals: &mut [f64], support: &mut Vec<usize>, ws: &mut Workspace) {
        // U' is lower triangular with U's diagonal; its columns are U's rows.
        push_solve(
            &self.ut_ptr,
            &self.ut_idx,
            &self.ut_val,
            Some(&self.u_diag),
            vals,
            support,
            ws,
        );
        // L' is unit upper triangular; its columns are L's rows.
        push_solve(
            &self.lt_ptr,
            &self.lt_idx,
            &self.lt_val,
            None,
            vals,
            support,
            ws,
        );
        permute_support(vals, support, &self.rperm, ws);
    }
}

/// Moves a sparse vector through an index permutation: entry `i` lands at
/// `perm[i]`.
fn permute_support(vals: &mut [f64], support: &mut Vec<usize>, perm: &[usize], ws: &mut Workspace) {
    ws.pairs.clear();
    for &i in support.iter() {
        ws.pairs.push((perm[i], vals[i]));
        vals[i] = 0.0;
    }
    support.clear();
    for &(i, v) in &ws.pairs {
        vals[i] = v;
        support.push(i);
    }
}

/// Column-oriented sparse triangular solve. The matrix is given by columns
/// (strictly off-diagonal entries); `diag` divides each finalized entry when
/// present (upper factors), otherwise the diagonal is implicitly one.
/// Dependencies run from a column to its entries, so processing nodes in
/// reverse postorder of a DFS from the support finalizes each value before
/// it is pushed onward. Extends `support` with every reached index.
fn push_solve(
    ptr: &[usize],
    idx: &[usize],
    val: &[f64],
    diag: Option<&[f64]>,
    vals: &mut [f64],
    support: &mut Vec<usize>,
    ws: &mut Workspace,
) {
    let epoch = ws.next_epoch();
    ws.topo.clear();
    for s in 0..support.len() {
        let root = support[s];
        if ws.mark[root] == epoch {
            continue;
        }
        ws.mark[root] = epoch;
        ws.dfs_stack.clear();
        ws.dfs_stack.push((root, 0));
        while let Some(&mut (node, ref mut child)) = ws.dfs_stack.last_mut() {
            let (a, b) = (ptr[node], ptr[node + 1]);
            let mut descended = false;
            while *child < b - a {
                let next = idx[a + *child];
                *child += 1;
                if ws.mark[next] != epoch {
                    ws.mark[next] = epoch;
                    ws.dfs_stack.push((next, 0));
                    descended = true;
                    break;
                }
            }
            if !descended {
                let (done, _) = ws.dfs_stack.pop().expect("nonempty");
                ws.topo.push(done);
            }
        }
    }
    // Reverse postorder: roots before the nodes they feed.
    for t in (0..ws.topo.len()).rev() {
        let node = ws.topo[t];
        let mut x = vals[node];
        if let Some(d) = diag {
            x /= d[node];
            vals[node] = x;
        }
        if x != 0.0 {
            for k in ptr[node]..ptr[node + 1] {
                vals[idx[k]] -= val[k] * x;
            }
        }
    }
    // The reach set is the new support.
    support.clear();
    for t in 0..ws.topo.len() {
        support.push(ws.topo[t]);
    }
}

/// Product-form updates: each eta records that basis position `r` was
/// replaced by a column whose factored representation was `w = B^-1 a`.
/// Stored flat (one arena for all entries) so pivots allocate nothing once
/// capacity is warm.
#[derive(Default)]
pub struct EtaFile {
    r: Vec<usize>,
    wr: Vec<f64>,
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl EtaFile {
    pub fn clear(&mut self) {
        self.r.clear();
        self.wr.clear();
        self.ptr.clear();
        self.idx.clear();
        self.val.clear();
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Records an eta from the pivot column `w` (position space, support in
    /// `w_nz`), pivot position `r`.
    pub fn push_from(&mut self, r: usize, w: &[f64], w_nz: &[usize]) {
        if self.ptr.is_empty() {
            self.ptr.push(0);
        }
        self.r.push(r);
        self.wr.push(w[r]);
        for &p in w_nz {
            if p != r && w[p] != 0.0 {
                self.idx.push(p);
                self.val.push(w[p]);
            }
        }
        self.ptr.push(self.idx.len());
    }

    /// Sparse variant of [`EtaFile::apply_ftran`]: keeps `support` covering
    /// every nonzero of `vals`.
    pub fn apply_ftran_sparse(
        &self,
        vals: &mut [f64],
        support: &mut Vec<usize>,
        ws: &mut Workspace,
    ) {
        if self.is_empty() {
            return;
        }
        let epoch = ws.next_epoch();
        for &i in support.iter() {
            ws.mark[i] = epoch;
        }
        for k in 0..self.r.len() {
            let r = self.r[k];
            let xr = vals[r];
            if xr != 0.0 {
                let t = xr / self.wr[k];
                vals[r] = t;
                for e in self.ptr[k]..self.ptr[k + 1] {
                    let i = self.idx[e];
                    if ws.mark[i] != epoch {
                        ws.mark[i] = epoch;
                        support.push(i);
                    }
                    vals[i] -= self.val[e] * t;
                }
            }
        }
    }

    /// Sparse variant of [`EtaFile::apply_btran`].
    pub fn apply_btran_sparse(
        &self,
        vals: &mut [f64],
        support: &mut Vec<usize>,
        ws: &mut Workspace,
    ) {
        if self.is_empty() {
            return;
        }
        let epoch = ws.next_epoch();
        for &i in support.iter() {
            ws.mark[i] = epoch;
        }
        for k in (0..self.r.len()).rev() {
            let r = self.r[k];
            let mut acc = vals[r];
            for e in self.ptr[k]..self.ptr[k + 1] {
                acc -= self.val[e] * vals[self.idx[e]];
            }
            let z = acc / self.wr[k];
            if z != 0.0 && ws.mark[r] != epoch {
                ws.mark[r] = epoch;
                support.push(r);
            }
            vals[r] = z;
        }
    }

    /// Applies `E_1^-1 ... E_k^-1` oldest-to-newest (FTRAN direction),
    /// `x` in position space.
    pub fn apply_ftran(&self, x: &mut [f64]) {
        for k in 0..self.r.len() {
            let xr = x[self.r[k]];
            if xr != 0.0 {
                let t = xr / self.wr[k];
                x[self.r[k]] = t;
                for e in self.ptr[k]..self.ptr[k + 1] {
                    x[self.idx[e]] -= self.val[e] * t;
                }
            }
        }
    }

    /// Applies the transposed inverses newest-to-oldest (BTRAN direction),
    /// `x` in position space.
    pub fn apply_btran(&self, x: &mut [f64]) {
        for k in (0..self.r.len()).rev() {
            let r = self.r[k];
            let mut acc = x[r];
            for e in self.ptr[k]..self.ptr[k + 1] {
                acc -= self.val[e] * x[self.idx[e]];
            }
            x[r] = acc / self.wr[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_cols(cols: &[Vec<f64>]) -> impl FnMut(usize, &mut Vec<usize>, &mut Vec<f64>) + '_ {
        move |q, rows, vals| {
            for (i, &v) in cols[q].iter().enumerate() {
                if v != 0.0 {
                    rows.push(i);
                    vals.push(v);
                }
            }
        }
    }

    fn mat_vec(cols: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        let m = cols[0].len();
        let mut out = vec![0.0; m];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..m {
                out[i] += col[i] * x[j];
            }
        }
        out
    }

    #[test]
    fn ftran_btran_roundtrip() {
        // Columns of a 4x4 invertible matrix.
        let cols = vec![
            vec![2.0, 1.0, 0.0, 0.0],
            vec![0.0, 3.0, 1.0, 0.0],
            vec![1.0, 0.0, 4.0, 1.0],
            vec![0.0, 0.0, 0.0, 5.0],
        ];
        let m = 4;
        let mut ws = Workspace::new(m);
        let order: Vec<usize> = (0..m).collect();
        let lu = LuFactors::factorize(m, &order, dense_cols(&cols), 1e-12, &mut ws).unwrap();

        // FTRAN: solve B x = b.
        let b = vec![1.0, 2.0, -1.0, 0.5];
        let mut x = b.clone();
        let mut scratch = vec![0.0; m];
        lu.ftran_dense(&mut x, &mut scratch);
        // x is indexed by basis position = column order here.
        let bx = mat_vec(&cols, &x);
        for i in 0..m {
            assert!((bx[i] - b[i]).abs() < 1e-12, "ftran residual {bx:?}");
        }

        // BTRAN: solve B' y = c.
        let c = vec![0.5, -1.0, 2.0, 1.0];
        let mut y = c.clone();
        lu.btran_dense(&mut y, &mut scratch);
        // Verify B' y = c, i.e. for each column j: col_j . y == c[j].
        for (j, col) in cols.iter().enumerate() {
            let dot: f64 = col.iter().zip(&y).map(|(a, b)| a * b).sum();
            assert!((dot - c[j]).abs() < 1e-12, "btran residual at {j}");
        }
    }

    #[test]
    fn sparse_solves_match_dense() {
        let cols = vec![
            vec![2.0, 1.0, 0.0, 0.0, 0.5],
            vec![0.0, 3.0, 1.0, 0.0, 0.0],
            vec![1.0, 0.0, 4.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 5.0, 2.0],
            vec![0.0, 1.0, 0.0, 0.0, 3.0],
        ];
        let m = 5;
        let mut ws = Workspace::new(m);
        let order: Vec<usize> = (0..m).collect();
        let lu = LuFactors::factorize(m, &order, dense_cols(&cols), 1e-12, &mut ws).unwrap();

        // FTRAN with a sparse rhs.
        let mut dense = vec![0.0; m];
        dense[2] = 1.5;
        dense[4] = -0.5;
        let mut scratch = vec![0.0; m];
        let mut want = dense.clone();
        lu.ftran_dense(&mut want, &mut scratch);

        let mut vals = vec![0.0; m];
        let mut support = vec![2usize, 4];
        vals[2] = 1.5;
        vals[4] = -0.5;
        lu.ftran_sparse(&mut vals, &mut support, &mut ws);
        for k in 0..m {
            assert!((vals[k] - want[k]).abs() < 1e-12, "ftran pos {k}");
        }
        // Support covers every nonzero.
        for k in 0..m {
            if vals[k] != 0.0 {
                assert!(support.contains(&k));
            }
        }

        // BTRAN with a unit rhs.
        let mut want = vec![0.0; m];
        want[1] = 1.0;
        lu.btran_dense(&mut want, &mut scratch);
        let mut vals = vec![0.0; m];
        let mut support = vec![1usize];
        vals[1] = 1.0;
        lu.btran_sparse(&mut vals, &mut support, &mut ws);
        for k in 0..m {
            assert!((vals[k] - want[k]).abs() < 1e-12, "btran pos {k}");
        }
    }

    #[test]
    fn singular_matrix_detected() {
        let cols = vec![
            vec![1.0, 0.0, 2.0],
            vec![2.0, 0.0, 4.0], // multiple of column 0
            vec![0.0, 0.0, 1.0],
        ];
        let mut ws = Workspace::new(3);
        let order: Vec<usize> = (0..3).collect();
        let res = LuFactors::factorize(3, &order, dense_cols(&cols), 1e-12, &mut ws);
        assert!(res.is_err());
    }

    #[test]
    fn eta_file_matches_refactorization() {
        // Start from B = I (3x3), replace column 1 with w-generating column a.
        let cols = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let m = 3;
        let mut ws = Workspace::new(m);
        let order: Vec<usize> = (0..m).collect();
        let lu = LuFactors::factorize(m, &order, dense_cols(&cols), 1e-12, &mut ws).unwrap();

        let a = vec![0.5, 2.0, -1.0];
        // w = B^-1 a = a for identity.
        let mut etas = EtaFile::default();
        etas.push_from(1, &a, &[0, 1, 2]);

        // New basis: columns [e0, a, e2]. Solve B_new x = b with LU+eta.
        let b = vec![1.0, 1.0, 1.0];
        let mut x = b.clone();
        let mut scratch = vec![0.0; m];
        lu.ftran_dense(&mut x, &mut scratch);
        etas.apply_ftran(&mut x);
        // Verify: e0*x0 + a*x1 + e2*x2 = b
        let bx = [
            x[0] + a[0] * x[1],
            a[1] * x[1],
            x[2] + a[2] * x[1],
        ];
        for i in 0..m {
            assert!((bx[i] - b[i]).abs() < 1e-12);
        }

        // BTRAN against the same updated basis.
        let c = vec![3.0, -2.0, 0.25];
        let mut y = c.clone();
        etas.apply_btran(&mut y);
        lu.btran_dense(&mut y, &mut scratch);
        // Check B_new' y = c: rows of B_new' are columns of B_new.
        let checks = [y[0], a[0] * y[0] + a[1] * y[1] + a[2] * y[2], y[2]];
        for i in 0..m {
            assert!((checks[i] - c[i]).abs() < 1e-12);
        }
    }
}
