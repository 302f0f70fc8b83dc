//! Bounded-variable primal revised simplex.
//!
//! Internal form: `maximize c'x` over `A x + I s = b` where `s` are logical
//! variables whose bounds encode the row sense (`<=` gives `s in [0, inf)`,
//! `>=` gives `s in (-inf, 0]`, `=` pins `s` to zero). The basis is held as a
//! sparse LU factorization refreshed periodically, with product-form eta
//! updates in between; right-hand sides stay sparse through reach-based
//! triangular solves. Feasibility is reached by a composite phase 1 that
//! minimizes the total bound violation of the basic variables, starting from
//! a structurally triangular crash basis. Phase 2 prices with devex weights
//! over incrementally updated reduced costs (recomputed exactly at every
//! refactorization and before declaring optimality). Sustained degeneracy
//! switches to Bland's rule (lowest eligible index) until progress resumes,
//! which guarantees termination.

use crate::lu::{EtaFile, LuFactors, Workspace};
use crate::{LinearProgram, LpError, Sense, Solution, SolveOptions, SolveStatus};
use std::time::{Duration, Instant};

/// Work counters from one solve, for performance diagnosis.
#[derive(Debug, Default, Clone)]
pub struct SolveStats {
    pub iterations: usize,
    pub phase1_iterations: usize,
    pub bound_flips: usize,
    pub refactorizations: usize,
    pub time_total: Duration,
    pub time_factor: Duration,
    pub time_ftran: Duration,
    pub time_btran: Duration,
    pub time_price: Duration,
}

const NONE: usize = usize::MAX;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const BLAND_TRIGGER: usize = 1_000;
/// Eta file length that forces a refactorization.
const REFACTOR_EVERY: usize = 40;
/// Step sizes at or below this count as degenerate.
const DEGEN_EPS: f64 = 1e-11;
/// Absolute pivot floor inside the LU kernel.
const LU_PIVOT_TOL: f64 = 1e-11;
/// Devex weight that forces a reference-framework reset.
const DEVEX_RESET: f64 = 1e8;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum VStat {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable parked at zero.
    FreeNb,
}

/// Exported basis of a solved program, reusable as a warm start for another
/// program with the same shape (variable count, row count and senses). One
/// status per structural variable followed by one per row logical.
#[derive(Debug, Clone)]
pub struct Basis {
    statuses: Vec<u8>,
}

const BS_BASIC: u8 = 0;
const BS_LOWER: u8 = 1;
const BS_UPPER: u8 = 2;
const BS_FREE: u8 = 3;

pub(crate) fn solve(lp: &LinearProgram, opts: &SolveOptions) -> Result<Solution, LpError> {
    let mut s = Simplex::new(lp, opts);
    s.run()
}

pub(crate) fn solve_with_stats(
    lp: &LinearProgram,
    opts: &SolveOptions,
) -> Result<(Solution, SolveStats), LpError> {
    let mut s = Simplex::new(lp, opts);
    let t0 = Instant::now();
    let sol = s.run()?;
    s.stats.time_total = t0.elapsed();
    Ok((sol, s.stats.clone()))
}

pub(crate) fn solve_warm(
    lp: &LinearProgram,
    opts: &SolveOptions,
    warm: Option<&Basis>,
) -> Result<(Solution, Basis, SolveStats), LpError> {
    let mut s = Simplex::new(lp, opts);
    if let Some(b) = warm {
        s.import_basis(b);
    }
    let t0 = Instant::now();
    let sol = s.run()?;
    s.stats.time_total = t0.elapsed();
    let basis = s.export_basis();
    Ok((sol, basis, s.stats.clone()))
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    m: usize,
    n: usize,
    nt: usize,

    // Structural columns, CSC, row indices are original rows.
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,

    cost: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    rhs: Vec<f64>,

    stat: Vec<VStat>,
    basic: Vec<usize>,
    pos_of: Vec<usize>,
    x: Vec<f64>,

    lu: Option<LuFactors>,
    etas: EtaFile,
    ws: Workspace,

    // Entering column image B^-1 a_q (position space) and its support.
    w: Vec<f64>,
    w_nz: Vec<usize>,
    // Pivot row B^-T e_r (original-row space) and its support.
    rho: Vec<f64>,
    rho_nz: Vec<usize>,
    // Pivot row against all columns (variable space) and its support.
    alpha: Vec<f64>,
    alpha_nz: Vec<usize>,
    // Duals for full recomputations (original-row space).
    y: Vec<f64>,
    scratch: Vec<f64>,
    cb: Vec<f64>,

    // Phase-2 pricing state.
    d: Vec<f64>,
    devex: Vec<f64>,
    d_valid: bool,

    feas_tol: f64,
    opt_tol: f64,
    pivot_tol: f64,
    max_iter: usize,

    degen_streak: usize,
    bland: bool,
    imported: bool,
    /// Basic values may violate bounds (recheck needed).
    feas_dirty: bool,
    /// Cursor for sectional pricing.
    price_cursor: usize,

    stats: SolveStats,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram, opts: &SolveOptions) -> Self {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let nt = n + m;

        // Transpose CSR rows into CSC columns.
        let mut col_counts = vec![0usize; n];
        for i in 0..m {
            let (_, _, cols, _) = lp.row(i);
            for &c in cols {
                col_counts[c] += 1;
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for j in 0..n {
            col_ptr[j + 1] = col_ptr[j] + col_counts[j];
        }
        let nnz = col_ptr[n];
        let mut col_rows = vec![0usize; nnz];
        let mut col_vals = vec![0f64; nnz];
        let mut fill = col_ptr.clone();
        for i in 0..m {
            let (_, _, cols, vals) = lp.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let t = fill[c];
                col_rows[t] = i;
                col_vals[t] = v;
                fill[c] += 1;
            }
        }

        let mut cost = vec![0.0; nt];
        cost[..n].copy_from_slice(lp.objective());
        let mut lb = vec![0.0; nt];
        let mut ub = vec![0.0; nt];
        for j in 0..n {
            let (l, u) = lp.bounds(j);
            lb[j] = l;
            ub[j] = u;
        }
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            let (sense, b, _, _) = lp.row(i);
            rhs[i] = b;
            let s = n + i;
            match sense {
                Sense::Le => {
                    lb[s] = 0.0;
                    ub[s] = f64::INFINITY;
                }
                Sense::Ge => {
                    lb[s] = f64::NEG_INFINITY;
                    ub[s] = 0.0;
                }
                Sense::Eq => {
                    lb[s] = 0.0;
                    ub[s] = 0.0;
                }
            }
        }

        let max_iter = opts.max_iterations.unwrap_or(50 * (m + n).max(1));
        Simplex {
            lp,
            m,
            n,
            nt,
            col_ptr,
            col_rows,
            col_vals,
            cost,
            lb,
            ub,
            rhs,
            stat: vec![VStat::AtLower; nt],
            basic: Vec::new(),
            pos_of: vec![NONE; nt],
            x: vec![0.0; nt],
            lu: None,
            etas: EtaFile::default(),
            ws: Workspace::new(m.max(1)),
            w: vec![0.0; m],
            w_nz: Vec::new(),
            rho: vec![0.0; m],
            rho_nz: Vec::new(),
            alpha: vec![0.0; nt],
            alpha_nz: Vec::new(),
            y: vec![0.0; m],
            scratch: vec![0.0; m],
            cb: vec![0.0; m],
            d: vec![0.0; nt],
            devex: vec![1.0; nt],
            d_valid: false,
            feas_tol: opts.feasibility_tol,
            opt_tol: opts.optimality_tol,
            pivot_tol: opts.pivot_tol,
            max_iter,
            degen_streak: 0,
            bland: false,
            imported: false,
            feas_dirty: true,
            price_cursor: 0,
            stats: SolveStats::default(),
        }
    }

    /// Adopts the basis of a previously solved, same-shaped program. Falls
    /// back to the cold start when the shape disagrees.
    fn import_basis(&mut self, basis: &Basis) {
        if basis.statuses.len() != self.nt {
            return;
        }
        if basis.statuses.iter().filter(|&&s| s == BS_BASIC).count() != self.m {
            return;
        }
        self.basic.clear();
        for j in 0..self.nt {
            match basis.statuses[j] {
                BS_BASIC => {
                    self.stat[j] = VStat::Basic;
                    self.pos_of[j] = self.basic.len();
                    self.basic.push(j);
                    self.x[j] = 0.0;
                }
                BS_LOWER if self.lb[j].is_finite() => {
                    self.stat[j] = VStat::AtLower;
                    self.pos_of[j] = NONE;
                    self.x[j] = self.lb[j];
                }
                BS_UPPER if self.ub[j].is_finite() => {
                    self.stat[j] = VStat::AtUpper;
                    self.pos_of[j] = NONE;
                    self.x[j] = self.ub[j];
                }
                _ => {
                    self.pos_of[j] = NONE;
                    self.rest_nonbasic(j);
                }
            }
        }
        self.imported = true;
    }

    fn export_basis(&self) -> Basis {
        let statuses = self
            .stat
            .iter()
            .map(|s| match s {
                VStat::Basic => BS_BASIC,
                VStat::AtLower => BS_LOWER,
                VStat::AtUpper => BS_UPPER,
                VStat::FreeNb => BS_FREE,
            })
            .collect();
        Basis { statuses }
    }

    fn column(&self, var: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.col_ptr[var], self.col_ptr[var + 1]);
        (&self.col_rows[a..b], &self.col_vals[a..b])
    }

    /// Parks a nonbasic variable at its natural resting value.
    fn rest_nonbasic(&mut self, j: usize) {
        let (l, u) = (self.lb[j], self.ub[j]);
        if l.is_finite() && (!u.is_finite() || l.abs() <= u.abs()) {
            self.stat[j] = VStat::AtLower;
            self.x[j] = l;
        } else if u.is_finite() {
            self.stat[j] = VStat::AtUpper;
            self.x[j] = u;
        } else {
            self.stat[j] = VStat::FreeNb;
            self.x[j] = 0.0;
        }
    }

    /// Structurally triangular crash: repeatedly assigns a column that is a
    /// singleton over the still-uncovered rows. Inequality logicals are
    /// singletons from the start, so slack-heavy problems begin from the
    /// classic slack basis; equality rows are claimed by structural columns
    /// whenever a cascade exists, which keeps phase 1 short.
    fn crash(&mut self) {
        for j in 0..self.nt {
            self.rest_nonbasic(j);
        }
        self.basic = vec![NONE; self.m];
        if self.m == 0 {
            return;
        }

        let mut row_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.m];
        let mut active_nnz = vec![0usize; self.nt];
        let mut col_max = vec![0f64; self.nt];
        let candidate = |s: &Self, j: usize| -> bool {
            // Fixed variables stay nonbasic; equality logicals are the
            // fallback of last resort.
            s.lb[j] != s.ub[j]
        };
        for j in 0..self.nt {
            if !candidate(self, j) {
                continue;
            }
            if j < self.n {
                let (rows, vals) = (
                    &self.col_rows[self.col_ptr[j]..self.col_ptr[j + 1]],
                    &self.col_vals[self.col_ptr[j]..self.col_ptr[j + 1]],
                );
                for (&i, &v) in rows.iter().zip(vals) {
                    if v != 0.0 {
                        row_cols[i].push((j, v));
                        active_nnz[j] += 1;
                        col_max[j] = col_max[j].max(v.abs());
                    }
                }
            } else {
                row_cols[j - self.n].push((j, 1.0));
                active_nnz[j] += 1;
                col_max[j] = 1.0;
            }
        }

        let mut row_covered = vec![false; self.m];
        let mut queue: std::collections::VecDeque<usize> = (0..self.nt)
            .filter(|&j| active_nnz[j] == 1 && candidate(self, j))
            .collect();
        let mut chosen = vec![false; self.nt];
        while let Some(j) = queue.pop_front() {
            if chosen[j] || active_nnz[j] != 1 {
                continue;
            }
            let mut hit: Option<(usize, f64)> = None;
            if j < self.n {
                let (rows, vals) = (
                    &self.col_rows[self.col_ptr[j]..self.col_ptr[j + 1]],
                    &self.col_vals[self.col_ptr[j]..self.col_ptr[j + 1]],
                );
                for (&i, &v) in rows.iter().zip(vals) {
                    if v != 0.0 && !row_covered[i] {
                        hit = Some((i, v));
                        break;
                    }
                }
            } else if !row_covered[j - self.n] {
                hit = Some((j - self.n, 1.0));
            }
            let Some((i, v)) = hit else { continue };
            if v.abs() < 0.01 * col_max[j] || v.abs() < 1e-10 {
                continue;
            }
            chosen[j] = true;
            self.basic[i] = j;
            row_covered[i] = true;
            for &(j2, _) in &row_cols[i] {
                if !chosen[j2] && active_nnz[j2] > 0 {
                    active_nnz[j2] -= 1;
                    if active_nnz[j2] == 1 {
                        queue.push_back(j2);
                    }
                }
            }
        }

        // Uncovered rows fall back to their own logical (for equality rows
        // this is the artificial-style start).
        for i in 0..self.m {
            if self.basic[i] == NONE {
                self.basic[i] = self.n + i;
            }
        }
        for p in 0..self.m {
            let j = self.basic[p];
            self.stat[j] = VStat::Basic;
            self.pos_of[j] = p;
        }
    }

    /// Falls back to the all-logical (identity) basis.
    fn identity_basis(&mut self) {
        for j in 0..self.nt {
            self.pos_of[j] = NONE;
            self.rest_nonbasic(j);
        }
        self.basic.clear();
        for i in 0..self.m {
            let j = self.n + i;
            self.basic.push(j);
            self.stat[j] = VStat::Basic;
            self.pos_of[j] = i;
        }
    }

    /// Column-singleton peel producing a fill-reducing elimination order for
    /// the current basis.
    fn peel_order(&self) -> Vec<usize> {
        let m = self.m;
        let mut row_positions: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut active_nnz = vec![0usize; m];
        for (p, &j) in self.basic.iter().enumerate() {
            if j < self.n {
                let (rows, vals) = self.column(j);
                for (&i, &v) in rows.iter().zip(vals) {
                    if v != 0.0 {
                        row_positions[i].push(p);
                        active_nnz[p] += 1;
                    }
                }
            } else {
                row_positions[j - self.n].push(p);
                active_nnz[p] += 1;
            }
        }
        let mut order = Vec::with_capacity(m);
        let mut done = vec![false; m];
        let mut row_gone = vec![false; m];
        let mut queue: std::collections::VecDeque<usize> =
            (0..m).filter(|&p| active_nnz[p] == 1).collect();
        while let Some(p) = queue.pop_front() {
            if done[p] || active_nnz[p] != 1 {
                continue;
            }
            let j = self.basic[p];
            let mut hit = NONE;
            if j < self.n {
                let (rows, vals) = self.column(j);
                for (&i, &v) in rows.iter().zip(vals) {
                    if v != 0.0 && !row_gone[i] {
                        hit = i;
                        break;
                    }
                }
            } else if !row_gone[j - self.n] {
                hit = j - self.n;
            }
            if hit == NONE {
                continue;
            }
            done[p] = true;
            order.push(p);
            row_gone[hit] = true;
            for &p2 in &row_positions[hit] {
                if !done[p2] && active_nnz[p2] > 0 {
                    active_nnz[p2] -= 1;
                    if active_nnz[p2] == 1 {
                        queue.push_back(p2);
                    }
                }
            }
        }
        for p in 0..m {
            if !done[p] {
                order.push(p);
            }
        }
        order
    }

    /// (Re)factorizes the current basis; on singularity falls back to the
    /// identity basis, which always factorizes. Invalidates phase-2 pricing
    /// so reduced costs are recomputed from exact duals.
    fn refactorize(&mut self) -> Result<(), LpError> {
        if self.m == 0 {
            self.lu = None;
            self.etas.clear();
            return Ok(());
        }
        let t0 = Instant::now();
        self.stats.refactorizations += 1;
        self.d_valid = false;
        self.feas_dirty = true;
        // Relabel basis positions into peel order so factorization positions
        // and basis positions coincide (etas are cleared below, so no stale
        // position references survive).
        let order = self.peel_order();
        let old = self.basic.clone();
        for (k, &p) in order.iter().enumerate() {
            self.basic[k] = old[p];
            self.pos_of[old[p]] = k;
        }
        let order: Vec<usize> = (0..self.m).collect();
        let basic = self.basic.clone();
        let n = self.n;
        let col_ptr = &self.col_ptr;
        let col_rows = &self.col_rows;
        let col_vals = &self.col_vals;
        let load = |p: usize, rows: &mut Vec<usize>, vals: &mut Vec<f64>| {
            let j = basic[p];
            if j < n {
                let (a, b) = (col_ptr[j], col_ptr[j + 1]);
                rows.extend_from_slice(&col_rows[a..b]);
                vals.extend_from_slice(&col_vals[a..b]);
            } else {
                rows.push(j - n);
                vals.push(1.0);
            }
        };
        let out = match LuFactors::factorize(self.m, &order, load, LU_PIVOT_TOL, &mut self.ws) {
            Ok(lu) => {
                self.lu = Some(lu);
                self.etas.clear();
                Ok(())
            }
            Err(_) => {
                self.identity_basis();
                let load_id = |p: usize, rows: &mut Vec<usize>, vals: &mut Vec<f64>| {
                    rows.push(p);
                    vals.push(1.0);
                };
                let order: Vec<usize> = (0..self.m).collect();
                match LuFactors::factorize(self.m, &order, load_id, LU_PIVOT_TOL, &mut self.ws) {
                    Ok(lu) => {
                        self.lu = Some(lu);
                        self.etas.clear();
                        Ok(())
                    }
                    Err(_) => Err(LpError::NumericalFailure(
                        "identity basis failed to factorize".into(),
                    )),
                }
            }
        };
        self.stats.time_factor += t0.elapsed();
        out
    }

    /// Recomputes basic values from the current factorization, with one step
    /// of iterative refinement.
    fn recompute_basics(&mut self) {
        if self.m == 0 {
            return;
        }
        let reduced = self.reduced_rhs();
        self.w[..self.m].copy_from_slice(&reduced);
        let lu = self.lu.as_ref().expect("factorized");
        lu.ftran_dense(&mut self.w, &mut self.scratch);
        self.etas.apply_ftran(&mut self.w);
        for p in 0..self.m {
            self.x[self.basic[p]] = self.w[p];
            self.w[p] = 0.0;
        }
        // One refinement pass: r = b~ - B xb, dx = B^-1 r.
        let mut r = reduced;
        for p in 0..self.m {
            let j = self.basic[p];
            let v = self.x[j];
            if v != 0.0 {
                if j < self.n {
                    let (rows, vals) = self.column(j);
                    for (&i, &a) in rows.iter().zip(vals) {
                        r[i] -= a * v;
                    }
                } else {
                    r[j - self.n] -= v;
                }
            }
        }
        self.w[..self.m].copy_from_slice(&r);
        lu.ftran_dense(&mut self.w, &mut self.scratch);
        self.etas.apply_ftran(&mut self.w);
        for p in 0..self.m {
            self.x[self.basic[p]] += self.w[p];
            self.w[p] = 0.0;
        }
    }

    /// `b - N x_N` over nonbasic structural variables.
    fn reduced_rhs(&self) -> Vec<f64> {
        let mut out = self.rhs.clone();
        for j in 0..self.n {
            if self.stat[j] != VStat::Basic && self.x[j] != 0.0 {
                let v = self.x[j];
                let (rows, vals) = self.column(j);
                for (&i, &a) in rows.iter().zip(vals) {
                    out[i] -= a * v;
                }
            }
        }
        // Nonbasic logicals rest at zero; basic ones are solved for.
        out
    }

    fn infeasibility(&self) -> f64 {
        let mut f = 0.0;
        for &j in &self.basic {
            let v = self.x[j];
            if v < self.lb[j] {
                f += self.lb[j] - v;
            } else if v > self.ub[j] {
                f += v - self.ub[j];
            }
        }
        f
    }

    /// Exact duals for the given phase objective, via a dense BTRAN.
    fn compute_duals(&mut self, phase1: bool) {
        let t0 = Instant::now();
        for p in 0..self.m {
            let j = self.basic[p];
            self.cb[p] = if phase1 {
                let v = self.x[j];
                if v < self.lb[j] - self.feas_tol {
                    1.0
                } else if v > self.ub[j] + self.feas_tol {
                    -1.0
                } else {
                    0.0
                }
            } else {
                self.cost[j]
            };
        }
        self.y[..self.m].copy_from_slice(&self.cb[..self.m]);
        if self.m > 0 {
            self.etas.apply_btran(&mut self.y);
            let lu = self.lu.as_ref().expect("factorized");
            lu.btran_dense(&mut self.y, &mut self.scratch);
        }
        self.stats.time_btran += t0.elapsed();
    }

    /// Reduced cost of one column against the dense duals `y`.
    fn reduced_cost_vs_y(&self, j: usize, phase1: bool) -> f64 {
        let c = if phase1 { 0.0 } else { self.cost[j] };
        if j < self.n {
            let (rows, vals) = self.column(j);
            let mut dot = 0.0;
            for (&i, &v) in rows.iter().zip(vals) {
                dot += v * self.y[i];
            }
            c - dot
        } else {
            c - self.y[j - self.n]
        }
    }

    /// Rebuilds the phase-2 reduced-cost array from exact duals and resets
    /// nothing else; devex weights persist.
    fn recompute_d(&mut self) {
        self.compute_duals(false);
        for j in 0..self.nt {
            self.d[j] = if self.stat[j] == VStat::Basic {
                0.0
            } else {
                self.reduced_cost_vs_y(j, false)
            };
        }
        self.d_valid = true;
    }

    /// Entering-variable eligibility: returns the movement direction if the
    /// stored reduced cost makes the column attractive.
    fn eligible(&self, j: usize, d: f64) -> Option<f64> {
        match self.stat[j] {
            VStat::Basic => None,
            VStat::AtLower => {
                if self.lb[j] == self.ub[j] {
                    None
                } else if d > self.opt_tol {
                    Some(1.0)
                } else {
                    None
                }
            }
            VStat::AtUpper => {
                if d < -self.opt_tol {
                    Some(-1.0)
                } else {
                    None
                }
            }
            VStat::FreeNb => {
                if d > self.opt_tol {
                    Some(1.0)
                } else if d < -self.opt_tol {
                    Some(-1.0)
                } else {
                    None
                }
            }
        }
    }

    /// Phase-1 pricing against freshly computed duals (the phase-1 objective
    /// changes shape every iteration, so nothing is cached).
    fn price_phase1(&mut self) -> Option<(usize, f64)> {
        self.compute_duals(true);
        let t0 = Instant::now();
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.nt {
            if self.stat[j] == VStat::Basic {
                continue;
            }
            let d = self.reduced_cost_vs_y(j, true);
            if let Some(dir) = self.eligible(j, d) {
                if self.bland {
                    self.stats.time_price += t0.elapsed();
                    return Some((j, dir));
                }
                let score = d * d / self.devex[j];
                if score > best_score {
                    best_score = score;
                    best = Some((j, dir));
                }
            }
        }
        self.stats.time_price += t0.elapsed();
        best
    }

    /// Phase-2 devex pricing over the maintained reduced costs. Sectional:
    /// scans from a rotating cursor and stops at the first section that
    /// yields a candidate; declares priced-out only after a full wrap.
    fn price_phase2(&mut self) -> Option<(usize, f64)> {
        if !self.d_valid {
            self.recompute_d();
        }
        let t0 = Instant::now();
        if self.bland {
            // Lowest eligible index, full scan.
            for j in 0..self.nt {
                if self.stat[j] == VStat::Basic {
                    continue;
                }
                if let Some(dir) = self.eligible(j, self.d[j]) {
                    self.stats.time_price += t0.elapsed();
                    return Some((j, dir));
                }
            }
            self.stats.time_price += t0.elapsed();
            return None;
        }
        let section = (self.nt / 8).max(4096);
        let mut scanned = 0usize;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        let mut j = self.price_cursor.min(self.nt.saturating_sub(1));
        while scanned < self.nt {
            if self.stat[j] != VStat::Basic {
                let d = self.d[j];
                if let Some(dir) = self.eligible(j, d) {
                    let score = d * d / self.devex[j];
                    if score > best_score {
                        best_score = score;
                        best = Some((j, dir));
                    }
                }
            }
            scanned += 1;
            j += 1;
            if j == self.nt {
                j = 0;
            }
            if best.is_some() && scanned % section == 0 {
                break;
            }
        }
        self.price_cursor = j;
        self.stats.time_price += t0.elapsed();
        best
    }

    /// `w = B^-1 a_q` with sparse right-hand side; support lands in `w_nz`.
    fn ftran_column(&mut self, q: usize) {
        let t0 = Instant::now();
        for &p in &self.w_nz {
            self.w[p] = 0.0;
        }
        self.w_nz.clear();
        if self.m == 0 {
            return;
        }
        if q < self.n {
            let (rows, vals) = (
                &self.col_rows[self.col_ptr[q]..self.col_ptr[q + 1]],
                &self.col_vals[self.col_ptr[q]..self.col_ptr[q + 1]],
            );
            for (&i, &v) in rows.iter().zip(vals) {
                if self.w[i] == 0.0 {
                    self.w_nz.push(i);
                }
                self.w[i] += v;
            }
        } else {
            self.w[q - self.n] = 1.0;
            self.w_nz.push(q - self.n);
        }
        let lu = self.lu.as_ref().expect("factorized");
        lu.ftran_sparse(&mut self.w, &mut self.w_nz, &mut self.ws);
        self.etas
            .apply_ftran_sparse(&mut self.w, &mut self.w_nz, &mut self.ws);
        self.stats.time_ftran += t0.elapsed();
    }

    /// Pivot row `rho = B^-T e_p` (original-row space) and its image
    /// `alpha = rho' A` over all variables (logical columns included).
    fn compute_pivot_row(&mut self, p: usize) {
        let t0 = Instant::now();
        for &i in &self.rho_nz {
            self.rho[i] = 0.0;
        }
        self.rho_nz.clear();
        for &j in &self.alpha_nz {
            self.alpha[j] = 0.0;
        }
        self.alpha_nz.clear();

        self.rho[p] = 1.0;
        self.rho_nz.push(p);
        self.etas
            .apply_btran_sparse(&mut self.rho, &mut self.rho_nz, &mut self.ws);
        let lu = self.lu.as_ref().expect("factorized");
        lu.btran_sparse(&mut self.rho, &mut self.rho_nz, &mut self.ws);

        // alpha over structural columns via the row-major storage, plus the
        // logical identity columns.
        for &i in &self.rho_nz {
            let r = self.rho[i];
            if r == 0.0 {
                continue;
            }
            let (_, _, cols, vals) = self.lp.row(i);
            for (&j, &a) in cols.iter().zip(vals) {
                if self.alpha[j] == 0.0 && a != 0.0 {
                    self.alpha_nz.push(j);
                }
                self.alpha[j] += r * a;
            }
            let lj = self.n + i;
            if self.alpha[lj] == 0.0 && r != 0.0 {
                self.alpha_nz.push(lj);
            }
            self.alpha[lj] += r;
        }
        self.stats.time_btran += t0.elapsed();
    }

    /// Ratio test. Returns the step and the blocking position (`None` for a
    /// bound flip of the entering variable itself).
    fn ratio_test(
        &self,
        q: usize,
        dir: f64,
        phase1: bool,
    ) -> Option<(f64, Option<(usize, f64)>)> {
        let own_range = self.ub[q] - self.lb[q]; // inf if either side open
        let mut theta = if own_range.is_finite() {
            own_range
        } else {
            f64::INFINITY
        };
        let mut theta_from_basic = f64::INFINITY;
        for &p in &self.w_nz {
            let wv = self.w[p];
            if wv.abs() <= self.pivot_tol {
                continue;
            }
            let rate = -dir * wv;
            let j = self.basic[p];
            let (xi, lo, hi) = (self.x[j], self.lb[j], self.ub[j]);
            let t = if rate > 0.0 {
                if phase1 && xi > hi + self.feas_tol {
                    continue; // moving further above: no breakpoint ahead
                }
                let target = if phase1 && xi < lo - self.feas_tol {
                    lo
                } else {
                    hi
                };
                if !target.is_finite() {
                    continue;
                }
                ((target - xi) / rate).max(0.0)
            } else {
                if phase1 && xi < lo - self.feas_tol {
                    continue;
                }
                let target = if phase1 && xi > hi + self.feas_tol {
                    hi
                } else {
                    lo
                };
                if !target.is_finite() {
                    continue;
                }
                ((target - xi) / rate).max(0.0)
            };
            theta_from_basic = theta_from_basic.min(t);
        }
        theta = theta.min(theta_from_basic);
        if !theta.is_finite() {
            return None; // unbounded direction
        }

        if theta_from_basic > theta + 1e-12 || theta_from_basic.is_infinite() {
            // The entering variable hits its own opposite bound first.
            return Some((theta, None));
        }

        // Select among positions whose breakpoint ties the minimum.
        let tie = theta + 1e-10;
        let mut best: Option<(usize, f64)> = None;
        let mut best_mag = 0.0;
        let mut best_var = NONE;
        for &p in &self.w_nz {
            let wv = self.w[p];
            if wv.abs() <= self.pivot_tol {
                continue;
            }
            let rate = -dir * wv;
            let j = self.basic[p];
            let (xi, lo, hi) = (self.x[j], self.lb[j], self.ub[j]);
            let (t, target) = if rate > 0.0 {
                if phase1 && xi > hi + self.feas_tol {
                    continue;
                }
                let target = if phase1 && xi < lo - self.feas_tol {
                    lo
                } else {
                    hi
                };
                if !target.is_finite() {
                    continue;
                }
                (((target - xi) / rate).max(0.0), target)
            } else {
                if phase1 && xi < lo - self.feas_tol {
                    continue;
                }
                let target = if phase1 && xi > hi + self.feas_tol {
                    hi
                } else {
                    lo
                };
                if !target.is_finite() {
                    continue;
                }
                (((target - xi) / rate).max(0.0), target)
            };
            if t <= tie {
                let take = if self.bland {
                    best_var == NONE || j < best_var
                } else {
                    wv.abs() > best_mag || (wv.abs() == best_mag && j < best_var)
                };
                if take {
                    best = Some((p, target));
                    best_mag = wv.abs();
                    best_var = j;
                }
            }
        }
        match best {
            Some((p, target)) => Some((theta, Some((p, target)))),
            // All tying entries were sub-pivot-tolerance; treat as bound flip
            // if possible, otherwise report unboundedness conservatively.
            None => {
                if own_range.is_finite() {
                    Some((own_range, None))
                } else {
                    None
                }
            }
        }
    }

    fn apply_step(&mut self, q: usize, dir: f64, theta: f64) {
        if theta != 0.0 {
            self.x[q] += dir * theta;
            for &p in &self.w_nz {
                let j = self.basic[p];
                self.x[j] -= dir * theta * self.w[p];
            }
        }
    }

    /// Devex weight and reduced-cost maintenance after a pivot of entering
    /// `q` at position `p` (pivot element `alpha_q = w[p]`).
    fn update_pricing_after_pivot(&mut self, q: usize, p: usize, leaving: usize) {
        let alpha_q = self.w[p];
        let d_q = self.d[q];
        let ratio = d_q / alpha_q;
        let gamma_q = self.devex[q].max(1.0);
        let mut overflow = false;
        for k in 0..self.alpha_nz.len() {
            let j = self.alpha_nz[k];
            if j == q {
                continue;
            }
            let a = self.alpha[j];
            if a == 0.0 {
                continue;
            }
            if self.stat[j] != VStat::Basic {
                self.d[j] -= ratio * a;
                let cand = (a / alpha_q) * (a / alpha_q) * gamma_q;
                if cand > self.devex[j] {
                    self.devex[j] = cand;
                    if cand > DEVEX_RESET {
                        overflow = true;
                    }
                }
            }
        }
        self.d[q] = 0.0;
        self.d[leaving] = -ratio;
        self.devex[leaving] = (gamma_q / (alpha_q * alpha_q)).max(1.0);
        if overflow {
            self.devex.iter_mut().for_each(|g| *g = 1.0);
        }
    }

    fn run(&mut self) -> Result<Solution, LpError> {
        if !self.imported {
            self.crash();
        }
        if self.m > 0 {
            self.refactorize()?;
            self.recompute_basics();
        }

        let mut iter = 0usize;
        let mut just_cleaned = false;
        loop {
            iter += 1;
            if iter > self.max_iter {
                return Err(LpError::NumericalFailure(format!(
                    "iteration cap {} exceeded",
                    self.max_iter
                )));
            }

            let phase1 = if self.feas_dirty {
                let f = self.infeasibility();
                if f > self.feas_tol {
                    true
                } else {
                    self.feas_dirty = false;
                    false
                }
            } else {
                false
            };
            self.stats.iterations += 1;
            if phase1 {
                self.stats.phase1_iterations += 1;
                self.d_valid = false;
            }
            let entering = if phase1 {
                self.price_phase1()
            } else {
                self.price_phase2()
            };

            let Some((q, dir)) = entering else {
                // Priced out. Refresh the factorization once to rule out
                // drift, then classify.
                if !just_cleaned && self.m > 0 {
                    self.refactorize()?;
                    self.recompute_basics();
                    just_cleaned = true;
                    continue;
                }
                if phase1 {
                    return Ok(self.finish(SolveStatus::Infeasible));
                }
                return Ok(self.finish(SolveStatus::Optimal));
            };
            just_cleaned = false;

            self.ftran_column(q);
            match self.ratio_test(q, dir, phase1) {
                None => {
                    if phase1 {
                        return Err(LpError::NumericalFailure(
                            "phase 1 direction without breakpoint".into(),
                        ));
                    }
                    return Ok(self.finish(SolveStatus::Unbounded));
                }
                Some((theta, None)) => {
                    self.stats.bound_flips += 1;
                    // Bound flip: no basis change, reduced costs unchanged.
                    self.apply_step(q, dir, theta);
                    self.stat[q] = match self.stat[q] {
                        VStat::AtLower => {
                            self.x[q] = self.ub[q];
                            VStat::AtUpper
                        }
                        VStat::AtUpper => {
                            self.x[q] = self.lb[q];
                            VStat::AtLower
                        }
                        other => other, // free flip impossible: range infinite
                    };
                    self.track_degeneracy(theta);
                }
                Some((theta, Some((p, target)))) => {
                    if !phase1 && self.d_valid {
                        self.compute_pivot_row(p);
                        let leaving = self.basic[p];
                        self.update_pricing_after_pivot(q, p, leaving);
                    }
                    self.apply_step(q, dir, theta);
                    let leaving = self.basic[p];
                    self.x[leaving] = target;
                    self.stat[leaving] = if target == self.lb[leaving] {
                        VStat::AtLower
                    } else {
                        VStat::AtUpper
                    };
                    self.pos_of[leaving] = NONE;
                    self.basic[p] = q;
                    self.stat[q] = VStat::Basic;
                    self.pos_of[q] = p;

                    self.etas.push_from(p, &self.w, &self.w_nz);
                    if self.etas.len() >= REFACTOR_EVERY {
                        self.refactorize()?;
                        self.recompute_basics();
                    }
                    self.track_degeneracy(theta);
                }
            }
        }
    }

    fn track_degeneracy(&mut self, theta: f64) {
        if theta <= DEGEN_EPS {
            self.degen_streak += 1;
            if self.degen_streak >= BLAND_TRIGGER {
                self.bland = true;
            }
        } else {
            self.degen_streak = 0;
            self.bland = false;
        }
    }

    fn finish(&mut self, status: SolveStatus) -> Solution {
        if status == SolveStatus::Optimal && self.m > 0 {
            // Final polish: fresh factorization and refined basic values.
            if self.refactorize().is_ok() {
                self.recompute_basics();
            }
        }
        let x: Vec<f64> = self.x[..self.n].to_vec();
        let objective_value = match status {
            SolveStatus::Optimal => {
                // Kahan summation keeps the income identities tight.
                let mut sum = self.lp.objective_offset();
                let mut c = 0.0;
                for (j, &cj) in self.lp.objective().iter().enumerate() {
                    if cj != 0.0 {
                        let yv = cj * x[j] - c;
                        let t = sum + yv;
                        c = (t - sum) - yv;
                        sum = t;
                    }
                }
                sum
            }
            SolveStatus::Infeasible => f64::NEG_INFINITY,
            SolveStatus::Unbounded => f64::INFINITY,
        };
        Solution {
            status,
            x,
            objective_value,
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::{solve, LinearProgram, Sense, SolveStatus};

    #[test]
    fn single_bound_active() {
        // maximize x s.t. x <= 5, x >= 0
        let mut lp = LinearProgram::new(1);
        lp.set_objective(0, 1.0);
        lp.add_row(Sense::Le, 5.0, &[(0, 1.0)]);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.x[0] - 5.0).abs() < 1e-9);
        assert!((s.objective_value - 5.0).abs() < 1e-9);
    }

    #[test]
    fn two_var_vertex() {
        // maximize 3x+2y s.t. x+y <= 4, x <= 2, x,y >= 0 -> obj 10 at (2,2)
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 3.0);
        lp.set_objective(1, 2.0);
        lp.add_row(Sense::Le, 4.0, &[(0, 1.0), (1, 1.0)]);
        lp.add_row(Sense::Le, 2.0, &[(0, 1.0)]);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective_value - 10.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9);
        assert!((s.x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        // maximize x s.t. x <= 1 and x >= 2
        let mut lp = LinearProgram::new(1);
        lp.set_objective(0, 1.0);
        lp.add_row(Sense::Le, 1.0, &[(0, 1.0)]);
        lp.add_row(Sense::Ge, 2.0, &[(0, 1.0)]);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        // maximize x s.t. x >= 0 (no upper bound)
        let mut lp = LinearProgram::new(1);
        lp.set_objective(0, 1.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, SolveStatus::Unbounded);
    }

    #[test]
    fn equality_and_free_variable() {
        // maximize y s.t. y = 2x - 1, x in [0, 3], y free -> y = 5
        let mut lp = LinearProgram::new(2);
        lp.set_objective(1, 1.0);
        lp.set_bounds(0, 0.0, 3.0);
        lp.set_bounds(1, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_row(Sense::Eq, -1.0, &[(1, 1.0), (0, -2.0)]);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective_value - 5.0).abs() < 1e-9, "{}", s.objective_value);
    }

    #[test]
    fn negative_lower_bounds() {
        // maximize -x s.t. x >= -4 -> x = -4
        let mut lp = LinearProgram::new(1);
        lp.set_objective(0, -1.0);
        lp.set_bounds(0, -4.0, f64::INFINITY);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.x[0] + 4.0).abs() < 1e-9);
    }

    #[test]
    fn objective_offset_included() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(0, 1.0);
        lp.set_objective_offset(100.0);
        lp.add_row(Sense::Le, 5.0, &[(0, 1.0)]);
        let s = solve(&lp).unwrap();
        assert!((s.objective_value - 105.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_rhs_zero() {
        // maximize x + y s.t. x + y <= 0, x - y = 0, bounds [0, 1]
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, 1.0);
        lp.set_bounds(0, 0.0, 1.0);
        lp.set_bounds(1, 0.0, 1.0);
        lp.add_row(Sense::Le, 0.0, &[(0, 1.0), (1, 1.0)]);
        lp.add_row(Sense::Eq, 0.0, &[(0, 1.0), (1, -1.0)]);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!(s.objective_value.abs() < 1e-9);
    }

    #[test]
    fn fixed_variable_respected() {
        // x fixed at 2, maximize x + y, y <= 3 - x
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, 1.0);
        lp.set_bounds(0, 2.0, 2.0);
        lp.add_row(Sense::Le, 3.0, &[(0, 1.0), (1, 1.0)]);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.x[0] - 2.0).abs() < 1e-12);
        assert!((s.objective_value - 3.0).abs() < 1e-9);
    }
}
