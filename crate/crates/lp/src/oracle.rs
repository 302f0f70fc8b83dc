//! Brute-force reference for small box-bounded programs: enumerates every
//! candidate vertex (all n-subsets of rows-as-equalities and active bounds)
//! and takes the feasible maximum. Exponential; meant for test suites that
//! cross-check the simplex, never for production solves. Kept deliberately
//! independent of the solver internals: the only shared code is the
//! `LinearProgram` accessors.

use crate::{LinearProgram, Sense};

/// Outcome of the enumeration.
#[derive(Debug, Clone)]
pub enum OracleResult {
    Infeasible,
    Optimal { objective: f64, x: Vec<f64> },
}

const FEAS_TOL: f64 = 1e-7;

/// Enumerates vertices of a program whose variable bounds are all finite.
///
/// A nonempty box-bounded polyhedron has an optimal vertex, so the maximum
/// over feasible candidates is the true optimum and an empty candidate set
/// proves infeasibility.
///
/// Panics if any bound is infinite or the problem has more than 10 variables.
pub fn vertex_enumerate(lp: &LinearProgram) -> OracleResult {
    let n = lp.num_vars();
    assert!(n <= 10, "oracle is exponential; use small instances");
    let m = lp.num_rows();
    for j in 0..n {
        let (l, u) = lp.bounds(j);
        assert!(
            l.is_finite() && u.is_finite(),
            "oracle requires finite bounds"
        );
    }

    // Candidate hyperplanes: every row as equality, then both bounds.
    // Encoded as (coeffs over n, rhs).
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..m {
        let (_, rhs, cols, vals) = lp.row(i);
        let mut a = vec![0.0; n];
        for (&c, &v) in cols.iter().zip(vals) {
            a[c] += v;
        }
        planes.push((a, rhs));
    }
    for j in 0..n {
        let (l, u) = lp.bounds(j);
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        planes.push((a.clone(), l));
        planes.push((a, u));
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subset: Vec<usize> = (0..n).collect();
    if planes.len() < n {
        return OracleResult::Infeasible;
    }
    loop {
        if let Some(x) = solve_square(&planes, &subset, n) {
            if is_feasible(lp, &x) {
                let obj = objective_at(lp, &x);
                match &best {
                    Some((b, _)) if *b >= obj => {}
                    _ => best = Some((obj, x)),
                }
            }
        }
        // Next n-combination of plane indices.
        let k = planes.len();
        let mut i = n;
        loop {
            if i == 0 {
                return match best {
                    Some((objective, x)) => OracleResult::Optimal { objective, x },
                    None => OracleResult::Infeasible,
                };
            }
            i -= 1;
            if subset[i] != i + k - n {
                subset[i] += 1;
                for t in i + 1..n {
                    subset[t] = subset[t - 1] + 1;
                }
                break;
            }
        }
    }
}

fn objective_at(lp: &LinearProgram, x: &[f64]) -> f64 {
    let mut obj = lp.objective_offset();
    for (j, &c) in lp.objective().iter().enumerate() {
        obj += c * x[j];
    }
    obj
}

fn is_feasible(lp: &LinearProgram, x: &[f64]) -> bool {
    for j in 0..lp.num_vars() {
        let (l, u) = lp.bounds(j);
        if x[j] < l - FEAS_TOL || x[j] > u + FEAS_TOL {
            return false;
        }
    }
    for i in 0..lp.num_rows() {
        let (sense, rhs, cols, vals) = lp.row(i);
        let ax: f64 = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        let ok = match sense {
            Sense::Le => ax <= rhs + FEAS_TOL,
            Sense::Ge => ax >= rhs - FEAS_TOL,
            Sense::Eq => (ax - rhs).abs() <= FEAS_TOL,
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Solves the n x n system given by the selected planes; `None` when singular.
fn solve_square(planes: &[(Vec<f64>, f64)], subset: &[usize], n: usize) -> Option<Vec<f64>> {
    let mut a = vec![vec![0.0; n + 1]; n];
    for (r, &pi) in subset.iter().enumerate() {
        let (coeffs, rhs) = &planes[pi];
        a[r][..n].copy_from_slice(coeffs);
        a[r][n] = *rhs;
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = a[r][n];
        for c in r + 1..n {
            acc -= a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    Some(x)
}

/// Tiny deterministic generator (splitmix64) so the oracle suite does not
/// depend on an RNG crate.
pub struct MiniRng(u64);

impl MiniRng {
    pub fn new(seed: u64) -> Self {
        MiniRng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in `0..k`.
    pub fn below(&mut self, k: u64) -> u64 {
        self.next_u64() % k
    }

    /// Uniform integer in `lo..=hi` as f64.
    pub fn int_in(&mut self, lo: i64, hi: i64) -> f64 {
        (lo + self.below((hi - lo + 1) as u64) as i64) as f64
    }
}

/// Seeded random box-bounded program with <= 5 variables and <= 6 rows,
/// integer data, suitable for the vertex-enumeration oracle.
pub fn random_bounded_lp(seed: u64) -> LinearProgram {
    let mut rng = MiniRng::new(seed);
    let n = 1 + rng.below(5) as usize;
    let m = rng.below(7) as usize;
    let mut lp = LinearProgram::new(n);
    for j in 0..n {
        let lo = rng.int_in(-3, 1);
        let hi = lo + rng.int_in(1, 6);
        lp.set_bounds(j, lo, hi);
        lp.set_objective(j, rng.int_in(-4, 4));
    }
    for _ in 0..m {
        let mut terms = Vec::new();
        for j in 0..n {
            let c = rng.int_in(-3, 3);
            if c != 0.0 {
                terms.push((j, c));
            }
        }
        if terms.is_empty() {
            terms.push((rng.below(n as u64) as usize, 1.0));
        }
        let sense = match rng.below(4) {
            0 => Sense::Ge,
            1 => Sense::Eq,
            _ => Sense::Le,
        };
        let rhs = rng.int_in(-6, 8);
        lp.add_row(sense, rhs, &terms);
    }
    lp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_matches_hand_example() {
        // maximize 3x+2y s.t. x+y <= 4, x <= 2, x,y in [0, 10]
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 3.0);
        lp.set_objective(1, 2.0);
        lp.set_bounds(0, 0.0, 10.0);
        lp.set_bounds(1, 0.0, 10.0);
        lp.add_row(Sense::Le, 4.0, &[(0, 1.0), (1, 1.0)]);
        lp.add_row(Sense::Le, 2.0, &[(0, 1.0)]);
        match vertex_enumerate(&lp) {
            OracleResult::Optimal { objective, .. } => {
                assert!((objective - 10.0).abs() < 1e-9)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn oracle_detects_infeasible_box() {
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, 0.0, 1.0);
        lp.add_row(Sense::Ge, 5.0, &[(0, 1.0)]);
        assert!(matches!(vertex_enumerate(&lp), OracleResult::Infeasible));
    }
}
