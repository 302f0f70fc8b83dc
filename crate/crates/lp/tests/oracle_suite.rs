//! Cross-checks the simplex against brute-force vertex enumeration on seeded
//! random box-bounded programs, plus a determinism check.

use wsbid_lp::oracle::{random_bounded_lp, vertex_enumerate, OracleResult};
use wsbid_lp::{check_feasible, solve, SolveStatus};

#[test]
fn solver_matches_vertex_enumeration_on_300_seeds() {
    let mut optimal = 0;
    let mut infeasible = 0;
    for seed in 0..300u64 {
        let lp = random_bounded_lp(seed);
        let sol = solve(&lp).unwrap_or_else(|e| panic!("seed {seed}: solver error {e}"));
        let reference = vertex_enumerate(&lp);
        match (&sol.status, &reference) {
            (SolveStatus::Optimal, OracleResult::Optimal { objective, .. }) => {
                assert!(
                    (sol.objective_value - objective).abs() <= 1e-6,
                    "seed {seed}: solver {} vs oracle {objective}\n{}",
                    sol.objective_value,
                    lp.dump()
                );
                let rep = check_feasible(&lp, &sol.x).unwrap();
                assert!(
                    rep.is_within(1e-7),
                    "seed {seed}: solver point infeasible: {rep:?}"
                );
                optimal += 1;
            }
            (SolveStatus::Infeasible, OracleResult::Infeasible) => {
                infeasible += 1;
            }
            (got, want) => panic!(
                "seed {seed}: status mismatch solver={got:?} oracle={want:?}\n{}",
                lp.dump()
            ),
        }
    }
    // The generator should produce a healthy mix of both outcomes.
    assert!(optimal >= 100, "only {optimal} optimal instances");
    assert!(infeasible >= 20, "only {infeasible} infeasible instances");
}

#[test]
fn identical_inputs_give_identical_solutions() {
    for seed in [3u64, 17, 92] {
        let lp = random_bounded_lp(seed);
        let a = solve(&lp).unwrap();
        let b = solve(&lp).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
        for (xa, xb) in a.x.iter().zip(&b.x) {
            assert_eq!(xa.to_bits(), xb.to_bits());
        }
    }
}
