//! Day-level behavior: perfect-information consistency between the two
//! frameworks, the relaxation inequality, and comparison aggregation.

use wsbid_core::{
    build_framework_a, build_phase, compare, phase_scenario_sets, price_scenarios,
    regulation_scenarios, run_day_a, run_day_b, synth_generate, wind_scenarios, FixedDecisions,
    PhaseId, PipelineConfig, RealizedDay, ScenarioSet, SynthConfig, SystemParams,
};
use wsbid_lp::solve;

fn params() -> SystemParams {
    SystemParams {
        rated_wind_power: 40.0,
        ess_capacity: 20.0,
        ess_power_limit: 10.0,
        eta_in: 0.9,
        eta_out: 0.9,
        initial_energy: 10.0,
        soc_min: 0.1,
        kappa_rm: 1.2,
        r_rm_up: 0.5,
    }
}

fn small_cfg(seed: u64, n_days: usize) -> SynthConfig {
    SynthConfig {
        seed,
        n_days,
        history_days: 40,
        ..SynthConfig::default()
    }
}

fn singleton(day: &RealizedDay) -> ScenarioSet {
    ScenarioSet::singleton(day.wind, day.prices.clone(), day.regulation)
}

#[test]
fn perfect_information_makes_frameworks_agree() {
    let data = synth_generate(&small_cfg(11, 3)).unwrap();
    for day_data in &data.days {
        let day = &day_data.realized;
        let set = singleton(day);
        let a = run_day_a(&params(), &set, day).unwrap();
        let sets = [set.clone(), set.clone(), set.clone(), set.clone()];
        let b = run_day_b(&params(), &sets, day).unwrap();
        assert!(
            (a.realized.total - b.realized.total).abs() < 1e-6,
            "a {} vs b {}",
            a.realized.total,
            b.realized.total
        );
        // With the scenario equal to the realized day, the expectation is
        // exact for both frameworks.
        assert!((a.expected.total - a.realized.total).abs() < 1e-6);
        assert!((b.expected.total - b.realized.total).abs() < 1e-6);
    }
}

#[test]
fn phase1_relaxes_framework_a() {
    let data = synth_generate(&small_cfg(5, 2)).unwrap();
    let prices = price_scenarios(&data.price_history, 4, 3).unwrap();
    let regulation = regulation_scenarios(&data.regulation_history, 2, 4).unwrap();
    for day_data in &data.days {
        let wind = wind_scenarios(&day_data.snapshots[0]).unwrap();
        let set = wsbid_core::combine(&wind, &prices, &regulation).unwrap();
        let (lp_a, _) = build_framework_a(&params(), &set).unwrap();
        let (lp_p1, _) =
            build_phase(PhaseId::BPhase1, &params(), &set, FixedDecisions::none()).unwrap();
        let obj_a = solve(&lp_a).unwrap().objective_value;
        let obj_p1 = solve(&lp_p1).unwrap().objective_value;
        assert!(
            obj_p1 >= obj_a - 1e-6,
            "phase 1 {obj_p1} must relax framework A {obj_a}"
        );
    }
}

#[test]
fn run_day_b_reports_all_phase_durations() {
    let data = synth_generate(&small_cfg(9, 1)).unwrap();
    let prices = price_scenarios(&data.price_history, 3, 3).unwrap();
    let regulation = regulation_scenarios(&data.regulation_history, 2, 4).unwrap();
    let day = &data.days[0];
    let sets = phase_scenario_sets(&day.snapshots, &prices, &regulation, &day.realized).unwrap();
    assert_eq!(sets[0].len(), 3 * 3 * 2);
    // Phase 4 collapses all price scenarios onto the realized day.
    assert_eq!(sets[3].len(), 3 * 2);
    let b = run_day_b(&params(), &sets, &day.realized).unwrap();
    for (k, d) in b.phase_durations.iter().enumerate() {
        assert!(d.as_nanos() > 0, "phase {k} duration missing");
    }
    b.commitments.validate(&params()).unwrap();
}

#[test]
fn compare_single_day_echoes_delta() {
    let data = synth_generate(&small_cfg(13, 1)).unwrap();
    let pipeline = PipelineConfig {
        k_price_clusters: 3,
        k_regulation_clusters: 2,
        ..PipelineConfig::default()
    };
    let report = compare(&params(), &data, 1, &pipeline).unwrap();
    assert_eq!(report.n_days, 1);
    let (a, b) = &report.days[0];
    let delta = b.realized.total - a.realized.total;
    assert!((report.mean_daily_delta - delta).abs() < 1e-9);
    let expect_rate = if delta > 0.0 { 1.0 } else { 0.0 };
    assert_eq!(report.win_rate_b_over_a, expect_rate);
}

#[test]
fn compare_is_reproducible() {
    let data = synth_generate(&small_cfg(21, 2)).unwrap();
    let pipeline = PipelineConfig {
        k_price_clusters: 3,
        k_regulation_clusters: 2,
        ..PipelineConfig::default()
    };
    let r1 = compare(&params(), &data, 2, &pipeline).unwrap();
    let r2 = compare(&params(), &data, 2, &pipeline).unwrap();
    assert_eq!(r1.mean_daily_delta.to_bits(), r2.mean_daily_delta.to_bits());
    assert_eq!(r1.win_rate_b_over_a, r2.win_rate_b_over_a);
    for ((a1, b1), (a2, b2)) in r1.days.iter().zip(&r2.days) {
        assert_eq!(a1.realized.total.to_bits(), a2.realized.total.to_bits());
        assert_eq!(b1.realized.total.to_bits(), b2.realized.total.to_bits());
    }
}
