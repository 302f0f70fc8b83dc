//! Day-level orchestration: run a day under either framework, replay fixed
//! commitments against realized data, generate synthetic datasets, and
//! aggregate multi-day comparisons.

use crate::builder::{
    build_framework_a, build_phase, expected_income_breakdown, extract_commitments,
    extract_trace, BuildError, FixedDecisions, PhaseId,
};
use crate::market::{
    CommitmentSchedule, DayPrices, IncomeBreakdown, ModelError, RecourseTrace, RegulationPair,
    ScenarioSet, SystemParams, WindCurve, HOURS,
};
use crate::scenario::{
    all_price_columns, collapse_to_realized, combine, price_scenarios, regulation_scenarios,
    wind_scenarios, ForecastSnapshot, PriceField, RealizedComponent, ScenarioError,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::{Duration, Instant};
use thiserror::Error;
use wsbid_lp::{solve, LpError, SolveStatus};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Solver(#[from] LpError),
    #[error("recourse solve ended {0:?}; expected optimal")]
    BadRecourse(SolveStatus),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, EvalError> {
    Err(EvalError::Invalid(msg.into()))
}

/// What actually happened on the trading day.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedDay {
    pub wind: WindCurve,
    pub prices: DayPrices,
    pub regulation: RegulationPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Framework {
    A,
    B,
}

impl Framework {
    pub fn label(&self) -> &'static str {
        match self {
            Framework::A => "a",
            Framework::B => "b",
        }
    }
}

/// Outcome of running one framework over one day.
#[derive(Debug, Clone)]
pub struct DayResult {
    pub framework: Framework,
    pub commitments: CommitmentSchedule,
    /// Expectation at the last decision point (all commitments fixed,
    /// remaining uncertainty priced in).
    pub expected: IncomeBreakdown,
    /// Income from replaying the commitments against the realized day.
    pub realized: IncomeBreakdown,
    pub realized_trace: RecourseTrace,
    /// Wall-clock build+solve time per phase; the single-phase framework
    /// fills only the first slot.
    pub phase_durations: [Duration; 4],
}

/// Aggregate of a multi-day framework comparison.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub n_days: usize,
    pub win_rate_b_over_a: f64,
    pub mean_daily_delta: f64,
    /// Mean delta divided by the mean realized income of the single-phase
    /// framework.
    pub mean_relative_improvement: f64,
    pub mean_a: IncomeBreakdown,
    pub mean_b: IncomeBreakdown,
    pub days: Vec<(DayResult, DayResult)>,
}

/// Knobs of the synthetic data generator (stand-in for historical feeds).
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_days: usize,
    /// Days of price/regulation history available for clustering.
    pub history_days: usize,
    /// Mean energy price level (EUR/MWh).
    pub price_level: f64,
    /// Day-to-day multiplicative price volatility (>= 0).
    pub price_volatility: f64,
    /// Mean available wind (MW).
    pub wind_level: f64,
    /// Hour-to-hour relative wind variation (>= 0).
    pub wind_volatility: f64,
    /// Relative forecast error at decay 1.0.
    pub forecast_base_error: f64,
    /// Error decay per forecast snapshot; non-increasing, in [0, 1].
    pub forecast_error_decay: [f64; 4],
    /// Mean fraction of the regulation band called by the operator.
    pub regulation_activity: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            n_days: 60,
            history_days: 365,
            price_level: 50.0,
            price_volatility: 0.15,
            wind_level: 20.0,
            wind_volatility: 0.35,
            forecast_base_error: 0.25,
            forecast_error_decay: [1.0, 0.6, 0.3, 0.1],
            regulation_activity: 0.3,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.n_days == 0 {
            return invalid("n_days must be at least 1");
        }
        if self.history_days < 2 {
            return invalid("history_days must be at least 2");
        }
        for (name, v) in [
            ("price_level", self.price_level),
            ("wind_level", self.wind_level),
        ] {
            if !(v > 0.0) {
                return invalid(format!("{name} must be positive"));
            }
        }
        for (name, v) in [
            ("price_volatility", self.price_volatility),
            ("wind_volatility", self.wind_volatility),
            ("forecast_base_error", self.forecast_base_error),
        ] {
            if !(v >= 0.0) {
                return invalid(format!("{name} must be >= 0"));
            }
        }
        let d = &self.forecast_error_decay;
        for k in 0..4 {
            if !(0.0..=1.0).contains(&d[k]) {
                return invalid("forecast_error_decay entries must lie in [0,1]");
            }
            if k > 0 && d[k] > d[k - 1] {
                return invalid("forecast_error_decay must be non-increasing");
            }
        }
        if !(0.0..=1.0).contains(&self.regulation_activity) {
            return invalid("regulation_activity must lie in [0,1]");
        }
        Ok(())
    }
}

/// One synthetic or ingested trading day: the four forecast snapshots plus
/// what actually happened.
#[derive(Debug, Clone)]
pub struct DayData {
    pub snapshots: [ForecastSnapshot; 4],
    pub realized: RealizedDay,
}

/// Everything the pipeline consumes: clustering history plus per-day data.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub price_history: Vec<DayPrices>,
    pub regulation_history: Vec<RegulationPair>,
    pub days: Vec<DayData>,
}

/// Scenario-pipeline settings (cluster counts and seed); defaults follow the
/// 3 x 10 x 3 layout.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub k_price_clusters: usize,
    pub k_regulation_clusters: usize,
    pub cluster_seed: u64,
    /// Which forecast snapshot the single-phase framework uses (1-based).
    pub framework_a_snapshot: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k_price_clusters: 10,
            k_regulation_clusters: 3,
            cluster_seed: 1,
            framework_a_snapshot: 1,
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; two uniforms per draw keeps the stream layout simple.
    let u1: f64 = rng.gen::<f64>().max(1e-12);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn synth_price_day(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> DayPrices {
    let day_factor = (cfg.price_volatility * gaussian(rng)).exp();
    let mut p = DayPrices::zero();
    for t in 0..HOURS {
        let diurnal =
            1.0 + 0.25 * ((t as f64 - 15.0) / 24.0 * std::f64::consts::TAU).cos();
        let base = (cfg.price_level * day_factor * diurnal * (1.0 + 0.05 * gaussian(rng)))
            .max(0.0);
        p.beta_dam[t] = base;
        p.beta_idm[t] = (base * (1.0 + 0.04 * gaussian(rng))).max(0.0);
        p.gamma_rm[t] = (0.12 * cfg.price_level * day_factor * (1.0 + 0.2 * gaussian(rng)))
            .max(0.0);
        p.beta_rm_up[t] = (base * (1.1 + 0.05 * gaussian(rng))).max(0.0);
        p.beta_rm_dw[t] = (base * (0.9 + 0.05 * gaussian(rng))).max(0.0);
        // Two-price settlement brackets the day-ahead price.
        let spread_up: f64 = 0.1 + 0.25 * rng.gen::<f64>();
        let spread_dw: f64 = 0.1 + 0.25 * rng.gen::<f64>();
        p.lambda_bm_up[t] = (base * (1.0 - spread_up)).max(0.0);
        p.lambda_bm_dw[t] = base * (1.0 + spread_dw);
    }
    p
}

fn synth_regulation_pair(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> RegulationPair {
    let draw = |rng: &mut ChaCha8Rng| {
        (cfg.regulation_activity + 0.2 * gaussian(rng)).clamp(0.0, 1.0)
    };
    RegulationPair {
        pi_up: draw(rng),
        pi_dw: draw(rng),
    }
}

fn synth_wind_day(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> WindCurve {
    let day_factor = (0.4 * gaussian(rng)).exp();
    let phase: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    let mut w = [0.0; HOURS];
    for (t, slot) in w.iter_mut().enumerate() {
        let diurnal = 1.0 + 0.4 * ((t as f64 / 24.0) * std::f64::consts::TAU + phase).sin();
        *slot = (cfg.wind_level * day_factor * diurnal
            * (1.0 + cfg.wind_volatility * gaussian(rng)))
        .max(0.0);
    }
    WindCurve(w)
}

fn synth_snapshot(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    realized: &WindCurve,
    k: usize,
) -> ForecastSnapshot {
    let sd = cfg.forecast_base_error * cfg.forecast_error_decay[k];
    let mut p50 = [0.0; HOURS];
    for t in 0..HOURS {
        p50[t] = (realized.0[t] * (1.0 + sd * gaussian(rng))).max(0.0);
    }
    // Quartile half-width of the multiplicative error model.
    let half = 0.6745 * sd;
    let mut p25 = [0.0; HOURS];
    let mut p75 = [0.0; HOURS];
    for t in 0..HOURS {
        p25[t] = (p50[t] * (1.0 - half)).max(0.0);
        p75[t] = p50[t] * (1.0 + half);
    }
    ForecastSnapshot {
        issue_label: (k + 1) as u8,
        p25: WindCurve(p25),
        p50: WindCurve(p50),
        p75: WindCurve(p75),
    }
}

/// Seeded synthetic dataset: price and regulation history for clustering,
/// plus per-day forecast snapshots and realized values. Identical config
/// gives identical output; each day draws from its own derived stream, so
/// the per-day data is independent of `n_days`.
pub fn synth_generate(cfg: &SynthConfig) -> Result<Dataset, EvalError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let price_history: Vec<DayPrices> = (0..cfg.history_days)
        .map(|_| synth_price_day(&mut rng, cfg))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(2);
    let regulation_history: Vec<RegulationPair> = (0..cfg.history_days)
        .map(|_| synth_regulation_pair(&mut rng, cfg))
        .collect();

    let mut days = Vec::with_capacity(cfg.n_days);
    for d in 0..cfg.n_days {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (d as u64));
        rng.set_stream(1000 + d as u64);
        let wind = synth_wind_day(&mut rng, cfg);
        let prices = synth_price_day(&mut rng, cfg);
        let regulation = synth_regulation_pair(&mut rng, cfg);
        let snapshots = [
            synth_snapshot(&mut rng, cfg, &wind, 0),
            synth_snapshot(&mut rng, cfg, &wind, 1),
            synth_snapshot(&mut rng, cfg, &wind, 2),
            synth_snapshot(&mut rng, cfg, &wind, 3),
        ];
        days.push(DayData {
            snapshots,
            realized: RealizedDay {
                wind,
                prices,
                regulation,
            },
        });
    }
    Ok(Dataset {
        price_history,
        regulation_history,
        days,
    })
}

/// Replays fixed commitments against the realized day: the real-time model
/// with a single scenario and every decision fixed. The balancing market
/// absorbs any imbalance, so the recourse program is feasible by
/// construction.
pub fn ex_post_evaluate(
    params: &SystemParams,
    commitments: &CommitmentSchedule,
    day: &RealizedDay,
) -> Result<(IncomeBreakdown, RecourseTrace), EvalError> {
    commitments.validate(params)?;
    let set = ScenarioSet::singleton(day.wind, day.prices.clone(), day.regulation);
    let fixed = FixedDecisions {
        p_dam: Some(commitments.p_dam),
        p_rm: Some((commitments.p_rm_up, commitments.p_rm_dw)),
        p_idm: Some(commitments.p_idm),
    };
    let (lp, idx) = build_phase(PhaseId::BPhase4, params, &set, fixed)?;
    let sol = solve(&lp)?;
    if sol.status != SolveStatus::Optimal {
        return Err(EvalError::BadRecourse(sol.status));
    }
    let breakdown = expected_income_breakdown(&sol, &idx, &set)?;
    let trace = extract_trace(&sol, &idx, 0)?;
    Ok((breakdown, trace))
}

/// Builds and solves the single-phase model, then replays its commitments
/// against the realized day.
pub fn run_day_a(
    params: &SystemParams,
    scenarios: &ScenarioSet,
    day: &RealizedDay,
) -> Result<DayResult, EvalError> {
    let t0 = Instant::now();
    let (lp, idx) = build_framework_a(params, scenarios)?;
    let sol = solve(&lp)?;
    if sol.status != SolveStatus::Optimal {
        return Err(EvalError::BadRecourse(sol.status));
    }
    let duration = t0.elapsed();
    let expected = expected_income_breakdown(&sol, &idx, scenarios)?;
    let commitments = extract_commitments(&sol, &idx)?.into_schedule()?;
    let (realized, realized_trace) = ex_post_evaluate(params, &commitments, day)?;
    Ok(DayResult {
        framework: Framework::A,
        commitments,
        expected,
        realized,
        realized_trace,
        phase_durations: [duration, Duration::ZERO, Duration::ZERO, Duration::ZERO],
    })
}

/// Builds the four phase scenario sets from the day's forecast snapshots and
/// the cluster-derived price/regulation families, collapsing what each phase
/// already knows: phase 2 sees realized day-ahead prices, phase 3 also the
/// reserve band price, phase 4 every price.
pub fn phase_scenario_sets(
    snapshots: &[ForecastSnapshot; 4],
    prices: &[(DayPrices, f64)],
    regulation: &[(RegulationPair, f64)],
    realized: &RealizedDay,
) -> Result<[ScenarioSet; 4], EvalError> {
    let p1 = combine(&wind_scenarios(&snapshots[0])?, prices, regulation)?;
    let p2 = collapse_to_realized(
        &combine(&wind_scenarios(&snapshots[1])?, prices, regulation)?,
        &[RealizedComponent::PriceColumn(
            PriceField::BetaDam,
            realized.prices.beta_dam,
        )],
    );
    let p3 = collapse_to_realized(
        &combine(&wind_scenarios(&snapshots[2])?, prices, regulation)?,
        &[
            RealizedComponent::PriceColumn(PriceField::BetaDam, realized.prices.beta_dam),
            RealizedComponent::PriceColumn(PriceField::GammaRm, realized.prices.gamma_rm),
        ],
    );
    let p4 = collapse_to_realized(
        &combine(&wind_scenarios(&snapshots[3])?, prices, regulation)?,
        &all_price_columns(&realized.prices),
    );
    Ok([p1, p2, p3, p4])
}

/// Runs the four sequential phases, threading each phase's decisions into
/// the next, then replays the final commitments against the realized day.
pub fn run_day_b(
    params: &SystemParams,
    phase_sets: &[ScenarioSet; 4],
    day: &RealizedDay,
) -> Result<DayResult, EvalError> {
    let phases = [
        PhaseId::BPhase1,
        PhaseId::BPhase2,
        PhaseId::BPhase3,
        PhaseId::BPhase4,
    ];
    let mut fixed = FixedDecisions::none();
    let mut durations = [Duration::ZERO; 4];
    let mut last_expected: Option<IncomeBreakdown> = None;
    for (k, &phase) in phases.iter().enumerate() {
        let t0 = Instant::now();
        let (lp, idx) = build_phase(phase, params, &phase_sets[k], fixed.clone())?;
        let sol = solve(&lp)?;
        if sol.status != SolveStatus::Optimal {
            return Err(EvalError::BadRecourse(sol.status));
        }
        durations[k] = t0.elapsed();
        let decided = extract_commitments(&sol, &idx)?;
        fixed = fixed.merge(decided)?;
        last_expected = Some(expected_income_breakdown(&sol, &idx, &phase_sets[k])?);
    }
    let expected = last_expected.expect("four phases ran");
    let commitments = fixed.into_schedule()?;
    let (realized, realized_trace) = ex_post_evaluate(params, &commitments, day)?;
    Ok(DayResult {
        framework: Framework::B,
        commitments,
        expected,
        realized,
        realized_trace,
        phase_durations: durations,
    })
}

/// Runs both frameworks on the same data for `n_days` days and aggregates
/// the comparison. Days are evaluated in parallel; every day's computation
/// is deterministic, so parallel and serial runs produce identical reports.
pub fn compare(
    params: &SystemParams,
    data: &Dataset,
    n_days: usize,
    pipeline: &PipelineConfig,
) -> Result<ComparisonReport, EvalError> {
    if n_days == 0 {
        return invalid("n_days must be at least 1");
    }
    if data.days.len() < n_days {
        return invalid(format!(
            "dataset has {} days, requested {n_days}",
            data.days.len()
        ));
    }
    if pipeline.framework_a_snapshot == 0 || pipeline.framework_a_snapshot > 4 {
        return invalid("framework_a_snapshot must lie in 1..=4");
    }
    let prices = price_scenarios(
        &data.price_history,
        pipeline.k_price_clusters,
        pipeline.cluster_seed,
    )?;
    let regulation = regulation_scenarios(
        &data.regulation_history,
        pipeline.k_regulation_clusters,
        pipeline.cluster_seed.wrapping_add(1),
    )?;

    let days: Vec<(DayResult, DayResult)> = data.days[..n_days]
        .par_iter()
        .map(|day_data| -> Result<(DayResult, DayResult), EvalError> {
            let a_snapshot = &day_data.snapshots[pipeline.framework_a_snapshot - 1];
            let a_set = combine(&wind_scenarios(a_snapshot)?, &prices, &regulation)?;
            let a = run_day_a(params, &a_set, &day_data.realized)?;
            let sets =
                phase_scenario_sets(&day_data.snapshots, &prices, &regulation, &day_data.realized)?;
            let b = run_day_b(params, &sets, &day_data.realized)?;
            Ok((a, b))
        })
        .collect::<Result<_, _>>()?;

    let nf = n_days as f64;
    let mut wins = 0usize;
    let mut delta_sum = 0.0;
    let mut sum_a = [0.0f64; 4];
    let mut sum_b = [0.0f64; 4];
    for (a, b) in &days {
        if b.realized.total > a.realized.total {
            wins += 1;
        }
        delta_sum += b.realized.total - a.realized.total;
        for (acc, inc) in [(&mut sum_a, &a.realized), (&mut sum_b, &b.realized)] {
            acc[0] += inc.i_dam;
            acc[1] += inc.i_idm;
            acc[2] += inc.i_bm;
            acc[3] += inc.i_rm;
        }
    }
    let mean_a =
        IncomeBreakdown::from_parts(sum_a[0] / nf, sum_a[1] / nf, sum_a[2] / nf, sum_a[3] / nf);
    let mean_b =
        IncomeBreakdown::from_parts(sum_b[0] / nf, sum_b[1] / nf, sum_b[2] / nf, sum_b[3] / nf);
    let mean_daily_delta = delta_sum / nf;
    let mean_relative_improvement = if mean_a.total.abs() > 0.0 {
        mean_daily_delta / mean_a.total
    } else {
        0.0
    };
    Ok(ComparisonReport {
        n_days,
        win_rate_b_over_a: wins as f64 / nf,
        mean_daily_delta,
        mean_relative_improvement,
        mean_a,
        mean_b,
        days,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn synth_is_deterministic() {
        let cfg = SynthConfig {
            n_days: 3,
            history_days: 12,
            ..SynthConfig::default()
        };
        let a = synth_generate(&cfg).unwrap();
        let b = synth_generate(&cfg).unwrap();
        assert_eq!(a.price_history, b.price_history);
        assert_eq!(a.regulation_history, b.regulation_history);
        for (da, db) in a.days.iter().zip(&b.days) {
            assert_eq!(da.realized, db.realized);
            assert_eq!(da.snapshots, db.snapshots);
        }
    }

    #[test]
    fn synth_day_data_is_stable_under_n_days() {
        let mut cfg = SynthConfig {
            n_days: 2,
            history_days: 8,
            ..SynthConfig::default()
        };
        let short = synth_generate(&cfg).unwrap();
        cfg.n_days = 5;
        let long = synth_generate(&cfg).unwrap();
        assert_eq!(short.days[1].realized, long.days[1].realized);
    }

    #[test]
    fn synth_prices_bracket_day_ahead() {
        let cfg = SynthConfig {
            n_days: 2,
            history_days: 30,
            ..SynthConfig::default()
        };
        let data = synth_generate(&cfg).unwrap();
        for day in data.price_history.iter() {
            day.validate().unwrap();
            for t in 0..HOURS {
                assert!(day.lambda_bm_up[t] <= day.beta_dam[t] + 1e-12);
                assert!(day.beta_dam[t] <= day.lambda_bm_dw[t] + 1e-12);
            }
        }
    }

    #[test]
    fn synth_zero_forecast_error_pins_snapshots() {
        let cfg = SynthConfig {
            n_days: 1,
            history_days: 8,
            forecast_base_error: 0.0,
            ..SynthConfig::default()
        };
        let data = synth_generate(&cfg).unwrap();
        let day = &data.days[0];
        for snap in &day.snapshots {
            assert_eq!(snap.p25, day.realized.wind);
            assert_eq!(snap.p50, day.realized.wind);
            assert_eq!(snap.p75, day.realized.wind);
        }
    }

    #[test]
    fn synth_band_width_shrinks_with_decay() {
        let cfg = SynthConfig {
            n_days: 1,
            history_days: 8,
            ..SynthConfig::default()
        };
        let data = synth_generate(&cfg).unwrap();
        let widths: Vec<f64> = data.days[0]
            .snapshots
            .iter()
            .map(|s| {
                (0..HOURS)
                    .map(|t| s.p75.0[t] - s.p25.0[t])
                    .sum::<f64>()
            })
            .collect();
        for k in 1..4 {
            assert!(
                widths[k] < widths[k - 1],
                "widths not strictly decreasing: {widths:?}"
            );
        }
    }

    #[test]
    fn ex_post_zero_everything_is_zero() {
        let day = RealizedDay {
            wind: WindCurve::flat(0.0),
            prices: DayPrices::zero(),
            regulation: RegulationPair {
                pi_up: 0.0,
                pi_dw: 0.0,
            },
        };
        let (income, trace) = ex_post_evaluate(&params(), &CommitmentSchedule::zero(), &day).unwrap();
        assert!(income.total.abs() < 1e-9);
        assert!(income.i_dam.abs() < 1e-9 && income.i_rm.abs() < 1e-9);
        // Power balance must hold hourly even on the null day.
        for t in 0..HOURS {
            let lhs = trace.pm_traded[t] + trace.rm_energy_off_up[t] - trace.rm_energy_off_dw[t];
            let rhs = trace.wind_used[t] + trace.ess_out[t] - trace.ess_in[t];
            assert!((lhs - rhs).abs() < 1e-9, "balance at {t}");
        }
    }

    #[test]
    fn ex_post_sells_spilled_wind_on_balancing() {
        let mut day = RealizedDay {
            wind: WindCurve::flat(10.0),
            prices: DayPrices::zero(),
            regulation: RegulationPair {
                pi_up: 0.0,
                pi_dw: 0.0,
            },
        };
        day.prices.lambda_bm_up = [20.0; HOURS];
        day.prices.lambda_bm_dw = [20.0; HOURS];
        let mut p = params();
        p.initial_energy = p.soc_min * p.ess_capacity;
        let (income, _) = ex_post_evaluate(&p, &CommitmentSchedule::zero(), &day).unwrap();
        assert!(
            (income.total - 4_800.0).abs() < 1e-6,
            "total {}",
            income.total
        );
        assert!((income.i_bm - 4_800.0).abs() < 1e-6);
    }

    #[test]
    fn ex_post_perfect_delivery_has_no_deviation() {
        let mut day = RealizedDay {
            wind: WindCurve::flat(10.0),
            prices: DayPrices::zero(),
            regulation: RegulationPair {
                pi_up: 0.0,
                pi_dw: 0.0,
            },
        };
        day.prices.beta_dam = [50.0; HOURS];
        day.prices.lambda_bm_dw = [60.0; HOURS];
        let mut p = params();
        p.initial_energy = p.soc_min * p.ess_capacity;
        let mut commitments = CommitmentSchedule::zero();
        commitments.p_dam = [10.0; HOURS];
        let (income, trace) = ex_post_evaluate(&p, &commitments, &day).unwrap();
        assert!((income.i_dam - 12_000.0).abs() < 1e-6);
        assert!(income.i_bm.abs() < 1e-9);
        for t in 0..HOURS {
            assert!(trace.bm_up[t].abs() < 1e-9 && trace.bm_dw[t].abs() < 1e-9);
        }
    }
}
