//! Decision models for a wind-and-storage plant trading across the
//! day-ahead, intraday, reserve and balancing markets: domain types, scenario
//! generation, deterministic-equivalent construction and ex-post evaluation.

pub mod builder;
pub mod evaluation;
pub mod market;
pub mod scenario;

pub use builder::{
    build_framework_a, build_phase, expected_income_breakdown, extract_commitments,
    extract_trace, BuildError, FixedDecisions, PhaseId, RecourseVar, VariableIndex,
};
pub use market::{
    ess_trajectory, rm_penalty_prices, CommitmentSchedule, DayPrices, HourSeries,
    IncomeBreakdown, ModelError, RecourseTrace, RegulationPair, Scenario, ScenarioSet,
    SystemParams, WindCurve, HOURS, PRICE_ATTRIBUTES,
};
pub use scenario::{
    all_price_columns, collapse_to_realized, combine, kmeans, kmeans_with_trace,
    price_scenarios, regulation_scenarios, wind_scenarios, ClusterModel, ForecastSnapshot,
    PriceField, RealizedComponent, ScenarioError,
};
pub use evaluation::{
    compare, ex_post_evaluate, phase_scenario_sets, run_day_a, run_day_b, synth_generate,
    ComparisonReport, DayData, DayResult, Dataset, EvalError, Framework, PipelineConfig,
    RealizedDay, SynthConfig,
};
