//! Domain types shared by every other module: plant parameters, day-long
//! price/wind/regulation data, scenarios, commitments and income accounting.
//!
//! Power (MW) and energy (MWh) are numerically interchangeable here because
//! the whole model runs on an hourly grid.

use thiserror::Error;

/// Hours in a trading day; the entire model is hourly.
pub const HOURS: usize = 24;

pub type HourSeries = [f64; HOURS];

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ModelError> {
    Err(ModelError::Invalid(msg.into()))
}

/// Physical and market constants of the wind-and-storage plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Rated power of the wind farm (MW).
    pub rated_wind_power: f64,
    /// Maximum allowable storage capacity (MWh).
    pub ess_capacity: f64,
    /// Maximum power to/from the storage (MW).
    pub ess_power_limit: f64,
    /// Charging efficiency, in (0, 1).
    pub eta_in: f64,
    /// Discharging efficiency, in (0, 1).
    pub eta_out: f64,
    /// Energy stored at the start of the day (MWh).
    pub initial_energy: f64,
    /// Minimum state of charge, fraction of capacity.
    pub soc_min: f64,
    /// Penalty multiplier on regulation energy prices for unfulfilled
    /// reserve; must exceed 1.
    pub kappa_rm: f64,
    /// System-wide share of the regulation band assigned to regulation up.
    pub r_rm_up: f64,
}

impl SystemParams {
    /// Checks every parameter invariant, reporting the first violation.
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.eta_in > 0.0 && self.eta_in < 1.0) {
            return invalid("eta_in out of (0,1)");
        }
        if !(self.eta_out > 0.0 && self.eta_out < 1.0) {
            return invalid("eta_out out of (0,1)");
        }
        if !(self.rated_wind_power > 0.0) {
            return invalid("rated_wind_power must be positive");
        }
        if !(self.ess_capacity > 0.0) {
            return invalid("ess_capacity must be positive");
        }
        if !(self.ess_power_limit > 0.0) {
            return invalid("ess_power_limit must be positive");
        }
        if !(0.0..=1.0).contains(&self.soc_min) {
            return invalid("soc_min out of [0,1]");
        }
        if self.initial_energy < self.soc_min * self.ess_capacity
            || self.initial_energy > self.ess_capacity
        {
            return invalid("initial_energy out of [soc_min*capacity, capacity]");
        }
        if !(self.kappa_rm > 1.0) {
            return invalid("kappa_rm must exceed 1");
        }
        if !(self.r_rm_up > 0.0 && self.r_rm_up < 1.0) {
            return invalid("r_rm_up out of (0,1)");
        }
        Ok(())
    }

    /// Returns the parameters unchanged iff every invariant holds.
    pub fn validated(self) -> Result<Self, ModelError> {
        self.validate()?;
        Ok(self)
    }

    /// State of charge corresponding to a stored energy level.
    pub fn soc_of(&self, energy: f64) -> f64 {
        energy / self.ess_capacity
    }

    /// Largest power position the plant can take in any pool market.
    pub fn pool_power_limit(&self) -> f64 {
        self.rated_wind_power + self.ess_power_limit
    }
}

/// The seven hourly market price series of one day. Energy prices in EUR/MWh,
/// the reserve-band price in EUR/MW.
#[derive(Debug, Clone, PartialEq)]
pub struct DayPrices {
    pub beta_dam: HourSeries,
    pub beta_idm: HourSeries,
    pub gamma_rm: HourSeries,
    pub beta_rm_up: HourSeries,
    pub beta_rm_dw: HourSeries,
    pub lambda_bm_up: HourSeries,
    pub lambda_bm_dw: HourSeries,
}

/// Number of price attributes of one day (hour-major, 7 series per hour).
pub const PRICE_ATTRIBUTES: usize = 7 * HOURS;

/// Count of repairs applied when reconstructing prices from raw attribute
/// vectors (cluster centroids may stray slightly outside the valid set).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PriceRepairs {
    pub clamped_negative: usize,
    pub reordered_bm: usize,
}

impl PriceRepairs {
    pub fn any(&self) -> bool {
        self.clamped_negative > 0 || self.reordered_bm > 0
    }
}

impl DayPrices {
    pub fn zero() -> Self {
        DayPrices {
            beta_dam: [0.0; HOURS],
            beta_idm: [0.0; HOURS],
            gamma_rm: [0.0; HOURS],
            beta_rm_up: [0.0; HOURS],
            beta_rm_dw: [0.0; HOURS],
            lambda_bm_up: [0.0; HOURS],
            lambda_bm_dw: [0.0; HOURS],
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, series) in self.series() {
            for (t, &v) in series.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return invalid(format!("{name}[{t}] must be finite and >= 0, got {v}"));
                }
            }
        }
        for t in 0..HOURS {
            if self.lambda_bm_up[t] > self.lambda_bm_dw[t] {
                return invalid(format!(
                    "no-arbitrage ordering violated at hour {t}: lambda_bm_up {} > lambda_bm_dw {}",
                    self.lambda_bm_up[t], self.lambda_bm_dw[t]
                ));
            }
        }
        Ok(())
    }

    pub fn series(&self) -> [(&'static str, &HourSeries); 7] {
        [
            ("beta_dam", &self.beta_dam),
            ("beta_idm", &self.beta_idm),
            ("gamma_rm", &self.gamma_rm),
            ("beta_rm_up", &self.beta_rm_up),
            ("beta_rm_dw", &self.beta_rm_dw),
            ("lambda_bm_up", &self.lambda_bm_up),
            ("lambda_bm_dw", &self.lambda_bm_dw),
        ]
    }

    /// Flattens into the 168-attribute clustering layout: hour-major, the
    /// seven series in declaration order within each hour.
    pub fn to_attributes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(PRICE_ATTRIBUTES);
        for t in 0..HOURS {
            out.push(self.beta_dam[t]);
            out.push(self.beta_idm[t]);
            out.push(self.gamma_rm[t]);
            out.push(self.beta_rm_up[t]);
            out.push(self.beta_rm_dw[t]);
            out.push(self.lambda_bm_up[t]);
            out.push(self.lambda_bm_dw[t]);
        }
        out
    }

    /// Rebuilds prices from a 168-attribute vector, repairing invariant
    /// violations (negative entries clamp to zero; a balancing-price pair in
    /// the wrong order is swapped). Returns the repairs applied.
    pub fn from_attributes(v: &[f64]) -> Result<(Self, PriceRepairs), ModelError> {
        if v.len() != PRICE_ATTRIBUTES {
            return invalid(format!(
                "price vector must have {PRICE_ATTRIBUTES} attributes, got {}",
                v.len()
            ));
        }
        let mut p = DayPrices::zero();
        let mut repairs = PriceRepairs::default();
        for t in 0..HOURS {
            let base = 7 * t;
            let mut vals = [0.0f64; 7];
            for (k, val) in vals.iter_mut().enumerate() {
                let raw = v[base + k];
                if !raw.is_finite() {
                    return invalid(format!("price attribute {} not finite", base + k));
                }
                if raw < 0.0 {
                    repairs.clamped_negative += 1;
                    *val = 0.0;
                } else {
                    *val = raw;
                }
            }
            if vals[5] > vals[6] {
                vals.swap(5, 6);
                repairs.reordered_bm += 1;
            }
            p.beta_dam[t] = vals[0];
            p.beta_idm[t] = vals[1];
            p.gamma_rm[t] = vals[2];
            p.beta_rm_up[t] = vals[3];
            p.beta_rm_dw[t] = vals[4];
            p.lambda_bm_up[t] = vals[5];
            p.lambda_bm_dw[t] = vals[6];
        }
        Ok((p, repairs))
    }
}

/// Fractions of the committed regulation band the operator actually calls,
/// broadcast to all 24 hours of the day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegulationPair {
    pub pi_up: f64,
    pub pi_dw: f64,
}

impl RegulationPair {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [("pi_up", self.pi_up), ("pi_dw", self.pi_dw)] {
            if !(0.0..=1.0).contains(&v) {
                return invalid(format!("{name} out of [0,1]: {v}"));
            }
        }
        Ok(())
    }
}

/// Available wind power per hour (MW). May exceed the rated farm power; the
/// usable part is capped downstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindCurve(pub HourSeries);

impl WindCurve {
    pub fn flat(mw: f64) -> Self {
        WindCurve([mw; HOURS])
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (t, &v) in self.0.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return invalid(format!("wind[{t}] must be finite and >= 0, got {v}"));
            }
        }
        Ok(())
    }
}

/// One joint realization of the uncertain inputs with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub wind: WindCurve,
    pub prices: DayPrices,
    pub regulation: RegulationPair,
    pub probability: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.wind.validate()?;
        self.prices.validate()?;
        self.regulation.validate()?;
        if !(self.probability > 0.0 && self.probability <= 1.0) {
            return invalid(format!("probability out of (0,1]: {}", self.probability));
        }
        Ok(())
    }
}

/// Non-empty ordered scenario collection with probabilities summing to one.
#[derive(Debug, Clone)]
pub struct ScenarioSet {
    scenarios: Vec<Scenario>,
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<Scenario>) -> Result<Self, ModelError> {
        if scenarios.is_empty() {
            return invalid("scenario set must not be empty");
        }
        let mut sum = 0.0;
        for (k, s) in scenarios.iter().enumerate() {
            s.validate()
                .map_err(|e| ModelError::Invalid(format!("scenario {k}: {e}")))?;
            sum += s.probability;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return invalid(format!("probabilities sum to {sum}, expected 1"));
        }
        Ok(ScenarioSet { scenarios })
    }

    /// Single scenario with probability one.
    pub fn singleton(wind: WindCurve, prices: DayPrices, regulation: RegulationPair) -> Self {
        ScenarioSet {
            scenarios: vec![Scenario {
                wind,
                prices,
                regulation,
                probability: 1.0,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Scenario> {
        self.scenarios.iter()
    }

    pub fn get(&self, s: usize) -> &Scenario {
        &self.scenarios[s]
    }
}

/// First-stage decisions per hour: pool positions and the regulation band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommitmentSchedule {
    pub p_dam: HourSeries,
    pub p_idm: HourSeries,
    pub p_rm_up: HourSeries,
    pub p_rm_dw: HourSeries,
}

impl CommitmentSchedule {
    pub fn zero() -> Self {
        CommitmentSchedule {
            p_dam: [0.0; HOURS],
            p_idm: [0.0; HOURS],
            p_rm_up: [0.0; HOURS],
            p_rm_dw: [0.0; HOURS],
        }
    }

    /// Net pool-market position for an hour.
    pub fn p_pm(&self, t: usize) -> f64 {
        self.p_dam[t] + self.p_idm[t]
    }

    /// Total regulation band for an hour.
    pub fn p_rm(&self, t: usize) -> f64 {
        self.p_rm_up[t] + self.p_rm_dw[t]
    }

    pub fn validate(&self, params: &SystemParams) -> Result<(), ModelError> {
        let tol = 1e-9;
        let pool = params.pool_power_limit();
        for t in 0..HOURS {
            if self.p_dam[t] < -params.ess_power_limit - tol || self.p_dam[t] > pool + tol {
                return invalid(format!("p_dam[{t}] out of range"));
            }
            if self.p_idm[t].abs() > pool + tol {
                return invalid(format!("p_idm[{t}] out of range"));
            }
            for (name, v) in [("p_rm_up", self.p_rm_up[t]), ("p_rm_dw", self.p_rm_dw[t])] {
                if v < -tol || v > params.ess_power_limit + tol {
                    return invalid(format!("{name}[{t}] out of range"));
                }
            }
            let band = self.p_rm(t);
            if band > tol {
                let expect = params.r_rm_up * band;
                if (self.p_rm_up[t] - expect).abs() > tol.max(1e-9 * band) {
                    return invalid(format!(
                        "regulation split at hour {t} violates the up-share ratio"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Per-market income (EUR); `total` is always the sum of the four parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncomeBreakdown {
    pub i_dam: f64,
    pub i_idm: f64,
    pub i_bm: f64,
    pub i_rm: f64,
    pub total: f64,
}

impl IncomeBreakdown {
    pub fn from_parts(i_dam: f64, i_idm: f64, i_bm: f64, i_rm: f64) -> Self {
        IncomeBreakdown {
            i_dam,
            i_idm,
            i_bm,
            i_rm,
            total: i_dam + i_idm + i_bm + i_rm,
        }
    }

    pub fn zero() -> Self {
        IncomeBreakdown::from_parts(0.0, 0.0, 0.0, 0.0)
    }
}

/// Hour-by-hour second-stage quantities of one scenario (or of the realized
/// day in ex-post evaluation).
#[derive(Debug, Clone, PartialEq)]
pub struct RecourseTrace {
    /// Wind power actually used (MW).
    pub wind_used: HourSeries,
    /// Energy stored at the end of each hour (MWh).
    pub ess_energy: HourSeries,
    /// Charging power (MW).
    pub ess_in: HourSeries,
    /// Discharging power (MW).
    pub ess_out: HourSeries,
    /// State of charge after each hour.
    pub soc: HourSeries,
    /// Power actually traded in the pool (MW, signed).
    pub pm_traded: HourSeries,
    /// Upward balancing deviation (MW).
    pub bm_up: HourSeries,
    /// Downward balancing deviation (MW).
    pub bm_dw: HourSeries,
    /// Regulation energy required by the operator, up/down (MWh).
    pub rm_energy_req_up: HourSeries,
    pub rm_energy_req_dw: HourSeries,
    /// Regulation energy actually offered, up/down (MWh).
    pub rm_energy_off_up: HourSeries,
    pub rm_energy_off_dw: HourSeries,
    /// Shortfall between required and offered regulation energy (MWh).
    pub rm_dev_up: HourSeries,
    pub rm_dev_dw: HourSeries,
}

impl RecourseTrace {
    pub fn zero() -> Self {
        RecourseTrace {
            wind_used: [0.0; HOURS],
            ess_energy: [0.0; HOURS],
            ess_in: [0.0; HOURS],
            ess_out: [0.0; HOURS],
            soc: [0.0; HOURS],
            pm_traded: [0.0; HOURS],
            bm_up: [0.0; HOURS],
            bm_dw: [0.0; HOURS],
            rm_energy_req_up: [0.0; HOURS],
            rm_energy_req_dw: [0.0; HOURS],
            rm_energy_off_up: [0.0; HOURS],
            rm_energy_off_dw: [0.0; HOURS],
            rm_dev_up: [0.0; HOURS],
            rm_dev_dw: [0.0; HOURS],
        }
    }
}

/// Stored-energy trajectory: cumulative charge/discharge with efficiencies,
/// starting from the initial level.
pub fn ess_trajectory(
    params: &SystemParams,
    charge: &HourSeries,
    discharge: &HourSeries,
) -> HourSeries {
    let mut out = [0.0; HOURS];
    let mut e = params.initial_energy;
    for t in 0..HOURS {
        e += params.eta_in * charge[t] - discharge[t] / params.eta_out;
        out[t] = e;
    }
    out
}

/// Penalty prices for unfulfilled regulation: the correction factor applied
/// to the regulation energy prices.
pub fn rm_penalty_prices(prices: &DayPrices, kappa: f64) -> (HourSeries, HourSeries) {
    let mut up = [0.0; HOURS];
    let mut dw = [0.0; HOURS];
    for t in 0..HOURS {
        up[t] = kappa * prices.beta_rm_up[t];
        dw[t] = kappa * prices.beta_rm_dw[t];
    }
    (up, dw)
}
