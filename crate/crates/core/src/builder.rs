//! Assembles the deterministic equivalent of each stochastic program: the
//! single-phase model and the four sequential phases of the multi-phase
//! model, over a shared recourse structure.
//!
//! Canonical column layout (frozen; tests depend on it): the scenario-free
//! first-stage block comes first, then one block per scenario ordered by
//! scenario then hour. Within an hour the recourse variables follow
//! [`RecourseVar`] order; phases whose market positions are scenario-indexed
//! prepend those columns to each hour block.

use crate::market::{
    rm_penalty_prices, CommitmentSchedule, HourSeries, IncomeBreakdown, ModelError, RecourseTrace,
    ScenarioSet, SystemParams, HOURS,
};
use thiserror::Error;
use wsbid_lp::{LinearProgram, Sense, Solution, SolveStatus};

/// Which optimization problem is being assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseId {
    /// Single-phase model: all market positions decided at once.
    FrameworkA,
    /// Day-ahead positions.
    BPhase1,
    /// Regulation band, day-ahead fixed.
    BPhase2,
    /// Intraday position, day-ahead and band fixed.
    BPhase3,
    /// Real time: everything fixed, only recourse remains.
    BPhase4,
}

impl PhaseId {
    pub fn label(&self) -> &'static str {
        match self {
            PhaseId::FrameworkA => "framework-a",
            PhaseId::BPhase1 => "b-phase1",
            PhaseId::BPhase2 => "b-phase2",
            PhaseId::BPhase3 => "b-phase3",
            PhaseId::BPhase4 => "b-phase4",
        }
    }
}

/// Decisions inherited from earlier phases, substituted as constants.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixedDecisions {
    pub p_dam: Option<HourSeries>,
    /// Regulation band split as `(up, down)`.
    pub p_rm: Option<(HourSeries, HourSeries)>,
    pub p_idm: Option<HourSeries>,
}

impl FixedDecisions {
    pub fn none() -> Self {
        FixedDecisions::default()
    }

    /// Folds another partial decision set into this one; fields may not be
    /// set twice.
    pub fn merge(mut self, other: FixedDecisions) -> Result<Self, BuildError> {
        for (name, mine, theirs) in [
            ("p_dam", self.p_dam.is_some(), other.p_dam.is_some()),
            ("p_rm", self.p_rm.is_some(), other.p_rm.is_some()),
            ("p_idm", self.p_idm.is_some(), other.p_idm.is_some()),
        ] {
            if mine && theirs {
                return Err(BuildError::StagingMismatch(format!(
                    "{name} already fixed"
                )));
            }
        }
        self.p_dam = self.p_dam.or(other.p_dam);
        self.p_rm = self.p_rm.or(other.p_rm);
        self.p_idm = self.p_idm.or(other.p_idm);
        Ok(self)
    }

    /// Completes into a full commitment schedule; requires all three fields.
    pub fn into_schedule(self) -> Result<CommitmentSchedule, BuildError> {
        let p_dam = self
            .p_dam
            .ok_or_else(|| BuildError::StagingMismatch("p_dam missing".into()))?;
        let (p_rm_up, p_rm_dw) = self
            .p_rm
            .ok_or_else(|| BuildError::StagingMismatch("p_rm missing".into()))?;
        let p_idm = self
            .p_idm
            .ok_or_else(|| BuildError::StagingMismatch("p_idm missing".into()))?;
        Ok(CommitmentSchedule {
            p_dam,
            p_idm,
            p_rm_up,
            p_rm_dw,
        })
    }

    fn check_for(&self, phase: PhaseId) -> Result<(), BuildError> {
        let (dam, rm, idm) = match phase {
            PhaseId::FrameworkA | PhaseId::BPhase1 => (false, false, false),
            PhaseId::BPhase2 => (true, false, false),
            PhaseId::BPhase3 => (true, true, false),
            PhaseId::BPhase4 => (true, true, true),
        };
        let expect = [
            ("p_dam", dam, self.p_dam.is_some()),
            ("p_rm", rm, self.p_rm.is_some()),
            ("p_idm", idm, self.p_idm.is_some()),
        ];
        for (name, want, have) in expect {
            if want != have {
                return Err(BuildError::StagingMismatch(format!(
                    "phase {} {} {name}",
                    phase.label(),
                    if want { "requires" } else { "must not fix" },
                )));
            }
        }
        Ok(())
    }
}

/// Recourse variables per scenario and hour, in canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecourseVar {
    WindUsed = 0,
    EssEnergy = 1,
    EssIn = 2,
    EssOut = 3,
    Soc = 4,
    PmTraded = 5,
    BmDelta = 6,
    BmUp = 7,
    BmDw = 8,
    RmReqUp = 9,
    RmReqDw = 10,
    RmOffUp = 11,
    RmOffDw = 12,
    RmDevUp = 13,
    RmDevDw = 14,
}

pub const RECOURSE_VARS: usize = 15;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("staging mismatch: {0}")]
    StagingMismatch(String),
    #[error("solution must be optimal, got {0:?}")]
    NotOptimal(SolveStatus),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Either a structural column or a value fixed by an earlier phase.
#[derive(Debug, Clone, Copy)]
enum VarRef {
    Col(usize),
    Fixed(f64),
}

/// Canonical mapping between model variables and LP columns; stable for a
/// given `(phase, scenario count)`.
#[derive(Debug, Clone)]
pub struct VariableIndex {
    pub phase: PhaseId,
    pub n_scenarios: usize,
    fixed: FixedDecisions,
    first_stage: usize,
    hour_block: usize,
    recourse_offset: usize,
    /// Penalty factor the program was built with; needed to reconstruct the
    /// regulation penalty prices when decomposing income.
    kappa_rm: f64,
}

impl VariableIndex {
    fn new(phase: PhaseId, n_scenarios: usize, fixed: FixedDecisions, kappa_rm: f64) -> Self {
        let (first_stage, extra) = match phase {
            PhaseId::FrameworkA => (4 * HOURS, 0),
            PhaseId::BPhase1 => (HOURS, 3),
            PhaseId::BPhase2 => (2 * HOURS, 1),
            PhaseId::BPhase3 => (HOURS, 0),
            PhaseId::BPhase4 => (0, 0),
        };
        VariableIndex {
            phase,
            n_scenarios,
            fixed,
            first_stage,
            hour_block: RECOURSE_VARS + extra,
            recourse_offset: extra,
            kappa_rm,
        }
    }

    pub fn num_columns(&self) -> usize {
        self.first_stage + self.n_scenarios * HOURS * self.hour_block
    }

    pub fn first_stage_columns(&self) -> usize {
        self.first_stage
    }

    pub fn fixed(&self) -> &FixedDecisions {
        &self.fixed
    }

    fn block_start(&self, s: usize, t: usize) -> usize {
        self.first_stage + (s * HOURS + t) * self.hour_block
    }

    /// LP column of a recourse variable.
    pub fn recourse(&self, s: usize, t: usize, var: RecourseVar) -> usize {
        self.block_start(s, t) + self.recourse_offset + var as usize
    }

    fn p_dam(&self, t: usize) -> VarRef {
        match self.phase {
            PhaseId::FrameworkA | PhaseId::BPhase1 => VarRef::Col(t),
            _ => VarRef::Fixed(self.fixed.p_dam.expect("staging checked")[t]),
        }
    }

    fn p_idm(&self, s: usize, t: usize) -> VarRef {
        match self.phase {
            PhaseId::FrameworkA => VarRef::Col(HOURS + t),
            PhaseId::BPhase1 | PhaseId::BPhase2 => VarRef::Col(self.block_start(s, t)),
            PhaseId::BPhase3 => VarRef::Col(t),
            PhaseId::BPhase4 => VarRef::Fixed(self.fixed.p_idm.expect("staging checked")[t]),
        }
    }

    fn p_rm_up(&self, s: usize, t: usize) -> VarRef {
        match self.phase {
            PhaseId::FrameworkA => VarRef::Col(2 * HOURS + t),
            PhaseId::BPhase1 => VarRef::Col(self.block_start(s, t) + 1),
            PhaseId::BPhase2 => VarRef::Col(t),
            _ => VarRef::Fixed(self.fixed.p_rm.as_ref().expect("staging checked").0[t]),
        }
    }

    fn p_rm_dw(&self, s: usize, t: usize) -> VarRef {
        match self.phase {
            PhaseId::FrameworkA => VarRef::Col(3 * HOURS + t),
            PhaseId::BPhase1 => VarRef::Col(self.block_start(s, t) + 2),
            PhaseId::BPhase2 => VarRef::Col(HOURS + t),
            _ => VarRef::Fixed(self.fixed.p_rm.as_ref().expect("staging checked").1[t]),
        }
    }

    fn rm_is_column(&self) -> bool {
        matches!(
            self.phase,
            PhaseId::FrameworkA | PhaseId::BPhase1 | PhaseId::BPhase2
        )
    }
}

/// Single-phase deterministic equivalent.
pub fn build_framework_a(
    params: &SystemParams,
    scenarios: &ScenarioSet,
) -> Result<(LinearProgram, VariableIndex), BuildError> {
    build_phase(PhaseId::FrameworkA, params, scenarios, FixedDecisions::none())
}

/// Deterministic equivalent of one phase, with earlier decisions substituted
/// as constants. Their income shows up as a constant objective offset so
/// reported totals stay comparable across phases.
pub fn build_phase(
    phase: PhaseId,
    params: &SystemParams,
    scenarios: &ScenarioSet,
    fixed: FixedDecisions,
) -> Result<(LinearProgram, VariableIndex), BuildError> {
    params.validate()?;
    fixed.check_for(phase)?;

    let idx = VariableIndex::new(phase, scenarios.len(), fixed, params.kappa_rm);
    let mut lp = LinearProgram::new(idx.num_columns());
    let pool = params.pool_power_limit();

    // First-stage bounds.
    for t in 0..HOURS {
        match phase {
            PhaseId::FrameworkA => {
                lp.set_bounds(t, -params.ess_power_limit, pool);
                lp.set_bounds(HOURS + t, -pool, pool);
                lp.set_bounds(2 * HOURS + t, 0.0, params.ess_power_limit);
                lp.set_bounds(3 * HOURS + t, 0.0, params.ess_power_limit);
            }
            PhaseId::BPhase1 => {
                lp.set_bounds(t, -params.ess_power_limit, pool);
            }
            PhaseId::BPhase2 => {
                lp.set_bounds(t, 0.0, params.ess_power_limit);
                lp.set_bounds(HOURS + t, 0.0, params.ess_power_limit);
            }
            PhaseId::BPhase3 => {
                lp.set_bounds(t, -pool, pool);
            }
            PhaseId::BPhase4 => {}
        }
    }

    // Band-split ratio rows for scenario-free bands.
    let r = params.r_rm_up;
    if matches!(phase, PhaseId::FrameworkA | PhaseId::BPhase2) {
        for t in 0..HOURS {
            let (up, dw) = match (idx.p_rm_up(0, t), idx.p_rm_dw(0, t)) {
                (VarRef::Col(u), VarRef::Col(d)) => (u, d),
                _ => unreachable!("band is a column in these phases"),
            };
            lp.add_row(Sense::Eq, 0.0, &[(up, 1.0 - r), (dw, -r)]);
        }
    }

    for (s, scen) in scenarios.iter().enumerate() {
        let rho = scen.probability;
        let prices = &scen.prices;
        let (lambda_rm_up, lambda_rm_dw) = rm_penalty_prices(prices, params.kappa_rm);
        let pi_up = scen.regulation.pi_up;
        let pi_dw = scen.regulation.pi_dw;

        let mut objective = |lp: &mut LinearProgram, var: VarRef, coef: f64| match var {
            VarRef::Col(c) => lp.add_objective(c, coef),
            VarRef::Fixed(v) => lp.add_objective_offset(coef * v),
        };

        for t in 0..HOURS {
            let col = |v: RecourseVar| idx.recourse(s, t, v);

            // Bounds of the recourse block.
            lp.set_bounds(
                col(RecourseVar::WindUsed),
                0.0,
                scen.wind.0[t].min(params.rated_wind_power),
            );
            lp.set_bounds(col(RecourseVar::EssEnergy), 0.0, params.ess_capacity);
            lp.set_bounds(col(RecourseVar::EssIn), 0.0, params.ess_power_limit);
            lp.set_bounds(col(RecourseVar::EssOut), 0.0, params.ess_power_limit);
            lp.set_bounds(col(RecourseVar::Soc), params.soc_min, 1.0);
            lp.set_bounds(
                col(RecourseVar::PmTraded),
                f64::NEG_INFINITY,
                f64::INFINITY,
            );
            lp.set_bounds(
                col(RecourseVar::BmDelta),
                f64::NEG_INFINITY,
                f64::INFINITY,
            );
            lp.set_bounds(col(RecourseVar::BmUp), 0.0, pool);
            lp.set_bounds(col(RecourseVar::BmDw), 0.0, pool);
            for v in [
                RecourseVar::RmOffUp,
                RecourseVar::RmOffDw,
                RecourseVar::RmDevUp,
                RecourseVar::RmDevDw,
            ] {
                lp.set_bounds(col(v), 0.0, f64::INFINITY);
            }
            match (idx.p_rm_up(s, t), idx.p_rm_dw(s, t)) {
                (VarRef::Fixed(up), VarRef::Fixed(dw)) => {
                    // Band known: the required regulation energy is a constant.
                    lp.set_bounds(col(RecourseVar::RmReqUp), pi_up * up, pi_up * up);
                    lp.set_bounds(col(RecourseVar::RmReqDw), pi_dw * dw, pi_dw * dw);
                }
                _ => {
                    lp.set_bounds(col(RecourseVar::RmReqUp), 0.0, f64::INFINITY);
                    lp.set_bounds(col(RecourseVar::RmReqDw), 0.0, f64::INFINITY);
                }
            }
            if let (VarRef::Col(up), VarRef::Col(dw)) = (idx.p_rm_up(s, t), idx.p_rm_dw(s, t)) {
                if matches!(phase, PhaseId::BPhase1) {
                    lp.set_bounds(up, 0.0, params.ess_power_limit);
                    lp.set_bounds(dw, 0.0, params.ess_power_limit);
                    lp.add_row(Sense::Eq, 0.0, &[(up, 1.0 - r), (dw, -r)]);
                }
            }
            if let VarRef::Col(c) = idx.p_idm(s, t) {
                if matches!(phase, PhaseId::BPhase1 | PhaseId::BPhase2) {
                    lp.set_bounds(c, -pool, pool);
                }
            }

            // Objective: income per market, probability weighted.
            objective(&mut lp, idx.p_dam(t), rho * prices.beta_dam[t]);
            objective(&mut lp, idx.p_idm(s, t), rho * prices.beta_idm[t]);
            objective(&mut lp, idx.p_rm_up(s, t), rho * prices.gamma_rm[t]);
            objective(&mut lp, idx.p_rm_dw(s, t), rho * prices.gamma_rm[t]);
            lp.add_objective(col(RecourseVar::RmOffUp), rho * prices.beta_rm_up[t]);
            lp.add_objective(col(RecourseVar::RmOffDw), -rho * prices.beta_rm_dw[t]);
            lp.add_objective(col(RecourseVar::RmDevUp), -rho * lambda_rm_up[t]);
            lp.add_objective(col(RecourseVar::RmDevDw), -rho * lambda_rm_dw[t]);
            lp.add_objective(col(RecourseVar::BmUp), rho * prices.lambda_bm_up[t]);
            lp.add_objective(col(RecourseVar::BmDw), -rho * prices.lambda_bm_dw[t]);

            // Stored energy recurrence.
            if t == 0 {
                lp.add_row(
                    Sense::Eq,
                    params.initial_energy,
                    &[
                        (col(RecourseVar::EssEnergy), 1.0),
                        (col(RecourseVar::EssIn), -params.eta_in),
                        (col(RecourseVar::EssOut), 1.0 / params.eta_out),
                    ],
                );
            } else {
                lp.add_row(
                    Sense::Eq,
                    0.0,
                    &[
                        (col(RecourseVar::EssEnergy), 1.0),
                        (idx.recourse(s, t - 1, RecourseVar::EssEnergy), -1.0),
                        (col(RecourseVar::EssIn), -params.eta_in),
                        (col(RecourseVar::EssOut), 1.0 / params.eta_out),
                    ],
                );
            }
            // State of charge definition.
            lp.add_row(
                Sense::Eq,
                0.0,
                &[
                    (col(RecourseVar::Soc), params.ess_capacity),
                    (col(RecourseVar::EssEnergy), -1.0),
                ],
            );
            // Pool deviation: delta = traded - committed.
            {
                let mut terms = vec![
                    (col(RecourseVar::BmDelta), 1.0),
                    (col(RecourseVar::PmTraded), -1.0),
                ];
                let mut rhs = 0.0;
                match idx.p_dam(t) {
                    VarRef::Col(c) => terms.push((c, 1.0)),
                    VarRef::Fixed(v) => rhs -= v,
                }
                match idx.p_idm(s, t) {
                    VarRef::Col(c) => terms.push((c, 1.0)),
                    VarRef::Fixed(v) => rhs -= v,
                }
                lp.add_row(Sense::Eq, rhs, &terms);
            }
            // Deviation split into its settled parts.
            lp.add_row(
                Sense::Eq,
                0.0,
                &[
                    (col(RecourseVar::BmDelta), 1.0),
                    (col(RecourseVar::BmUp), -1.0),
                    (col(RecourseVar::BmDw), 1.0),
                ],
            );
            // Regulation energy required by the operator.
            if idx.rm_is_column() {
                let (up, dw) = match (idx.p_rm_up(s, t), idx.p_rm_dw(s, t)) {
                    (VarRef::Col(u), VarRef::Col(d)) => (u, d),
                    _ => unreachable!(),
                };
                lp.add_row(
                    Sense::Eq,
                    0.0,
                    &[(col(RecourseVar::RmReqUp), 1.0), (up, -pi_up)],
                );
                lp.add_row(
                    Sense::Eq,
                    0.0,
                    &[(col(RecourseVar::RmReqDw), 1.0), (dw, -pi_dw)],
                );
            }
            // Shortfalls; their non-negativity also caps the offered energy
            // at the requirement.
            lp.add_row(
                Sense::Eq,
                0.0,
                &[
                    (col(RecourseVar::RmDevUp), 1.0),
                    (col(RecourseVar::RmReqUp), -1.0),
                    (col(RecourseVar::RmOffUp), 1.0),
                ],
            );
            lp.add_row(
                Sense::Eq,
                0.0,
                &[
                    (col(RecourseVar::RmDevDw), 1.0),
                    (col(RecourseVar::RmReqDw), -1.0),
                    (col(RecourseVar::RmOffDw), 1.0),
                ],
            );
            // Power balance with the grid.
            lp.add_row(
                Sense::Eq,
                0.0,
                &[
                    (col(RecourseVar::PmTraded), 1.0),
                    (col(RecourseVar::RmOffUp), 1.0),
                    (col(RecourseVar::RmOffDw), -1.0),
                    (col(RecourseVar::WindUsed), -1.0),
                    (col(RecourseVar::EssOut), -1.0),
                    (col(RecourseVar::EssIn), 1.0),
                ],
            );
        }
    }

    Ok((lp, idx))
}

fn require_optimal(solution: &Solution) -> Result<(), BuildError> {
    if solution.status != SolveStatus::Optimal {
        return Err(BuildError::NotOptimal(solution.status));
    }
    Ok(())
}

/// Reads the phase's scenario-independent decisions out of an optimal
/// solution. The result carries exactly the fields the phase decides;
/// the single-phase model yields all of them.
pub fn extract_commitments(
    solution: &Solution,
    index: &VariableIndex,
) -> Result<FixedDecisions, BuildError> {
    require_optimal(solution)?;
    let read = |base: usize| -> HourSeries {
        let mut out = [0.0; HOURS];
        for (t, slot) in out.iter_mut().enumerate() {
            *slot = solution.x[base + t];
        }
        out
    };
    let mut fixed = FixedDecisions::none();
    match index.phase {
        PhaseId::FrameworkA => {
            fixed.p_dam = Some(read(0));
            fixed.p_idm = Some(read(HOURS));
            fixed.p_rm = Some((read(2 * HOURS), read(3 * HOURS)));
        }
        PhaseId::BPhase1 => fixed.p_dam = Some(read(0)),
        PhaseId::BPhase2 => fixed.p_rm = Some((read(0), read(HOURS))),
        PhaseId::BPhase3 => fixed.p_idm = Some(read(0)),
        PhaseId::BPhase4 => {}
    }
    Ok(fixed)
}

/// Recourse quantities of one scenario from an optimal solution.
pub fn extract_trace(
    solution: &Solution,
    index: &VariableIndex,
    s: usize,
) -> Result<RecourseTrace, BuildError> {
    require_optimal(solution)?;
    let mut tr = RecourseTrace::zero();
    for t in 0..HOURS {
        let get = |v: RecourseVar| solution.x[index.recourse(s, t, v)];
        tr.wind_used[t] = get(RecourseVar::WindUsed);
        tr.ess_energy[t] = get(RecourseVar::EssEnergy);
        tr.ess_in[t] = get(RecourseVar::EssIn);
        tr.ess_out[t] = get(RecourseVar::EssOut);
        tr.soc[t] = get(RecourseVar::Soc);
        tr.pm_traded[t] = get(RecourseVar::PmTraded);
        tr.bm_up[t] = get(RecourseVar::BmUp);
        tr.bm_dw[t] = get(RecourseVar::BmDw);
        tr.rm_energy_req_up[t] = get(RecourseVar::RmReqUp);
        tr.rm_energy_req_dw[t] = get(RecourseVar::RmReqDw);
        tr.rm_energy_off_up[t] = get(RecourseVar::RmOffUp);
        tr.rm_energy_off_dw[t] = get(RecourseVar::RmOffDw);
        tr.rm_dev_up[t] = get(RecourseVar::RmDevUp);
        tr.rm_dev_dw[t] = get(RecourseVar::RmDevDw);
    }
    Ok(tr)
}

/// Expected income per market implied by an optimal solution, including the
/// contribution of decisions fixed in earlier phases. The four parts sum to
/// the LP objective value.
pub fn expected_income_breakdown(
    solution: &Solution,
    index: &VariableIndex,
    scenarios: &ScenarioSet,
) -> Result<IncomeBreakdown, BuildError> {
    require_optimal(solution)?;
    let value = |v: VarRef| match v {
        VarRef::Col(c) => solution.x[c],
        VarRef::Fixed(x) => x,
    };
    let (mut i_dam, mut i_idm, mut i_rm, mut i_bm) = (0.0, 0.0, 0.0, 0.0);
    for (s, scen) in scenarios.iter().enumerate() {
        let rho = scen.probability;
        let p = &scen.prices;
        let (lam_up, lam_dw) = rm_penalty_prices(p, index.kappa_rm);
        for t in 0..HOURS {
            let get = |v: RecourseVar| solution.x[index.recourse(s, t, v)];
            i_dam += rho * p.beta_dam[t] * value(index.p_dam(t));
            i_idm += rho * p.beta_idm[t] * value(index.p_idm(s, t));
            i_rm += rho
                * (p.gamma_rm[t] * (value(index.p_rm_up(s, t)) + value(index.p_rm_dw(s, t)))
                    + p.beta_rm_up[t] * get(RecourseVar::RmOffUp)
                    - p.beta_rm_dw[t] * get(RecourseVar::RmOffDw)
                    - lam_up[t] * get(RecourseVar::RmDevUp)
                    - lam_dw[t] * get(RecourseVar::RmDevDw));
            i_bm += rho
                * (p.lambda_bm_up[t] * get(RecourseVar::BmUp)
                    - p.lambda_bm_dw[t] * get(RecourseVar::BmDw));
        }
    }
    Ok(IncomeBreakdown::from_parts(i_dam, i_idm, i_bm, i_rm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{DayPrices, RegulationPair, Scenario, WindCurve};

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

    fn flat_set(n: usize) -> ScenarioSet {
        let scen = |p: f64| Scenario {
            wind: WindCurve::flat(10.0),
            prices: DayPrices::zero(),
            regulation: RegulationPair {
                pi_up: 0.3,
                pi_dw: 0.2,
            },
            probability: p,
        };
        ScenarioSet::new((0..n).map(|_| scen(1.0 / n as f64)).collect()).unwrap()
    }

    #[test]
    fn framework_a_column_count_for_two_scenarios() {
        let (lp, idx) = build_framework_a(&params(), &flat_set(2)).unwrap();
        assert_eq!(lp.num_vars(), 4 * 24 + 15 * 24 * 2);
        assert_eq!(idx.num_columns(), lp.num_vars());
        assert_eq!(idx.first_stage_columns(), 96);
    }

    #[test]
    fn phase_column_counts() {
        let set = flat_set(3);
        let p = params();
        let (lp1, _) = build_phase(PhaseId::BPhase1, &p, &set, FixedDecisions::none()).unwrap();
        assert_eq!(lp1.num_vars(), 24 + 18 * 24 * 3);
        let fixed2 = FixedDecisions {
            p_dam: Some([0.0; HOURS]),
            ..FixedDecisions::none()
        };
        let (lp2, _) = build_phase(PhaseId::BPhase2, &p, &set, fixed2).unwrap();
        assert_eq!(lp2.num_vars(), 48 + 16 * 24 * 3);
        let fixed4 = FixedDecisions {
            p_dam: Some([0.0; HOURS]),
            p_rm: Some(([0.0; HOURS], [0.0; HOURS])),
            p_idm: Some([0.0; HOURS]),
        };
        let (lp4, _) = build_phase(PhaseId::BPhase4, &p, &set, fixed4).unwrap();
        assert_eq!(lp4.num_vars(), 15 * 24 * 3);
    }

    #[test]
    fn staging_mismatch_rejected() {
        let set = flat_set(1);
        let p = params();
        // Phase 2 without the day-ahead decision.
        let err = build_phase(PhaseId::BPhase2, &p, &set, FixedDecisions::none());
        assert!(matches!(err, Err(BuildError::StagingMismatch(_))));
        // Phase 1 with an extra fixed field.
        let extra = FixedDecisions {
            p_dam: Some([0.0; HOURS]),
            ..FixedDecisions::none()
        };
        let err = build_phase(PhaseId::BPhase1, &p, &set, extra);
        assert!(matches!(err, Err(BuildError::StagingMismatch(_))));
    }

    #[test]
    fn merge_rejects_double_fix() {
        let a = FixedDecisions {
            p_dam: Some([0.0; HOURS]),
            ..FixedDecisions::none()
        };
        let b = a.clone();
        assert!(a.clone().merge(b).is_err());
        let c = FixedDecisions {
            p_idm: Some([1.0; HOURS]),
            ..FixedDecisions::none()
        };
        let merged = a.merge(c).unwrap();
        assert!(merged.p_dam.is_some() && merged.p_idm.is_some());
    }
}
