//! The myopic multi-period loop: economic-retirement pre-pass, per-stage
//! compile → build → solve, capacity carryover, and scenario orchestration.
//!
//! Each stage is optimised on its own, taking the previous stage's ending
//! capacities as existing capacity and never anticipating later periods.
//! Infeasible stages abort the scenario with the stage's policy rows as
//! diagnostics; nothing is ever relaxed silently.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::builder::{build_stage_lp, BuildError, BuildOptions, Carryover, CostComponent, StageLp};
use crate::lp::LinearProgram;
use crate::policy::{compile_scenario, CompileError, ConstraintSet, Scenario};
use crate::simplex::{self, LpSolution, SolveError, Status, Tolerances};
use crate::system::{ValidatedSystem, ValidationIssue};

/// Anything that can solve a stage LP. The embedded simplex is the default;
/// the CLI can plug in an external solver adapter.
pub trait SolveStage {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution, SolveError>;
}

#[derive(Debug, Clone, Default)]
pub struct EmbeddedSolver {
    pub tolerances: Tolerances,
}

impl SolveStage for EmbeddedSolver {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution, SolveError> {
        simplex::solve(lp, &self.tolerances)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuelDispatch {
    /// Fuel id, or none for fuel-less resources.
    pub fuel: Option<String>,
    pub mwh: f64,
    pub mmbtu: f64,
    pub emissions_t: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClusterStageOutcome {
    pub start_mw: f64,
    pub new_mw: f64,
    pub retired_mw: f64,
    pub retrofit_in_mw: f64,
    pub retrofit_out_mw: f64,
    pub end_mw: f64,
    pub dispatch: Vec<FuelDispatch>,
    pub capacity_factor: f64,
}

impl ClusterStageOutcome {
    pub fn total_mwh(&self) -> f64 {
        self.dispatch.iter().map(|d| d.mwh).sum()
    }

    pub fn emissions_t(&self) -> f64 {
        self.dispatch.iter().map(|d| d.emissions_t).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StorageStageOutcome {
    pub start_power_mw: f64,
    pub new_power_mw: f64,
    pub end_power_mw: f64,
    pub end_energy_mwh: f64,
    pub discharge_mwh: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LineStageOutcome {
    pub start_mw: f64,
    pub new_mw: f64,
    pub end_mw: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub capex: f64,
    pub fixed_om: f64,
    pub variable_om: f64,
    pub fuel: f64,
    pub credits: f64,
    pub nse: f64,
    pub transmission: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn component_sum(&self) -> f64 {
        self.capex
            + self.fixed_om
            + self.variable_om
            + self.fuel
            + self.credits
            + self.nse
            + self.transmission
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageResult {
    pub period: String,
    pub clusters: BTreeMap<String, ClusterStageOutcome>,
    pub storage: BTreeMap<String, StorageStageOutcome>,
    pub lines: BTreeMap<String, LineStageOutcome>,
    pub nse_mwh_by_zone: BTreeMap<String, f64>,
    pub h2_mmbtu_by_zone: BTreeMap<String, f64>,
    /// Value of the emissions expression at the solution, in tons.
    pub emissions_t: f64,
    pub costs: CostBreakdown,
    /// LP objective including the fixed-O&M constant.
    pub objective: f64,
    /// Stage carried at least one policy row or cap.
    pub policy_active: bool,
    /// Names of policy rows in the stage LP, for audit and diagnostics.
    pub policy_rows: Vec<String>,
    pub iterations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario_name: String,
    pub stages: Vec<StageResult>,
    /// Economic retirement schedule used for rule classification.
    pub retirements: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DriverError {
    #[error("system validation failed: {0} issue(s)")]
    Validation(usize),
    #[error("{0}")]
    Compile(#[from] CompileError),
    #[error("{0}")]
    Build(#[from] BuildError),
    #[error("{0}")]
    Solve(#[from] SolveError),
    #[error("stage {period} is infeasible; suspected rows: {}", suspected_rows.join(", "))]
    StageInfeasible {
        period: String,
        suspected_rows: Vec<String>,
    },
    #[error("stage {period} is unbounded; the builder should prevent this")]
    StageUnbounded { period: String },
    #[error("scenario references unknown scenario `{0}` for its cap")]
    UnknownReferenceScenario(String),
}

impl DriverError {
    pub fn from_validation(issues: Vec<ValidationIssue>) -> Self {
        DriverError::Validation(issues.len())
    }
}

/// Extracts a [`StageResult`] from a solved stage.
fn extract_stage(
    system: &ValidatedSystem,
    stage: &StageLp,
    sol: &LpSolution,
    period_label: &str,
) -> StageResult {
    let spec = system.spec();
    let idx = &stage.index;
    let x = &sol.values;
    let hours = idx.hours;
    let weights = &spec.time.weights;
    let total_weight = idx.total_weight;

    let mut clusters = BTreeMap::new();
    for (ci, cluster) in spec.clusters.iter().enumerate() {
        let cv = &idx.clusters[ci];
        let start = cv.carry;
        let new = cv.cap_new.map_or(0.0, |v| x[v.0]);
        let retired = cv.cap_ret.map_or(0.0, |v| x[v.0]);
        let rfit_out: f64 = cv.retrofit_out.iter().map(|(_, v)| x[v.0]).sum();
        let rfit_in: f64 = cv.retrofit_in.iter().map(|(_, r, v)| r * x[v.0]).sum();
        let end = start + new - retired - rfit_out + rfit_in;

        let mut dispatch = Vec::new();
        if let Some(load) = cv.load {
            // electrolyzers report consumption as negative generation would
            // be confusing; they appear via the hydrogen table instead, but
            // the energy drawn still shows up here as a fuel-less entry
            let mwh: f64 = (0..hours).map(|t| weights[t] * x[load.0 + t]).sum();
            dispatch.push(FuelDispatch {
                fuel: None,
                mwh: -mwh,
                mmbtu: 0.0,
                emissions_t: 0.0,
            });
        }
        for (slot, base) in &cv.gen {
            let mut mwh = 0.0;
            let mut mmbtu = 0.0;
            let mut emis = 0.0;
            let (hr, ef) = match slot {
                Some(f) => {
                    let fid = &spec.fuels[*f].id;
                    (
                        cluster.heat_rates.get(fid).copied().unwrap_or(0.0),
                        spec.fuels[*f].emission_factor,
                    )
                }
                None => (0.0, 0.0),
            };
            let emis_per_mwh = hr * ef * (1.0 - cluster.capture_rate);
            for t in 0..hours {
                let g = x[base.0 + t];
                let w = weights[t];
                mwh += w * g;
                mmbtu += w * g * hr;
                emis += w * emis_per_mwh * g;
            }
            dispatch.push(FuelDispatch {
                fuel: slot.map(|f| spec.fuels[f].id.clone()),
                mwh,
                mmbtu,
                emissions_t: emis,
            });
        }
        let total_mwh: f64 = dispatch.iter().filter(|d| d.mwh > 0.0).map(|d| d.mwh).sum();
        let capacity_factor = if end > 1e-9 {
            total_mwh / (end * total_weight)
        } else {
            0.0
        };
        clusters.insert(
            cluster.id.clone(),
            ClusterStageOutcome {
                start_mw: start,
                new_mw: new,
                retired_mw: retired,
                retrofit_in_mw: rfit_in,
                retrofit_out_mw: rfit_out,
                end_mw: end,
                dispatch,
                capacity_factor,
            },
        );
    }

    let mut storage = BTreeMap::new();
    for (si, s) in spec.storage.iter().enumerate() {
        let Some(sv) = &idx.storage[si] else {
            storage.insert(
                s.id.clone(),
                StorageStageOutcome {
                    start_power_mw: 0.0,
                    ..StorageStageOutcome::default()
                },
            );
            continue;
        };
        let new = sv.cap_new.map_or(0.0, |v| x[v.0]);
        let discharge: f64 = (0..hours).map(|t| weights[t] * x[sv.discharge.0 + t]).sum();
        storage.insert(
            s.id.clone(),
            StorageStageOutcome {
                start_power_mw: sv.carry_power,
                new_power_mw: new,
                end_power_mw: sv.carry_power + new,
                end_energy_mwh: sv.carry_energy + new * s.duration_hours,
                discharge_mwh: discharge,
            },
        );
    }

    let mut lines = BTreeMap::new();
    for (li, l) in spec.lines.iter().enumerate() {
        let Some(lv) = &idx.lines[li] else {
            lines.insert(l.id.clone(), LineStageOutcome::default());
            continue;
        };
        let new = lv.tx_new.map_or(0.0, |v| x[v.0]);
        lines.insert(
            l.id.clone(),
            LineStageOutcome {
                start_mw: lv.carry,
                new_mw: new,
                end_mw: lv.carry + new,
            },
        );
    }

    let mut nse_mwh_by_zone = BTreeMap::new();
    for (zi, z) in spec.zones.iter().enumerate() {
        let base = idx.nse[zi];
        let v: f64 = (0..hours).map(|t| weights[t] * x[base.0 + t]).sum();
        nse_mwh_by_zone.insert(z.id.clone(), v);
    }

    let mut h2_mmbtu_by_zone = BTreeMap::new();
    for z in &spec.zones {
        let mut v = 0.0;
        for (ci, c) in spec.clusters.iter().enumerate() {
            if c.zone != z.id || c.tech_class != crate::system::TechClass::Electrolyzer {
                continue;
            }
            let Some(load) = idx.clusters[ci].load else { continue };
            let eff = c
                .allowed_fuels
                .first()
                .and_then(|f| c.heat_rates.get(f))
                .copied()
                .unwrap_or(0.0);
            for t in 0..hours {
                v += weights[t] * eff * x[load.0 + t];
            }
        }
        if v != 0.0 || z.h2_demand.contains_key(period_label) {
            h2_mmbtu_by_zone.insert(z.id.clone(), v);
        }
    }

    // emissions: the expression evaluated term by term, in the same order
    // the cap row stores it
    let emissions_t: f64 = idx.emissions_terms.iter().map(|(v, c)| c * x[v.0]).sum();

    let component = |c: CostComponent| -> f64 {
        idx.cost_terms
            .get(&c)
            .map(|terms| terms.iter().map(|(v, k)| k * x[v.0]).sum())
            .unwrap_or(0.0)
    };
    let mut costs = CostBreakdown {
        capex: component(CostComponent::Capex),
        fixed_om: component(CostComponent::FixedOm) + idx.cost_offset_fixed_om,
        variable_om: component(CostComponent::VariableOm),
        fuel: component(CostComponent::Fuel),
        credits: component(CostComponent::Credits),
        nse: component(CostComponent::Nse),
        transmission: component(CostComponent::Transmission),
        total: 0.0,
    };
    costs.total = costs.component_sum();

    StageResult {
        period: String::from(period_label),
        clusters,
        storage,
        lines,
        nse_mwh_by_zone,
        h2_mmbtu_by_zone,
        emissions_t,
        costs,
        objective: sol.objective,
        policy_active: !idx.policy_rows.is_empty() || !idx.policy_bounds.is_empty(),
        policy_rows: idx.policy_rows.iter().map(|(n, _)| n.clone()).collect(),
        iterations: sol.iterations,
    }
}

/// Runs one stage with explicit carryover. The system must already reflect
/// the scenario's sensitivity knobs.
pub fn run_single_stage<S: SolveStage>(
    system: &ValidatedSystem,
    scenario: &Scenario,
    period_idx: usize,
    carryover: &Carryover,
    retirements: &BTreeMap<String, String>,
    solver: &S,
    options: &BuildOptions,
) -> Result<(StageResult, ConstraintSet), DriverError> {
    let constraints = compile_scenario(scenario, system, period_idx, retirements)?;
    let stage = build_stage_lp(system, scenario, &constraints, period_idx, carryover, options)?;
    let period_label = &system.periods()[period_idx].label;
    let sol = solver.solve(&stage.lp)?;
    match sol.status {
        Status::Optimal => Ok((
            extract_stage(system, &stage, &sol, period_label),
            constraints,
        )),
        Status::Infeasible => {
            let mut suspected: Vec<String> =
                stage.index.policy_rows.iter().map(|(n, _)| n.clone()).collect();
            suspected.extend(stage.index.policy_bounds.iter().cloned());
            if suspected.is_empty() {
                suspected.push(String::from("no policy rows; check demand vs capacity"));
            }
            Err(DriverError::StageInfeasible {
                period: period_label.clone(),
                suspected_rows: suspected,
            })
        }
        Status::Unbounded => Err(DriverError::StageUnbounded {
            period: period_label.clone(),
        }),
    }
}

fn advance_carryover(system: &ValidatedSystem, carry: &mut Carryover, stage: &StageResult) {
    for c in &system.spec().clusters {
        let out = &stage.clusters[&c.id];
        carry.clusters.insert(c.id.clone(), out.end_mw);
    }
    for s in &system.spec().storage {
        let out = &stage.storage[&s.id];
        carry
            .storage
            .insert(s.id.clone(), (out.end_power_mw, out.end_energy_mwh));
    }
    for l in &system.spec().lines {
        let out = &stage.lines[&l.id];
        carry.lines.insert(l.id.clone(), out.end_mw);
    }
}

fn needs_retirement_schedule(scenario: &Scenario) -> bool {
    scenario
        .rules
        .iter()
        .any(|r| r.applies_to.retirement_class.is_some())
}

/// Runs the benchmark (no rules, same credits and sensitivity) and reads off
/// each cluster's economic retirement: the first period whose ending
/// capacity falls below 1% of the study-start capacity; absent if the
/// cluster survives every period.
pub fn economic_retirement_prepass<S: SolveStage>(
    system: &ValidatedSystem,
    scenario: &Scenario,
    solver: &S,
) -> Result<BTreeMap<String, String>, DriverError> {
    let mut benchmark = Scenario::unregulated("No Regulations");
    benchmark.tax_credits = scenario.tax_credits.clone();
    benchmark.sensitivity = scenario.sensitivity.clone();
    let result = run_stages(system, &benchmark, &BTreeMap::new(), solver)?;
    Ok(retirements_from_result(system, &result))
}

/// Derives the retirement schedule from an already-run benchmark.
pub fn retirements_from_result(
    system: &ValidatedSystem,
    result: &ScenarioResult,
) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for c in &system.spec().clusters {
        if c.capacity_mw <= 0.0 {
            continue;
        }
        for stage in &result.stages {
            let end = stage.clusters[&c.id].end_mw;
            if end < 0.01 * c.capacity_mw {
                out.insert(c.id.clone(), stage.period.clone());
                break;
            }
        }
    }
    out
}

/// Sequential stage execution with carryover, for a system that already
/// reflects the scenario's sensitivity knobs.
fn run_stages<S: SolveStage>(
    system: &ValidatedSystem,
    scenario: &Scenario,
    retirements: &BTreeMap<String, String>,
    solver: &S,
) -> Result<ScenarioResult, DriverError> {
    let mut carry = Carryover::initial(system.spec());
    let mut stages = Vec::with_capacity(system.periods().len());
    for period_idx in 0..system.periods().len() {
        let (stage, _) = run_single_stage(
            system,
            scenario,
            period_idx,
            &carry,
            retirements,
            solver,
            &BuildOptions::default(),
        )?;
        advance_carryover(system, &mut carry, &stage);
        stages.push(stage);
    }
    Ok(ScenarioResult {
        scenario_name: scenario.name.clone(),
        stages,
        retirements: retirements.clone(),
    })
}

/// Runs a scenario end to end: applies sensitivity knobs, obtains the
/// retirement schedule (from the caller, or by running the benchmark),
/// resolves a referenced emissions cap, then executes the stages in order.
pub fn run_scenario_with<S: SolveStage>(
    system_base: &ValidatedSystem,
    scenario: &Scenario,
    solver: &S,
    provided_retirements: Option<BTreeMap<String, String>>,
) -> Result<ScenarioResult, DriverError> {
    let system = system_base
        .with_sensitivity(
            &scenario.sensitivity.fuel_price_set,
            &scenario.sensitivity.build_limit_set,
        )
        .map_err(DriverError::from_validation)?;

    let retirements = match provided_retirements {
        Some(r) => r,
        None => {
            if needs_retirement_schedule(scenario) {
                economic_retirement_prepass(&system, scenario, solver)?
            } else {
                BTreeMap::new()
            }
        }
    };

    // resolve a cap defined by another scenario's modelled emissions
    let mut scenario = scenario.clone();
    if let Some(reference) = scenario.co2_cap_from_scenario.take() {
        let mut referenced = crate::policy::builtin::builtin_scenario(&reference)
            .ok_or_else(|| DriverError::UnknownReferenceScenario(reference.clone()))?;
        if referenced.co2_cap_from_scenario.is_some() {
            return Err(DriverError::UnknownReferenceScenario(format!(
                "{reference} (nested cap references are not supported)"
            )));
        }
        referenced.tax_credits = scenario.tax_credits.clone();
        referenced.sensitivity = scenario.sensitivity.clone();
        let ref_retirements = if needs_retirement_schedule(&referenced) {
            if retirements.is_empty() {
                economic_retirement_prepass(&system, &referenced, solver)?
            } else {
                retirements.clone()
            }
        } else {
            BTreeMap::new()
        };
        let ref_result = run_stages(&system, &referenced, &ref_retirements, solver)?;
        for stage in &ref_result.stages {
            scenario
                .co2_cap_mt
                .insert(stage.period.clone(), stage.emissions_t / 1e6);
        }
    }

    run_stages(&system, &scenario, &retirements, solver)
}

/// [`run_scenario_with`] with an automatic retirement pre-pass.
pub fn run_scenario<S: SolveStage>(
    system_base: &ValidatedSystem,
    scenario: &Scenario,
    solver: &S,
) -> Result<ScenarioResult, DriverError> {
    run_scenario_with(system_base, scenario, solver, None)
}
