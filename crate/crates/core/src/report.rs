//! Emissions accounting, capacity factors, abatement costs and delimited
//! table rendering.
//!
//! Tables are built in memory with a stable column and row order and render
//! to CSV text deterministically (floats printed with shortest round-trip
//! formatting, no timestamps), so identical results produce byte-identical
//! files. Writing them to disk is the CLI's job.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::driver::{ScenarioResult, StageResult};
use crate::system::{TechClass, ValidatedSystem};

/// Emissions by cluster, technology and zone for one stage. Totals equal the
/// stage's emissions-expression value up to grouping order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmissionsBreakdown {
    pub total_t: f64,
    pub by_cluster: BTreeMap<String, f64>,
    pub by_tech: BTreeMap<String, f64>,
    pub by_zone: BTreeMap<String, f64>,
}

/// Decomposes a stage's emissions. The total is the stage's stored
/// emissions-expression value, not a recomputation.
pub fn compute_emissions(stage: &StageResult, system: &ValidatedSystem) -> EmissionsBreakdown {
    let mut out = EmissionsBreakdown {
        total_t: stage.emissions_t,
        ..EmissionsBreakdown::default()
    };
    for (id, c) in &stage.clusters {
        let e = c.emissions_t();
        if e == 0.0 {
            continue;
        }
        out.by_cluster.insert(id.clone(), e);
        if let Some(ci) = system.cluster_idx(id) {
            let cluster = system.cluster(ci);
            *out.by_tech
                .entry(cluster.tech_class.name().to_string())
                .or_insert(0.0) += e;
            *out.by_zone.entry(cluster.zone.clone()).or_insert(0.0) += e;
        }
    }
    out
}

/// Annual capacity factor of a cluster in a stage; zero on zero capacity.
pub fn capacity_factor(stage: &StageResult, cluster_id: &str) -> f64 {
    stage
        .clusters
        .get(cluster_id)
        .map(|c| c.capacity_factor)
        .unwrap_or(0.0)
}

/// Average abatement cost against a reference scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AbatementCost {
    /// $/tCO₂ avoided.
    PerTon(f64),
    /// Denominator is zero or negative (no reduction achieved).
    NotDefined { reason: String },
}

impl AbatementCost {
    pub fn render(&self) -> String {
        match self {
            AbatementCost::PerTon(v) => v.to_string(),
            AbatementCost::NotDefined { .. } => String::from("NA"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error("scenario results cover different periods ({0} vs {1})")]
    MismatchedStudies(String, String),
}

/// Which stages enter the abatement aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbatementWindow {
    /// Every study period.
    All,
    /// Only periods where the evaluated scenario had active policy.
    ActiveOnly,
}

/// Year-weighted cost delta divided by year-weighted emissions reduction,
/// versus a reference run: `Σ yrs·Δcost / Σ yrs·(emis_ref − emis)`.
pub fn abatement_cost(
    result: &ScenarioResult,
    reference: &ScenarioResult,
    system: &ValidatedSystem,
    window: AbatementWindow,
) -> Result<AbatementCost, ReportError> {
    if result.stages.len() != reference.stages.len() {
        return Err(ReportError::MismatchedStudies(
            result.scenario_name.clone(),
            reference.scenario_name.clone(),
        ));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, (a, b)) in result.stages.iter().zip(&reference.stages).enumerate() {
        if a.period != b.period {
            return Err(ReportError::MismatchedStudies(
                a.period.clone(),
                b.period.clone(),
            ));
        }
        if window == AbatementWindow::ActiveOnly && !a.policy_active {
            continue;
        }
        let years = system.periods()[i].years_represented as f64;
        num += years * (a.costs.total - b.costs.total);
        den += years * (b.emissions_t - a.emissions_t);
    }
    if den <= 0.0 {
        let reason = if den == 0.0 {
            String::from("no emissions reduction relative to the reference")
        } else {
            String::from("emissions increased relative to the reference")
        };
        return Ok(AbatementCost::NotDefined { reason });
    }
    Ok(AbatementCost::PerTon(num / den))
}

/// Fractional reduction below the baseline-year emissions.
pub fn percent_below_baseline(stage: &StageResult, baseline_mt: f64) -> f64 {
    let baseline_t = baseline_mt * 1e6;
    (baseline_t - stage.emissions_t) / baseline_t
}

/// A delimited table with a fixed header. Rendering is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Table {
        Table {
            name: String::from(name),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn fmt_num(x: f64) -> String {
    // normalise negative zero so exports are reproducible across code paths
    if x == 0.0 {
        String::from("0")
    } else {
        x.to_string()
    }
}

/// Gas-fleet subgroups with the peaker / non-baseload / baseload taxonomy.
const CF_CLASSES: [(&str, f64, f64); 3] = [
    ("peaker", 0.0, 0.20),
    ("non-baseload", 0.20, 0.40),
    ("baseload", 0.40, f64::INFINITY),
];

fn cf_class(cf: f64) -> &'static str {
    for (name, lo, hi) in CF_CLASSES {
        if cf > lo - 1e-12 && cf <= hi {
            return name;
        }
    }
    "baseload"
}

/// Renders the full table set for a scenario run.
pub fn result_tables(result: &ScenarioResult, system: &ValidatedSystem) -> Vec<Table> {
    let spec = system.spec();
    let mut tables = Vec::new();

    let mut capacity = Table::new(
        "capacity_by_tech",
        &["tech", "period", "start_mw", "new_mw", "retired_mw", "retrofit_in_mw", "retrofit_out_mw", "end_mw"],
    );
    let mut generation = Table::new("generation_by_tech", &["tech", "period", "mwh"]);
    let mut emissions_by_tech = Table::new("emissions_by_tech", &["tech", "period", "tons"]);
    let techs: BTreeSet<TechClass> = spec.clusters.iter().map(|c| c.tech_class).collect();
    for tech in &techs {
        for stage in &result.stages {
            let mut agg = [0.0f64; 6];
            let mut mwh = 0.0;
            let mut tons = 0.0;
            for c in spec.clusters.iter().filter(|c| c.tech_class == *tech) {
                let o = &stage.clusters[&c.id];
                agg[0] += o.start_mw;
                agg[1] += o.new_mw;
                agg[2] += o.retired_mw;
                agg[3] += o.retrofit_in_mw;
                agg[4] += o.retrofit_out_mw;
                agg[5] += o.end_mw;
                mwh += o.total_mwh();
                tons += o.emissions_t();
            }
            capacity.rows.push(alloc::vec![
                tech.name().to_string(),
                stage.period.clone(),
                fmt_num(agg[0]),
                fmt_num(agg[1]),
                fmt_num(agg[2]),
                fmt_num(agg[3]),
                fmt_num(agg[4]),
                fmt_num(agg[5]),
            ]);
            generation.rows.push(alloc::vec![
                tech.name().to_string(),
                stage.period.clone(),
                fmt_num(mwh),
            ]);
            emissions_by_tech.rows.push(alloc::vec![
                tech.name().to_string(),
                stage.period.clone(),
                fmt_num(tons),
            ]);
        }
    }
    tables.push(capacity);
    tables.push(generation);
    tables.push(emissions_by_tech);

    let mut detail = Table::new(
        "capacity_detail",
        &["cluster", "period", "start_mw", "new_mw", "retired_mw", "retrofit_in_mw", "retrofit_out_mw", "end_mw", "capacity_factor"],
    );
    let mut dispatch = Table::new(
        "dispatch_detail",
        &["cluster", "fuel", "period", "mwh", "mmbtu", "emissions_t"],
    );
    for c in &spec.clusters {
        for stage in &result.stages {
            let o = &stage.clusters[&c.id];
            detail.rows.push(alloc::vec![
                c.id.clone(),
                stage.period.clone(),
                fmt_num(o.start_mw),
                fmt_num(o.new_mw),
                fmt_num(o.retired_mw),
                fmt_num(o.retrofit_in_mw),
                fmt_num(o.retrofit_out_mw),
                fmt_num(o.end_mw),
                fmt_num(o.capacity_factor),
            ]);
            for d in &o.dispatch {
                dispatch.rows.push(alloc::vec![
                    c.id.clone(),
                    d.fuel.clone().unwrap_or_else(|| String::from("-")),
                    stage.period.clone(),
                    fmt_num(d.mwh),
                    fmt_num(d.mmbtu),
                    fmt_num(d.emissions_t),
                ]);
            }
        }
    }
    tables.push(detail);
    tables.push(dispatch);

    // gas subgroups in the rules' utilisation taxonomy
    let gas_techs: Vec<TechClass> = alloc::vec![
        TechClass::ExistingNGCC,
        TechClass::ExistingNGCT,
        TechClass::NewNGCC,
        TechClass::NewNGCT,
        TechClass::NgccCcs,
        TechClass::GasCcsRetrofit,
        TechClass::H2Turbine,
        TechClass::CoalGasCofire,
    ];
    let mut gas = Table::new(
        "gas_subgroups",
        &["group", "cf_class", "period", "capacity_mw", "generation_mwh"],
    );
    for tech in &gas_techs {
        if !techs.contains(tech) {
            continue;
        }
        for (class_name, _, _) in CF_CLASSES {
            for stage in &result.stages {
                let mut cap = 0.0;
                let mut mwh = 0.0;
                for c in spec.clusters.iter().filter(|c| c.tech_class == *tech) {
                    let o = &stage.clusters[&c.id];
                    if cf_class(o.capacity_factor) == class_name && o.end_mw > 1e-9 {
                        cap += o.end_mw;
                        mwh += o.total_mwh();
                    }
                }
                gas.rows.push(alloc::vec![
                    tech.name().to_string(),
                    class_name.to_string(),
                    stage.period.clone(),
                    fmt_num(cap),
                    fmt_num(mwh),
                ]);
            }
        }
    }
    tables.push(gas);

    let mut costs = Table::new(
        "costs",
        &["period", "capex", "fixed_om", "variable_om", "fuel", "credits", "nse", "transmission", "total", "objective"],
    );
    for stage in &result.stages {
        costs.rows.push(alloc::vec![
            stage.period.clone(),
            fmt_num(stage.costs.capex),
            fmt_num(stage.costs.fixed_om),
            fmt_num(stage.costs.variable_om),
            fmt_num(stage.costs.fuel),
            fmt_num(stage.costs.credits),
            fmt_num(stage.costs.nse),
            fmt_num(stage.costs.transmission),
            fmt_num(stage.costs.total),
            fmt_num(stage.objective),
        ]);
    }
    tables.push(costs);

    let mut emis = Table::new(
        "emissions",
        &["period", "tons", "pct_below_baseline"],
    );
    for stage in &result.stages {
        emis.rows.push(alloc::vec![
            stage.period.clone(),
            fmt_num(stage.emissions_t),
            fmt_num(percent_below_baseline(stage, spec.baseline_2022_emissions_mt)),
        ]);
    }
    tables.push(emis);

    let mut unserved = Table::new("unserved", &["zone", "period", "nse_mwh"]);
    for z in &spec.zones {
        for stage in &result.stages {
            unserved.rows.push(alloc::vec![
                z.id.clone(),
                stage.period.clone(),
                fmt_num(stage.nse_mwh_by_zone.get(&z.id).copied().unwrap_or(0.0)),
            ]);
        }
    }
    tables.push(unserved);

    if !spec.storage.is_empty() {
        let mut st = Table::new(
            "storage",
            &["storage", "period", "start_power_mw", "new_power_mw", "end_power_mw", "end_energy_mwh", "discharge_mwh"],
        );
        for s in &spec.storage {
            for stage in &result.stages {
                let o = &stage.storage[&s.id];
                st.rows.push(alloc::vec![
                    s.id.clone(),
                    stage.period.clone(),
                    fmt_num(o.start_power_mw),
                    fmt_num(o.new_power_mw),
                    fmt_num(o.end_power_mw),
                    fmt_num(o.end_energy_mwh),
                    fmt_num(o.discharge_mwh),
                ]);
            }
        }
        tables.push(st);
    }

    if !spec.lines.is_empty() {
        let mut tx = Table::new(
            "transmission",
            &["line", "period", "start_mw", "new_mw", "end_mw"],
        );
        for l in &spec.lines {
            for stage in &result.stages {
                let o = &stage.lines[&l.id];
                tx.rows.push(alloc::vec![
                    l.id.clone(),
                    stage.period.clone(),
                    fmt_num(o.start_mw),
                    fmt_num(o.new_mw),
                    fmt_num(o.end_mw),
                ]);
            }
        }
        tables.push(tx);
    }

    let h2_any = result
        .stages
        .iter()
        .any(|s| !s.h2_mmbtu_by_zone.is_empty());
    if h2_any {
        let mut h2 = Table::new("hydrogen", &["zone", "period", "production_mmbtu"]);
        for z in &spec.zones {
            for stage in &result.stages {
                if let Some(v) = stage.h2_mmbtu_by_zone.get(&z.id) {
                    h2.rows.push(alloc::vec![
                        z.id.clone(),
                        stage.period.clone(),
                        fmt_num(*v),
                    ]);
                }
            }
        }
        tables.push(h2);
    }

    tables
}

/// Cross-scenario comparison with abatement costs against the benchmark and
/// incrementally against the coal-only run when both are present.
pub fn comparison_table(
    results: &[ScenarioResult],
    system: &ValidatedSystem,
    window: AbatementWindow,
) -> Result<Table, ReportError> {
    let benchmark = results
        .iter()
        .find(|r| r.scenario_name == crate::policy::builtin::NO_REGULATIONS);
    let coal_only = results
        .iter()
        .find(|r| r.scenario_name == crate::policy::builtin::COAL_ONLY);
    let mut t = Table::new(
        "scenario_comparison",
        &["scenario", "period", "cost_total", "emissions_t", "pct_below_baseline", "abatement_vs_benchmark", "abatement_incremental_vs_coal_only"],
    );
    for r in results {
        let vs_bench = match benchmark {
            Some(b) if b.scenario_name != r.scenario_name => {
                abatement_cost(r, b, system, window)?.render()
            }
            _ => String::from("NA"),
        };
        let vs_coal = match coal_only {
            Some(b) if b.scenario_name != r.scenario_name => {
                abatement_cost(r, b, system, window)?.render()
            }
            _ => String::from("NA"),
        };
        for stage in &r.stages {
            t.rows.push(alloc::vec![
                r.scenario_name.clone(),
                stage.period.clone(),
                fmt_num(stage.costs.total),
                fmt_num(stage.emissions_t),
                fmt_num(percent_below_baseline(
                    stage,
                    system.spec().baseline_2022_emissions_mt,
                )),
                vs_bench.clone(),
                vs_coal.clone(),
            ]);
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::CostBreakdown;

    fn stage(period: &str, cost: f64, emissions: f64, active: bool) -> StageResult {
        StageResult {
            period: period.into(),
            clusters: BTreeMap::new(),
            storage: BTreeMap::new(),
            lines: BTreeMap::new(),
            nse_mwh_by_zone: BTreeMap::new(),
            h2_mmbtu_by_zone: BTreeMap::new(),
            emissions_t: emissions,
            costs: CostBreakdown {
                total: cost,
                ..CostBreakdown::default()
            },
            objective: cost,
            policy_active: active,
            policy_rows: Vec::new(),
            iterations: 0,
        }
    }

    fn result(name: &str, costs: [f64; 4], emis: [f64; 4]) -> ScenarioResult {
        ScenarioResult {
            scenario_name: name.into(),
            stages: ["2025", "2030", "2035", "2040"]
                .iter()
                .zip(costs.iter().zip(emis.iter()))
                .map(|(p, (c, e))| stage(p, *c, *e, true))
                .collect(),
            retirements: BTreeMap::new(),
        }
    }

    fn four_period_system() -> ValidatedSystem {
        crate::system::validate_system(crate::demo::two_zone_system()).unwrap()
    }

    #[test]
    fn abatement_cost_basic_arithmetic() {
        let sys = four_period_system();
        // Δcost 1.7e9 per period, Δemissions 1e8 t per period → 17 $/t
        let reference = result("No Regulations", [1e9; 4], [2e8; 4]);
        let run = result("rules", [2.7e9; 4], [1e8; 4]);
        match abatement_cost(&run, &reference, &sys, AbatementWindow::All).unwrap() {
            AbatementCost::PerTon(v) => assert!((v - 17.0).abs() < 1e-9),
            other => panic!("expected a value, got {other:?}"),
        }
    }

    #[test]
    fn identical_scenarios_are_not_defined() {
        let sys = four_period_system();
        let a = result("a", [1e9; 4], [1e8; 4]);
        let b = result("b", [1e9; 4], [1e8; 4]);
        assert!(matches!(
            abatement_cost(&a, &b, &sys, AbatementWindow::All).unwrap(),
            AbatementCost::NotDefined { .. }
        ));
    }

    #[test]
    fn emission_increase_is_not_defined() {
        let sys = four_period_system();
        let reference = result("ref", [1e9; 4], [1e8; 4]);
        let run = result("more", [2e9; 4], [2e8; 4]);
        assert!(matches!(
            abatement_cost(&run, &reference, &sys, AbatementWindow::All).unwrap(),
            AbatementCost::NotDefined { .. }
        ));
    }

    #[test]
    fn antisymmetric_sign_under_swap() {
        let sys = four_period_system();
        let cheap_dirty = result("a", [1e9; 4], [2e8; 4]);
        let dear_clean = result("b", [2e9; 4], [1e8; 4]);
        let ab = abatement_cost(&dear_clean, &cheap_dirty, &sys, AbatementWindow::All).unwrap();
        match ab {
            AbatementCost::PerTon(v) => assert!(v > 0.0),
            _ => panic!("defined"),
        }
        // swapped: emissions increase → not defined
        assert!(matches!(
            abatement_cost(&cheap_dirty, &dear_clean, &sys, AbatementWindow::All).unwrap(),
            AbatementCost::NotDefined { .. }
        ));
    }

    #[test]
    fn percent_below_baseline_matches_definition() {
        let s = stage("2040", 0.0, 49e6, false);
        assert!((percent_below_baseline(&s, 100.0) - 0.51).abs() < 1e-12);
        let s = stage("2040", 0.0, 100e6, false);
        assert!(percent_below_baseline(&s, 100.0).abs() < 1e-12);
        let s = stage("2040", 0.0, 0.0, false);
        assert!((percent_below_baseline(&s, 100.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_studies_are_rejected() {
        let sys = four_period_system();
        let a = result("a", [1e9; 4], [1e8; 4]);
        let mut b = result("b", [1e9; 4], [1e8; 4]);
        b.stages.pop();
        assert!(matches!(
            abatement_cost(&a, &b, &sys, AbatementWindow::All),
            Err(ReportError::MismatchedStudies(_, _))
        ));
    }
}
