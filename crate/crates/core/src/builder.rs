//! Assembles one planning stage as a bounded-variable linear program.
//!
//! Structure per stage: investment and retirement variables per cluster,
//! retrofit transfers, hourly multi-fuel dispatch, storage cycling per
//! representative block, transport-model transmission with expansion,
//! electrolysis with hourly renewable matching, compiled policy rows, an
//! optional CO₂ cap, and an annualised cost objective with tax credits.
//!
//! There are no integer variables anywhere: compliance choices are carried
//! by variant clusters, so the stage problem is a pure LP. Variables and
//! rows are emitted in a fixed order; the solver's tie-breaking makes the
//! whole pipeline deterministic.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::credits::{apply_credits, ClusterCredits};
use crate::lp::{LinearProgram, RowId, Sense, VarId};
use crate::policy::{ConstraintSet, Scenario};
use crate::system::{SystemSpec, TechClass, ValidatedSystem, Vintage};

/// Capacity state entering a stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Carryover {
    /// Cluster id → MW at stage start. Must cover every cluster.
    pub clusters: BTreeMap<String, f64>,
    /// Storage id → (power MW, energy MWh) at stage start.
    pub storage: BTreeMap<String, (f64, f64)>,
    /// Line id → MW at stage start.
    pub lines: BTreeMap<String, f64>,
}

impl Carryover {
    /// Study-start capacities.
    pub fn initial(spec: &SystemSpec) -> Carryover {
        Carryover {
            clusters: spec
                .clusters
                .iter()
                .map(|c| (c.id.clone(), c.capacity_mw))
                .collect(),
            storage: spec
                .storage
                .iter()
                .map(|s| (s.id.clone(), (s.power_capacity_mw, s.energy_capacity_mwh)))
                .collect(),
            lines: spec
                .lines
                .iter()
                .map(|l| (l.id.clone(), l.capacity_mw))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Freeze the system: no investment, retirement, retrofit or expansion
    /// variables (model-validation dispatch mode).
    pub dispatch_only: bool,
    /// Pin new-build variables to given MW values (enumeration support).
    pub fixed_new_capacity: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("carryover is missing cluster `{0}`")]
    MissingCarryover(String),
    #[error("{entity}: infeasible bounds ({detail})")]
    InfeasibleBounds { entity: String, detail: String },
}

/// Objective components; their per-variable coefficients sum to the LP
/// objective, which is what makes the accounting-closure identity checkable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CostComponent {
    Capex,
    FixedOm,
    VariableOm,
    Fuel,
    Credits,
    Nse,
    Transmission,
}

impl CostComponent {
    pub const ALL: [CostComponent; 7] = [
        CostComponent::Capex,
        CostComponent::FixedOm,
        CostComponent::VariableOm,
        CostComponent::Fuel,
        CostComponent::Credits,
        CostComponent::Nse,
        CostComponent::Transmission,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CostComponent::Capex => "capex",
            CostComponent::FixedOm => "fixed_om",
            CostComponent::VariableOm => "variable_om",
            CostComponent::Fuel => "fuel",
            CostComponent::Credits => "credits",
            CostComponent::Nse => "nse",
            CostComponent::Transmission => "transmission",
        }
    }
}

/// Per-cluster variable handles. Hour-indexed variables are contiguous from
/// their base id.
#[derive(Debug, Clone, Default)]
pub struct ClusterVars {
    pub active: bool,
    pub carry: f64,
    pub cap_new: Option<VarId>,
    pub cap_ret: Option<VarId>,
    /// Forced full retirement this stage.
    pub forced_retirement: bool,
    /// (child cluster index, transfer var). The tranfer is in parent MW.
    pub retrofit_out: Vec<(usize, VarId)>,
    /// (parent cluster index, conversion ratio, transfer var).
    pub retrofit_in: Vec<(usize, f64, VarId)>,
    /// (fuel index or none, base var of the hourly generation block).
    pub gen: Vec<(Option<usize>, VarId)>,
    /// Electrolyzer consumption block.
    pub load: Option<VarId>,
}

#[derive(Debug, Clone)]
pub struct StorageVars {
    pub cap_new: Option<VarId>,
    pub charge: VarId,
    pub discharge: VarId,
    pub soc: VarId,
    pub carry_power: f64,
    pub carry_energy: f64,
}

#[derive(Debug, Clone)]
pub struct LineVars {
    pub fwd: VarId,
    pub bwd: VarId,
    pub tx_new: Option<VarId>,
    pub carry: f64,
}

/// Semantic index over a built stage LP.
#[derive(Debug, Clone, Default)]
pub struct StageIndex {
    pub hours: usize,
    pub total_weight: f64,
    pub clusters: Vec<ClusterVars>,
    pub storage: Vec<Option<StorageVars>>,
    pub lines: Vec<Option<LineVars>>,
    /// Zone index → base var of the hourly unserved-energy block.
    pub nse: Vec<VarId>,
    /// Audit map: policy constraint label → row.
    pub policy_rows: Vec<(String, RowId)>,
    /// Policy constraints enforced through variable bounds.
    pub policy_bounds: Vec<String>,
    pub co2_cap_row: Option<RowId>,
    /// The emissions expression: tons per unit of each variable, in builder
    /// emission order. Reused verbatim by the cap row and by reporting.
    pub emissions_terms: Vec<(VarId, f64)>,
    pub balance_rows: Vec<RowId>,
    /// Objective decomposition: component → (var, coefficient) terms.
    pub cost_terms: BTreeMap<CostComponent, Vec<(VarId, f64)>>,
    /// Constant part of the objective, all of it fixed O&M on carryover.
    pub cost_offset_fixed_om: f64,
}

pub struct StageLp {
    pub lp: LinearProgram,
    pub index: StageIndex,
}

struct ObjParts {
    terms: BTreeMap<CostComponent, Vec<(VarId, f64)>>,
}

impl ObjParts {
    fn new() -> Self {
        let mut terms = BTreeMap::new();
        for c in CostComponent::ALL {
            terms.insert(c, Vec::new());
        }
        ObjParts { terms }
    }

    fn add(&mut self, lp: &mut LinearProgram, comp: CostComponent, var: VarId, coeff: f64) {
        if coeff != 0.0 {
            lp.variables[var.0].objective += coeff;
            self.terms.get_mut(&comp).unwrap().push((var, coeff));
        }
    }
}

/// Builds the stage LP for one period.
pub fn build_stage_lp(
    system: &ValidatedSystem,
    scenario: &Scenario,
    constraints: &ConstraintSet,
    period_idx: usize,
    carryover: &Carryover,
    options: &BuildOptions,
) -> Result<StageLp, BuildError> {
    let spec = system.spec();
    let period = &spec.periods[period_idx];
    let hours = spec.time.hour_count();
    let weights = &spec.time.weights;
    let total_weight = spec.time.total_weight();

    for c in &spec.clusters {
        if !carryover.clusters.contains_key(&c.id) {
            return Err(BuildError::MissingCarryover(c.id.clone()));
        }
    }

    let mut lp = LinearProgram::new(format!("{}-{}", scenario.name, period.label));
    let mut obj = ObjParts::new();
    let mut index = StageIndex {
        hours,
        total_weight,
        clusters: alloc::vec![ClusterVars::default(); spec.clusters.len()],
        storage: alloc::vec![None; spec.storage.len()],
        lines: alloc::vec![None; spec.lines.len()],
        ..StageIndex::default()
    };

    // per-cluster credits for this stage
    let credits: Vec<ClusterCredits> = spec
        .clusters
        .iter()
        .map(|c| apply_credits(c, system, &scenario.tax_credits, period.calendar_anchor))
        .collect();

    // ---- capacity variables ------------------------------------------------

    // which clusters may retrofit into which (child side declared in data)
    let mut retrofit_children: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); spec.clusters.len()];
    for (ci, c) in spec.clusters.iter().enumerate() {
        for (parent, ratio) in &c.retrofit_parents {
            let pi = system.cluster_idx(parent).expect("validated parent");
            retrofit_children[pi].push((ci, *ratio));
        }
    }

    for (ci, cluster) in spec.clusters.iter().enumerate() {
        let carry = carryover.clusters[&cluster.id].max(0.0);
        index.clusters[ci].carry = carry;
        let cc = constraints.by_cluster.get(&ci);

        // forced retirement: planned schedule or a compiled retire-by date
        let planned_due = cluster
            .planned_retirement
            .as_deref()
            .and_then(|l| system.period_idx(l))
            .map_or(false, |p| p <= period_idx);
        let policy_due = cc
            .and_then(|c| c.must_retire_by)
            .map_or(false, |p| p <= period_idx);
        let forced = (planned_due || policy_due) && carry > 0.0 && !options.dispatch_only;
        index.clusters[ci].forced_retirement = forced;
        if policy_due {
            index
                .policy_bounds
                .push(format!("retire.{}: forced by policy", cluster.id));
        }

        if !options.dispatch_only {
            // new build
            let buildable = match &cluster.vintage {
                Vintage::NewBuild { first_available } => {
                    system.period_idx(first_available).map_or(false, |p| p <= period_idx)
                }
                Vintage::Existing => true,
            };
            let max_new = cluster
                .max_new_by_period
                .get(&period.label)
                .copied()
                .unwrap_or(0.0);
            if buildable && max_new > 0.0 {
                let (lo, up) = match options
                    .fixed_new_capacity
                    .as_ref()
                    .and_then(|m| m.get(&cluster.id))
                {
                    Some(v) => {
                        if *v > max_new * (1.0 + 1e-9) {
                            return Err(BuildError::InfeasibleBounds {
                                entity: format!("cluster {}", cluster.id),
                                detail: format!("pinned build {v} exceeds limit {max_new}"),
                            });
                        }
                        (*v, *v)
                    }
                    None => (0.0, max_new),
                };
                let v = lp.add_var(format!("new.{}", cluster.id), lo, up, 0.0);
                obj.add(
                    &mut lp,
                    CostComponent::Capex,
                    v,
                    cluster.annuitized_capex * credits[ci].capex_multiplier,
                );
                obj.add(&mut lp, CostComponent::FixedOm, v, cluster.fixed_om);
                index.clusters[ci].cap_new = Some(v);
            }

            // retirement
            if carry > 0.0 {
                let blocked = credits[ci].block_retirement
                    || (cluster.tech_class == TechClass::Nuclear
                        && scenario.sensitivity.nuclear_no_retirement);
                if forced {
                    // forced retirement overrides a retirement block
                    let v = lp.add_var(format!("ret.{}", cluster.id), carry, carry, 0.0);
                    obj.add(&mut lp, CostComponent::FixedOm, v, -cluster.fixed_om);
                    index.clusters[ci].cap_ret = Some(v);
                } else if !blocked {
                    let v = lp.add_var(format!("ret.{}", cluster.id), 0.0, carry, 0.0);
                    obj.add(&mut lp, CostComponent::FixedOm, v, -cluster.fixed_om);
                    index.clusters[ci].cap_ret = Some(v);
                }
            }
        }
    }

    // retrofit transfers (need both sides' variables resolved first)
    if !options.dispatch_only {
        for (pi, children) in retrofit_children.clone().into_iter().enumerate() {
            let parent = &spec.clusters[pi];
            let carry = carryover.clusters[&parent.id].max(0.0);
            if carry <= 0.0 || children.is_empty() || index.clusters[pi].forced_retirement {
                continue;
            }
            for (ci, ratio) in children {
                let child = &spec.clusters[ci];
                let v = lp.add_var(
                    format!("rfit.{}.{}", parent.id, child.id),
                    0.0,
                    carry,
                    0.0,
                );
                // retrofit pays the child's capex on converted MW and swaps
                // fixed O&M from parent to child
                obj.add(
                    &mut lp,
                    CostComponent::Capex,
                    v,
                    child.annuitized_capex * credits[ci].capex_multiplier * ratio,
                );
                obj.add(&mut lp, CostComponent::FixedOm, v, child.fixed_om * ratio);
                obj.add(&mut lp, CostComponent::FixedOm, v, -parent.fixed_om);
                index.clusters[pi].retrofit_out.push((ci, v));
                index.clusters[ci].retrofit_in.push((pi, ratio, v));
            }
        }
    }

    // fixed O&M on carried-over capacity is a constant
    let mut offset = 0.0;
    for (ci, cluster) in spec.clusters.iter().enumerate() {
        offset += cluster.fixed_om * index.clusters[ci].carry;
    }

    // ---- dispatch variables ------------------------------------------------

    // a cluster participates when it has or can gain capacity this stage
    for ci in 0..spec.clusters.len() {
        let cv = &index.clusters[ci];
        let active = cv.carry > 0.0 || cv.cap_new.is_some() || !cv.retrofit_in.is_empty();
        index.clusters[ci].active = active;
    }

    // pinned investment requires a build variable to pin
    if let Some(pins) = &options.fixed_new_capacity {
        for (id, v) in pins {
            if *v > 0.0 {
                let ci = system
                    .cluster_idx(id)
                    .ok_or_else(|| BuildError::InfeasibleBounds {
                        entity: format!("cluster {id}"),
                        detail: String::from("unknown cluster pinned"),
                    })?;
                if index.clusters[ci].cap_new.is_none() {
                    return Err(BuildError::InfeasibleBounds {
                        entity: format!("cluster {id}"),
                        detail: format!("pinned build {v} MW but no build allowed this period"),
                    });
                }
            }
        }
    }

    let cap_is_fixed = |cv: &ClusterVars| {
        cv.cap_new.is_none()
            && cv.cap_ret.is_none()
            && cv.retrofit_in.is_empty()
            && cv.retrofit_out.is_empty()
    };

    let period_price = |fuel_idx: usize| -> f64 {
        spec.fuels[fuel_idx]
            .price_by_period
            .get(&period.label)
            .copied()
            .unwrap_or(0.0)
    };

    for (ci, cluster) in spec.clusters.iter().enumerate() {
        if !index.clusters[ci].active {
            continue;
        }
        let cv_fixed = cap_is_fixed(&index.clusters[ci]);
        let carry = index.clusters[ci].carry;
        let max_cf = constraints
            .by_cluster
            .get(&ci)
            .and_then(|c| c.max_capacity_factor);
        let gen_blocked = max_cf == Some(0.0);

        if cluster.tech_class == TechClass::Electrolyzer {
            // consumption block instead of generation
            let base = VarId(lp.num_vars());
            for t in 0..hours {
                let up = if gen_blocked {
                    0.0
                } else if cv_fixed {
                    cluster.availability.at(t) * carry
                } else {
                    f64::INFINITY
                };
                let v = lp.add_var(format!("load.{}.t{t:04}", cluster.id), 0.0, up, 0.0);
                obj.add(
                    &mut lp,
                    CostComponent::VariableOm,
                    v,
                    weights[t] * cluster.var_om,
                );
            }
            index.clusters[ci].load = Some(base);
            continue;
        }

        let fuel_slots: Vec<Option<usize>> = if cluster.allowed_fuels.is_empty() {
            alloc::vec![None]
        } else {
            cluster
                .allowed_fuels
                .iter()
                .map(|f| system.fuel_idx(f))
                .collect()
        };
        for slot in fuel_slots {
            let fuel_name = slot.map_or("none", |f| spec.fuels[f].id.as_str());
            let base = VarId(lp.num_vars());
            let (hr, price, ef, fuel_credit) = match slot {
                Some(f) => {
                    let id = &spec.fuels[f].id;
                    let hr = cluster.heat_rates.get(id).copied().unwrap_or(0.0);
                    (
                        hr,
                        period_price(f),
                        spec.fuels[f].emission_factor,
                        credits[ci].per_mwh_by_fuel.get(id).copied().unwrap_or(0.0),
                    )
                }
                None => (0.0, 0.0, 0.0, 0.0),
            };
            let emis_per_mwh = hr * ef * (1.0 - cluster.capture_rate);
            for t in 0..hours {
                let up = if gen_blocked {
                    0.0
                } else if cv_fixed {
                    cluster.availability.at(t) * carry
                } else {
                    f64::INFINITY
                };
                let v = lp.add_var(
                    format!("gen.{}.{}.t{t:04}", cluster.id, fuel_name),
                    0.0,
                    up,
                    0.0,
                );
                let w = weights[t];
                obj.add(&mut lp, CostComponent::VariableOm, v, w * cluster.var_om);
                obj.add(&mut lp, CostComponent::Fuel, v, w * price * hr);
                obj.add(
                    &mut lp,
                    CostComponent::Credits,
                    v,
                    -w * (fuel_credit + credits[ci].per_mwh),
                );
                if emis_per_mwh != 0.0 {
                    index.emissions_terms.push((v, w * emis_per_mwh));
                }
            }
            index.clusters[ci].gen.push((slot, base));
        }
    }

    // storage
    for (si, s) in spec.storage.iter().enumerate() {
        let (carry_p, carry_e) = carryover
            .storage
            .get(&s.id)
            .copied()
            .unwrap_or((s.power_capacity_mw, s.energy_capacity_mwh));
        let (carry_p, carry_e) = (carry_p.max(0.0), carry_e.max(0.0));
        let max_new = s.max_new_by_period.get(&period.label).copied().unwrap_or(0.0);
        let cap_new = if !options.dispatch_only && max_new > 0.0 {
            let v = lp.add_var(format!("snew.{}", s.id), 0.0, max_new, 0.0);
            let itc = if scenario.tax_credits.itc_techs.contains(&TechClass::Battery) {
                1.0 - scenario.tax_credits.itc_fraction
            } else {
                1.0
            };
            obj.add(&mut lp, CostComponent::Capex, v, s.annuitized_capex * itc);
            obj.add(&mut lp, CostComponent::FixedOm, v, s.fixed_om);
            Some(v)
        } else {
            None
        };
        offset += s.fixed_om * carry_p;
        if carry_p <= 0.0 && cap_new.is_none() {
            continue;
        }
        let charge = VarId(lp.num_vars());
        for t in 0..hours {
            let up = if cap_new.is_none() { carry_p } else { f64::INFINITY };
            lp.add_var(format!("ch.{}.t{t:04}", s.id), 0.0, up, 0.0);
        }
        let discharge = VarId(lp.num_vars());
        for t in 0..hours {
            let up = if cap_new.is_none() { carry_p } else { f64::INFINITY };
            let v = lp.add_var(format!("dis.{}.t{t:04}", s.id), 0.0, up, 0.0);
            obj.add(&mut lp, CostComponent::VariableOm, v, weights[t] * s.var_om);
        }
        let soc = VarId(lp.num_vars());
        for t in 0..hours {
            let up = if cap_new.is_none() { carry_e } else { f64::INFINITY };
            lp.add_var(format!("soc.{}.t{t:04}", s.id), 0.0, up, 0.0);
        }
        index.storage[si] = Some(StorageVars {
            cap_new,
            charge,
            discharge,
            soc,
            carry_power: carry_p,
            carry_energy: carry_e,
        });
    }

    // transmission
    for (li, l) in spec.lines.iter().enumerate() {
        let carry = carryover.lines.get(&l.id).copied().unwrap_or(l.capacity_mw).max(0.0);
        let expandable = !options.dispatch_only && l.max_expansion_mw > 0.0;
        let tx_new = if expandable {
            let v = lp.add_var(format!("txnew.{}", l.id), 0.0, l.max_expansion_mw, 0.0);
            obj.add(&mut lp, CostComponent::Transmission, v, l.expansion_cost);
            Some(v)
        } else {
            None
        };
        if carry <= 0.0 && tx_new.is_none() {
            continue;
        }
        let hard_cap = if expandable { f64::INFINITY } else { carry };
        let fwd = VarId(lp.num_vars());
        for t in 0..hours {
            lp.add_var(format!("fwd.{}.t{t:04}", l.id), 0.0, hard_cap, 0.0);
        }
        let bwd = VarId(lp.num_vars());
        for t in 0..hours {
            lp.add_var(format!("bwd.{}.t{t:04}", l.id), 0.0, hard_cap, 0.0);
        }
        index.lines[li] = Some(LineVars {
            fwd,
            bwd,
            tx_new,
            carry,
        });
    }

    // unserved energy
    for z in &spec.zones {
        let base = VarId(lp.num_vars());
        for t in 0..hours {
            let v = lp.add_var(
                format!("nse.{}.t{t:04}", z.id),
                0.0,
                z.demand[t],
                0.0,
            );
            obj.add(&mut lp, CostComponent::Nse, v, weights[t] * spec.voll);
        }
        index.nse.push(base);
    }

    // ---- rows ---------------------------------------------------------------

    // zonal power balance
    for (zi, z) in spec.zones.iter().enumerate() {
        for t in 0..hours {
            let mut coeffs: Vec<(VarId, f64)> = Vec::new();
            for (ci, cluster) in spec.clusters.iter().enumerate() {
                if cluster.zone != z.id || !index.clusters[ci].active {
                    continue;
                }
                if let Some(load) = index.clusters[ci].load {
                    coeffs.push((VarId(load.0 + t), -1.0));
                } else {
                    for (_, base) in &index.clusters[ci].gen {
                        coeffs.push((VarId(base.0 + t), 1.0));
                    }
                }
            }
            for (si, s) in spec.storage.iter().enumerate() {
                if s.zone != z.id {
                    continue;
                }
                if let Some(sv) = &index.storage[si] {
                    coeffs.push((VarId(sv.discharge.0 + t), 1.0));
                    coeffs.push((VarId(sv.charge.0 + t), -1.0));
                }
            }
            for (li, l) in spec.lines.iter().enumerate() {
                let Some(lv) = &index.lines[li] else { continue };
                if l.from_zone == z.id {
                    coeffs.push((VarId(lv.fwd.0 + t), -1.0));
                    coeffs.push((VarId(lv.bwd.0 + t), 1.0 - l.loss_fraction));
                } else if l.to_zone == z.id {
                    coeffs.push((VarId(lv.fwd.0 + t), 1.0 - l.loss_fraction));
                    coeffs.push((VarId(lv.bwd.0 + t), -1.0));
                }
            }
            coeffs.push((VarId(index.nse[zi].0 + t), 1.0));
            let row = lp.add_row(
                format!("bal.{}.t{t:04}", z.id),
                Sense::Eq,
                z.demand[t],
                coeffs,
            );
            index.balance_rows.push(row);
        }
    }

    // effective-capacity terms for a cluster: constant + variable parts
    let cap_terms = |cv: &ClusterVars| -> Vec<(VarId, f64)> {
        let mut terms = Vec::new();
        if let Some(v) = cv.cap_new {
            terms.push((v, 1.0));
        }
        if let Some(v) = cv.cap_ret {
            terms.push((v, -1.0));
        }
        for (_, v) in &cv.retrofit_out {
            terms.push((*v, -1.0));
        }
        for (_, ratio, v) in &cv.retrofit_in {
            terms.push((*v, *ratio));
        }
        terms
    };

    // availability rows where capacity is variable
    for (ci, cluster) in spec.clusters.iter().enumerate() {
        let cv = &index.clusters[ci];
        if !cv.active || cap_is_fixed(cv) {
            continue;
        }
        let caps = cap_terms(cv);
        for t in 0..hours {
            let a = cluster.availability.at(t);
            let mut coeffs: Vec<(VarId, f64)> = Vec::new();
            if let Some(load) = cv.load {
                coeffs.push((VarId(load.0 + t), 1.0));
            }
            for (_, base) in &cv.gen {
                coeffs.push((VarId(base.0 + t), 1.0));
            }
            if coeffs.is_empty() {
                continue;
            }
            for (v, c) in &caps {
                coeffs.push((*v, -a * c));
            }
            lp.add_row(
                format!("avail.{}.t{t:04}", cluster.id),
                Sense::Le,
                a * cv.carry,
                coeffs,
            );
        }
    }

    // retrofit conservation: transfers plus retirement fit inside carryover
    for (pi, cluster) in spec.clusters.iter().enumerate() {
        let cv = &index.clusters[pi];
        if cv.retrofit_out.is_empty() {
            continue;
        }
        let mut coeffs: Vec<(VarId, f64)> = cv.retrofit_out.iter().map(|(_, v)| (*v, 1.0)).collect();
        if let Some(r) = cv.cap_ret {
            coeffs.push((r, 1.0));
        }
        lp.add_row(
            format!("rfitlink.{}", cluster.id),
            Sense::Le,
            cv.carry,
            coeffs,
        );
    }

    // storage coupling
    for (si, s) in spec.storage.iter().enumerate() {
        let Some(sv) = index.storage[si].clone() else { continue };
        if let Some(cap_new) = sv.cap_new {
            for t in 0..hours {
                lp.add_row(
                    format!("chcap.{}.t{t:04}", s.id),
                    Sense::Le,
                    sv.carry_power,
                    alloc::vec![(VarId(sv.charge.0 + t), 1.0), (cap_new, -1.0)],
                );
                lp.add_row(
                    format!("discap.{}.t{t:04}", s.id),
                    Sense::Le,
                    sv.carry_power,
                    alloc::vec![(VarId(sv.discharge.0 + t), 1.0), (cap_new, -1.0)],
                );
                lp.add_row(
                    format!("soccap.{}.t{t:04}", s.id),
                    Sense::Le,
                    sv.carry_energy,
                    alloc::vec![(VarId(sv.soc.0 + t), 1.0), (cap_new, -s.duration_hours)],
                );
            }
        }
        // cyclic state of charge within each representative block; losses
        // are charged on the way in so the round trip nets the efficiency
        for (bs, be) in spec.time.blocks() {
            for t in bs..be {
                let prev = if t == bs { be - 1 } else { t - 1 };
                lp.add_row(
                    format!("socrec.{}.t{t:04}", s.id),
                    Sense::Eq,
                    0.0,
                    alloc::vec![
                        (VarId(sv.soc.0 + t), 1.0),
                        (VarId(sv.soc.0 + prev), -1.0),
                        (VarId(sv.charge.0 + t), -s.round_trip_efficiency),
                        (VarId(sv.discharge.0 + t), 1.0),
                    ],
                );
            }
        }
    }

    // transmission expansion coupling
    for (li, l) in spec.lines.iter().enumerate() {
        let Some(lv) = &index.lines[li] else { continue };
        let Some(tx) = lv.tx_new else { continue };
        for t in 0..hours {
            lp.add_row(
                format!("fwdcap.{}.t{t:04}", l.id),
                Sense::Le,
                lv.carry,
                alloc::vec![(VarId(lv.fwd.0 + t), 1.0), (tx, -1.0)],
            );
            lp.add_row(
                format!("bwdcap.{}.t{t:04}", l.id),
                Sense::Le,
                lv.carry,
                alloc::vec![(VarId(lv.bwd.0 + t), 1.0), (tx, -1.0)],
            );
        }
    }

    // hourly renewable matching for electrolyzers, per zone
    for z in &spec.zones {
        let elec: Vec<usize> = spec
            .clusters
            .iter()
            .enumerate()
            .filter(|(ci, c)| {
                c.zone == z.id
                    && c.tech_class == TechClass::Electrolyzer
                    && index.clusters[*ci].active
            })
            .map(|(ci, _)| ci)
            .collect();
        if elec.is_empty() {
            continue;
        }
        let new_renewables: Vec<usize> = spec
            .clusters
            .iter()
            .enumerate()
            .filter(|(ci, c)| {
                c.zone == z.id
                    && c.tech_class.is_renewable()
                    && c.is_new_build()
                    && index.clusters[*ci].active
            })
            .map(|(ci, _)| ci)
            .collect();
        for t in 0..hours {
            let mut coeffs: Vec<(VarId, f64)> = Vec::new();
            for &e in &elec {
                coeffs.push((VarId(index.clusters[e].load.unwrap().0 + t), 1.0));
            }
            for &r in &new_renewables {
                for (_, base) in &index.clusters[r].gen {
                    coeffs.push((VarId(base.0 + t), -1.0));
                }
            }
            lp.add_row(format!("h2match.{}.t{t:04}", z.id), Sense::Le, 0.0, coeffs);
        }
    }

    // annual hydrogen demand per zone
    for z in &spec.zones {
        let Some(demand) = z.h2_demand.get(&period.label).copied() else {
            continue;
        };
        if demand <= 0.0 {
            continue;
        }
        let mut coeffs: Vec<(VarId, f64)> = Vec::new();
        for (ci, c) in spec.clusters.iter().enumerate() {
            if c.zone != z.id || c.tech_class != TechClass::Electrolyzer {
                continue;
            }
            let Some(load) = index.clusters[ci].load else { continue };
            let eff = c
                .allowed_fuels
                .first()
                .and_then(|f| c.heat_rates.get(f))
                .copied()
                .unwrap_or(0.0);
            for t in 0..hours {
                coeffs.push((VarId(load.0 + t), weights[t] * eff));
            }
        }
        lp.add_row(format!("h2demand.{}", z.id), Sense::Ge, demand, coeffs);
    }

    // zone-level technology build limits
    for z in &spec.zones {
        for ((tech, plabel), limit) in &z.build_limits {
            if plabel != &period.label || !limit.is_finite() {
                continue;
            }
            let mut coeffs: Vec<(VarId, f64)> = Vec::new();
            for (ci, c) in spec.clusters.iter().enumerate() {
                if c.zone == z.id && c.tech_class == *tech {
                    if let Some(v) = index.clusters[ci].cap_new {
                        coeffs.push((v, 1.0));
                    }
                }
            }
            if coeffs.is_empty() {
                continue;
            }
            lp.add_row(
                format!("zonebuild.{}.{}", z.id, tech),
                Sense::Le,
                *limit,
                coeffs,
            );
        }
    }

    // ---- policy rows ---------------------------------------------------------

    let mut vacuous: Vec<String> = Vec::new();
    for (ci, cc) in &constraints.by_cluster {
        let cluster = &spec.clusters[*ci];
        let cv = &index.clusters[*ci];
        if !cv.active {
            if !cc.is_empty() {
                vacuous.push(format!("{}: constrained but inactive", cluster.id));
            }
            continue;
        }
        // capacity-factor cap: Σ w·gen ≤ γ·W·cap_effective
        if let Some(g) = cc.max_capacity_factor {
            let mut coeffs: Vec<(VarId, f64)> = Vec::new();
            for (_, base) in &cv.gen {
                for t in 0..hours {
                    coeffs.push((VarId(base.0 + t), weights[t]));
                }
            }
            if let Some(load) = cv.load {
                for t in 0..hours {
                    coeffs.push((VarId(load.0 + t), weights[t]));
                }
            }
            for (v, c) in cap_terms(cv) {
                coeffs.push((v, -g * total_weight * c));
            }
            let row = lp.add_row(
                format!("cf.{}", cluster.id),
                Sense::Le,
                g * total_weight * cv.carry,
                coeffs,
            );
            index.policy_rows.push((format!("cf.{}", cluster.id), row));
        }
        // heat-share floors: (1−σ)·hr_f on the named fuel, −σ·hr on others
        for (fuel, share) in &cc.min_heat_shares {
            let mut coeffs: Vec<(VarId, f64)> = Vec::new();
            for (slot, base) in &cv.gen {
                let Some(f) = slot else { continue };
                let fid = &spec.fuels[*f].id;
                let hr = cluster.heat_rates.get(fid).copied().unwrap_or(0.0);
                let c = if fid == fuel {
                    (1.0 - share) * hr
                } else {
                    -share * hr
                };
                for t in 0..hours {
                    coeffs.push((VarId(base.0 + t), weights[t] * c));
                }
            }
            let name = format!("cofire.{}.{}", cluster.id, fuel);
            let row = lp.add_row(name.clone(), Sense::Ge, 0.0, coeffs);
            index.policy_rows.push((name, row));
        }
        // emission-rate cap: Σ w·gen·(hr·ef·(1−capture) − rate) ≤ 0
        if let Some(rate) = cc.max_emission_rate {
            let mut coeffs: Vec<(VarId, f64)> = Vec::new();
            for (slot, base) in &cv.gen {
                let per_mwh = match slot {
                    Some(f) => {
                        let fid = &spec.fuels[*f].id;
                        let hr = cluster.heat_rates.get(fid).copied().unwrap_or(0.0);
                        hr * spec.fuels[*f].emission_factor * (1.0 - cluster.capture_rate)
                    }
                    None => 0.0,
                };
                for t in 0..hours {
                    coeffs.push((VarId(base.0 + t), weights[t] * (per_mwh - rate)));
                }
            }
            let name = format!("erate.{}", cluster.id);
            let row = lp.add_row(name.clone(), Sense::Le, 0.0, coeffs);
            index.policy_rows.push((name, row));
        }
    }

    index.policy_bounds.extend(vacuous);

    // system CO₂ cap reuses the emissions expression verbatim
    if let Some(cap) = constraints.co2_cap_tons {
        let coeffs = index.emissions_terms.clone();
        let row = lp.add_row("co2cap", Sense::Le, cap, coeffs);
        index.policy_rows.push((String::from("co2cap"), row));
        index.co2_cap_row = Some(row);
    }

    lp.objective_offset = offset;
    index.cost_offset_fixed_om = offset;
    index.cost_terms = obj.terms;

    // boundedness guard: negative-cost variables must be capped by a bound
    // or an availability/capacity row
    debug_assert!(bounded_below(&lp), "objective unbounded by construction");

    if let Err(errors) = lp.validate() {
        return Err(BuildError::InfeasibleBounds {
            entity: String::from("stage lp"),
            detail: crate::lp::fmt_errors(&errors),
        });
    }
    Ok(StageLp { lp, index })
}

/// Every variable with a negative objective coefficient must have a finite
/// upper bound or appear with positive sign in some ≤-row (which the builder
/// only emits with capacity on the other side).
fn bounded_below(lp: &LinearProgram) -> bool {
    let mut capped = alloc::vec![false; lp.num_vars()];
    for row in &lp.rows {
        if row.sense == Sense::Le {
            for (v, c) in &row.coeffs {
                if *c > 0.0 {
                    capped[v.0] = true;
                }
            }
        }
    }
    lp.variables
        .iter()
        .enumerate()
        .all(|(j, v)| v.objective >= 0.0 || v.upper.is_finite() || capped[j])
}
