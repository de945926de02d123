//! Regulations as data: applicability predicates, compliance pathways and
//! effective periods, plus compilation of a scenario into per-cluster
//! constraint sets.
//!
//! A rule offers one or more compliance pathways, tried in order. A pathway
//! is available to a cluster when its hardware can express it: a capture
//! requirement needs the capture rate already installed, a heat-share floor
//! needs the fuel in the cluster's fuel list. The first available pathway
//! contributes its behavioural constraints (capacity-factor caps, heat-share
//! floors, retire-by dates); a capture requirement that is already met
//! contributes nothing. A cluster with no available pathway cannot comply
//! and is barred from generating. Choice between pathways is therefore
//! structural — variant clusters (retrofits, capture-equipped new builds)
//! carry the alternatives — and the stage problem stays a pure LP.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::credits::TaxCreditSettings;
use crate::system::{GeneratorCluster, Period, TechClass, ValidatedSystem, Vintage};

/// Fuel id the built-in rule library uses for natural gas.
pub const NATURAL_GAS: &str = "natural_gas";
/// Fuel id the built-in rule library uses for hydrogen.
pub const HYDROGEN: &str = "hydrogen";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathwayConstraint {
    /// Annual generation ≤ γ · capacity · 8760.
    MaxCapacityFactor(f64),
    /// Named fuel supplies at least this share of annual heat input.
    MinFuelHeatShare { fuel: String, share: f64 },
    /// Requires an installed capture rate of at least this fraction.
    RequireCapture(f64),
    /// Capacity must be fully retired by the first stage anchored at or
    /// after this calendar year.
    MustRetireBy { year: i32 },
    /// Annual emissions ≤ rate · annual generation.
    MaxEmissionRate(f64),
}

impl PathwayConstraint {
    pub fn in_range(&self) -> bool {
        match self {
            PathwayConstraint::MaxCapacityFactor(g) => (0.0..=1.0).contains(g),
            PathwayConstraint::MinFuelHeatShare { share, .. } => (0.0..=1.0).contains(share),
            PathwayConstraint::RequireCapture(r) => (0.0..=1.0).contains(r),
            PathwayConstraint::MustRetireBy { .. } => true,
            PathwayConstraint::MaxEmissionRate(r) => *r >= 0.0,
        }
    }
}

/// Retirement-schedule class, evaluated against the effective retirement
/// (the earlier of planned and economic retirement).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetirementClass {
    /// Retires strictly before the year.
    RetiresBefore { year: i32 },
    /// Retires in `(after, by]`.
    RetiresWithin { after: i32, by: i32 },
    /// No retirement, or retirement strictly after the year.
    OperatesPast { year: i32 },
}

impl RetirementClass {
    pub fn matches(&self, retirement_anchor: Option<i32>) -> bool {
        match (self, retirement_anchor) {
            (RetirementClass::RetiresBefore { year }, Some(r)) => r < *year,
            (RetirementClass::RetiresBefore { .. }, None) => false,
            (RetirementClass::RetiresWithin { after, by }, Some(r)) => r > *after && r <= *by,
            (RetirementClass::RetiresWithin { .. }, None) => false,
            (RetirementClass::OperatesPast { year }, Some(r)) => r > *year,
            (RetirementClass::OperatesPast { .. }, None) => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VintageClass {
    Existing,
    New,
}

/// Which clusters a rule applies to. Empty tech list means any technology.
/// The retirement class is evaluated during compilation, where the economic
/// retirement schedule is known.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RulePredicate {
    pub tech: Vec<TechClass>,
    pub vintage: Option<VintageClass>,
    pub min_capacity_mw: Option<f64>,
    pub retirement_class: Option<RetirementClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pathway {
    pub name: String,
    pub constraints: Vec<PathwayConstraint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRule {
    pub id: String,
    pub applies_to: RulePredicate,
    /// Calendar year of the compliance date; binds from the first study
    /// period anchored at or after it.
    pub effective_from_year: i32,
    pub pathways: Vec<Pathway>,
}

/// Subcategories of the existing-steam rule, keyed to the effective
/// retirement schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoalSubcategory {
    RetireBefore2032Unconstrained,
    RetireBefore2039Cofire40From2030,
    OperatePast2039CcsFrom2032,
}

/// Statute years that split the steam-unit subcategories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationYears {
    pub unconstrained_before: i32,
    pub cofire_by: i32,
}

impl Default for ClassificationYears {
    fn default() -> Self {
        ClassificationYears {
            unconstrained_before: 2032,
            cofire_by: 2039,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("cluster {0} is not a coal steam cluster")]
    NotCoal(String),
}

/// Classifies a coal cluster by its effective retirement (the earlier of its
/// planned retirement and the supplied economic retirement).
pub fn classify_coal_subcategory(
    system: &ValidatedSystem,
    cluster: &GeneratorCluster,
    economic_retirement: Option<&Period>,
    years: &ClassificationYears,
) -> Result<CoalSubcategory, PolicyError> {
    if cluster.tech_class != TechClass::CoalSteam {
        return Err(PolicyError::NotCoal(cluster.id.clone()));
    }
    let planned = cluster
        .planned_retirement
        .as_deref()
        .and_then(|label| system.period_idx(label))
        .map(|i| system.periods()[i].calendar_anchor);
    let economic = economic_retirement.map(|p| p.calendar_anchor);
    let effective = match (planned, economic) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    Ok(match effective {
        Some(r) if r <= years.unconstrained_before => CoalSubcategory::RetireBefore2032Unconstrained,
        Some(r) if r <= years.cofire_by => CoalSubcategory::RetireBefore2039Cofire40From2030,
        _ => CoalSubcategory::OperatePast2039CcsFrom2032,
    })
}

/// Sensitivity knobs carried by a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensitivityKnobs {
    pub fuel_price_set: String,
    pub build_limit_set: String,
    /// Blocks nuclear retirement in every stage.
    pub nuclear_no_retirement: bool,
}

impl Default for SensitivityKnobs {
    fn default() -> Self {
        SensitivityKnobs {
            fuel_price_set: String::from("ref"),
            build_limit_set: String::from("ref"),
            nuclear_no_retirement: false,
        }
    }
}

/// A named bundle of rules, optional CO₂ cap, credit settings and knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub rules: Vec<PolicyRule>,
    /// MtCO₂ cap per period label.
    #[serde(default)]
    pub co2_cap_mt: BTreeMap<String, f64>,
    /// Take the cap from another scenario's modelled emissions.
    #[serde(default)]
    pub co2_cap_from_scenario: Option<String>,
    #[serde(default)]
    pub tax_credits: TaxCreditSettings,
    #[serde(default)]
    pub sensitivity: SensitivityKnobs,
}

impl Scenario {
    pub fn unregulated(name: &str) -> Scenario {
        Scenario {
            name: String::from(name),
            rules: Vec::new(),
            co2_cap_mt: BTreeMap::new(),
            co2_cap_from_scenario: None,
            tax_credits: TaxCreditSettings::default(),
            sensitivity: SensitivityKnobs::default(),
        }
    }

    pub fn has_cap(&self) -> bool {
        !self.co2_cap_mt.is_empty() || self.co2_cap_from_scenario.is_some()
    }
}

/// Compiled constraints for one cluster in one period. Conjunction of all
/// applicable rules: the tightest bound wins on conflicts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClusterConstraints {
    pub max_capacity_factor: Option<f64>,
    /// Fuel id → minimum annual heat-input share.
    pub min_heat_shares: BTreeMap<String, f64>,
    /// Stage index by which capacity must be fully retired (earliest wins).
    pub must_retire_by: Option<usize>,
    pub max_emission_rate: Option<f64>,
    /// Rule ids that produced these constraints, for auditing.
    pub sources: Vec<String>,
}

impl ClusterConstraints {
    pub fn is_empty(&self) -> bool {
        self.max_capacity_factor.is_none()
            && self.min_heat_shares.is_empty()
            && self.must_retire_by.is_none()
            && self.max_emission_rate.is_none()
    }

    fn add_max_cf(&mut self, g: f64) {
        self.max_capacity_factor = Some(match self.max_capacity_factor {
            Some(prev) => prev.min(g),
            None => g,
        });
    }

    fn add_min_share(&mut self, fuel: String, s: f64) {
        let e = self.min_heat_shares.entry(fuel).or_insert(0.0);
        *e = e.max(s);
    }

    fn add_retire_by(&mut self, period_idx: usize) {
        self.must_retire_by = Some(match self.must_retire_by {
            Some(prev) => prev.min(period_idx),
            None => period_idx,
        });
    }

    fn add_max_rate(&mut self, r: f64) {
        self.max_emission_rate = Some(match self.max_emission_rate {
            Some(prev) => prev.min(r),
            None => r,
        });
    }
}

/// Per-cluster constraints plus the system-level cap for one period.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintSet {
    /// Cluster index → compiled constraints.
    pub by_cluster: BTreeMap<usize, ClusterConstraints>,
    /// CO₂ cap in tons for this period.
    pub co2_cap_tons: Option<f64>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.co2_cap_tons.is_none() && self.by_cluster.values().all(|c| c.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("{entity}: unknown period `{period}`")]
    UnknownPeriod { entity: String, period: String },
    #[error("rule {rule}: references unknown fuel `{fuel}`")]
    RuleReferencesUnknownFuel { rule: String, fuel: String },
    #[error("rule {rule}: {message}")]
    BadRule { rule: String, message: String },
}

/// Does the rule's static predicate match this cluster in this period?
/// Retirement-class predicates are evaluated in [`compile_scenario`], where
/// the economic retirement schedule is available; capacity-factor thresholds
/// are not predicates at all — they become LP structure.
pub fn applicable(rule: &PolicyRule, cluster: &GeneratorCluster, period: &Period) -> bool {
    if period.calendar_anchor < rule.effective_from_year {
        return false;
    }
    if !rule.applies_to.tech.is_empty() && !rule.applies_to.tech.contains(&cluster.tech_class) {
        return false;
    }
    match (&rule.applies_to.vintage, &cluster.vintage) {
        (Some(VintageClass::Existing), Vintage::NewBuild { .. }) => return false,
        (Some(VintageClass::New), Vintage::Existing) => return false,
        _ => {}
    }
    if let Some(threshold) = rule.applies_to.min_capacity_mw {
        if cluster.capacity_mw <= threshold {
            return false;
        }
    }
    true
}

/// Effective retirement anchor year: the earliest of the cluster's planned
/// retirement, its economic retirement from the pre-pass, and (for retrofit
/// variants) the parents' effective retirements.
pub fn effective_retirement_anchor(
    system: &ValidatedSystem,
    cluster_idx: usize,
    retirements: &BTreeMap<String, String>,
) -> Option<i32> {
    fn inner(
        system: &ValidatedSystem,
        cluster_idx: usize,
        retirements: &BTreeMap<String, String>,
        depth: usize,
    ) -> Option<i32> {
        if depth > 8 {
            return None; // retrofit chains are short; guard against cycles
        }
        let cluster = system.cluster(cluster_idx);
        let mut best: Option<i32> = None;
        let mut merge = |anchor: Option<i32>| {
            best = match (best, anchor) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        };
        merge(
            cluster
                .planned_retirement
                .as_deref()
                .and_then(|l| system.period_idx(l))
                .map(|i| system.periods()[i].calendar_anchor),
        );
        merge(
            retirements
                .get(&cluster.id)
                .and_then(|l| system.period_idx(l))
                .map(|i| system.periods()[i].calendar_anchor),
        );
        for (parent, _) in &cluster.retrofit_parents {
            if let Some(pi) = system.cluster_idx(parent) {
                merge(inner(system, pi, retirements, depth + 1));
            }
        }
        best
    }
    inner(system, cluster_idx, retirements, 0)
}

fn pathway_available(pathway: &Pathway, cluster: &GeneratorCluster) -> bool {
    pathway.constraints.iter().all(|c| match c {
        PathwayConstraint::RequireCapture(rho) => cluster.capture_rate >= rho - 1e-9,
        PathwayConstraint::MinFuelHeatShare { fuel, .. } => {
            cluster.allowed_fuels.iter().any(|f| f == fuel)
        }
        _ => true,
    })
}

/// Compiles a scenario's rules into the constraint set for one period.
/// `retirements` is the economic-retirement schedule from the pre-pass
/// (cluster id → period label).
pub fn compile_scenario(
    scenario: &Scenario,
    system: &ValidatedSystem,
    period_idx: usize,
    retirements: &BTreeMap<String, String>,
) -> Result<ConstraintSet, CompileError> {
    let period = &system.periods()[period_idx];

    // static validation of rule contents
    for rule in &scenario.rules {
        if rule.pathways.is_empty() {
            return Err(CompileError::BadRule {
                rule: rule.id.clone(),
                message: String::from("a rule needs at least one pathway"),
            });
        }
        for pw in &rule.pathways {
            for c in &pw.constraints {
                if !c.in_range() {
                    return Err(CompileError::BadRule {
                        rule: rule.id.clone(),
                        message: format!("constraint parameter out of range in pathway {}", pw.name),
                    });
                }
                if let PathwayConstraint::MinFuelHeatShare { fuel, .. } = c {
                    if system.fuel_idx(fuel).is_none() {
                        return Err(CompileError::RuleReferencesUnknownFuel {
                            rule: rule.id.clone(),
                            fuel: fuel.clone(),
                        });
                    }
                }
            }
        }
    }
    for label in scenario.co2_cap_mt.keys() {
        if system.period_idx(label).is_none() {
            return Err(CompileError::UnknownPeriod {
                entity: format!("scenario {}", scenario.name),
                period: label.clone(),
            });
        }
    }

    let mut set = ConstraintSet::default();
    for (ci, cluster) in system.spec().clusters.iter().enumerate() {
        for rule in &scenario.rules {
            if !applicable(rule, cluster, period) {
                continue;
            }
            if let Some(rc) = &rule.applies_to.retirement_class {
                let anchor = effective_retirement_anchor(system, ci, retirements);
                if !rc.matches(anchor) {
                    continue;
                }
            }
            let entry = set.by_cluster.entry(ci).or_default();
            let chosen = rule.pathways.iter().find(|pw| pathway_available(pw, cluster));
            match chosen {
                None => {
                    // no compliance pathway: the cluster may not generate
                    entry.add_max_cf(0.0);
                    entry.sources.push(format!("{}:no-pathway", rule.id));
                }
                Some(pw) => {
                    let mut emitted = false;
                    for c in &pw.constraints {
                        match c {
                            PathwayConstraint::MaxCapacityFactor(g) => {
                                entry.add_max_cf(*g);
                                emitted = true;
                            }
                            PathwayConstraint::MinFuelHeatShare { fuel, share } => {
                                entry.add_min_share(fuel.clone(), *share);
                                emitted = true;
                            }
                            PathwayConstraint::RequireCapture(_) => {
                                // available means already satisfied by hardware
                            }
                            PathwayConstraint::MustRetireBy { year } => {
                                if let Some(p) = system.period_at_or_after(*year) {
                                    entry.add_retire_by(p);
                                    emitted = true;
                                }
                            }
                            PathwayConstraint::MaxEmissionRate(r) => {
                                entry.add_max_rate(*r);
                                emitted = true;
                            }
                        }
                    }
                    entry.sources.push(format!("{}:{}", rule.id, pw.name));
                    let _ = emitted;
                }
            }
        }
    }
    set.by_cluster.retain(|_, c| !c.is_empty() || !c.sources.is_empty());

    if let Some(cap_mt) = scenario.co2_cap_mt.get(&period.label) {
        set.co2_cap_tons = Some(cap_mt * 1e6);
    }
    Ok(set)
}

pub mod builtin {
    //! The built-in scenario library.

    use super::*;

    pub const NO_REGULATIONS: &str = "No Regulations";
    pub const COAL_ONLY: &str = "Coal Only";
    pub const NEW_GAS_ONLY: &str = "New Gas Only";
    pub const COAL_NEW_GAS: &str = "Coal + New Gas";
    pub const COAL_ALL_GAS: &str = "Coal + All Gas";
    pub const PROPOSED_RULES: &str = "Proposed Rules";
    pub const CO2_CAP: &str = "CO₂ Cap";
    pub const FINAL_BASELOAD_EXISTING: &str = "Final + Baseload Existing";
    pub const FINAL_ALL_EXISTING: &str = "Final + All Existing";
    pub const CCS_ONLY: &str = "CCS Only";
    pub const CCS_H2: &str = "CCS + H₂";

    pub const ALL_NAMES: [&str; 11] = [
        NO_REGULATIONS,
        COAL_ONLY,
        NEW_GAS_ONLY,
        COAL_NEW_GAS,
        COAL_ALL_GAS,
        PROPOSED_RULES,
        CO2_CAP,
        FINAL_BASELOAD_EXISTING,
        FINAL_ALL_EXISTING,
        CCS_ONLY,
        CCS_H2,
    ];

    const CAPTURE_STANDARD: f64 = 0.90;

    fn coal_steam_techs() -> Vec<TechClass> {
        alloc::vec![
            TechClass::CoalSteam,
            TechClass::OilGasSteam,
            TechClass::CoalGasCofire,
        ]
    }

    fn coal_steam_techs_with_ccs() -> Vec<TechClass> {
        let mut t = coal_steam_techs();
        t.push(TechClass::CoalCcsRetrofit);
        t
    }

    fn existing_gas_techs() -> Vec<TechClass> {
        alloc::vec![
            TechClass::ExistingNGCC,
            TechClass::ExistingNGCT,
            TechClass::GasCcsRetrofit,
        ]
    }

    fn new_gas_techs() -> Vec<TechClass> {
        alloc::vec![TechClass::NewNGCC, TechClass::NewNGCT, TechClass::NgccCcs]
    }

    fn all_gas_techs() -> Vec<TechClass> {
        let mut t = existing_gas_techs();
        t.extend(new_gas_techs());
        t
    }

    fn ccs_pathway() -> Pathway {
        Pathway {
            name: String::from("ccs"),
            constraints: alloc::vec![PathwayConstraint::RequireCapture(CAPTURE_STANDARD)],
        }
    }

    fn cf_pathway(cap: f64) -> Pathway {
        Pathway {
            name: String::from("cf-cap"),
            constraints: alloc::vec![PathwayConstraint::MaxCapacityFactor(cap)],
        }
    }

    /// The two subcategory rules of the final existing-steam regulation:
    /// units retiring in (2032, 2039] co-fire 40% gas from 2030; units
    /// operating past 2039 need capture from 2032. Units retiring before
    /// 2032 carry no additional constraints.
    pub fn coal_rules_final() -> Vec<PolicyRule> {
        alloc::vec![
            PolicyRule {
                id: String::from("coal-cofire"),
                applies_to: RulePredicate {
                    tech: coal_steam_techs(),
                    vintage: Some(VintageClass::Existing),
                    min_capacity_mw: None,
                    retirement_class: Some(RetirementClass::RetiresWithin {
                        after: 2032,
                        by: 2039,
                    }),
                },
                effective_from_year: 2030,
                pathways: alloc::vec![Pathway {
                    name: String::from("cofire-gas-40"),
                    constraints: alloc::vec![PathwayConstraint::MinFuelHeatShare {
                        fuel: String::from(NATURAL_GAS),
                        share: 0.40,
                    }],
                }],
            },
            PolicyRule {
                id: String::from("coal-ccs"),
                applies_to: RulePredicate {
                    tech: coal_steam_techs_with_ccs(),
                    vintage: Some(VintageClass::Existing),
                    min_capacity_mw: None,
                    retirement_class: Some(RetirementClass::OperatesPast { year: 2039 }),
                },
                effective_from_year: 2032,
                pathways: alloc::vec![ccs_pathway()],
            },
        ]
    }

    /// Final new-turbine rule: capture or stay below 40% capacity factor,
    /// from 2032.
    pub fn new_gas_rule_final() -> PolicyRule {
        PolicyRule {
            id: String::from("new-gas"),
            applies_to: RulePredicate {
                tech: new_gas_techs(),
                vintage: Some(VintageClass::New),
                min_capacity_mw: None,
                retirement_class: None,
            },
            effective_from_year: 2032,
            pathways: alloc::vec![ccs_pathway(), cf_pathway(0.40)],
        }
    }

    /// Extension of the new-turbine standard to existing turbines. With
    /// `cf_escape` the unit may instead run below the threshold; without it
    /// capture is the only pathway.
    pub fn existing_gas_rule(
        id: &str,
        min_capacity_mw: Option<f64>,
        cf_escape: Option<f64>,
        effective_from_year: i32,
    ) -> PolicyRule {
        let mut pathways = alloc::vec![ccs_pathway()];
        if let Some(cf) = cf_escape {
            pathways.push(cf_pathway(cf));
        }
        PolicyRule {
            id: String::from(id),
            applies_to: RulePredicate {
                tech: existing_gas_techs(),
                vintage: Some(VintageClass::Existing),
                min_capacity_mw,
                retirement_class: None,
            },
            effective_from_year,
            pathways,
        }
    }

    /// Uniform standard for all gas turbines regardless of vintage:
    /// capture, or run as a peaker (≤ 20% capacity factor), optionally
    /// co-firing hydrogen.
    pub fn nonpeaker_gas_rule(h2_share: Option<f64>) -> PolicyRule {
        let mut techs = all_gas_techs();
        let mut peaker = alloc::vec![PathwayConstraint::MaxCapacityFactor(0.20)];
        if let Some(share) = h2_share {
            techs.push(TechClass::H2Turbine);
            peaker.push(PathwayConstraint::MinFuelHeatShare {
                fuel: String::from(HYDROGEN),
                share,
            });
        }
        PolicyRule {
            id: String::from(if h2_share.is_some() {
                "all-gas-ccs-or-h2-peaker"
            } else {
                "all-gas-ccs-or-peaker"
            }),
            applies_to: RulePredicate {
                tech: techs,
                vintage: None,
                min_capacity_mw: None,
                retirement_class: None,
            },
            effective_from_year: 2035,
            pathways: alloc::vec![
                ccs_pathway(),
                Pathway {
                    name: String::from("peaker"),
                    constraints: peaker,
                },
            ],
        }
    }

    /// The proposed-rules package: 50% baseload threshold, a hydrogen
    /// co-firing pathway for new non-peak turbines, a 20%-capacity-factor
    /// subcategory for coal retiring by 2035, coal capture from 2030, and
    /// the large-baseload existing-gas rule.
    pub fn proposed_rules() -> Vec<PolicyRule> {
        let mut rules = alloc::vec![
            PolicyRule {
                id: String::from("coal-lowcf"),
                applies_to: RulePredicate {
                    tech: coal_steam_techs(),
                    vintage: Some(VintageClass::Existing),
                    min_capacity_mw: None,
                    retirement_class: Some(RetirementClass::RetiresWithin {
                        after: 2032,
                        by: 2035,
                    }),
                },
                effective_from_year: 2030,
                pathways: alloc::vec![cf_pathway(0.20)],
            },
            PolicyRule {
                id: String::from("coal-cofire"),
                applies_to: RulePredicate {
                    tech: coal_steam_techs(),
                    vintage: Some(VintageClass::Existing),
                    min_capacity_mw: None,
                    retirement_class: Some(RetirementClass::RetiresWithin {
                        after: 2035,
                        by: 2039,
                    }),
                },
                effective_from_year: 2030,
                pathways: alloc::vec![Pathway {
                    name: String::from("cofire-gas-40"),
                    constraints: alloc::vec![PathwayConstraint::MinFuelHeatShare {
                        fuel: String::from(NATURAL_GAS),
                        share: 0.40,
                    }],
                }],
            },
            PolicyRule {
                id: String::from("coal-ccs"),
                applies_to: RulePredicate {
                    tech: coal_steam_techs_with_ccs(),
                    vintage: Some(VintageClass::Existing),
                    min_capacity_mw: None,
                    retirement_class: Some(RetirementClass::OperatesPast { year: 2039 }),
                },
                effective_from_year: 2030,
                pathways: alloc::vec![ccs_pathway()],
            },
        ];
        // new turbines: capture, hydrogen co-firing, or below 50% CF
        let mut new_techs = new_gas_techs();
        new_techs.push(TechClass::H2Turbine);
        rules.push(PolicyRule {
            id: String::from("new-gas-proposed"),
            applies_to: RulePredicate {
                tech: new_techs,
                vintage: Some(VintageClass::New),
                min_capacity_mw: None,
                retirement_class: None,
            },
            effective_from_year: 2032,
            pathways: alloc::vec![
                ccs_pathway(),
                Pathway {
                    name: String::from("h2-cofire-30"),
                    constraints: alloc::vec![PathwayConstraint::MinFuelHeatShare {
                        fuel: String::from(HYDROGEN),
                        share: 0.30,
                    }],
                },
                cf_pathway(0.50),
            ],
        });
        rules.push(existing_gas_rule(
            "existing-gas-proposed",
            Some(300.0),
            Some(0.50),
            2035,
        ));
        rules
    }

    fn scenario(name: &str, rules: Vec<PolicyRule>) -> Scenario {
        Scenario {
            name: String::from(name),
            rules,
            ..Scenario::unregulated(name)
        }
    }

    /// Looks up a built-in scenario by exact name.
    pub fn builtin_scenario(name: &str) -> Option<Scenario> {
        let s = match name {
            NO_REGULATIONS => Scenario::unregulated(NO_REGULATIONS),
            COAL_ONLY => scenario(COAL_ONLY, coal_rules_final()),
            NEW_GAS_ONLY => scenario(NEW_GAS_ONLY, alloc::vec![new_gas_rule_final()]),
            COAL_NEW_GAS => {
                let mut rules = coal_rules_final();
                rules.push(new_gas_rule_final());
                scenario(COAL_NEW_GAS, rules)
            }
            COAL_ALL_GAS => {
                let mut rules = coal_rules_final();
                rules.push(new_gas_rule_final());
                rules.push(existing_gas_rule(
                    "existing-gas-large-baseload",
                    Some(300.0),
                    Some(0.40),
                    2032,
                ));
                scenario(COAL_ALL_GAS, rules)
            }
            PROPOSED_RULES => scenario(PROPOSED_RULES, proposed_rules()),
            CO2_CAP => {
                let mut s = Scenario::unregulated(CO2_CAP);
                s.co2_cap_from_scenario = Some(String::from(COAL_NEW_GAS));
                s
            }
            FINAL_BASELOAD_EXISTING => {
                let mut rules = coal_rules_final();
                rules.push(new_gas_rule_final());
                rules.push(existing_gas_rule(
                    "existing-gas-baseload",
                    None,
                    Some(0.40),
                    2032,
                ));
                scenario(FINAL_BASELOAD_EXISTING, rules)
            }
            FINAL_ALL_EXISTING => {
                let mut rules = coal_rules_final();
                rules.push(new_gas_rule_final());
                rules.push(existing_gas_rule("existing-gas-all", None, None, 2032));
                scenario(FINAL_ALL_EXISTING, rules)
            }
            CCS_ONLY => {
                let mut rules = coal_rules_final();
                rules.push(nonpeaker_gas_rule(None));
                scenario(CCS_ONLY, rules)
            }
            CCS_H2 => {
                let mut rules = coal_rules_final();
                rules.push(nonpeaker_gas_rule(Some(0.30)));
                scenario(CCS_H2, rules)
            }
            _ => return None,
        };
        Some(s)
    }

    /// The full eleven-scenario library.
    pub fn builtin_scenarios() -> Vec<Scenario> {
        ALL_NAMES
            .iter()
            .map(|n| builtin_scenario(n).expect("library names resolve"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::Availability;

    fn coal_cluster(id: &str, planned: Option<&str>) -> GeneratorCluster {
        GeneratorCluster {
            id: id.into(),
            zone: "Z1".into(),
            tech_class: TechClass::CoalSteam,
            vintage: Vintage::Existing,
            capacity_mw: 500.0,
            max_new_by_period: BTreeMap::new(),
            allowed_fuels: alloc::vec!["coal".into()],
            heat_rates: [("coal".into(), 10.0)].into_iter().collect(),
            capture_rate: 0.0,
            fixed_om: 40000.0,
            var_om: 4.0,
            annuitized_capex: 0.0,
            planned_retirement: planned.map(String::from),
            availability: Availability::Constant(0.9),
            retrofit_parents: Vec::new(),
            asset_life_years: 40,
        }
    }

    fn mini_system(clusters: Vec<GeneratorCluster>) -> ValidatedSystem {
        use crate::system::*;
        let hours = 4;
        let time = TimeStructure {
            weights: alloc::vec![2190.0; hours],
            block_starts: alloc::vec![0],
        };
        let spec = SystemSpec {
            periods: alloc::vec![
                Period { label: "2025".into(), calendar_anchor: 2025, years_represented: 5 },
                Period { label: "2030".into(), calendar_anchor: 2030, years_represented: 5 },
                Period { label: "2035".into(), calendar_anchor: 2035, years_represented: 5 },
                Period { label: "2040".into(), calendar_anchor: 2040, years_represented: 5 },
            ],
            time,
            fuels: alloc::vec![
                Fuel {
                    id: "coal".into(),
                    price_by_period: [
                        ("2025".into(), 2.0),
                        ("2030".into(), 2.0),
                        ("2035".into(), 2.0),
                        ("2040".into(), 2.0),
                    ]
                    .into_iter()
                    .collect(),
                    emission_factor: 0.09552,
                    is_hydrogen: false,
                },
                Fuel {
                    id: NATURAL_GAS.into(),
                    price_by_period: [
                        ("2025".into(), 3.9),
                        ("2030".into(), 3.9),
                        ("2035".into(), 3.9),
                        ("2040".into(), 3.9),
                    ]
                    .into_iter()
                    .collect(),
                    emission_factor: 0.05306,
                    is_hydrogen: false,
                },
                Fuel {
                    id: HYDROGEN.into(),
                    price_by_period: [
                        ("2025".into(), 20.0),
                        ("2030".into(), 20.0),
                        ("2035".into(), 20.0),
                        ("2040".into(), 20.0),
                    ]
                    .into_iter()
                    .collect(),
                    emission_factor: 0.0,
                    is_hydrogen: true,
                },
            ],
            zones: alloc::vec![Zone {
                id: "Z1".into(),
                demand: alloc::vec![100.0; hours],
                h2_demand: BTreeMap::new(),
                build_limits: BTreeMap::new(),
            }],
            clusters,
            storage: Vec::new(),
            lines: Vec::new(),
            fuel_price_sets: BTreeMap::new(),
            build_limit_sets: BTreeMap::new(),
            baseline_2022_emissions_mt: 10.0,
            voll: 5000.0,
        };
        crate::system::validate_system(spec).expect("valid mini system")
    }

    #[test]
    fn classification_follows_retirement_schedule() {
        let years = ClassificationYears::default();
        let sys = mini_system(alloc::vec![coal_cluster("c", Some("2030"))]);
        let c = sys.cluster(0);
        // planned 2030 anchor → unconstrained
        assert_eq!(
            classify_coal_subcategory(&sys, c, None, &years).unwrap(),
            CoalSubcategory::RetireBefore2032Unconstrained
        );

        let sys = mini_system(alloc::vec![coal_cluster("c", Some("2035"))]);
        let c = sys.cluster(0);
        assert_eq!(
            classify_coal_subcategory(&sys, c, None, &years).unwrap(),
            CoalSubcategory::RetireBefore2039Cofire40From2030
        );

        let sys = mini_system(alloc::vec![coal_cluster("c", None)]);
        let c = sys.cluster(0);
        assert_eq!(
            classify_coal_subcategory(&sys, c, None, &years).unwrap(),
            CoalSubcategory::OperatePast2039CcsFrom2032
        );
        // economic retirement dominates when earlier
        let p2030 = sys.periods()[1].clone();
        assert_eq!(
            classify_coal_subcategory(&sys, c, Some(&p2030), &years).unwrap(),
            CoalSubcategory::RetireBefore2032Unconstrained
        );
    }

    #[test]
    fn not_coal_is_rejected() {
        let mut c = coal_cluster("w", None);
        c.tech_class = TechClass::OnshoreWind;
        c.allowed_fuels.clear();
        c.heat_rates.clear();
        let sys = mini_system(alloc::vec![c]);
        assert!(matches!(
            classify_coal_subcategory(&sys, sys.cluster(0), None, &ClassificationYears::default()),
            Err(PolicyError::NotCoal(_))
        ));
    }

    #[test]
    fn applicability_checks_size_vintage_and_date() {
        let rule = builtin::existing_gas_rule("eg", Some(300.0), Some(0.4), 2032);
        let period_2035 = Period {
            label: "2035".into(),
            calendar_anchor: 2035,
            years_represented: 5,
        };
        let mut ngcc = coal_cluster("g", None);
        ngcc.tech_class = TechClass::ExistingNGCC;
        ngcc.capacity_mw = 250.0;
        assert!(!applicable(&rule, &ngcc, &period_2035), "250 MW is under the threshold");
        ngcc.capacity_mw = 400.0;
        assert!(applicable(&rule, &ngcc, &period_2035));

        let new_rule = builtin::new_gas_rule_final();
        let mut new_ngcc = coal_cluster("n", None);
        new_ngcc.tech_class = TechClass::NewNGCC;
        new_ngcc.capacity_mw = 0.0;
        new_ngcc.vintage = Vintage::NewBuild {
            first_available: "2025".into(),
        };
        let period_2030 = Period {
            label: "2030".into(),
            calendar_anchor: 2030,
            years_represented: 5,
        };
        assert!(!applicable(&new_rule, &new_ngcc, &period_2030), "before effective date");
        assert!(applicable(&new_rule, &new_ngcc, &period_2035));

        let coal_rules = builtin::coal_rules_final();
        let mut wind = coal_cluster("w", None);
        wind.tech_class = TechClass::OnshoreWind;
        assert!(!applicable(&coal_rules[0], &wind, &period_2035));
    }

    #[test]
    fn no_regulations_compiles_to_an_empty_set() {
        let sys = mini_system(alloc::vec![coal_cluster("c", None)]);
        let scenario = builtin::builtin_scenario(builtin::NO_REGULATIONS).unwrap();
        for p in 0..4 {
            let set = compile_scenario(&scenario, &sys, p, &BTreeMap::new()).unwrap();
            assert!(set.is_empty());
        }
    }

    #[test]
    fn cofire_class_coal_is_blocked_without_a_cofire_variant() {
        // coal retiring 2035: cofire class; plain coal cannot co-fire, so it
        // may not run unabated from 2030 onward
        let sys = mini_system(alloc::vec![coal_cluster("c", Some("2035"))]);
        let scenario = builtin::builtin_scenario(builtin::COAL_ONLY).unwrap();
        let set25 = compile_scenario(&scenario, &sys, 0, &BTreeMap::new()).unwrap();
        assert!(set25.is_empty(), "rule not yet effective in 2025");
        let set30 = compile_scenario(&scenario, &sys, 1, &BTreeMap::new()).unwrap();
        let c = &set30.by_cluster[&0];
        assert_eq!(c.max_capacity_factor, Some(0.0));
    }

    #[test]
    fn cofire_variant_carries_the_heat_share_floor() {
        let mut parent = coal_cluster("c", Some("2035"));
        parent.retrofit_parents = Vec::new();
        let mut variant = coal_cluster("c-cofire", Some("2035"));
        variant.tech_class = TechClass::CoalGasCofire;
        variant.allowed_fuels = alloc::vec!["coal".into(), NATURAL_GAS.into()];
        variant.heat_rates = [("coal".into(), 10.0), (NATURAL_GAS.into(), 10.2)]
            .into_iter()
            .collect();
        variant.capacity_mw = 0.0;
        variant.retrofit_parents = alloc::vec![("c".into(), 1.0)];
        let sys = mini_system(alloc::vec![parent, variant]);
        let scenario = builtin::builtin_scenario(builtin::COAL_ONLY).unwrap();
        let set = compile_scenario(&scenario, &sys, 1, &BTreeMap::new()).unwrap();
        let v = &set.by_cluster[&1];
        assert_eq!(v.min_heat_shares[NATURAL_GAS], 0.40);
        assert_eq!(v.max_capacity_factor, None);
    }

    #[test]
    fn ccs_only_caps_unabated_gas_at_twenty_percent() {
        let mut gas = coal_cluster("g", None);
        gas.tech_class = TechClass::ExistingNGCC;
        gas.allowed_fuels = alloc::vec![NATURAL_GAS.into()];
        gas.heat_rates = [(NATURAL_GAS.into(), 7.4)].into_iter().collect();
        let mut ccs = coal_cluster("g-ccs", None);
        ccs.tech_class = TechClass::GasCcsRetrofit;
        ccs.allowed_fuels = alloc::vec![NATURAL_GAS.into()];
        ccs.heat_rates = [(NATURAL_GAS.into(), 9.0)].into_iter().collect();
        ccs.capture_rate = 0.90;
        ccs.capacity_mw = 0.0;
        ccs.retrofit_parents = alloc::vec![("g".into(), 1.0)];
        let sys = mini_system(alloc::vec![gas, ccs]);
        let scenario = builtin::builtin_scenario(builtin::CCS_ONLY).unwrap();
        // 2035 period: effective
        let set = compile_scenario(&scenario, &sys, 2, &BTreeMap::new()).unwrap();
        assert_eq!(set.by_cluster[&0].max_capacity_factor, Some(0.20));
        assert!(
            set.by_cluster
                .get(&1)
                .map_or(true, |c| c.max_capacity_factor.is_none()),
            "capture-equipped variant is unconstrained"
        );
    }

    #[test]
    fn ccs_h2_adds_the_hydrogen_floor() {
        let mut gas = coal_cluster("g", None);
        gas.tech_class = TechClass::ExistingNGCT;
        gas.allowed_fuels = alloc::vec![NATURAL_GAS.into()];
        gas.heat_rates = [(NATURAL_GAS.into(), 10.0)].into_iter().collect();
        let mut sys_spec_clusters = alloc::vec![gas];
        // hydrogen-capable peaker variant
        let mut h2 = coal_cluster("g-h2", None);
        h2.tech_class = TechClass::ExistingNGCT;
        h2.allowed_fuels = alloc::vec![NATURAL_GAS.into(), HYDROGEN.into()];
        h2.heat_rates = [(NATURAL_GAS.into(), 10.0), (HYDROGEN.into(), 10.0)]
            .into_iter()
            .collect();
        sys_spec_clusters.push(h2);
        let sys = mini_system(sys_spec_clusters);
        let scenario = builtin::builtin_scenario(builtin::CCS_H2).unwrap();
        let set = compile_scenario(&scenario, &sys, 3, &BTreeMap::new()).unwrap();
        // gas-only peaker has no pathway: peaker pathway needs hydrogen
        assert_eq!(set.by_cluster[&0].max_capacity_factor, Some(0.0));
        // hydrogen-capable peaker: CF cap and heat-share floor together
        let h2c = &set.by_cluster[&1];
        assert_eq!(h2c.max_capacity_factor, Some(0.20));
        assert_eq!(h2c.min_heat_shares[HYDROGEN], 0.30);
    }

    #[test]
    fn conflicting_retire_by_dates_resolve_to_the_earliest() {
        let mk_rule = |id: &str, year: i32| PolicyRule {
            id: id.into(),
            applies_to: RulePredicate::default(),
            effective_from_year: 2025,
            pathways: alloc::vec![Pathway {
                name: "retire".into(),
                constraints: alloc::vec![PathwayConstraint::MustRetireBy { year }],
            }],
        };
        let sys = mini_system(alloc::vec![coal_cluster("c", None)]);
        let mut scenario = Scenario::unregulated("overlap");
        scenario.rules = alloc::vec![mk_rule("a", 2040), mk_rule("b", 2031)];
        let set = compile_scenario(&scenario, &sys, 0, &BTreeMap::new()).unwrap();
        // 2031 → first period anchored ≥ 2031 is 2035 (index 2)
        assert_eq!(set.by_cluster[&0].must_retire_by, Some(2));
    }

    #[test]
    fn rule_with_unknown_fuel_is_rejected() {
        let sys = mini_system(alloc::vec![coal_cluster("c", None)]);
        let mut scenario = Scenario::unregulated("bad");
        scenario.rules = alloc::vec![PolicyRule {
            id: "bad-fuel".into(),
            applies_to: RulePredicate::default(),
            effective_from_year: 2025,
            pathways: alloc::vec![Pathway {
                name: "p".into(),
                constraints: alloc::vec![PathwayConstraint::MinFuelHeatShare {
                    fuel: "unobtainium".into(),
                    share: 0.5,
                }],
            }],
        }];
        assert!(matches!(
            compile_scenario(&scenario, &sys, 0, &BTreeMap::new()),
            Err(CompileError::RuleReferencesUnknownFuel { .. })
        ));
    }

    #[test]
    fn library_has_all_eleven_scenarios() {
        let lib = builtin::builtin_scenarios();
        assert_eq!(lib.len(), 11);
        let names: Vec<&str> = lib.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, builtin::ALL_NAMES.to_vec());
    }

    #[test]
    fn rule_subsets_compile_to_implied_constraint_sets() {
        // Coal Only ⊆ Coal + New Gas: every compiled constraint in the
        // subset appears at equal or tighter value in the superset
        let mut ngcc = coal_cluster("n", None);
        ngcc.tech_class = TechClass::NewNGCC;
        ngcc.capacity_mw = 0.0;
        ngcc.vintage = Vintage::NewBuild {
            first_available: "2025".into(),
        };
        ngcc.allowed_fuels = alloc::vec![NATURAL_GAS.into()];
        ngcc.heat_rates = [(NATURAL_GAS.into(), 6.4)].into_iter().collect();
        let sys = mini_system(alloc::vec![coal_cluster("c", None), ngcc]);
        let small = builtin::builtin_scenario(builtin::COAL_ONLY).unwrap();
        let big = builtin::builtin_scenario(builtin::COAL_NEW_GAS).unwrap();
        for p in 0..4 {
            let s = compile_scenario(&small, &sys, p, &BTreeMap::new()).unwrap();
            let b = compile_scenario(&big, &sys, p, &BTreeMap::new()).unwrap();
            for (ci, cs) in &s.by_cluster {
                let cb = b.by_cluster.get(ci).expect("superset covers cluster");
                if let Some(g) = cs.max_capacity_factor {
                    assert!(cb.max_capacity_factor.unwrap() <= g);
                }
                for (fuel, share) in &cs.min_heat_shares {
                    assert!(cb.min_heat_shares[fuel] >= *share);
                }
            }
        }
    }
}
