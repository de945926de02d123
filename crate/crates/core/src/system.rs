//! Domain model: periods, time structure, fuels, zones, generator and
//! storage clusters, transmission, plus validation and raw-unit clustering.
//!
//! All quantities use MW, MWh, MMBtu, tCO₂ and $ per year. A validated
//! system is immutable; scenario runs share it read-only.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub const ANNUAL_HOURS: f64 = 8760.0;

/// One planning stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Period {
    pub label: String,
    /// Calendar year the stage is anchored to (its final year).
    pub calendar_anchor: i32,
    /// Number of calendar years the stage stands for.
    pub years_represented: u32,
}

/// Weighted operating hours, grouped into representative blocks (weeks).
/// Storage state of charge cycles within each block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStructure {
    /// Weight of each hour; the weights sum to 8760.
    pub weights: Vec<f64>,
    /// Start index of each block; the first entry is 0.
    pub block_starts: Vec<usize>,
}

impl TimeStructure {
    /// Uniformly weighted blocks of `block_len` hours covering the year.
    pub fn uniform_blocks(n_blocks: usize, block_len: usize) -> Self {
        let hours = n_blocks * block_len;
        let w = ANNUAL_HOURS / hours as f64;
        TimeStructure {
            weights: alloc::vec![w; hours],
            block_starts: (0..n_blocks).map(|b| b * block_len).collect(),
        }
    }

    pub fn hour_count(&self) -> usize {
        self.weights.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Half-open hour ranges of the blocks.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.block_starts.len());
        for (i, &s) in self.block_starts.iter().enumerate() {
            let e = self
                .block_starts
                .get(i + 1)
                .copied()
                .unwrap_or_else(|| self.hour_count());
            out.push((s, e));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fuel {
    pub id: String,
    /// $/MMBtu by period label, for the active price set.
    pub price_by_period: BTreeMap<String, f64>,
    /// tCO₂ per MMBtu burned.
    pub emission_factor: f64,
    pub is_hydrogen: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: String,
    /// MW by hour, aligned to the time structure.
    pub demand: Vec<f64>,
    /// Exogenous hydrogen demand, MMBtu per period label.
    pub h2_demand: BTreeMap<String, f64>,
    /// Optional per-technology new-build limits: (tech, period) → MW.
    pub build_limits: BTreeMap<(TechClass, String), f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionLine {
    pub id: String,
    pub from_zone: String,
    pub to_zone: String,
    pub capacity_mw: f64,
    pub max_expansion_mw: f64,
    /// Annuitized $/MW-yr for expansion.
    pub expansion_cost: f64,
    pub loss_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TechClass {
    CoalSteam,
    OilGasSteam,
    ExistingNGCC,
    ExistingNGCT,
    NewNGCC,
    NewNGCT,
    #[serde(rename = "NGCC_CCS")]
    NgccCcs,
    #[serde(rename = "CoalCCSRetrofit")]
    CoalCcsRetrofit,
    CoalGasCofire,
    #[serde(rename = "GasCCSRetrofit")]
    GasCcsRetrofit,
    H2Turbine,
    Nuclear,
    Hydro,
    OnshoreWind,
    OffshoreWind,
    #[serde(rename = "SolarPV")]
    SolarPv,
    Battery,
    Electrolyzer,
}

impl TechClass {
    pub const ALL: [TechClass; 18] = [
        TechClass::CoalSteam,
        TechClass::OilGasSteam,
        TechClass::ExistingNGCC,
        TechClass::ExistingNGCT,
        TechClass::NewNGCC,
        TechClass::NewNGCT,
        TechClass::NgccCcs,
        TechClass::CoalCcsRetrofit,
        TechClass::CoalGasCofire,
        TechClass::GasCcsRetrofit,
        TechClass::H2Turbine,
        TechClass::Nuclear,
        TechClass::Hydro,
        TechClass::OnshoreWind,
        TechClass::OffshoreWind,
        TechClass::SolarPv,
        TechClass::Battery,
        TechClass::Electrolyzer,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TechClass::CoalSteam => "CoalSteam",
            TechClass::OilGasSteam => "OilGasSteam",
            TechClass::ExistingNGCC => "ExistingNGCC",
            TechClass::ExistingNGCT => "ExistingNGCT",
            TechClass::NewNGCC => "NewNGCC",
            TechClass::NewNGCT => "NewNGCT",
            TechClass::NgccCcs => "NGCC_CCS",
            TechClass::CoalCcsRetrofit => "CoalCCSRetrofit",
            TechClass::CoalGasCofire => "CoalGasCofire",
            TechClass::GasCcsRetrofit => "GasCCSRetrofit",
            TechClass::H2Turbine => "H2Turbine",
            TechClass::Nuclear => "Nuclear",
            TechClass::Hydro => "Hydro",
            TechClass::OnshoreWind => "OnshoreWind",
            TechClass::OffshoreWind => "OffshoreWind",
            TechClass::SolarPv => "SolarPV",
            TechClass::Battery => "Battery",
            TechClass::Electrolyzer => "Electrolyzer",
        }
    }

    pub fn parse(s: &str) -> Option<TechClass> {
        Self::ALL.iter().copied().find(|t| t.name() == s)
    }

    /// Gas-burning generation technologies (the targets of gas rules).
    pub fn burns_gas(&self) -> bool {
        matches!(
            self,
            TechClass::ExistingNGCC
                | TechClass::ExistingNGCT
                | TechClass::NewNGCC
                | TechClass::NewNGCT
                | TechClass::NgccCcs
                | TechClass::GasCcsRetrofit
        )
    }

    pub fn is_renewable(&self) -> bool {
        matches!(
            self,
            TechClass::OnshoreWind | TechClass::OffshoreWind | TechClass::SolarPv
        )
    }
}

impl core::fmt::Display for TechClass {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Vintage {
    Existing,
    /// Buildable from the named period onward.
    NewBuild { first_available: String },
}

/// Hourly availability of a cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Availability {
    Constant(f64),
    /// One fraction per hour, aligned to the time structure.
    Profile(Vec<f64>),
}

impl Availability {
    pub fn at(&self, hour: usize) -> f64 {
        match self {
            Availability::Constant(a) => *a,
            Availability::Profile(p) => p[hour],
        }
    }
}

/// An aggregated fleet unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorCluster {
    pub id: String,
    pub zone: String,
    pub tech_class: TechClass,
    pub vintage: Vintage,
    /// Installed MW at study start (0 for new-build clusters).
    pub capacity_mw: f64,
    /// MW of new build permitted per period label.
    pub max_new_by_period: BTreeMap<String, f64>,
    /// Fuels the cluster may burn; empty for fuel-less resources.
    pub allowed_fuels: Vec<String>,
    /// MMBtu per MWh for each allowed fuel. For electrolyzers the single
    /// entry is instead MMBtu of hydrogen produced per MWh consumed.
    pub heat_rates: BTreeMap<String, f64>,
    /// Fraction of combustion CO₂ captured.
    pub capture_rate: f64,
    pub fixed_om: f64,
    pub var_om: f64,
    pub annuitized_capex: f64,
    pub planned_retirement: Option<String>,
    pub availability: Availability,
    /// Retrofit sources: (parent cluster id, MW of this cluster gained per MW
    /// of parent converted).
    pub retrofit_parents: Vec<(String, f64)>,
    pub asset_life_years: u32,
}

impl GeneratorCluster {
    pub fn is_new_build(&self) -> bool {
        matches!(self.vintage, Vintage::NewBuild { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageCluster {
    pub id: String,
    pub zone: String,
    pub power_capacity_mw: f64,
    pub energy_capacity_mwh: f64,
    pub round_trip_efficiency: f64,
    pub fixed_om: f64,
    pub var_om: f64,
    pub annuitized_capex: f64,
    /// MW of new power capacity permitted per period label.
    pub max_new_by_period: BTreeMap<String, f64>,
    /// Hours of duration for newly built capacity.
    pub duration_hours: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub periods: Vec<Period>,
    pub time: TimeStructure,
    pub fuels: Vec<Fuel>,
    pub zones: Vec<Zone>,
    pub clusters: Vec<GeneratorCluster>,
    pub storage: Vec<StorageCluster>,
    pub lines: Vec<TransmissionLine>,
    /// Named sensitivity price sets: set → (fuel, period) → $/MMBtu.
    pub fuel_price_sets: BTreeMap<String, BTreeMap<(String, String), f64>>,
    /// Named zone build-limit sets: set → (zone, tech, period) → MW.
    pub build_limit_sets: BTreeMap<String, BTreeMap<(String, TechClass, String), f64>>,
    pub baseline_2022_emissions_mt: f64,
    /// Value of lost load, $/MWh on unserved energy.
    pub voll: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationIssue {
    #[error("{entity}: unknown zone `{zone}`")]
    UnknownZone { entity: String, zone: String },
    #[error("{entity}: unknown fuel `{fuel}`")]
    UnknownFuel { entity: String, fuel: String },
    #[error("{entity}: unknown period `{period}`")]
    UnknownPeriod { entity: String, period: String },
    #[error("cluster {cluster}: allowed fuel `{fuel}` has no positive heat rate")]
    MissingHeatRate { cluster: String, fuel: String },
    #[error("{entity}: negative capacity")]
    NegativeCapacity { entity: String },
    #[error("{entity}: {message}")]
    Invalid { entity: String, message: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
}

/// A system whose cross-references all resolve. Constructed only by
/// [`validate_system`].
#[derive(Debug, Clone)]
pub struct ValidatedSystem {
    spec: SystemSpec,
    zone_index: BTreeMap<String, usize>,
    fuel_index: BTreeMap<String, usize>,
    cluster_index: BTreeMap<String, usize>,
    storage_index: BTreeMap<String, usize>,
    period_index: BTreeMap<String, usize>,
}

impl ValidatedSystem {
    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn zone_idx(&self, id: &str) -> usize {
        self.zone_index[id]
    }

    pub fn fuel_idx(&self, id: &str) -> Option<usize> {
        self.fuel_index.get(id).copied()
    }

    pub fn cluster_idx(&self, id: &str) -> Option<usize> {
        self.cluster_index.get(id).copied()
    }

    pub fn storage_idx(&self, id: &str) -> Option<usize> {
        self.storage_index.get(id).copied()
    }

    pub fn period_idx(&self, label: &str) -> Option<usize> {
        self.period_index.get(label).copied()
    }

    pub fn periods(&self) -> &[Period] {
        &self.spec.periods
    }

    /// First period whose anchor year is ≥ `year`, if any.
    pub fn period_at_or_after(&self, year: i32) -> Option<usize> {
        self.spec
            .periods
            .iter()
            .position(|p| p.calendar_anchor >= year)
    }

    pub fn fuel(&self, idx: usize) -> &Fuel {
        &self.spec.fuels[idx]
    }

    pub fn cluster(&self, idx: usize) -> &GeneratorCluster {
        &self.spec.clusters[idx]
    }

    /// Applies sensitivity knobs, producing a new validated system with the
    /// selected fuel-price and zone-build-limit sets substituted in.
    pub fn with_sensitivity(
        &self,
        fuel_price_set: &str,
        build_limit_set: &str,
    ) -> Result<ValidatedSystem, Vec<ValidationIssue>> {
        let mut spec = self.spec.clone();
        if fuel_price_set != "ref" {
            let Some(set) = spec.fuel_price_sets.get(fuel_price_set).cloned() else {
                return Err(alloc::vec![ValidationIssue::Invalid {
                    entity: String::from("fuel_price_sets"),
                    message: format!("unknown set `{fuel_price_set}`"),
                }]);
            };
            for ((fuel, period), price) in set {
                if let Some(f) = spec.fuels.iter_mut().find(|f| f.id == fuel) {
                    f.price_by_period.insert(period, price);
                }
            }
        }
        if build_limit_set != "ref" {
            let Some(set) = spec.build_limit_sets.get(build_limit_set).cloned() else {
                return Err(alloc::vec![ValidationIssue::Invalid {
                    entity: String::from("build_limit_sets"),
                    message: format!("unknown set `{build_limit_set}`"),
                }]);
            };
            for ((zone, tech, period), mw) in set {
                if let Some(z) = spec.zones.iter_mut().find(|z| z.id == zone) {
                    z.build_limits.insert((tech, period), mw);
                }
            }
        }
        validate_system(spec)
    }
}

/// Checks every invariant and cross-reference, returning all violations
/// rather than the first.
pub fn validate_system(spec: SystemSpec) -> Result<ValidatedSystem, Vec<ValidationIssue>> {
    let mut issues = Vec::new();

    let mut period_index = BTreeMap::new();
    let mut last_anchor = i32::MIN;
    for (i, p) in spec.periods.iter().enumerate() {
        if period_index.insert(p.label.clone(), i).is_some() {
            issues.push(ValidationIssue::DuplicateId(p.label.clone()));
        }
        if p.years_represented < 1 {
            issues.push(ValidationIssue::Invalid {
                entity: format!("period {}", p.label),
                message: String::from("years_represented must be at least 1"),
            });
        }
        if p.calendar_anchor <= last_anchor {
            issues.push(ValidationIssue::Invalid {
                entity: format!("period {}", p.label),
                message: String::from("periods must be strictly ordered by calendar anchor"),
            });
        }
        last_anchor = p.calendar_anchor;
    }
    if spec.periods.is_empty() {
        issues.push(ValidationIssue::Invalid {
            entity: String::from("periods"),
            message: String::from("at least one period is required"),
        });
    }

    let hours = spec.time.hour_count();
    let wsum = spec.time.total_weight();
    if (wsum - ANNUAL_HOURS).abs() > 1e-6 {
        issues.push(ValidationIssue::Invalid {
            entity: String::from("time"),
            message: format!("hour weights sum to {wsum}, expected 8760"),
        });
    }
    if spec.time.weights.iter().any(|w| *w <= 0.0) {
        issues.push(ValidationIssue::Invalid {
            entity: String::from("time"),
            message: String::from("all hour weights must be positive"),
        });
    }
    if spec.time.block_starts.first() != Some(&0)
        || spec.time.block_starts.windows(2).any(|w| w[0] >= w[1])
        || spec
            .time
            .block_starts
            .last()
            .map_or(false, |s| *s >= hours.max(1))
    {
        issues.push(ValidationIssue::Invalid {
            entity: String::from("time"),
            message: String::from("block starts must begin at 0 and strictly increase"),
        });
    }

    let mut fuel_index = BTreeMap::new();
    for (i, f) in spec.fuels.iter().enumerate() {
        if fuel_index.insert(f.id.clone(), i).is_some() {
            issues.push(ValidationIssue::DuplicateId(f.id.clone()));
        }
        if f.emission_factor < 0.0 {
            issues.push(ValidationIssue::Invalid {
                entity: format!("fuel {}", f.id),
                message: String::from("emission factor must be nonnegative"),
            });
        }
        if f.is_hydrogen && f.emission_factor != 0.0 {
            issues.push(ValidationIssue::Invalid {
                entity: format!("fuel {}", f.id),
                message: String::from("hydrogen must have a zero emission factor"),
            });
        }
        for (period, price) in &f.price_by_period {
            if !period_index.contains_key(period) {
                issues.push(ValidationIssue::UnknownPeriod {
                    entity: format!("fuel {}", f.id),
                    period: period.clone(),
                });
            }
            if *price < 0.0 {
                issues.push(ValidationIssue::Invalid {
                    entity: format!("fuel {}", f.id),
                    message: format!("negative price in period {period}"),
                });
            }
        }
        for p in &spec.periods {
            if !f.price_by_period.contains_key(&p.label) {
                issues.push(ValidationIssue::Invalid {
                    entity: format!("fuel {}", f.id),
                    message: format!("missing price for period {}", p.label),
                });
            }
        }
    }

    let mut zone_index = BTreeMap::new();
    for (i, z) in spec.zones.iter().enumerate() {
        if zone_index.insert(z.id.clone(), i).is_some() {
            issues.push(ValidationIssue::DuplicateId(z.id.clone()));
        }
        if z.demand.len() != hours {
            issues.push(ValidationIssue::Invalid {
                entity: format!("zone {}", z.id),
                message: format!("demand has {} entries, expected {hours}", z.demand.len()),
            });
        }
        if z.demand.iter().any(|d| *d < 0.0) {
            issues.push(ValidationIssue::Invalid {
                entity: format!("zone {}", z.id),
                message: String::from("demand must be nonnegative"),
            });
        }
        for (period, h2) in &z.h2_demand {
            if !period_index.contains_key(period) {
                issues.push(ValidationIssue::UnknownPeriod {
                    entity: format!("zone {}", z.id),
                    period: period.clone(),
                });
            }
            if *h2 < 0.0 {
                issues.push(ValidationIssue::Invalid {
                    entity: format!("zone {}", z.id),
                    message: String::from("hydrogen demand must be nonnegative"),
                });
            }
        }
        for ((_, period), mw) in &z.build_limits {
            if !period_index.contains_key(period) {
                issues.push(ValidationIssue::UnknownPeriod {
                    entity: format!("zone {}", z.id),
                    period: period.clone(),
                });
            }
            if *mw < 0.0 {
                issues.push(ValidationIssue::Invalid {
                    entity: format!("zone {}", z.id),
                    message: String::from("build limits must be nonnegative"),
                });
            }
        }
    }

    let mut cluster_index = BTreeMap::new();
    for (i, c) in spec.clusters.iter().enumerate() {
        let entity = format!("cluster {}", c.id);
        if cluster_index.insert(c.id.clone(), i).is_some() {
            issues.push(ValidationIssue::DuplicateId(c.id.clone()));
        }
        if !zone_index.contains_key(&c.zone) {
            issues.push(ValidationIssue::UnknownZone {
                entity: entity.clone(),
                zone: c.zone.clone(),
            });
        }
        if c.capacity_mw < 0.0 {
            issues.push(ValidationIssue::NegativeCapacity {
                entity: entity.clone(),
            });
        }
        if !(0.0..=1.0).contains(&c.capture_rate) {
            issues.push(ValidationIssue::Invalid {
                entity: entity.clone(),
                message: String::from("capture rate must lie in [0, 1]"),
            });
        }
        for fuel in &c.allowed_fuels {
            if !fuel_index.contains_key(fuel) {
                issues.push(ValidationIssue::UnknownFuel {
                    entity: entity.clone(),
                    fuel: fuel.clone(),
                });
            }
            match c.heat_rates.get(fuel) {
                Some(hr) if *hr > 0.0 => {}
                _ => issues.push(ValidationIssue::MissingHeatRate {
                    cluster: c.id.clone(),
                    fuel: fuel.clone(),
                }),
            }
        }
        if let Vintage::NewBuild { first_available } = &c.vintage {
            if !period_index.contains_key(first_available) {
                issues.push(ValidationIssue::UnknownPeriod {
                    entity: entity.clone(),
                    period: first_available.clone(),
                });
            }
            if c.capacity_mw != 0.0 {
                issues.push(ValidationIssue::Invalid {
                    entity: entity.clone(),
                    message: String::from("new-build clusters must start at zero capacity"),
                });
            }
        }
        if let Some(p) = &c.planned_retirement {
            if !period_index.contains_key(p) {
                issues.push(ValidationIssue::UnknownPeriod {
                    entity: entity.clone(),
                    period: p.clone(),
                });
            }
        }
        for (period, mw) in &c.max_new_by_period {
            if !period_index.contains_key(period) {
                issues.push(ValidationIssue::UnknownPeriod {
                    entity: entity.clone(),
                    period: period.clone(),
                });
            }
            if *mw < 0.0 {
                issues.push(ValidationIssue::NegativeCapacity {
                    entity: entity.clone(),
                });
            }
        }
        match &c.availability {
            Availability::Constant(a) => {
                if !(0.0..=1.0).contains(a) {
                    issues.push(ValidationIssue::Invalid {
                        entity: entity.clone(),
                        message: String::from("availability must lie in [0, 1]"),
                    });
                }
            }
            Availability::Profile(p) => {
                if p.len() != hours {
                    issues.push(ValidationIssue::Invalid {
                        entity: entity.clone(),
                        message: format!(
                            "availability profile has {} entries, expected {hours}",
                            p.len()
                        ),
                    });
                }
                if p.iter().any(|a| !(0.0..=1.0).contains(a)) {
                    issues.push(ValidationIssue::Invalid {
                        entity: entity.clone(),
                        message: String::from("availability must lie in [0, 1]"),
                    });
                }
            }
        }
        for (parent, ratio) in &c.retrofit_parents {
            if *ratio <= 0.0 || *ratio > 1.0 {
                issues.push(ValidationIssue::Invalid {
                    entity: entity.clone(),
                    message: format!("retrofit conversion ratio {ratio} outside (0, 1]"),
                });
            }
            if parent == &c.id {
                issues.push(ValidationIssue::Invalid {
                    entity: entity.clone(),
                    message: String::from("cluster cannot be its own retrofit parent"),
                });
            }
        }
    }
    // retrofit parents can only be checked once all clusters are indexed
    for c in &spec.clusters {
        for (parent, _) in &c.retrofit_parents {
            if !cluster_index.contains_key(parent) {
                issues.push(ValidationIssue::Invalid {
                    entity: format!("cluster {}", c.id),
                    message: format!("unknown retrofit parent `{parent}`"),
                });
            }
        }
    }

    let mut storage_index = BTreeMap::new();
    for (i, s) in spec.storage.iter().enumerate() {
        let entity = format!("storage {}", s.id);
        if storage_index.insert(s.id.clone(), i).is_some() || cluster_index.contains_key(&s.id) {
            issues.push(ValidationIssue::DuplicateId(s.id.clone()));
        }
        if !zone_index.contains_key(&s.zone) {
            issues.push(ValidationIssue::UnknownZone {
                entity: entity.clone(),
                zone: s.zone.clone(),
            });
        }
        if s.power_capacity_mw < 0.0 || s.energy_capacity_mwh < 0.0 {
            issues.push(ValidationIssue::NegativeCapacity {
                entity: entity.clone(),
            });
        }
        if !(s.round_trip_efficiency > 0.0 && s.round_trip_efficiency <= 1.0) {
            issues.push(ValidationIssue::Invalid {
                entity: entity.clone(),
                message: String::from("round-trip efficiency must lie in (0, 1]"),
            });
        }
        for (period, mw) in &s.max_new_by_period {
            if !period_index.contains_key(period) {
                issues.push(ValidationIssue::UnknownPeriod {
                    entity: entity.clone(),
                    period: period.clone(),
                });
            }
            if *mw < 0.0 {
                issues.push(ValidationIssue::NegativeCapacity {
                    entity: entity.clone(),
                });
            }
        }
    }

    for l in &spec.lines {
        let entity = format!("line {}", l.id);
        if l.from_zone == l.to_zone {
            issues.push(ValidationIssue::Invalid {
                entity: entity.clone(),
                message: String::from("line endpoints must differ"),
            });
        }
        for z in [&l.from_zone, &l.to_zone] {
            if !zone_index.contains_key(z) {
                issues.push(ValidationIssue::UnknownZone {
                    entity: entity.clone(),
                    zone: z.clone(),
                });
            }
        }
        if l.capacity_mw < 0.0 || l.max_expansion_mw < 0.0 {
            issues.push(ValidationIssue::NegativeCapacity {
                entity: entity.clone(),
            });
        }
        if !(0.0..1.0).contains(&l.loss_fraction) {
            issues.push(ValidationIssue::Invalid {
                entity: entity.clone(),
                message: String::from("loss fraction must lie in [0, 1)"),
            });
        }
    }

    if spec.voll <= 0.0 {
        issues.push(ValidationIssue::Invalid {
            entity: String::from("system"),
            message: String::from("voll must be positive"),
        });
    }

    if issues.is_empty() {
        Ok(ValidatedSystem {
            spec,
            zone_index,
            fuel_index,
            cluster_index,
            storage_index,
            period_index,
        })
    } else {
        Err(issues)
    }
}

/// A single generating unit before clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawUnit {
    pub id: String,
    pub zone: String,
    pub tech_class: TechClass,
    pub fuel: String,
    pub capacity_mw: f64,
    pub heat_rate: f64,
    pub fixed_om: f64,
    pub var_om: f64,
    pub annuitized_capex: f64,
}

/// Bin edges for the clustering keys. Values at or below the first edge fall
/// in bin 0, and so on; values above the last edge fall in the final bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub size_edges: Vec<f64>,
    pub heat_rate_edges: Vec<f64>,
}

impl BinSpec {
    /// Quartile edges of the observed size and heat-rate distributions.
    pub fn quartiles(units: &[RawUnit]) -> BinSpec {
        BinSpec {
            size_edges: quartile_edges(units.iter().map(|u| u.capacity_mw)),
            heat_rate_edges: quartile_edges(units.iter().map(|u| u.heat_rate)),
        }
    }

    fn bin(edges: &[f64], value: f64) -> usize {
        edges.iter().take_while(|e| value > **e).count()
    }
}

fn quartile_edges(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return Vec::new();
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |f: f64| v[((v.len() - 1) as f64 * f) as usize];
    let mut edges = alloc::vec![q(0.25), q(0.5), q(0.75)];
    edges.dedup();
    edges
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterWarning {
    pub unit: String,
    pub message: String,
}

/// Merges raw units that share (fuel, tech, zone, size bin, heat-rate bin)
/// into clusters. Capacity adds exactly; heat rate and costs are
/// capacity-weighted means. Zero-capacity units are dropped with a warning.
pub fn cluster_generators(
    units: &[RawUnit],
    bins: &BinSpec,
) -> (Vec<GeneratorCluster>, Vec<ClusterWarning>) {
    let mut warnings = Vec::new();
    let mut groups: BTreeMap<(String, TechClass, String, usize, usize), Vec<&RawUnit>> =
        BTreeMap::new();
    for u in units {
        if u.capacity_mw <= 0.0 {
            warnings.push(ClusterWarning {
                unit: u.id.clone(),
                message: String::from("zero or negative capacity, dropped"),
            });
            continue;
        }
        let key = (
            u.fuel.clone(),
            u.tech_class,
            u.zone.clone(),
            BinSpec::bin(&bins.size_edges, u.capacity_mw),
            BinSpec::bin(&bins.heat_rate_edges, u.heat_rate),
        );
        groups.entry(key).or_default().push(u);
    }
    let mut clusters = Vec::with_capacity(groups.len());
    for ((fuel, tech, zone, sbin, hbin), members) in groups {
        let capacity: f64 = members.iter().map(|u| u.capacity_mw).sum();
        let wmean = |f: &dyn Fn(&RawUnit) -> f64| -> f64 {
            members.iter().map(|u| f(u) * u.capacity_mw).sum::<f64>() / capacity
        };
        let heat_rate = wmean(&|u| u.heat_rate);
        let mut heat_rates = BTreeMap::new();
        heat_rates.insert(fuel.clone(), heat_rate);
        clusters.push(GeneratorCluster {
            id: format!("{zone}_{tech}_{fuel}_s{sbin}_h{hbin}"),
            zone,
            tech_class: tech,
            vintage: Vintage::Existing,
            capacity_mw: capacity,
            max_new_by_period: BTreeMap::new(),
            allowed_fuels: alloc::vec![fuel],
            heat_rates,
            capture_rate: 0.0,
            fixed_om: wmean(&|u| u.fixed_om),
            var_om: wmean(&|u| u.var_om),
            annuitized_capex: wmean(&|u| u.annuitized_capex),
            planned_retirement: None,
            availability: Availability::Constant(1.0),
            retrofit_parents: Vec::new(),
            asset_life_years: 30,
        });
    }
    (clusters, warnings)
}

/// Ids referenced but missing from the given set; a loader helper.
pub fn missing_ids<'a>(
    have: &BTreeSet<&'a str>,
    want: impl Iterator<Item = &'a str>,
) -> Vec<&'a str> {
    want.filter(|w| !have.contains(w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(id: &str, cap: f64, hr: f64) -> RawUnit {
        RawUnit {
            id: id.into(),
            zone: "Z1".into(),
            tech_class: TechClass::CoalSteam,
            fuel: "coal".into(),
            capacity_mw: cap,
            heat_rate: hr,
            fixed_om: 10.0,
            var_om: 2.0,
            annuitized_capex: 0.0,
        }
    }

    #[test]
    fn identical_units_merge() {
        let units = [unit("a", 500.0, 10.0), unit("b", 500.0, 10.0)];
        let bins = BinSpec {
            size_edges: alloc::vec![],
            heat_rate_edges: alloc::vec![],
        };
        let (clusters, warnings) = cluster_generators(&units, &bins);
        assert!(warnings.is_empty());
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].capacity_mw, 1000.0);
        assert_eq!(clusters[0].heat_rates["coal"], 10.0);
    }

    #[test]
    fn weighted_mean_heat_rate() {
        let units = [unit("a", 500.0, 9.0), unit("b", 500.0, 11.0)];
        let bins = BinSpec {
            size_edges: alloc::vec![],
            heat_rate_edges: alloc::vec![],
        };
        let (clusters, _) = cluster_generators(&units, &bins);
        assert_eq!(clusters.len(), 1);
        assert!((clusters[0].heat_rates["coal"] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn different_fuels_stay_separate() {
        let mut gas = unit("g", 500.0, 8.0);
        gas.fuel = "natural_gas".into();
        gas.tech_class = TechClass::ExistingNGCC;
        let units = [unit("c", 500.0, 8.0), gas];
        let bins = BinSpec {
            size_edges: alloc::vec![],
            heat_rate_edges: alloc::vec![],
        };
        let (clusters, _) = cluster_generators(&units, &bins);
        assert_eq!(clusters.len(), 2);
    }

    #[test]
    fn zero_capacity_units_are_dropped_with_warning() {
        let units = [unit("a", 0.0, 10.0), unit("b", 100.0, 10.0)];
        let bins = BinSpec {
            size_edges: alloc::vec![],
            heat_rate_edges: alloc::vec![],
        };
        let (clusters, warnings) = cluster_generators(&units, &bins);
        assert_eq!(clusters.len(), 1);
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].unit, "a");
    }

    #[test]
    fn empty_input_is_not_an_error() {
        let bins = BinSpec {
            size_edges: alloc::vec![],
            heat_rate_edges: alloc::vec![],
        };
        let (clusters, warnings) = cluster_generators(&[], &bins);
        assert!(clusters.is_empty());
        assert!(warnings.is_empty());
    }
}
