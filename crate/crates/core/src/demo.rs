//! Self-contained demonstration systems.
//!
//! These synthetic two-zone systems are small enough to solve in seconds yet
//! exercise every mechanism: multi-fuel dispatch, retirement, retrofits,
//! renewable limits, storage, transmission, electrolysis and the whole rule
//! library. The CLI can write them to disk as a starting point. Profiles are
//! generated from a fixed linear congruential sequence, so every call
//! returns bit-identical data.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::policy::{HYDROGEN, NATURAL_GAS};
use crate::system::{
    Availability, Fuel, GeneratorCluster, Period, StorageCluster, SystemSpec, TechClass,
    TimeStructure, TransmissionLine, Vintage, Zone,
};

const WEEKS: usize = 3;
const WEEK_HOURS: usize = 168;
const HOURS: usize = WEEKS * WEEK_HOURS;

struct Lcg(u64);

impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Cyclic daily shape in [0, 1], peaking at hour 18.
fn daily_factor(t: usize) -> f64 {
    let tod = (t % 24) as f64;
    let mut dist = (tod - 18.0).abs();
    if dist > 12.0 {
        dist = 24.0 - dist;
    }
    1.0 - dist / 12.0
}

fn week_factor(t: usize) -> f64 {
    match (t / WEEK_HOURS) % WEEKS {
        0 => 1.15,
        1 => 0.95,
        _ => 1.05,
    }
}

fn demand_profile(base: f64, amplitude: f64) -> Vec<f64> {
    (0..HOURS)
        .map(|t| (base + amplitude * daily_factor(t)) * week_factor(t))
        .collect()
}

/// Autocorrelated wind availability; windier outside the peak week.
fn wind_profile(seed: u64) -> Vec<f64> {
    let mut rng = Lcg(seed);
    let mut s = 0.0_f64;
    let mut out = Vec::with_capacity(HOURS);
    for t in 0..HOURS {
        let u = 2.0 * rng.next_f64() - 1.0;
        s = 0.75 * s + 0.25 * u;
        let seasonal = match (t / WEEK_HOURS) % WEEKS {
            0 => 0.78,
            1 => 1.1,
            _ => 1.0,
        };
        let a = (0.45 + 0.5 * s) * seasonal;
        out.push(a.clamp(0.03, 0.95));
    }
    out
}

/// Daylight triangle with mild random clouding.
fn solar_profile(seed: u64) -> Vec<f64> {
    let mut rng = Lcg(seed);
    let mut out = Vec::with_capacity(HOURS);
    for t in 0..HOURS {
        let tod = (t % 24) as f64;
        let shape = if (6.0..=18.0).contains(&tod) {
            1.0 - (tod - 12.0).abs() / 6.0
        } else {
            0.0
        };
        let cloud = 0.7 + 0.3 * rng.next_f64();
        out.push((shape * cloud).clamp(0.0, 1.0));
    }
    out
}

fn periods() -> Vec<Period> {
    [(2025, "2025"), (2030, "2030"), (2035, "2035"), (2040, "2040")]
        .into_iter()
        .map(|(anchor, label)| Period {
            label: String::from(label),
            calendar_anchor: anchor,
            years_represented: 5,
        })
        .collect()
}

fn flat_prices(v: [f64; 4]) -> BTreeMap<String, f64> {
    ["2025", "2030", "2035", "2040"]
        .into_iter()
        .zip(v)
        .map(|(p, x)| (String::from(p), x))
        .collect()
}

fn per_period(v: [f64; 4]) -> BTreeMap<String, f64> {
    flat_prices(v)
}

fn fuels() -> Vec<Fuel> {
    alloc::vec![
        Fuel {
            id: String::from("coal"),
            price_by_period: flat_prices([2.05, 2.05, 2.05, 2.05]),
            emission_factor: 0.09552,
            is_hydrogen: false,
        },
        Fuel {
            id: String::from(NATURAL_GAS),
            price_by_period: flat_prices([3.5, 3.7, 3.9, 3.9]),
            emission_factor: 0.05306,
            is_hydrogen: false,
        },
        Fuel {
            id: String::from("uranium"),
            price_by_period: flat_prices([0.7, 0.7, 0.7, 0.7]),
            emission_factor: 0.0,
            is_hydrogen: false,
        },
        Fuel {
            id: String::from(HYDROGEN),
            price_by_period: flat_prices([20.0, 20.0, 20.0, 20.0]),
            emission_factor: 0.0,
            is_hydrogen: true,
        },
    ]
}

fn gas_price_sets() -> BTreeMap<String, BTreeMap<(String, String), f64>> {
    let mut sets = BTreeMap::new();
    let entry = |v: [f64; 4]| -> BTreeMap<(String, String), f64> {
        ["2025", "2030", "2035", "2040"]
            .into_iter()
            .zip(v)
            .map(|(p, x)| ((String::from(NATURAL_GAS), String::from(p)), x))
            .collect()
    };
    sets.insert(String::from("low"), entry([2.6, 2.7, 2.8, 2.8]));
    sets.insert(String::from("high"), entry([5.0, 5.5, 5.9, 5.9]));
    sets
}

fn bare_cluster(id: &str, zone: &str, tech: TechClass) -> GeneratorCluster {
    GeneratorCluster {
        id: String::from(id),
        zone: String::from(zone),
        tech_class: tech,
        vintage: Vintage::Existing,
        capacity_mw: 0.0,
        max_new_by_period: BTreeMap::new(),
        allowed_fuels: Vec::new(),
        heat_rates: BTreeMap::new(),
        capture_rate: 0.0,
        fixed_om: 0.0,
        var_om: 0.0,
        annuitized_capex: 0.0,
        planned_retirement: None,
        availability: Availability::Constant(1.0),
        retrofit_parents: Vec::new(),
        asset_life_years: 30,
    }
}

fn one_fuel(fuel: &str, hr: f64) -> (Vec<String>, BTreeMap<String, f64>) {
    (
        alloc::vec![String::from(fuel)],
        [(String::from(fuel), hr)].into_iter().collect(),
    )
}

/// The two-zone, six-cluster system: coal with a gas-cofire retrofit
/// variant, existing and new gas, wind, nuclear, one transmission line.
pub fn two_zone_system() -> SystemSpec {
    let mut clusters = Vec::new();

    let mut coal = bare_cluster("coal-1", "Z1", TechClass::CoalSteam);
    coal.capacity_mw = 900.0;
    (coal.allowed_fuels, coal.heat_rates) = one_fuel("coal", 10.2);
    coal.fixed_om = 42_000.0;
    coal.var_om = 4.5;
    coal.planned_retirement = Some(String::from("2035"));
    coal.availability = Availability::Constant(0.90);
    coal.asset_life_years = 40;
    clusters.push(coal);

    let mut cofire = bare_cluster("coal-1-cofire", "Z1", TechClass::CoalGasCofire);
    cofire.allowed_fuels = alloc::vec![String::from("coal"), String::from(NATURAL_GAS)];
    cofire.heat_rates = [
        (String::from("coal"), 10.2),
        (String::from(NATURAL_GAS), 10.4),
    ]
    .into_iter()
    .collect();
    cofire.fixed_om = 43_000.0;
    cofire.var_om = 4.5;
    cofire.annuitized_capex = 9_000.0; // retrofit cost per converted MW-yr
    cofire.planned_retirement = Some(String::from("2035"));
    cofire.availability = Availability::Constant(0.90);
    cofire.retrofit_parents = alloc::vec![(String::from("coal-1"), 1.0)];
    cofire.asset_life_years = 40;
    clusters.push(cofire);

    let mut ngcc = bare_cluster("ngcc-1", "Z1", TechClass::ExistingNGCC);
    ngcc.capacity_mw = 700.0;
    (ngcc.allowed_fuels, ngcc.heat_rates) = one_fuel(NATURAL_GAS, 7.4);
    ngcc.fixed_om = 26_000.0;
    ngcc.var_om = 2.2;
    ngcc.availability = Availability::Constant(0.95);
    clusters.push(ngcc);

    let mut new_ngcc = bare_cluster("new-ngcc", "Z1", TechClass::NewNGCC);
    new_ngcc.vintage = Vintage::NewBuild {
        first_available: String::from("2025"),
    };
    (new_ngcc.allowed_fuels, new_ngcc.heat_rates) = one_fuel(NATURAL_GAS, 6.4);
    new_ngcc.max_new_by_period = per_period([320.0, 320.0, 320.0, 320.0]);
    new_ngcc.fixed_om = 26_000.0;
    new_ngcc.var_om = 2.0;
    new_ngcc.annuitized_capex = 86_000.0;
    new_ngcc.availability = Availability::Constant(0.95);
    clusters.push(new_ngcc);

    let mut wind = bare_cluster("wind-2", "Z2", TechClass::OnshoreWind);
    wind.vintage = Vintage::NewBuild {
        first_available: String::from("2025"),
    };
    wind.max_new_by_period = per_period([400.0, 400.0, 400.0, 400.0]);
    wind.fixed_om = 30_000.0;
    wind.annuitized_capex = 98_000.0;
    wind.availability = Availability::Profile(wind_profile(0x00DD));
    clusters.push(wind);

    let mut nuke = bare_cluster("nuke-1", "Z1", TechClass::Nuclear);
    nuke.capacity_mw = 500.0;
    (nuke.allowed_fuels, nuke.heat_rates) = one_fuel("uranium", 10.45);
    nuke.fixed_om = 130_000.0;
    nuke.var_om = 2.4;
    nuke.availability = Availability::Constant(0.93);
    nuke.asset_life_years = 60;
    clusters.push(nuke);

    SystemSpec {
        periods: periods(),
        time: TimeStructure::uniform_blocks(WEEKS, WEEK_HOURS),
        fuels: fuels(),
        zones: alloc::vec![
            Zone {
                id: String::from("Z1"),
                demand: demand_profile(1150.0, 650.0),
                h2_demand: BTreeMap::new(),
                build_limits: BTreeMap::new(),
            },
            Zone {
                id: String::from("Z2"),
                demand: demand_profile(300.0, 170.0),
                h2_demand: BTreeMap::new(),
                build_limits: BTreeMap::new(),
            },
        ],
        clusters,
        storage: Vec::new(),
        lines: alloc::vec![TransmissionLine {
            id: String::from("Z1-Z2"),
            from_zone: String::from("Z1"),
            to_zone: String::from("Z2"),
            capacity_mw: 500.0,
            max_expansion_mw: 0.0,
            expansion_cost: 0.0,
            loss_fraction: 0.02,
        }],
        fuel_price_sets: gas_price_sets(),
        build_limit_sets: BTreeMap::new(),
        baseline_2022_emissions_mt: 6.5,
        voll: 5_000.0,
    }
}

/// The two-zone system extended with storage, electrolysis, capture-equipped
/// variants, a hydrogen-capable turbine, expandable transmission and zonal
/// renewable growth limits. Exercises every subsystem.
pub fn rich_system() -> SystemSpec {
    let mut spec = two_zone_system();

    // a second coal cluster that would operate indefinitely (capture class)
    let mut coal2 = bare_cluster("coal-2", "Z1", TechClass::CoalSteam);
    coal2.capacity_mw = 400.0;
    (coal2.allowed_fuels, coal2.heat_rates) = one_fuel("coal", 10.8);
    coal2.fixed_om = 40_000.0;
    coal2.var_om = 4.8;
    coal2.availability = Availability::Constant(0.88);
    coal2.asset_life_years = 40;
    spec.clusters.push(coal2);

    let mut coal2_ccs = bare_cluster("coal-2-ccs", "Z1", TechClass::CoalCcsRetrofit);
    (coal2_ccs.allowed_fuels, coal2_ccs.heat_rates) = one_fuel("coal", 13.5);
    coal2_ccs.capture_rate = 0.90;
    coal2_ccs.fixed_om = 58_000.0;
    coal2_ccs.var_om = 7.0;
    coal2_ccs.annuitized_capex = 95_000.0;
    coal2_ccs.availability = Availability::Constant(0.85);
    coal2_ccs.retrofit_parents = alloc::vec![(String::from("coal-2"), 0.97)];
    coal2_ccs.asset_life_years = 40;
    spec.clusters.push(coal2_ccs);

    let mut ngcc_ccs_retro = bare_cluster("ngcc-1-ccs", "Z1", TechClass::GasCcsRetrofit);
    (ngcc_ccs_retro.allowed_fuels, ngcc_ccs_retro.heat_rates) = one_fuel(NATURAL_GAS, 9.25);
    ngcc_ccs_retro.capture_rate = 0.90;
    ngcc_ccs_retro.fixed_om = 40_000.0;
    ngcc_ccs_retro.var_om = 4.2;
    ngcc_ccs_retro.annuitized_capex = 55_000.0;
    ngcc_ccs_retro.availability = Availability::Constant(0.92);
    ngcc_ccs_retro.retrofit_parents = alloc::vec![(String::from("ngcc-1"), 0.96)];
    spec.clusters.push(ngcc_ccs_retro);

    let mut new_ccs = bare_cluster("new-ngcc-ccs", "Z1", TechClass::NgccCcs);
    new_ccs.vintage = Vintage::NewBuild {
        first_available: String::from("2030"),
    };
    (new_ccs.allowed_fuels, new_ccs.heat_rates) = one_fuel(NATURAL_GAS, 8.0);
    new_ccs.capture_rate = 0.90;
    new_ccs.max_new_by_period = per_period([0.0, 300.0, 300.0, 300.0]);
    new_ccs.fixed_om = 40_000.0;
    new_ccs.var_om = 4.0;
    new_ccs.annuitized_capex = 132_000.0;
    new_ccs.availability = Availability::Constant(0.92);
    spec.clusters.push(new_ccs);

    let mut h2t = bare_cluster("h2t-1", "Z1", TechClass::H2Turbine);
    h2t.vintage = Vintage::NewBuild {
        first_available: String::from("2030"),
    };
    h2t.allowed_fuels = alloc::vec![String::from(NATURAL_GAS), String::from(HYDROGEN)];
    h2t.heat_rates = [
        (String::from(NATURAL_GAS), 9.5),
        (String::from(HYDROGEN), 9.8),
    ]
    .into_iter()
    .collect();
    h2t.max_new_by_period = per_period([0.0, 200.0, 200.0, 200.0]);
    h2t.fixed_om = 18_000.0;
    h2t.var_om = 4.6;
    h2t.annuitized_capex = 62_000.0;
    h2t.availability = Availability::Constant(0.95);
    spec.clusters.push(h2t);

    let mut solar = bare_cluster("solar-1", "Z1", TechClass::SolarPv);
    solar.vintage = Vintage::NewBuild {
        first_available: String::from("2025"),
    };
    solar.max_new_by_period = per_period([250.0, 250.0, 250.0, 250.0]);
    solar.fixed_om = 18_000.0;
    solar.annuitized_capex = 70_000.0;
    solar.availability = Availability::Profile(solar_profile(0x501A));
    spec.clusters.push(solar);

    let mut elz = bare_cluster("elz-2", "Z2", TechClass::Electrolyzer);
    elz.vintage = Vintage::NewBuild {
        first_available: String::from("2025"),
    };
    (elz.allowed_fuels, elz.heat_rates) = one_fuel(HYDROGEN, 2.0); // MMBtu H₂ per MWh
    elz.max_new_by_period = per_period([150.0, 150.0, 150.0, 150.0]);
    elz.fixed_om = 25_000.0;
    elz.var_om = 0.5;
    elz.annuitized_capex = 80_000.0;
    spec.clusters.push(elz);

    spec.storage.push(StorageCluster {
        id: String::from("bat-1"),
        zone: String::from("Z1"),
        power_capacity_mw: 60.0,
        energy_capacity_mwh: 240.0,
        round_trip_efficiency: 0.88,
        fixed_om: 8_000.0,
        var_om: 0.4,
        annuitized_capex: 58_000.0,
        max_new_by_period: per_period([100.0, 100.0, 100.0, 100.0]),
        duration_hours: 4.0,
    });

    spec.lines[0].max_expansion_mw = 300.0;
    spec.lines[0].expansion_cost = 20_000.0;

    // hydrogen offtake in the windy zone from 2035
    spec.zones[1].h2_demand =
        [(String::from("2035"), 200_000.0), (String::from("2040"), 300_000.0)]
            .into_iter()
            .collect();

    // zonal wind growth limits with optimistic/conservative sets
    spec.zones[1].build_limits = [
        ((TechClass::OnshoreWind, String::from("2025")), 450.0),
        ((TechClass::OnshoreWind, String::from("2030")), 450.0),
        ((TechClass::OnshoreWind, String::from("2035")), 450.0),
        ((TechClass::OnshoreWind, String::from("2040")), 450.0),
    ]
    .into_iter()
    .collect();
    let mut sets = BTreeMap::new();
    let zone_set = |mw: f64| -> BTreeMap<(String, TechClass, String), f64> {
        ["2025", "2030", "2035", "2040"]
            .into_iter()
            .map(|p| {
                (
                    (String::from("Z2"), TechClass::OnshoreWind, String::from(p)),
                    mw,
                )
            })
            .collect()
    };
    sets.insert(String::from("opt"), zone_set(700.0));
    sets.insert(String::from("con"), zone_set(250.0));
    spec.build_limit_sets = sets;

    spec
}

/// Variant for directional checks: cheap coal that never retires on
/// schedule, so dispatch competition between coal and gas drives emissions.
pub fn cheap_coal_system() -> SystemSpec {
    let mut spec = two_zone_system();
    for f in &mut spec.fuels {
        if f.id == "coal" {
            f.price_by_period = flat_prices([1.9, 1.9, 1.9, 1.9]);
        }
    }
    for c in &mut spec.clusters {
        if c.id == "coal-1" || c.id == "coal-1-cofire" {
            c.planned_retirement = None;
            c.fixed_om = 30_000.0;
        }
    }
    spec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::validate_system;

    #[test]
    fn demo_systems_validate() {
        validate_system(two_zone_system()).expect("two-zone validates");
        validate_system(rich_system()).expect("rich validates");
        validate_system(cheap_coal_system()).expect("cheap-coal validates");
    }

    #[test]
    fn demo_systems_are_deterministic() {
        assert_eq!(two_zone_system(), two_zone_system());
        assert_eq!(rich_system(), rich_system());
    }

    #[test]
    fn weights_cover_the_year() {
        let spec = two_zone_system();
        assert!((spec.time.total_weight() - 8760.0).abs() < 1e-6);
        assert_eq!(spec.time.hour_count(), 504);
        assert_eq!(spec.time.blocks().len(), 3);
    }
}
