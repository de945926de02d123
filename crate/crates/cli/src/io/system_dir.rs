//! System input as a directory of delimited text tables.
//!
//! Required files: `periods.csv`, `hours.csv`, `fuels.csv`,
//! `fuel_prices.csv`, `zones.csv`, `demand.csv`, `clusters.csv`,
//! `cluster_fuels.csv`, `system.csv`. Optional files: `build_limits.csv`,
//! `availability_profiles.csv`, `retrofits.csv`, `lines.csv`,
//! `storage.csv`, `storage_build_limits.csv`, `zone_build_limits.csv`,
//! `h2_demand.csv`. One header row, UTF-8, comma-delimited, decimal point.
//! Column meanings are documented in `docs/formats.md`.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use epx_core::system::{
    validate_system, Availability, Fuel, GeneratorCluster, Period, StorageCluster, SystemSpec,
    TechClass, TimeStructure, TransmissionLine, ValidatedSystem, Vintage, Zone,
};

fn read_rows<T: for<'de> Deserialize<'de>>(dir: &Path, file: &str, required: bool) -> Result<Vec<T>> {
    let path = dir.join(file);
    if !path.exists() {
        if required {
            bail!("missing required input file {}", path.display());
        }
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(&path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, row) in reader.deserialize().enumerate() {
        let row: T = row.with_context(|| format!("{}:{} (data row)", path.display(), i + 2))?;
        out.push(row);
    }
    Ok(out)
}

#[derive(Deserialize)]
struct PeriodRow {
    label: String,
    calendar_anchor: i32,
    years_represented: u32,
}

#[derive(Deserialize)]
struct HourRow {
    hour: usize,
    week: String,
    weight: f64,
}

#[derive(Deserialize)]
struct FuelRow {
    fuel: String,
    emission_factor_t_per_mmbtu: f64,
    is_hydrogen: bool,
}

#[derive(Deserialize)]
struct FuelPriceRow {
    fuel: String,
    price_set: String,
    period: String,
    price_per_mmbtu: f64,
}

#[derive(Deserialize)]
struct ZoneRow {
    zone: String,
}

#[derive(Deserialize)]
struct DemandRow {
    zone: String,
    hour: usize,
    demand_mw: f64,
}

#[derive(Deserialize)]
struct ClusterRow {
    cluster: String,
    zone: String,
    tech: String,
    vintage: String,
    capacity_mw: f64,
    capture_rate: f64,
    fixed_om_per_mw_yr: f64,
    var_om_per_mwh: f64,
    capex_per_mw_yr: f64,
    asset_life_years: u32,
    planned_retirement: String,
    availability: String,
}

#[derive(Deserialize)]
struct ClusterFuelRow {
    cluster: String,
    fuel: String,
    heat_rate_mmbtu_per_mwh: f64,
}

#[derive(Deserialize)]
struct BuildLimitRow {
    cluster: String,
    period: String,
    max_new_mw: f64,
}

#[derive(Deserialize)]
struct AvailabilityRow {
    profile: String,
    hour: usize,
    availability: f64,
}

#[derive(Deserialize)]
struct RetrofitRow {
    child: String,
    parent: String,
    conversion_ratio: f64,
}

#[derive(Deserialize)]
struct LineRow {
    line: String,
    from_zone: String,
    to_zone: String,
    capacity_mw: f64,
    max_expansion_mw: f64,
    expansion_cost_per_mw_yr: f64,
    loss_fraction: f64,
}

#[derive(Deserialize)]
struct StorageRow {
    storage: String,
    zone: String,
    power_capacity_mw: f64,
    energy_capacity_mwh: f64,
    round_trip_efficiency: f64,
    fixed_om_per_mw_yr: f64,
    var_om_per_mwh: f64,
    capex_per_mw_yr: f64,
    duration_hours: f64,
}

#[derive(Deserialize)]
struct StorageBuildLimitRow {
    storage: String,
    period: String,
    max_new_mw: f64,
}

#[derive(Deserialize)]
struct ZoneBuildLimitRow {
    zone: String,
    tech: String,
    limit_set: String,
    period: String,
    max_new_mw: f64,
}

#[derive(Deserialize)]
struct H2DemandRow {
    zone: String,
    period: String,
    mmbtu: f64,
}

#[derive(Deserialize)]
struct KeyValueRow {
    key: String,
    value: f64,
}

fn parse_tech(s: &str, entity: &str) -> Result<TechClass> {
    TechClass::parse(s).ok_or_else(|| anyhow!("{entity}: unknown tech class `{s}`"))
}

/// Loads and validates a system directory.
pub fn load_system(dir: &Path) -> Result<ValidatedSystem> {
    let spec = load_system_spec(dir)?;
    validate_system(spec).map_err(|issues| {
        let lines: Vec<String> = issues.iter().map(|i| i.to_string()).collect();
        anyhow!("system validation failed:\n  {}", lines.join("\n  "))
    })
}

/// Loads the raw system spec without validating it.
pub fn load_system_spec(dir: &Path) -> Result<SystemSpec> {
    let periods: Vec<PeriodRow> = read_rows(dir, "periods.csv", true)?;
    let periods: Vec<Period> = periods
        .into_iter()
        .map(|p| Period {
            label: p.label,
            calendar_anchor: p.calendar_anchor,
            years_represented: p.years_represented,
        })
        .collect();

    let mut hour_rows: Vec<HourRow> = read_rows(dir, "hours.csv", true)?;
    hour_rows.sort_by_key(|h| h.hour);
    for (i, h) in hour_rows.iter().enumerate() {
        if h.hour != i {
            bail!("hours.csv: hour indices must be 0..n-1 without gaps (found {})", h.hour);
        }
    }
    let weights: Vec<f64> = hour_rows.iter().map(|h| h.weight).collect();
    let mut block_starts = Vec::new();
    let mut last_week: Option<&str> = None;
    for (i, h) in hour_rows.iter().enumerate() {
        if last_week != Some(h.week.as_str()) {
            block_starts.push(i);
            last_week = Some(h.week.as_str());
        }
    }
    let time = TimeStructure {
        weights,
        block_starts,
    };
    let hours = time.hour_count();

    let fuel_rows: Vec<FuelRow> = read_rows(dir, "fuels.csv", true)?;
    let price_rows: Vec<FuelPriceRow> = read_rows(dir, "fuel_prices.csv", true)?;
    let mut fuels: Vec<Fuel> = fuel_rows
        .into_iter()
        .map(|f| Fuel {
            id: f.fuel,
            price_by_period: BTreeMap::new(),
            emission_factor: f.emission_factor_t_per_mmbtu,
            is_hydrogen: f.is_hydrogen,
        })
        .collect();
    let mut fuel_price_sets: BTreeMap<String, BTreeMap<(String, String), f64>> = BTreeMap::new();
    for row in price_rows {
        if row.price_set == "ref" {
            match fuels.iter_mut().find(|f| f.id == row.fuel) {
                Some(f) => {
                    f.price_by_period.insert(row.period, row.price_per_mmbtu);
                }
                None => bail!("fuel_prices.csv references unknown fuel `{}`", row.fuel),
            }
        } else {
            fuel_price_sets
                .entry(row.price_set)
                .or_default()
                .insert((row.fuel, row.period), row.price_per_mmbtu);
        }
    }

    let zone_rows: Vec<ZoneRow> = read_rows(dir, "zones.csv", true)?;
    let mut zones: Vec<Zone> = zone_rows
        .into_iter()
        .map(|z| Zone {
            id: z.zone,
            demand: vec![0.0; hours],
            h2_demand: BTreeMap::new(),
            build_limits: BTreeMap::new(),
        })
        .collect();
    for row in read_rows::<DemandRow>(dir, "demand.csv", true)? {
        let z = zones
            .iter_mut()
            .find(|z| z.id == row.zone)
            .ok_or_else(|| anyhow!("demand.csv references unknown zone `{}`", row.zone))?;
        if row.hour >= hours {
            bail!("demand.csv hour {} out of range (have {hours} hours)", row.hour);
        }
        z.demand[row.hour] = row.demand_mw;
    }
    for row in read_rows::<H2DemandRow>(dir, "h2_demand.csv", false)? {
        let z = zones
            .iter_mut()
            .find(|z| z.id == row.zone)
            .ok_or_else(|| anyhow!("h2_demand.csv references unknown zone `{}`", row.zone))?;
        z.h2_demand.insert(row.period, row.mmbtu);
    }

    // availability profiles referenced from the clusters table
    let mut profiles: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in read_rows::<AvailabilityRow>(dir, "availability_profiles.csv", false)? {
        let p = profiles
            .entry(row.profile)
            .or_insert_with(|| vec![1.0; hours]);
        if row.hour >= hours {
            bail!("availability_profiles.csv hour {} out of range", row.hour);
        }
        p[row.hour] = row.availability;
    }

    let cluster_rows: Vec<ClusterRow> = read_rows(dir, "clusters.csv", true)?;
    let mut clusters: Vec<GeneratorCluster> = Vec::with_capacity(cluster_rows.len());
    for row in cluster_rows {
        let entity = format!("clusters.csv `{}`", row.cluster);
        let vintage = if row.vintage == "existing" {
            Vintage::Existing
        } else if let Some(p) = row.vintage.strip_prefix("new:") {
            Vintage::NewBuild {
                first_available: p.to_string(),
            }
        } else {
            bail!("{entity}: vintage must be `existing` or `new:<period>`");
        };
        let availability = if let Some(name) = row.availability.strip_prefix("profile:") {
            let p = profiles
                .get(name)
                .ok_or_else(|| anyhow!("{entity}: unknown availability profile `{name}`"))?;
            Availability::Profile(p.clone())
        } else if row.availability.is_empty() {
            Availability::Constant(1.0)
        } else {
            Availability::Constant(
                row.availability
                    .parse()
                    .with_context(|| format!("{entity}: availability"))?,
            )
        };
        clusters.push(GeneratorCluster {
            id: row.cluster,
            zone: row.zone,
            tech_class: parse_tech(&row.tech, &entity)?,
            vintage,
            capacity_mw: row.capacity_mw,
            max_new_by_period: BTreeMap::new(),
            allowed_fuels: Vec::new(),
            heat_rates: BTreeMap::new(),
            capture_rate: row.capture_rate,
            fixed_om: row.fixed_om_per_mw_yr,
            var_om: row.var_om_per_mwh,
            annuitized_capex: row.capex_per_mw_yr,
            planned_retirement: if row.planned_retirement.is_empty() {
                None
            } else {
                Some(row.planned_retirement)
            },
            availability,
            retrofit_parents: Vec::new(),
            asset_life_years: row.asset_life_years,
        });
    }
    for row in read_rows::<ClusterFuelRow>(dir, "cluster_fuels.csv", true)? {
        let c = clusters
            .iter_mut()
            .find(|c| c.id == row.cluster)
            .ok_or_else(|| anyhow!("cluster_fuels.csv references unknown cluster `{}`", row.cluster))?;
        c.allowed_fuels.push(row.fuel.clone());
        c.heat_rates.insert(row.fuel, row.heat_rate_mmbtu_per_mwh);
    }
    for row in read_rows::<BuildLimitRow>(dir, "build_limits.csv", false)? {
        let c = clusters
            .iter_mut()
            .find(|c| c.id == row.cluster)
            .ok_or_else(|| anyhow!("build_limits.csv references unknown cluster `{}`", row.cluster))?;
        c.max_new_by_period.insert(row.period, row.max_new_mw);
    }
    for row in read_rows::<RetrofitRow>(dir, "retrofits.csv", false)? {
        let c = clusters
            .iter_mut()
            .find(|c| c.id == row.child)
            .ok_or_else(|| anyhow!("retrofits.csv references unknown cluster `{}`", row.child))?;
        c.retrofit_parents.push((row.parent, row.conversion_ratio));
    }

    let mut build_limit_sets: BTreeMap<String, BTreeMap<(String, TechClass, String), f64>> =
        BTreeMap::new();
    for row in read_rows::<ZoneBuildLimitRow>(dir, "zone_build_limits.csv", false)? {
        let tech = parse_tech(&row.tech, "zone_build_limits.csv")?;
        if row.limit_set == "ref" {
            let z = zones
                .iter_mut()
                .find(|z| z.id == row.zone)
                .ok_or_else(|| anyhow!("zone_build_limits.csv references unknown zone `{}`", row.zone))?;
            z.build_limits.insert((tech, row.period), row.max_new_mw);
        } else {
            build_limit_sets
                .entry(row.limit_set)
                .or_default()
                .insert((row.zone, tech, row.period), row.max_new_mw);
        }
    }

    let storage_rows: Vec<StorageRow> = read_rows(dir, "storage.csv", false)?;
    let mut storage: Vec<StorageCluster> = storage_rows
        .into_iter()
        .map(|s| StorageCluster {
            id: s.storage,
            zone: s.zone,
            power_capacity_mw: s.power_capacity_mw,
            energy_capacity_mwh: s.energy_capacity_mwh,
            round_trip_efficiency: s.round_trip_efficiency,
            fixed_om: s.fixed_om_per_mw_yr,
            var_om: s.var_om_per_mwh,
            annuitized_capex: s.capex_per_mw_yr,
            max_new_by_period: BTreeMap::new(),
            duration_hours: s.duration_hours,
        })
        .collect();
    for row in read_rows::<StorageBuildLimitRow>(dir, "storage_build_limits.csv", false)? {
        let s = storage
            .iter_mut()
            .find(|s| s.id == row.storage)
            .ok_or_else(|| anyhow!("storage_build_limits.csv references unknown storage `{}`", row.storage))?;
        s.max_new_by_period.insert(row.period, row.max_new_mw);
    }

    let lines: Vec<TransmissionLine> = read_rows::<LineRow>(dir, "lines.csv", false)?
        .into_iter()
        .map(|l| TransmissionLine {
            id: l.line,
            from_zone: l.from_zone,
            to_zone: l.to_zone,
            capacity_mw: l.capacity_mw,
            max_expansion_mw: l.max_expansion_mw,
            expansion_cost: l.expansion_cost_per_mw_yr,
            loss_fraction: l.loss_fraction,
        })
        .collect();

    let mut baseline = 0.0;
    let mut voll = 0.0;
    for row in read_rows::<KeyValueRow>(dir, "system.csv", true)? {
        match row.key.as_str() {
            "baseline_2022_emissions_mt" => baseline = row.value,
            "voll_per_mwh" => voll = row.value,
            other => bail!("system.csv: unknown key `{other}`"),
        }
    }

    Ok(SystemSpec {
        periods,
        time,
        fuels,
        zones,
        clusters,
        storage,
        lines,
        fuel_price_sets,
        build_limit_sets,
        baseline_2022_emissions_mt: baseline,
        voll,
    })
}

fn fmt(x: f64) -> String {
    epx_core::report::fmt_num(x)
}

/// Writes a system spec as a system directory (the loader's inverse).
pub fn save_system(spec: &SystemSpec, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let write = |name: &str, content: String| -> Result<()> {
        std::fs::write(dir.join(name), content).with_context(|| format!("writing {name}"))
    };

    let mut s = String::from("label,calendar_anchor,years_represented\n");
    for p in &spec.periods {
        s += &format!("{},{},{}\n", p.label, p.calendar_anchor, p.years_represented);
    }
    write("periods.csv", s)?;

    let mut s = String::from("hour,week,weight\n");
    let blocks = spec.time.blocks();
    for (w, (bs, be)) in blocks.iter().enumerate() {
        for t in *bs..*be {
            s += &format!("{t},w{w},{}\n", fmt(spec.time.weights[t]));
        }
    }
    write("hours.csv", s)?;

    let mut s = String::from("fuel,emission_factor_t_per_mmbtu,is_hydrogen\n");
    for f in &spec.fuels {
        s += &format!("{},{},{}\n", f.id, fmt(f.emission_factor), f.is_hydrogen);
    }
    write("fuels.csv", s)?;

    let mut s = String::from("fuel,price_set,period,price_per_mmbtu\n");
    for f in &spec.fuels {
        for (p, v) in &f.price_by_period {
            s += &format!("{},ref,{},{}\n", f.id, p, fmt(*v));
        }
    }
    for (set, entries) in &spec.fuel_price_sets {
        for ((fuel, period), v) in entries {
            s += &format!("{fuel},{set},{period},{}\n", fmt(*v));
        }
    }
    write("fuel_prices.csv", s)?;

    let mut s = String::from("zone\n");
    for z in &spec.zones {
        s += &format!("{}\n", z.id);
    }
    write("zones.csv", s)?;

    let mut s = String::from("zone,hour,demand_mw\n");
    for z in &spec.zones {
        for (t, d) in z.demand.iter().enumerate() {
            s += &format!("{},{t},{}\n", z.id, fmt(*d));
        }
    }
    write("demand.csv", s)?;

    let h2_any = spec.zones.iter().any(|z| !z.h2_demand.is_empty());
    if h2_any {
        let mut s = String::from("zone,period,mmbtu\n");
        for z in &spec.zones {
            for (p, v) in &z.h2_demand {
                s += &format!("{},{p},{}\n", z.id, fmt(*v));
            }
        }
        write("h2_demand.csv", s)?;
    }

    // profiles referenced by clusters get stable names
    let mut profile_rows = String::from("profile,hour,availability\n");
    let mut any_profile = false;
    let mut s = String::from("cluster,zone,tech,vintage,capacity_mw,capture_rate,fixed_om_per_mw_yr,var_om_per_mwh,capex_per_mw_yr,asset_life_years,planned_retirement,availability\n");
    for c in &spec.clusters {
        let vintage = match &c.vintage {
            Vintage::Existing => String::from("existing"),
            Vintage::NewBuild { first_available } => format!("new:{first_available}"),
        };
        let availability = match &c.availability {
            Availability::Constant(a) => fmt(*a),
            Availability::Profile(p) => {
                any_profile = true;
                let name = format!("av-{}", c.id);
                for (t, a) in p.iter().enumerate() {
                    profile_rows += &format!("{name},{t},{}\n", fmt(*a));
                }
                format!("profile:{name}")
            }
        };
        s += &format!(
            "{},{},{},{vintage},{},{},{},{},{},{},{},{availability}\n",
            c.id,
            c.zone,
            c.tech_class.name(),
            fmt(c.capacity_mw),
            fmt(c.capture_rate),
            fmt(c.fixed_om),
            fmt(c.var_om),
            fmt(c.annuitized_capex),
            c.asset_life_years,
            c.planned_retirement.clone().unwrap_or_default(),
        );
    }
    write("clusters.csv", s)?;
    if any_profile {
        write("availability_profiles.csv", profile_rows)?;
    }

    let mut s = String::from("cluster,fuel,heat_rate_mmbtu_per_mwh\n");
    for c in &spec.clusters {
        for f in &c.allowed_fuels {
            s += &format!("{},{f},{}\n", c.id, fmt(c.heat_rates[f]));
        }
    }
    write("cluster_fuels.csv", s)?;

    let mut s = String::from("cluster,period,max_new_mw\n");
    for c in &spec.clusters {
        for (p, v) in &c.max_new_by_period {
            s += &format!("{},{p},{}\n", c.id, fmt(*v));
        }
    }
    write("build_limits.csv", s)?;

    let any_retrofit = spec.clusters.iter().any(|c| !c.retrofit_parents.is_empty());
    if any_retrofit {
        let mut s = String::from("child,parent,conversion_ratio\n");
        for c in &spec.clusters {
            for (p, r) in &c.retrofit_parents {
                s += &format!("{},{p},{}\n", c.id, fmt(*r));
            }
        }
        write("retrofits.csv", s)?;
    }

    if !spec.lines.is_empty() {
        let mut s = String::from(
            "line,from_zone,to_zone,capacity_mw,max_expansion_mw,expansion_cost_per_mw_yr,loss_fraction\n",
        );
        for l in &spec.lines {
            s += &format!(
                "{},{},{},{},{},{},{}\n",
                l.id,
                l.from_zone,
                l.to_zone,
                fmt(l.capacity_mw),
                fmt(l.max_expansion_mw),
                fmt(l.expansion_cost),
                fmt(l.loss_fraction)
            );
        }
        write("lines.csv", s)?;
    }

    if !spec.storage.is_empty() {
        let mut s = String::from("storage,zone,power_capacity_mw,energy_capacity_mwh,round_trip_efficiency,fixed_om_per_mw_yr,var_om_per_mwh,capex_per_mw_yr,duration_hours\n");
        let mut limits = String::from("storage,period,max_new_mw\n");
        let mut any_limit = false;
        for st in &spec.storage {
            s += &format!(
                "{},{},{},{},{},{},{},{},{}\n",
                st.id,
                st.zone,
                fmt(st.power_capacity_mw),
                fmt(st.energy_capacity_mwh),
                fmt(st.round_trip_efficiency),
                fmt(st.fixed_om),
                fmt(st.var_om),
                fmt(st.annuitized_capex),
                fmt(st.duration_hours)
            );
            for (p, v) in &st.max_new_by_period {
                any_limit = true;
                limits += &format!("{},{p},{}\n", st.id, fmt(*v));
            }
        }
        write("storage.csv", s)?;
        if any_limit {
            write("storage_build_limits.csv", limits)?;
        }
    }

    let any_zone_limits = spec.zones.iter().any(|z| !z.build_limits.is_empty())
        || !spec.build_limit_sets.is_empty();
    if any_zone_limits {
        let mut s = String::from("zone,tech,limit_set,period,max_new_mw\n");
        for z in &spec.zones {
            for ((tech, p), v) in &z.build_limits {
                s += &format!("{},{},ref,{p},{}\n", z.id, tech.name(), fmt(*v));
            }
        }
        for (set, entries) in &spec.build_limit_sets {
            for ((zone, tech, p), v) in entries {
                s += &format!("{zone},{},{set},{p},{}\n", tech.name(), fmt(*v));
            }
        }
        write("zone_build_limits.csv", s)?;
    }

    let mut s = String::from("key,value\n");
    s += &format!(
        "baseline_2022_emissions_mt,{}\n",
        fmt(spec.baseline_2022_emissions_mt)
    );
    s += &format!("voll_per_mwh,{}\n", fmt(spec.voll));
    write("system.csv", s)?;

    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_system_round_trips_through_the_directory_format() {
        let spec = epx_core::demo::rich_system();
        let dir = tempfile::tempdir().unwrap();
        save_system(&spec, dir.path()).unwrap();
        let loaded = load_system_spec(dir.path()).unwrap();
        assert_eq!(spec, loaded);
    }

    #[test]
    fn missing_required_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_system_spec(dir.path()).unwrap_err();
        assert!(err.to_string().contains("periods.csv"));
    }
}
