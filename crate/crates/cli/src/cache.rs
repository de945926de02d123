//! On-disk cache for the economic-retirement pre-pass.
//!
//! The benchmark run depends only on the system data, the credit settings
//! and the sensitivity knobs, so its retirement schedule is cached once per
//! such tuple. Layout: `<cache-dir>/retire-<hash>.csv` with columns
//! `cluster,period`, where `<hash>` is the first 16 hex digits of a SHA-256
//! over a canonical byte rendering of the tuple.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use epx_core::credits::TaxCreditSettings;
use epx_core::policy::SensitivityKnobs;
use epx_core::system::{Availability, SystemSpec, Vintage};

struct Canon(Sha256);

impl Canon {
    fn s(&mut self, v: &str) {
        self.0.update((v.len() as u64).to_le_bytes());
        self.0.update(v.as_bytes());
    }
    fn f(&mut self, v: f64) {
        self.0.update(v.to_bits().to_le_bytes());
    }
    fn u(&mut self, v: u64) {
        self.0.update(v.to_le_bytes());
    }
}

/// Content hash of everything the pre-pass depends on.
pub fn prepass_key(
    spec: &SystemSpec,
    credits: &TaxCreditSettings,
    knobs: &SensitivityKnobs,
) -> String {
    let mut c = Canon(Sha256::new());
    for p in &spec.periods {
        c.s(&p.label);
        c.u(p.calendar_anchor as u64);
        c.u(p.years_represented as u64);
    }
    for w in &spec.time.weights {
        c.f(*w);
    }
    for b in &spec.time.block_starts {
        c.u(*b as u64);
    }
    for f in &spec.fuels {
        c.s(&f.id);
        c.f(f.emission_factor);
        c.u(f.is_hydrogen as u64);
        for (p, v) in &f.price_by_period {
            c.s(p);
            c.f(*v);
        }
    }
    for z in &spec.zones {
        c.s(&z.id);
        for d in &z.demand {
            c.f(*d);
        }
        for (p, v) in &z.h2_demand {
            c.s(p);
            c.f(*v);
        }
        for ((tech, p), v) in &z.build_limits {
            c.s(tech.name());
            c.s(p);
            c.f(*v);
        }
    }
    for g in &spec.clusters {
        c.s(&g.id);
        c.s(&g.zone);
        c.s(g.tech_class.name());
        match &g.vintage {
            Vintage::Existing => c.s("existing"),
            Vintage::NewBuild { first_available } => {
                c.s("new");
                c.s(first_available);
            }
        }
        c.f(g.capacity_mw);
        for (p, v) in &g.max_new_by_period {
            c.s(p);
            c.f(*v);
        }
        for f in &g.allowed_fuels {
            c.s(f);
            c.f(g.heat_rates.get(f).copied().unwrap_or(0.0));
        }
        c.f(g.capture_rate);
        c.f(g.fixed_om);
        c.f(g.var_om);
        c.f(g.annuitized_capex);
        c.s(g.planned_retirement.as_deref().unwrap_or(""));
        match &g.availability {
            Availability::Constant(a) => c.f(*a),
            Availability::Profile(p) => {
                for a in p {
                    c.f(*a);
                }
            }
        }
        for (parent, ratio) in &g.retrofit_parents {
            c.s(parent);
            c.f(*ratio);
        }
        c.u(g.asset_life_years as u64);
    }
    for s in &spec.storage {
        c.s(&s.id);
        c.s(&s.zone);
        c.f(s.power_capacity_mw);
        c.f(s.energy_capacity_mwh);
        c.f(s.round_trip_efficiency);
        c.f(s.fixed_om);
        c.f(s.var_om);
        c.f(s.annuitized_capex);
        for (p, v) in &s.max_new_by_period {
            c.s(p);
            c.f(*v);
        }
        c.f(s.duration_hours);
    }
    for l in &spec.lines {
        c.s(&l.id);
        c.s(&l.from_zone);
        c.s(&l.to_zone);
        c.f(l.capacity_mw);
        c.f(l.max_expansion_mw);
        c.f(l.expansion_cost);
        c.f(l.loss_fraction);
    }
    c.f(spec.baseline_2022_emissions_mt);
    c.f(spec.voll);

    c.f(credits.ccs_credit_per_ton);
    c.u(credits.ccs_credit_years as u64);
    c.u(credits.ccs_asset_life_years as u64);
    c.f(credits.discount_rate);
    c.f(credits.ptc_per_mwh);
    for t in &credits.ptc_techs {
        c.s(t.name());
    }
    c.f(credits.itc_fraction);
    for t in &credits.itc_techs {
        c.s(t.name());
    }
    c.u(credits.nuclear_45u_through_year as u64);

    c.s(&knobs.fuel_price_set);
    c.s(&knobs.build_limit_set);
    c.u(knobs.nuclear_no_retirement as u64);

    let digest = c.0.finalize();
    let mut hex = String::with_capacity(16);
    for b in &digest[..8] {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

pub fn cache_path(cache_dir: &Path, key: &str) -> PathBuf {
    cache_dir.join(format!("retire-{key}.csv"))
}

pub fn load(path: &Path) -> Result<Option<BTreeMap<String, String>>> {
    if !path.exists() {
        return Ok(None);
    }
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("opening cache {}", path.display()))?;
    let mut out = BTreeMap::new();
    for row in reader.records() {
        let row = row?;
        out.insert(row[0].to_string(), row[1].to_string());
    }
    Ok(Some(out))
}

pub fn store(path: &Path, retirements: &BTreeMap<String, String>) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut s = String::from("cluster,period\n");
    for (cluster, period) in retirements {
        s += &format!("{cluster},{period}\n");
    }
    std::fs::write(path, s).with_context(|| format!("writing cache {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_is_stable_and_sensitive() {
        let spec = epx_core::demo::two_zone_system();
        let credits = TaxCreditSettings::default();
        let knobs = SensitivityKnobs::default();
        let a = prepass_key(&spec, &credits, &knobs);
        let b = prepass_key(&spec, &credits, &knobs);
        assert_eq!(a, b);

        let mut knobs2 = knobs.clone();
        knobs2.fuel_price_set = "high".into();
        assert_ne!(a, prepass_key(&spec, &credits, &knobs2));

        let mut spec2 = spec.clone();
        spec2.voll = 9_999.0;
        assert_ne!(a, prepass_key(&spec2, &credits, &knobs));
    }

    #[test]
    fn round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = cache_path(dir.path(), "abc");
        let mut map = BTreeMap::new();
        map.insert("coal-1".to_string(), "2030".to_string());
        store(&path, &map).unwrap();
        assert_eq!(load(&path).unwrap(), Some(map));
        assert_eq!(load(&cache_path(dir.path(), "nope")).unwrap(), None);
    }
}
