//! Scenario documents: one structured-text (TOML) file per scenario.
//!
//! The schema mirrors the in-memory types: rule blocks carry predicate
//! fields, pathway lists and effective years; credit settings and
//! sensitivity knobs have their own blocks. The built-in library exports to
//! this same format, and those exports are the format's golden files.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use epx_core::policy::{builtin, Scenario};

/// Loads a scenario from a TOML document.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading scenario file {}", path.display()))?;
    parse_scenario(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario = toml::from_str(text)?;
    if scenario.name.is_empty() {
        return Err(anyhow!("scenario has an empty name"));
    }
    for (period, cap) in &scenario.co2_cap_mt {
        if *cap < 0.0 {
            return Err(anyhow!("negative CO₂ cap in period {period}"));
        }
    }
    Ok(scenario)
}

pub fn render_scenario(scenario: &Scenario) -> Result<String> {
    toml::to_string_pretty(scenario).context("serialising scenario")
}

pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<()> {
    std::fs::write(path, render_scenario(scenario)?)
        .with_context(|| format!("writing {}", path.display()))
}

/// Resolves a scenario argument: a path to a TOML document, or the exact
/// name of a built-in scenario.
pub fn resolve_scenario(arg: &str) -> Result<Scenario> {
    let path = Path::new(arg);
    if path.exists() {
        return load_scenario(path);
    }
    builtin::builtin_scenario(arg).ok_or_else(|| {
        anyhow!(
            "`{arg}` is neither a scenario file nor a built-in scenario; \
             built-ins are: {}",
            builtin::ALL_NAMES.join("; ")
        )
    })
}

/// Exports the whole built-in library as TOML files, returning the paths.
pub fn export_builtin_library(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for scenario in builtin::builtin_scenarios() {
        let path = dir.join(format!("{}.toml", crate::slugify(&scenario.name)));
        save_scenario(&scenario, &path)?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_scenarios_round_trip_through_toml() {
        for scenario in builtin::builtin_scenarios() {
            let text = render_scenario(&scenario).unwrap();
            let back = parse_scenario(&text)
                .unwrap_or_else(|e| panic!("{}: {e}\n{text}", scenario.name));
            assert_eq!(scenario, back, "round trip for {}", scenario.name);
        }
    }

    #[test]
    fn hand_written_scenario_parses() {
        let text = r#"
name = "custom"

[[rules]]
id = "my-rule"
effective_from_year = 2030

[rules.applies_to]
tech = ["NewNGCC", "NGCC_CCS"]
vintage = "new"

[[rules.pathways]]
name = "ccs"
constraints = [{ require_capture = 0.9 }]

[[rules.pathways]]
name = "cf"
constraints = [{ max_capacity_factor = 0.4 }]

[tax_credits]
ccs_credit_per_ton = 60.0

[sensitivity]
fuel_price_set = "high"
"#;
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.name, "custom");
        assert_eq!(s.rules.len(), 1);
        assert_eq!(s.rules[0].pathways.len(), 2);
        assert_eq!(s.tax_credits.ccs_credit_per_ton, 60.0);
        assert_eq!(s.sensitivity.fuel_price_set, "high");
    }
}
