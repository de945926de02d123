//! Time aggregation: reduce a system's operating hours to representative
//! weeks.
//!
//! Input systems carry their own weighted hour structure. `weeks:<n>` keeps
//! the structure as-is when it already has at most `n` blocks; otherwise all
//! blocks must be whole weeks (168 hours) and a demand-stratified subset is
//! selected: blocks are ranked by mean system demand and `n` evenly spaced
//! ranks are kept, so the minimum- and maximum-demand weeks always survive.
//! Weights are rescaled uniformly to keep the annual total at 8760.

use anyhow::{bail, Result};
use epx_core::system::{Availability, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoursOption {
    Full,
    Weeks(usize),
}

impl HoursOption {
    pub fn parse(s: &str) -> Result<HoursOption> {
        if s == "full" {
            return Ok(HoursOption::Full);
        }
        if let Some(n) = s.strip_prefix("weeks:") {
            let n: usize = n.parse()?;
            if n == 0 {
                bail!("weeks:<n> needs n >= 1");
            }
            return Ok(HoursOption::Weeks(n));
        }
        bail!("--hours accepts `full` or `weeks:<n>`, got `{s}`");
    }
}

/// Applies the hours option to a system spec.
pub fn apply_hours(spec: SystemSpec, option: HoursOption) -> Result<SystemSpec> {
    match option {
        HoursOption::Full => Ok(spec),
        HoursOption::Weeks(n) => {
            if spec.time.blocks().len() <= n {
                return Ok(spec);
            }
            aggregate_weeks(spec, n)
        }
    }
}

fn aggregate_weeks(spec: SystemSpec, n: usize) -> Result<SystemSpec> {
    let blocks = spec.time.blocks();
    if blocks.iter().any(|(s, e)| e - s != 168) {
        bail!(
            "weeks aggregation needs whole-week blocks of 168 hours; \
             this system has blocks of other lengths"
        );
    }
    // rank blocks by mean total demand
    let mut ranked: Vec<(usize, f64)> = blocks
        .iter()
        .enumerate()
        .map(|(b, (s, e))| {
            let mut total = 0.0;
            for z in &spec.zones {
                for t in *s..*e {
                    total += z.demand[t];
                }
            }
            (b, total)
        })
        .collect();
    ranked.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    // evenly spaced ranks, always including the extremes
    let m = ranked.len();
    let mut chosen: Vec<usize> = (0..n)
        .map(|i| ranked[i * (m - 1) / (n.max(2) - 1).max(1)].0)
        .collect();
    chosen.sort_unstable();
    chosen.dedup();

    let keep_hours: Vec<(usize, usize)> = chosen.iter().map(|&b| blocks[b]).collect();
    let kept_weight: f64 = keep_hours
        .iter()
        .flat_map(|(s, e)| spec.time.weights[*s..*e].iter())
        .sum();
    let scale = epx_core::system::ANNUAL_HOURS / kept_weight;

    let select = |v: &[f64]| -> Vec<f64> {
        keep_hours
            .iter()
            .flat_map(|(s, e)| v[*s..*e].iter().copied())
            .collect()
    };

    let mut out = spec.clone();
    out.time.weights = keep_hours
        .iter()
        .flat_map(|(s, e)| spec.time.weights[*s..*e].iter().map(|w| w * scale))
        .collect();
    out.time.block_starts = (0..chosen.len()).map(|b| b * 168).collect();
    for (zi, z) in out.zones.iter_mut().enumerate() {
        z.demand = select(&spec.zones[zi].demand);
    }
    for (ci, c) in out.clusters.iter_mut().enumerate() {
        if let Availability::Profile(p) = &spec.clusters[ci].availability {
            c.availability = Availability::Profile(select(p));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_options() {
        assert_eq!(HoursOption::parse("full").unwrap(), HoursOption::Full);
        assert_eq!(
            HoursOption::parse("weeks:8").unwrap(),
            HoursOption::Weeks(8)
        );
        assert!(HoursOption::parse("weeks:0").is_err());
        assert!(HoursOption::parse("days:3").is_err());
    }

    #[test]
    fn small_systems_pass_through() {
        let spec = epx_core::demo::two_zone_system();
        let out = apply_hours(spec.clone(), HoursOption::Weeks(8)).unwrap();
        assert_eq!(spec, out);
    }

    #[test]
    fn aggregation_keeps_weight_and_extremes() {
        // build a 6-week uniform system from the demo profile
        let mut spec = epx_core::demo::two_zone_system();
        let hours = 6 * 168;
        spec.time = epx_core::system::TimeStructure::uniform_blocks(6, 168);
        for (zi, z) in spec.zones.iter_mut().enumerate() {
            let base = if zi == 0 { 1000.0 } else { 300.0 };
            z.demand = (0..hours)
                .map(|t| base * (1.0 + 0.1 * (t / 168) as f64))
                .collect();
        }
        for c in &mut spec.clusters {
            if let Availability::Profile(_) = c.availability {
                c.availability = Availability::Constant(0.5);
            }
        }
        let out = apply_hours(spec, HoursOption::Weeks(3)).unwrap();
        assert_eq!(out.time.blocks().len(), 3);
        assert!((out.time.total_weight() - 8760.0).abs() < 1e-6);
        // lowest- and highest-demand weeks survive: week 0 and week 5
        let d = &out.zones[0].demand;
        assert!((d[0] - 1000.0).abs() < 1e-9);
        assert!((d[2 * 168] - 1500.0).abs() < 1e-9);
    }
}
