//! Result-table export and re-import.
//!
//! `write_result` renders the core tables plus the retirement schedule into
//! a directory; identical results produce byte-identical files. The
//! re-import path parses the per-cluster, cost and emissions tables back
//! into a summary, which must reproduce the in-memory summary exactly —
//! floats are printed with shortest round-trip formatting.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use epx_core::driver::ScenarioResult;
use epx_core::report::{result_tables, Table};
use epx_core::system::ValidatedSystem;

pub fn write_tables(tables: &[Table], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for t in tables {
        std::fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv())
            .with_context(|| format!("writing table {}", t.name))?;
    }
    Ok(())
}

/// Writes every table for a scenario run plus the retirement schedule.
pub fn write_result(result: &ScenarioResult, system: &ValidatedSystem, dir: &Path) -> Result<()> {
    let tables = result_tables(result, system);
    write_tables(&tables, dir)?;
    let mut s = String::from("cluster,period\n");
    for (cluster, period) in &result.retirements {
        s += &format!("{cluster},{period}\n");
    }
    std::fs::write(dir.join("retirements.csv"), s)?;
    Ok(())
}

/// The exported numbers that identify a run, keyed for exact comparison.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSummary {
    /// (cluster, period) → [start, new, retired, rfit_in, rfit_out, end, cf]
    pub capacity: BTreeMap<(String, String), [f64; 7]>,
    /// (cluster, fuel, period) → [mwh, mmbtu, emissions]
    pub dispatch: BTreeMap<(String, String, String), [f64; 3]>,
    /// period → [capex, fixed, varom, fuel, credits, nse, tx, total, objective]
    pub costs: BTreeMap<String, [f64; 9]>,
    /// period → emissions tons
    pub emissions: BTreeMap<String, f64>,
}

/// Summary straight from an in-memory result.
pub fn summary_from_result(result: &ScenarioResult) -> RunSummary {
    let mut out = RunSummary::default();
    for stage in &result.stages {
        for (id, c) in &stage.clusters {
            out.capacity.insert(
                (id.clone(), stage.period.clone()),
                [
                    c.start_mw,
                    c.new_mw,
                    c.retired_mw,
                    c.retrofit_in_mw,
                    c.retrofit_out_mw,
                    c.end_mw,
                    c.capacity_factor,
                ],
            );
            for d in &c.dispatch {
                out.dispatch.insert(
                    (
                        id.clone(),
                        d.fuel.clone().unwrap_or_else(|| "-".into()),
                        stage.period.clone(),
                    ),
                    [d.mwh, d.mmbtu, d.emissions_t],
                );
            }
        }
        out.costs.insert(
            stage.period.clone(),
            [
                stage.costs.capex,
                stage.costs.fixed_om,
                stage.costs.variable_om,
                stage.costs.fuel,
                stage.costs.credits,
                stage.costs.nse,
                stage.costs.transmission,
                stage.costs.total,
                stage.objective,
            ],
        );
        out.emissions.insert(stage.period.clone(), stage.emissions_t);
    }
    out
}

fn read_csv(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        out.push(row.iter().map(|s| s.to_string()).collect());
    }
    Ok(out)
}

fn f(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .with_context(|| format!("parsing number `{s}`"))
}

/// Summary re-imported from an exported directory.
pub fn summary_from_dir(dir: &Path) -> Result<RunSummary> {
    let mut out = RunSummary::default();
    for row in read_csv(&dir.join("capacity_detail.csv"))? {
        out.capacity.insert(
            (row[0].clone(), row[1].clone()),
            [
                f(&row[2])?,
                f(&row[3])?,
                f(&row[4])?,
                f(&row[5])?,
                f(&row[6])?,
                f(&row[7])?,
                f(&row[8])?,
            ],
        );
    }
    for row in read_csv(&dir.join("dispatch_detail.csv"))? {
        out.dispatch.insert(
            (row[0].clone(), row[1].clone(), row[2].clone()),
            [f(&row[3])?, f(&row[4])?, f(&row[5])?],
        );
    }
    for row in read_csv(&dir.join("costs.csv"))? {
        out.costs.insert(
            row[0].clone(),
            [
                f(&row[1])?,
                f(&row[2])?,
                f(&row[3])?,
                f(&row[4])?,
                f(&row[5])?,
                f(&row[6])?,
                f(&row[7])?,
                f(&row[8])?,
                f(&row[9])?,
            ],
        );
    }
    for row in read_csv(&dir.join("emissions.csv"))? {
        out.emissions.insert(row[0].clone(), f(&row[1])?);
    }
    Ok(out)
}
