//! External solver adapter.
//!
//! The stage LP is written in the standard interchange format, the external
//! executable is invoked as `<solver> <input.mps> <output.sol>`, and the
//! solution file is parsed back. Expected solution format, one item per
//! line: a status word (`optimal`, `infeasible`, `unbounded`), the
//! objective value, then `<variable> <value>` pairs; optional
//! `dual <row> <value>` lines carry row duals. Missing variables default to
//! zero. `tools/scipy_solve.py` in this repository implements the contract.
//!
//! The executable comes from `--solver external:<path>` or the
//! `EPX_EXTERNAL_SOLVER` environment variable.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;

use epx_core::driver::SolveStage;
use epx_core::lp::LinearProgram;
use epx_core::mps;
use epx_core::simplex::{LpSolution, SolveError, Status};

pub const ENV_VAR: &str = "EPX_EXTERNAL_SOLVER";

#[derive(Debug, Clone)]
pub struct ExternalSolver {
    pub exe: PathBuf,
}

impl ExternalSolver {
    pub fn from_env() -> Option<ExternalSolver> {
        std::env::var_os(ENV_VAR).map(|exe| ExternalSolver { exe: exe.into() })
    }
}

fn fail(msg: String) -> SolveError {
    SolveError::Numerical(msg)
}

impl SolveStage for ExternalSolver {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution, SolveError> {
        let dir = tempfile_dir().map_err(fail)?;
        let in_path = dir.join("model.mps");
        let out_path = dir.join("model.sol");
        std::fs::write(&in_path, mps::write_standard_format(lp))
            .map_err(|e| fail(format!("writing {}: {e}", in_path.display())))?;
        let status = Command::new(&self.exe)
            .arg(&in_path)
            .arg(&out_path)
            .status()
            .map_err(|e| fail(format!("spawning {}: {e}", self.exe.display())))?;
        if !status.success() {
            return Err(fail(format!(
                "external solver exited with status {status}"
            )));
        }
        let text = std::fs::read_to_string(&out_path)
            .map_err(|e| fail(format!("reading {}: {e}", out_path.display())))?;
        let _ = std::fs::remove_dir_all(&dir);
        parse_solution(lp, &text)
    }
}

fn tempfile_dir() -> Result<PathBuf, String> {
    let base = std::env::temp_dir();
    for i in 0..10_000u32 {
        let candidate = base.join(format!("epx-solve-{}-{i}", std::process::id()));
        if std::fs::create_dir(&candidate).is_ok() {
            return Ok(candidate);
        }
    }
    Err("could not create a scratch directory".into())
}

fn parse_solution(lp: &LinearProgram, text: &str) -> Result<LpSolution, SolveError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let status_word = lines
        .next()
        .ok_or_else(|| fail("empty solution file".into()))?
        .trim()
        .to_ascii_lowercase();
    let status = match status_word.as_str() {
        "optimal" => Status::Optimal,
        "infeasible" => Status::Infeasible,
        "unbounded" => Status::Unbounded,
        other => return Err(fail(format!("unknown solution status `{other}`"))),
    };
    let objective: f64 = lines
        .next()
        .ok_or_else(|| fail("solution file missing objective".into()))?
        .trim()
        .parse()
        .map_err(|e| fail(format!("bad objective: {e}")))?;

    // variable and row names as the MPS writer sanitised them
    let var_ids: BTreeMap<String, usize> = lp
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (sanitize(&v.name), i))
        .collect();
    let row_ids: BTreeMap<String, usize> = lp
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| (sanitize(&r.name), i))
        .collect();

    let mut values = vec![0.0; lp.num_vars()];
    let mut duals = vec![0.0; lp.num_rows()];
    for line in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["dual", row, value] => {
                if let Some(r) = row_ids.get(*row) {
                    duals[*r] = value
                        .parse()
                        .map_err(|e| fail(format!("bad dual value: {e}")))?;
                }
            }
            [var, value] => {
                if let Some(v) = var_ids.get(*var) {
                    values[*v] = value
                        .parse()
                        .map_err(|e| fail(format!("bad value for {var}: {e}")))?;
                }
            }
            _ => return Err(fail(format!("malformed solution line `{line}`"))),
        }
    }
    Ok(LpSolution {
        status,
        values,
        duals,
        objective,
        iterations: 0,
    })
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use epx_core::lp::Sense;

    #[test]
    fn solution_parsing() {
        let mut lp = LinearProgram::new("t");
        let x = lp.add_var("x", 0.0, 10.0, 1.0);
        lp.add_var("y", 0.0, 10.0, 0.0);
        lp.add_row("r", Sense::Ge, 1.0, vec![(x, 1.0)]);
        let sol = parse_solution(&lp, "optimal\n1.5\nx 1.5\ndual r 1\n").unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert_eq!(sol.values, vec![1.5, 0.0]);
        assert_eq!(sol.duals, vec![1.0]);
        assert!(parse_solution(&lp, "sideways\n0\n").is_err());
    }
}
