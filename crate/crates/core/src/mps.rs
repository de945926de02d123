//! Free-form MPS reader and writer.
//!
//! The written document uses sections NAME, ROWS, COLUMNS, RHS, BOUNDS and
//! ENDATA with whitespace-separated fields. Numbers are printed with Rust's
//! shortest round-trip formatting, so `read(write(lp))` reproduces every
//! coefficient bit for bit. A constant objective offset is encoded as a
//! negated RHS entry on the objective row, the convention external solvers
//! use.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::lp::{LinearProgram, Sense, VarId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

const OBJECTIVE_ROW: &str = "COST";

/// Renders a program as free-form MPS.
pub fn write_standard_format(lp: &LinearProgram) -> String {
    let mut out = String::new();
    out.push_str(&format!("NAME {}\n", sanitize(&lp.name)));
    out.push_str("ROWS\n");
    out.push_str(&format!(" N {OBJECTIVE_ROW}\n"));
    for row in &lp.rows {
        let tag = match row.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        out.push_str(&format!(" {tag} {}\n", sanitize(&row.name)));
    }
    // column-major entries: objective first, then per-row coefficients
    let mut col_entries: Vec<Vec<(String, f64)>> = Vec::new();
    col_entries.resize(lp.num_vars(), Vec::new());
    for (j, v) in lp.variables.iter().enumerate() {
        if v.objective != 0.0 {
            col_entries[j].push((OBJECTIVE_ROW.to_string(), v.objective));
        }
    }
    for row in &lp.rows {
        for (v, c) in &row.coeffs {
            col_entries[v.0].push((sanitize(&row.name), *c));
        }
    }
    out.push_str("COLUMNS\n");
    for (j, entries) in col_entries.iter().enumerate() {
        let name = sanitize(&lp.variables[j].name);
        for (row, c) in entries {
            out.push_str(&format!("    {name} {row} {}\n", fmt(*c)));
        }
        if entries.is_empty() {
            // a column with no coefficients still has to exist so bounds
            // can reference it
            out.push_str(&format!("    {name} {OBJECTIVE_ROW} 0\n"));
        }
    }
    out.push_str("RHS\n");
    if lp.objective_offset != 0.0 {
        out.push_str(&format!(
            "    RHS1 {OBJECTIVE_ROW} {}\n",
            fmt(-lp.objective_offset)
        ));
    }
    for row in &lp.rows {
        if row.rhs != 0.0 {
            out.push_str(&format!("    RHS1 {} {}\n", sanitize(&row.name), fmt(row.rhs)));
        }
    }
    out.push_str("BOUNDS\n");
    for v in &lp.variables {
        let name = sanitize(&v.name);
        let (lo, up) = (v.lower, v.upper);
        if lo == up {
            out.push_str(&format!(" FX BND1 {name} {}\n", fmt(lo)));
        } else if lo == f64::NEG_INFINITY && up == f64::INFINITY {
            out.push_str(&format!(" FR BND1 {name}\n"));
        } else {
            if lo == f64::NEG_INFINITY {
                out.push_str(&format!(" MI BND1 {name}\n"));
            } else if lo != 0.0 {
                out.push_str(&format!(" LO BND1 {name} {}\n", fmt(lo)));
            }
            if up != f64::INFINITY {
                out.push_str(&format!(" UP BND1 {name} {}\n", fmt(up)));
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

/// Parses a free-form MPS document written by [`write_standard_format`] or a
/// compatible tool. RANGES and integrality markers are rejected.
pub fn read_standard_format(text: &str) -> Result<LinearProgram, ParseError> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        Rows,
        Columns,
        Rhs,
        Bounds,
        Done,
    }

    let mut lp = LinearProgram::new("");
    let mut section = Section::None;
    let mut obj_row: Option<String> = None;
    // row name -> (sense, index). The objective row has no index.
    let mut row_ids: BTreeMap<String, Option<usize>> = BTreeMap::new();
    let mut row_senses: Vec<Sense> = Vec::new();
    let mut row_names: Vec<String> = Vec::new();
    let mut row_coeffs: Vec<Vec<(VarId, f64)>> = Vec::new();
    let mut row_rhs: Vec<f64> = Vec::new();
    let mut var_ids: BTreeMap<String, VarId> = BTreeMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.trim_end();
        if content.is_empty() || content.starts_with('*') {
            continue;
        }
        let indented = content.starts_with(' ') || content.starts_with('\t');
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if !indented {
            match fields[0] {
                "NAME" => {
                    lp.name = fields.get(1).unwrap_or(&"").to_string();
                }
                "ROWS" => section = Section::Rows,
                "COLUMNS" => section = Section::Columns,
                "RHS" => section = Section::Rhs,
                "RANGES" => return Err(err(line, "RANGES section is not supported")),
                "BOUNDS" => section = Section::Bounds,
                "OBJSENSE" | "OBJSENSE MIN" => {}
                "ENDATA" => {
                    section = Section::Done;
                    break;
                }
                other => return Err(err(line, format!("unknown section `{other}`"))),
            }
            continue;
        }
        match section {
            Section::Rows => {
                if fields.len() != 2 {
                    return Err(err(line, "ROWS entries need `<type> <name>`"));
                }
                let name = fields[1].to_string();
                match fields[0] {
                    "N" => {
                        if obj_row.is_some() {
                            return Err(err(line, "multiple objective rows"));
                        }
                        row_ids.insert(name.clone(), None);
                        obj_row = Some(name);
                    }
                    tag @ ("L" | "G" | "E") => {
                        let sense = match tag {
                            "L" => Sense::Le,
                            "G" => Sense::Ge,
                            _ => Sense::Eq,
                        };
                        if row_ids.insert(name.clone(), Some(row_senses.len())).is_some() {
                            return Err(err(line, format!("duplicate row `{name}`")));
                        }
                        row_senses.push(sense);
                        row_names.push(name);
                        row_coeffs.push(Vec::new());
                        row_rhs.push(0.0);
                    }
                    other => return Err(err(line, format!("unknown row type `{other}`"))),
                }
            }
            Section::Columns => {
                // pairs of (row, value) after the column name
                if fields.len() < 3 || fields.len() % 2 == 0 {
                    return Err(err(line, "COLUMNS entries need `<col> (<row> <value>)+`"));
                }
                if fields[1] == "'MARKER'" || fields.contains(&"'INTORG'") {
                    return Err(err(line, "integer markers are not supported"));
                }
                let col = fields[0];
                let var = *var_ids.entry(col.to_string()).or_insert_with(|| {
                    lp.add_var(col.to_string(), 0.0, f64::INFINITY, 0.0)
                });
                for pair in fields[1..].chunks(2) {
                    let value: f64 = pair[1]
                        .parse()
                        .map_err(|_| err(line, format!("bad number `{}`", pair[1])))?;
                    match row_ids.get(pair[0]) {
                        Some(None) => lp.variables[var.0].objective += value,
                        Some(Some(r)) => row_coeffs[*r].push((var, value)),
                        None => {
                            return Err(err(line, format!("unknown row `{}`", pair[0])));
                        }
                    }
                }
            }
            Section::Rhs => {
                if fields.len() < 3 || fields.len() % 2 == 0 {
                    return Err(err(line, "RHS entries need `<set> (<row> <value>)+`"));
                }
                for pair in fields[1..].chunks(2) {
                    let value: f64 = pair[1]
                        .parse()
                        .map_err(|_| err(line, format!("bad number `{}`", pair[1])))?;
                    match row_ids.get(pair[0]) {
                        Some(None) => lp.objective_offset = -value,
                        Some(Some(r)) => row_rhs[*r] = value,
                        None => {
                            return Err(err(line, format!("unknown row `{}`", pair[0])));
                        }
                    }
                }
            }
            Section::Bounds => {
                let kind = fields[0];
                let needs_value = matches!(kind, "LO" | "UP" | "FX");
                let expect = if needs_value { 4 } else { 3 };
                if fields.len() != expect {
                    return Err(err(line, format!("malformed {kind} bound")));
                }
                let var = *var_ids
                    .get(fields[2])
                    .ok_or_else(|| err(line, format!("unknown column `{}`", fields[2])))?;
                let value = if needs_value {
                    fields[3]
                        .parse::<f64>()
                        .map_err(|_| err(line, format!("bad number `{}`", fields[3])))?
                } else {
                    0.0
                };
                let v = &mut lp.variables[var.0];
                match kind {
                    "LO" => v.lower = value,
                    "UP" => v.upper = value,
                    "FX" => {
                        v.lower = value;
                        v.upper = value;
                    }
                    "FR" => {
                        v.lower = f64::NEG_INFINITY;
                        v.upper = f64::INFINITY;
                    }
                    "MI" => v.lower = f64::NEG_INFINITY,
                    "PL" => v.upper = f64::INFINITY,
                    other => return Err(err(line, format!("unknown bound type `{other}`"))),
                }
            }
            Section::None | Section::Done => {
                return Err(err(line, "data outside of any section"));
            }
        }
    }
    if section != Section::Done {
        return Err(err(text.lines().count(), "missing ENDATA"));
    }
    for (i, coeffs) in row_coeffs.into_iter().enumerate() {
        lp.add_row(row_names[i].clone(), row_senses[i], row_rhs[i], coeffs);
    }
    // synthetic zero objective entries written for empty columns are harmless
    Ok(lp)
}

fn fmt(x: f64) -> String {
    if x == f64::INFINITY {
        "1e308".to_string()
    } else {
        x.to_string()
    }
}

fn sanitize(name: &str) -> String {
    if name.is_empty() {
        return "_".to_string();
    }
    name.chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn empty_program_round_trips() {
        let lp = LinearProgram::new("empty");
        let text = write_standard_format(&lp);
        let back = read_standard_format(&text).unwrap();
        assert_eq!(back.num_vars(), 0);
        assert_eq!(back.num_rows(), 0);
    }

    #[test]
    fn round_trip_preserves_everything() {
        let mut lp = LinearProgram::new("demo lp");
        let x = lp.add_var("x", 0.25, 3.5, 1.125);
        let y = lp.add_var("y[a]", f64::NEG_INFINITY, f64::INFINITY, -0.1);
        let z = lp.add_var("z", f64::NEG_INFINITY, 2.0, 0.0);
        lp.add_row("r1", Sense::Le, 10.0, vec![(x, 1.0), (y, 2.0)]);
        lp.add_row("r2", Sense::Eq, -1.5, vec![(y, -1.0), (z, 0.3333333333333333)]);
        lp.add_row("r3", Sense::Ge, 0.0, vec![(x, 7.25)]);
        lp.objective_offset = 42.625;

        let text = write_standard_format(&lp);
        let back = read_standard_format(&text).unwrap();
        assert_eq!(back.num_vars(), 3);
        assert_eq!(back.num_rows(), 3);
        assert_eq!(back.objective_offset, lp.objective_offset);
        for (a, b) in lp.variables.iter().zip(&back.variables) {
            assert_eq!(a.lower, b.lower);
            assert_eq!(a.upper, b.upper);
            assert_eq!(a.objective, b.objective);
        }
        for (a, b) in lp.rows.iter().zip(&back.rows) {
            assert_eq!(a.sense, b.sense);
            assert_eq!(a.rhs, b.rhs);
            assert_eq!(a.coeffs, b.coeffs);
        }
    }

    #[test]
    fn malformed_row_section_names_the_line() {
        let text = "NAME t\nROWS\n N COST\n L\nENDATA\n";
        let e = read_standard_format(text).unwrap_err();
        assert_eq!(e.line, 4);
    }
}
