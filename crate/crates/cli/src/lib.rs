//! File formats, orchestration and the command-line interface for the
//! planning engine.
//!
//! The core crate is pure; everything that touches the filesystem or spawns
//! processes lives here: the system-directory loader, scenario files,
//! result-table export, the retirement-schedule cache, the external solver
//! adapter, and the subcommands.

pub mod cache;
pub mod commands;
pub mod external;
pub mod hours;
pub mod io;

use std::path::Path;

/// Directory-safe slug for scenario and sweep-point names.
pub fn slugify(name: &str) -> String {
    let mut out = String::new();
    let mut last_dash = true;
    for ch in name.chars() {
        let mapped: Option<char> = match ch {
            '₀' => Some('0'),
            '₁' => Some('1'),
            '₂' => Some('2'),
            '₃' => Some('3'),
            c if c.is_ascii_alphanumeric() => Some(c.to_ascii_lowercase()),
            _ => None,
        };
        match mapped {
            Some(c) => {
                out.push(c);
                last_dash = false;
            }
            None => {
                if !last_dash {
                    out.push('-');
                    last_dash = true;
                }
            }
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        out.push('x');
    }
    out
}

/// Writes the machine-readable error document next to the outputs.
pub fn write_error_doc(out_dir: &Path, code: i32, kind: &str, message: &str, details: &[String]) {
    let doc = serde_json::json!({
        "code": code,
        "kind": kind,
        "message": message,
        "details": details,
    });
    let _ = std::fs::create_dir_all(out_dir);
    let _ = std::fs::write(
        out_dir.join("error.json"),
        serde_json::to_string_pretty(&doc).unwrap_or_default(),
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs_are_directory_safe() {
        assert_eq!(slugify("Coal + New Gas"), "coal-new-gas");
        assert_eq!(slugify("CO₂ Cap"), "co2-cap");
        assert_eq!(slugify("CCS + H₂"), "ccs-h2");
        assert_eq!(slugify("No Regulations"), "no-regulations");
    }
}
