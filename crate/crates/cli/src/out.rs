//! Deterministic text emission. All numbers are printed with 17 significant
//! digits, which round-trips IEEE doubles, so equal runs give equal bytes.

use std::io::Write;

pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv(fields: &[String]) -> String {
    fields.join(",")
}

/// Writes to the path when given, to stdout otherwise.
pub fn write_text(path: Option<&str>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}
