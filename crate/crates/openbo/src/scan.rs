//! Parameter-scan tables and their CSV serialization.
//!
//! Output format: a block of `#`-prefixed provenance lines (tool version,
//! subcommand, every parameter that influenced the numbers), one header row
//! with column names, then data rows with 17 significant digits so a
//! round-trip through text is bit-faithful for f64.

use crate::{Error, Result};
use std::io::Write;

pub struct ScanTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// (key, value) pairs echoed into the `#` header.
    pub provenance: Vec<(String, String)>,
}

impl ScanTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn tag(&mut self, key: &str, value: impl std::fmt::Display) {
        self.provenance.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "row with {} fields in a {}-column table",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        for (k, v) in &self.provenance {
            writeln!(w, "# {k} = {v}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_is_exact() {
        let mut t = ScanTable::new(&["g", "pz"]);
        t.tag("subcommand", "pz-scan");
        t.tag("theta", 1.5707963267948966);
        t.push(vec![0.1, -0.123456789012345678]).unwrap();
        t.push(vec![1.0 / 3.0, std::f64::consts::PI * 1e-7]).unwrap();
        let s = t.to_csv_string();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "# subcommand = pz-scan");
        assert!(lines.next().unwrap().starts_with("# theta = 1.57079632"));
        assert_eq!(lines.next().unwrap(), "g,pz");
        for (line, row) in lines.zip(&t.rows) {
            for (field, want) in line.split(',').zip(row) {
                let back: f64 = field.parse().unwrap();
                assert_eq!(back, *want, "field {field} lost precision");
            }
        }
    }

    #[test]
    fn row_width_checked() {
        let mut t = ScanTable::new(&["a", "b"]);
        assert!(t.push(vec![1.0]).is_err());
    }
}
