//! Tabular artifacts: mode products, pole bounds, associativity convergence
//! curves and the counterexample values.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};
use voxfact::{CheckReport, Error, GradedVector, Preset, Result};

use crate::suite::SuiteReport;

/// A table with a fixed column order.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!("unknown format `{other}` (expected json or csv)"))),
        }
    }
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }

    /// Rows as objects; keys keep the column order.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    for (h, v) in self.header.iter().zip(r) {
                        m.insert(h.clone(), Value::String(v.clone()));
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(serde_json::to_string_pretty(&self.to_json())? + "\n"),
        }
    }
}

/// Nonzero `a₍ₙ₎b` for nonvacuum basis states with `deg a + deg b ≤ max_degree`
/// and result degree at most `max_degree`.
pub fn mode_table(preset: &Preset, max_degree: i64) -> Result<Table> {
    let mut t = Table::new("modes", &["a", "n", "b", "result"]);
    let basis = preset.basis_up_to(1, max_degree);
    for a in &basis {
        for b in &basis {
            let s = a.degree() + b.degree();
            if s > max_degree {
                continue;
            }
            let (av, bv) = (GradedVector::basis(a.clone()), GradedVector::basis(b.clone()));
            for n in (s - max_degree - 1)..s {
                let r = preset.state_mode(&av, n, &bv)?;
                if !r.is_zero() {
                    t.push(vec![a.to_string(), n.to_string(), b.to_string(), r.to_string()]);
                }
            }
        }
    }
    Ok(t)
}

/// Pole bounds of basis pairs with `deg a + deg b ≤ max_degree`, beside the
/// bound `deg a + deg b + 1`.
pub fn pole_table(preset: &Preset, max_degree: i64) -> Result<Table> {
    let mut t = Table::new("poles", &["a", "b", "pole_bound", "limit"]);
    let basis = preset.basis_up_to(0, max_degree);
    for a in &basis {
        for b in &basis {
            let s = a.degree() + b.degree();
            if s > max_degree {
                continue;
            }
            let n = preset.pole_bound(&GradedVector::basis(a.clone()), &GradedVector::basis(b.clone()))?;
            t.push(vec![a.to_string(), b.to_string(), n.to_string(), (s + 1).to_string()]);
        }
    }
    Ok(t)
}

/// Convergence curves recorded by associativity reports.
pub fn curve_table<'a>(reports: impl IntoIterator<Item = (&'a str, &'a CheckReport)>) -> Table {
    let mut t = Table::new("curves", &["label", "terms", "err"]);
    for (label, r) in reports {
        if let Some(Value::Array(points)) = r.truncation.get("curve") {
            for p in points {
                let terms = p.get("terms").map(Value::to_string).unwrap_or_default();
                let err = p.get("err").and_then(Value::as_f64).map(|e| format!("{e:.6e}")).unwrap_or_default();
                t.push(vec![label.to_string(), terms, err]);
            }
        }
    }
    t
}

/// The annulus and disc values of counterexample reports.
pub fn counterexample_table<'a>(reports: impl IntoIterator<Item = &'a CheckReport>) -> Table {
    let mut t = Table::new("counterexample", &["region", "value"]);
    for r in reports {
        for region in ["annulus", "disc"] {
            if let Some(Value::String(v)) = r.witness.get(region) {
                t.push(vec![region.to_string(), v.clone()]);
            }
        }
    }
    t
}

/// All tables for a suite run. Mode and pole tables cover degree ≤ 3 and are
/// empty when the report has no entries.
pub fn suite_tables(report: &SuiteReport) -> Result<Vec<Table>> {
    let preset = Preset::from_spec(&report.preset)?;
    let reports = || report.entries.iter().filter_map(|e| e.report.as_ref().map(|r| (e.label.as_str(), r)));
    let (modes, poles) = if report.entries.is_empty() {
        (Table::new("modes", &["a", "n", "b", "result"]), Table::new("poles", &["a", "b", "pole_bound", "limit"]))
    } else {
        (mode_table(&preset, 3)?, pole_table(&preset, 3)?)
    };
    Ok(vec![
        modes,
        poles,
        curve_table(reports().filter(|(_, r)| r.axiom == "associativity")),
        counterexample_table(reports().map(|(_, r)| r).filter(|r| r.axiom == "counterexample")),
    ])
}

/// Writes each table to `dir/<name>.<csv|json>`.
pub fn emit_tables(tables: &[Table], dir: &Path, format: Format) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    for t in tables {
        let mut f = std::fs::File::create(dir.join(format!("{}.{ext}", t.name)))?;
        f.write_all(t.render(format)?.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new("curves", &["label", "terms", "err"]);
        assert_eq!(t.to_csv().unwrap(), "label,terms,err\n");
        assert_eq!(t.to_json(), Value::Array(vec![]));
    }

    #[test]
    fn free_boson_mode_table_rows() {
        let t = mode_table(&Preset::heisenberg(), 3).unwrap();
        assert_eq!(t.rows.len(), 12);
        assert!(t.rows.contains(&vec!["a-1|0>".into(), "1".into(), "a-1|0>".into(), "|0>".into()]));
    }
}
