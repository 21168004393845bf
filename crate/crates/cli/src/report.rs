//! CSV tables, gnuplot data files and the JSON summary.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{Map, Value};

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    /// Whitespace-separated columns with a commented header, for gnuplot.
    pub fn dat(&self) -> String {
        let mut s = format!("# {}\n", self.header.join(" "));
        for r in &self.rows {
            s.push_str(&r.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Shortest round-trip representation; NaN and infinities spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

pub fn cell<T: Display>(x: T) -> String {
    x.to_string()
}

/// Collects the output files and assertions of one run.
pub struct Report {
    dir: PathBuf,
    command: String,
    summary: Map<String, Value>,
    checks: Vec<(String, bool)>,
}

impl Report {
    pub fn new(dir: &Path, command: &str, seed: u64) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut summary = Map::new();
        summary.insert("command".into(), command.into());
        summary.insert("seed".into(), seed.into());
        Ok(Self { dir: dir.to_path_buf(), command: command.into(), summary, checks: Vec::new() })
    }

    pub fn table(&self, name: &str, t: &Table) -> Result<()> {
        self.write(&format!("{name}.csv"), &t.csv())
    }

    /// Writes both the CSV table and its gnuplot twin.
    pub fn plot_table(&self, name: &str, t: &Table) -> Result<()> {
        self.table(name, t)?;
        self.write(&format!("{name}.dat"), &t.dat())
    }

    pub fn write(&self, file: &str, text: &str) -> Result<()> {
        let p = self.dir.join(file);
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
    }

    pub fn set<V: Into<Value>>(&mut self, key: &str, v: V) {
        self.summary.insert(key.into(), v.into());
    }

    pub fn set_json<S: serde::Serialize>(&mut self, key: &str, v: &S) -> Result<()> {
        self.summary.insert(key.into(), serde_json::to_value(v)?);
        Ok(())
    }

    pub fn check(&mut self, name: &str, ok: bool) {
        self.checks.push((name.into(), ok));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }

    /// Writes summary.json and prints one line per assertion.
    pub fn finish(mut self) -> Result<bool> {
        let pass = self.passed();
        let checks: Map<String, Value> = self.checks.iter().map(|(k, v)| (k.clone(), Value::Bool(*v))).collect();
        self.summary.insert("checks".into(), Value::Object(checks));
        self.summary.insert("pass".into(), pass.into());
        let text = serde_json::to_string_pretty(&Value::Object(self.summary.clone()))? + "\n";
        self.write("summary.json", &text)?;
        for (name, ok) in &self.checks {
            println!("{} {}: {name}", if *ok { "ok  " } else { "FAIL" }, self.command);
        }
        Ok(pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_dat_layout() {
        let mut t = Table::new(&["n", "value"]);
        t.push(vec![cell(1), num(0.5)]);
        assert_eq!(t.csv(), "n,value\n1,0.5\n");
        assert_eq!(t.dat(), "# n value\n1 0.5\n");
    }

    #[test]
    fn special_values() {
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
    }
}
