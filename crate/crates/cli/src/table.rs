//! Comma-separated result tables.
//!
//! ```text
//! # engine = mps
//! # scheme = feedback
//! t,pop1
//! 0,1
//! 0.05,0.951229424500714
//! ```
//!
//! Leading `#` lines carry `key = value` metadata, the first other line is
//! the column header, every following line one row of numbers. Numbers use
//! the shortest representation that parses back to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("{source_name}: line {line}: {message}")]
    Parse { source_name: String, line: usize, message: String },
    #[error("{0}: no header row")]
    NoHeader(String),
    #[error("column '{0}' not found")]
    MissingColumn(String),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { meta: Vec::new(), columns, rows: Vec::new() }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, TableError> {
        let j = self.column_index(name).ok_or_else(|| TableError::MissingColumn(name.to_string()))?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self, TableError> {
        let mut table = Table::default();
        let mut header = false;
        let fail =
            |line: usize, message: String| TableError::Parse { source_name: source_name.to_string(), line, message };
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if !header {
                if let Some(rest) = line.strip_prefix('#') {
                    if let Some((k, v)) = rest.split_once('=') {
                        table.meta.push((k.trim().to_string(), v.trim().to_string()));
                    }
                    continue;
                }
                if line.trim().is_empty() {
                    continue;
                }
                table.columns = line.split(',').map(|c| c.trim().to_string()).collect();
                header = true;
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|_| fail(n, format!("'{}' is not a number", c.trim()))))
                .collect::<Result<Vec<f64>, _>>()?;
            if row.len() != table.columns.len() {
                return Err(fail(n, format!("{} cells, header has {}", row.len(), table.columns.len())));
            }
            table.rows.push(row);
        }
        if !header {
            return Err(TableError::NoHeader(source_name.to_string()));
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self, crate::CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::CliError::io(path, e))?;
        Ok(Self::parse(&text, &path.display().to_string())?)
    }

    pub fn write(&self, path: &Path) -> Result<(), crate::CliError> {
        std::fs::write(path, self.to_csv()).map_err(|e| crate::CliError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = Table::new(vec!["t".into(), "pop1".into()]).with_meta("engine", "mps");
        t.push(vec![0.0, 1.0]);
        t.push(vec![0.05, (-0.05f64).exp()]);
        t.push(vec![0.1, 1e-300]);
        let text = t.to_csv();
        assert!(text.starts_with("# engine = mps\nt,pop1\n0,1\n"));
        assert_eq!(Table::parse(&text, "mem").unwrap(), t);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = Table::parse("# a = b\nt,x\n0,1\n1,oops\n", "f.csv").unwrap_err();
        assert_eq!(
            e,
            TableError::Parse { source_name: "f.csv".into(), line: 4, message: "'oops' is not a number".into() }
        );
        let e = Table::parse("t,x\n0,1,2\n", "f.csv").unwrap_err();
        assert!(matches!(e, TableError::Parse { line: 2, .. }));
        assert!(matches!(Table::parse("# only meta\n", "f.csv"), Err(TableError::NoHeader(_))));
    }
}
