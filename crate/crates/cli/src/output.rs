//! Result tables: aligned text for stdout, CSV, and a JSON mirror.
//!
//! Floats serialize with 17 significant digits so a CSV round-trips
//! losslessly; replay comparisons exclude the timestamp comment line.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Int(i64),
    UInt(u64),
    Float(f64),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn display(&self) -> String {
        match self {
            Cell::Float(v) => {
                if v.is_finite() {
                    format!("{v:.6}")
                } else {
                    v.to_string()
                }
            }
            other => other.csv(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Str(s) => serde_json::Value::String(s.clone()),
            Cell::Int(v) => serde_json::json!(v),
            Cell::UInt(v) => serde_json::json!(v),
            Cell::Float(v) => {
                if v.is_finite() {
                    serde_json::json!(v)
                } else {
                    serde_json::Value::String(v.to_string())
                }
            }
            Cell::Bool(b) => serde_json::json!(b),
        }
    }
}

/// 17 significant digits: lossless for f64.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// A named table with a fixed column order.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV with a timestamp comment header (excluded from replay
    /// comparisons) followed by the column header and rows.
    pub fn to_csv(&self, timestamp: bool) -> String {
        let mut out = String::new();
        if timestamp {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let _ = writeln!(out, "# timestamp_unix {secs}");
        }
        let _ = writeln!(out, "# table {}", self.name);
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (col, cell) in self.columns.iter().zip(row) {
                    obj.insert(col.clone(), cell.json());
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::json!({ "table": self.name, "rows": rows })
    }

    /// Column-aligned text for the terminal.
    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        let rendered: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| row.iter().map(Cell::display).collect())
            .collect();
        for row in &rendered {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "[{}]", self.name);
        let header: Vec<String> = self
            .columns
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        let _ = writeln!(out, "{}", header.join("  "));
        for row in rendered {
            let line: Vec<String> =
                row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            let _ = writeln!(out, "{}", line.join("  "));
        }
        out
    }

    /// Every `pass` column entry, if such a column exists.
    pub fn all_pass(&self) -> Option<bool> {
        let idx = self.columns.iter().position(|c| c == "pass")?;
        Some(self.rows.iter().all(|r| matches!(r[idx], Cell::Bool(true))))
    }
}

/// Serialize a set of tables in the requested format.
pub fn tables_to_string(tables: &[Table], format: &str, timestamp: bool) -> String {
    match format {
        "json" => {
            let vals: Vec<serde_json::Value> = tables.iter().map(Table::to_json).collect();
            let mut root = serde_json::Map::new();
            if timestamp {
                let secs = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                root.insert("timestamp_unix".into(), serde_json::json!(secs));
            }
            root.insert("tables".into(), serde_json::Value::Array(vals));
            serde_json::to_string_pretty(&serde_json::Value::Object(root)).unwrap() + "\n"
        }
        _ => {
            let mut out = String::new();
            for (i, t) in tables.iter().enumerate() {
                out.push_str(&t.to_csv(timestamp && i == 0));
            }
            out
        }
    }
}

/// Strip lines beginning with `# timestamp` (and the JSON timestamp field)
/// for byte comparisons between replays.
pub fn strip_timestamps(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("# timestamp") && !l.contains("\"timestamp_unix\""))
        .collect::<Vec<_>>()
        .join("\n")
}
