//! CSV artifacts: `#` comment header, comma separator, numbers with ten
//! significant digits.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

/// Formats `v` with ten significant digits, fixed notation for moderate
/// magnitudes and exponent notation otherwise; trailing zeros are dropped.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent formatting");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" { "0".into() } else { t.to_string() }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    comments: Vec<String>,
    columns: Vec<String>,
    rows: Vec<String>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self {
            comments: Vec::new(),
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    /// Adds a `key = value` comment line.
    pub fn echo(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.comment(format!("{key} = {value}"))
    }

    pub fn push(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns.len(), "row width must match the header");
        let cells: Vec<String> = values.iter().map(|&v| format_number(v)).collect();
        self.rows.push(cells.join(","));
    }

    /// Adds a row of preformatted cells.
    pub fn push_cells<S: AsRef<str>>(&mut self, cells: &[S]) {
        assert_eq!(cells.len(), self.columns.len(), "row width must match the header");
        let cells: Vec<&str> = cells.iter().map(|c| c.as_ref()).collect();
        self.rows.push(cells.join(","));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{r}");
        }
        out
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn write_to(&self, path: Option<&Path>) -> std::io::Result<()> {
        let text = self.render();
        match path {
            Some(p) => std::fs::write(p, text),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()
            }
        }
    }
}

/// Parses the numeric body of a table written by [`CsvTable::render`],
/// returning the header columns and rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or("missing CSV header")?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|e| format!("row {}: '{c}': {e}", i + 1)))
            .collect::<Result<Vec<f64>, String>>()?;
        if row.len() != columns.len() {
            return Err(format!("row {} has {} cells, expected {}", i + 1, row.len(), columns.len()));
        }
        rows.push(row);
    }
    Ok((columns, rows))
}
