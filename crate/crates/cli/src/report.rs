use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Unit {
    #[serde(rename = "time")]
    Time,
    #[serde(rename = "time^2")]
    TimeSquared,
    #[serde(rename = "count")]
    Count,
    #[serde(rename = "probability")]
    Probability,
    #[serde(rename = "dimensionless")]
    Dimensionless,
    #[serde(rename = "label")]
    Label,
}

impl Unit {
    fn tag(self) -> &'static str {
        match self {
            Unit::Time => "time",
            Unit::TimeSquared => "time^2",
            Unit::Count => "count",
            Unit::Probability => "probability",
            Unit::Dimensionless => "dimensionless",
            Unit::Label => "label",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(u64),
    Num(f64),
    Text(String),
}

impl Value {
    pub fn human(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Num(x) => sig6(*x),
            Value::Text(s) => s.clone(),
        }
    }

    fn full(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Num(x) => format!("{x:?}"),
            Value::Text(s) => s.clone(),
        }
    }
}

/// Six significant digits, shortest form.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    rounded.to_string()
}

#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    pub parameter: String,
    pub value: Value,
    pub unit: Unit,
}

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: Unit,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[(&str, Unit)]) -> Self {
        Self {
            columns: columns
                .iter()
                .map(|(n, u)| Column {
                    name: n.to_string(),
                    unit: *u,
                })
                .collect(),
            rows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng: Option<&'static str>,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub results: Vec<Entry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &str, inputs: BTreeMap<String, serde_json::Value>) -> Self {
        Self {
            tool: "survmix",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            rng: None,
            inputs,
            results: Vec::new(),
            table: None,
            warnings: Vec::new(),
        }
    }

    pub fn num(&mut self, parameter: &str, value: f64, unit: Unit) {
        self.push(parameter, Value::Num(value), unit);
    }

    pub fn int(&mut self, parameter: &str, value: u64, unit: Unit) {
        self.push(parameter, Value::Int(value), unit);
    }

    pub fn text(&mut self, parameter: &str, value: impl Into<String>) {
        self.push(parameter, Value::Text(value.into()), Unit::Label);
    }

    fn push(&mut self, parameter: &str, value: Value, unit: Unit) {
        self.results.push(Entry {
            parameter: parameter.to_string(),
            value,
            unit,
        });
    }

    pub fn render(&self, format: &str) -> Result<String, CliError> {
        match format {
            "human" => Ok(self.human()),
            "json" => Ok(serde_json::to_string_pretty(self).expect("report serialises") + "\n"),
            "csv" => Ok(self.csv()),
            other => Err(CliError::Usage(format!("unknown format {other:?}; use human, json or csv"))),
        }
    }

    fn human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.tool, self.version, self.command);
        if let Some(rng) = self.rng {
            let _ = writeln!(out, "rng: {rng}");
        }
        if !self.results.is_empty() {
            let width = self.results.iter().map(|e| e.parameter.len()).max().unwrap_or(0).max(9);
            let values: Vec<String> = self.results.iter().map(|e| e.value.human()).collect();
            let vwidth = values.iter().map(|v| v.len()).max().unwrap_or(0).max(5);
            let _ = writeln!(out);
            let _ = writeln!(out, "{:<width$}  {:>vwidth$}  Unit", "Parameter", "Value");
            for (e, v) in self.results.iter().zip(&values) {
                let _ = writeln!(out, "{:<width$}  {:>vwidth$}  {}", e.parameter, v, e.unit.tag());
            }
        }
        if let Some(t) = &self.table {
            let _ = writeln!(out);
            let cells: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(Value::human).collect()).collect();
            let widths: Vec<usize> = t
                .columns
                .iter()
                .enumerate()
                .map(|(j, c)| cells.iter().map(|r| r[j].len()).chain([c.name.len()]).max().unwrap_or(0))
                .collect();
            let line = |items: Vec<&str>| {
                items
                    .iter()
                    .zip(&widths)
                    .map(|(s, w)| format!("{s:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            let _ = writeln!(out, "{}", line(t.columns.iter().map(|c| c.name.as_str()).collect()));
            for r in &cells {
                let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }

    fn csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        match &self.table {
            Some(t) => {
                let _ = w.write_record(t.columns.iter().map(|c| c.name.as_str()));
                for r in &t.rows {
                    let _ = w.write_record(r.iter().map(Value::full));
                }
            }
            None => {
                let _ = w.write_record(["parameter", "value", "unit"]);
                for e in &self.results {
                    let _ = w.write_record([e.parameter.as_str(), &e.value.full(), e.unit.tag()]);
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
    }
}
