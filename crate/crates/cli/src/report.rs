use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, JobConfig};
use crate::error::CliError;

/// One CSV row: a matrix entry, a series point, or a scalar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub quantity: String,
    pub row: usize,
    pub col: usize,
    pub t: Option<f64>,
    pub re: f64,
    pub im: f64,
}

impl Record {
    pub fn scalar(quantity: impl Into<String>, value: f64) -> Self {
        Self::entry(quantity, 0, 0, value, 0.0)
    }

    pub fn entry(quantity: impl Into<String>, row: usize, col: usize, re: f64, im: f64) -> Self {
        Self {
            quantity: quantity.into(),
            row,
            col,
            t: None,
            re,
            im,
        }
    }

    pub fn series(quantity: impl Into<String>, row: usize, col: usize, t: f64, re: f64, im: f64) -> Self {
        Self {
            quantity: quantity.into(),
            row,
            col,
            t: Some(t),
            re,
            im,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Effective configuration, defaults filled in.
    pub config: JobConfig,
    pub result: Value,
    pub records: Vec<Record>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let doc = json!({ "config": self.config, "result": self.result });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut out = format!("# effective-config: {}\n", self.config);
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r)
                .map_err(|e| CliError::parse(format!("csv output: {e}"), Value::Null))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::parse(format!("csv output: {e}"), Value::Null))?;
        out.push_str(&String::from_utf8(bytes).expect("csv is utf-8"));
        Ok(out)
    }

    pub fn render(&self) -> Result<String, CliError> {
        match self.config.options.format.unwrap_or_default() {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }
}
