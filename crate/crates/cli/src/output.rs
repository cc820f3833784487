//! Table writers: CSV with a provenance comment, or a JSON mirror.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, OutputFormat};
use crate::CliError;

/// A table with one header and string-formatted rows, plus typed records for
/// the JSON mirror.
pub struct Table<R: Serialize> {
    pub header: &'static str,
    pub rows: Vec<String>,
    pub records: Vec<R>,
}

impl<R: Serialize> Table<R> {
    pub fn new(header: &'static str) -> Self {
        Self {
            header,
            rows: Vec::new(),
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, row: String, record: R) {
        self.rows.push(row);
        self.records.push(record);
    }

    /// Writes `<stem>.csv` or `<stem>.json` under the output directory.
    pub fn write(&self, config: &ExperimentConfig, stem: &str, extra: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&config.out)?;
        match config.format {
            OutputFormat::Csv => {
                let path = config.out.join(format!("{stem}.csv"));
                let mut text = config.comment(extra);
                text.push('\n');
                text.push_str(self.header);
                text.push('\n');
                for row in &self.rows {
                    text.push_str(row);
                    text.push('\n');
                }
                write_file(&path, &text)?;
                Ok(path)
            }
            OutputFormat::Json => {
                let path = config.out.join(format!("{stem}.json"));
                let doc = json!({
                    "comment": config.comment(extra),
                    "columns": self.header.split(',').collect::<Vec<_>>(),
                    "rows": self.records,
                });
                let text = serde_json::to_string_pretty(&doc).map_err(std::io::Error::other)?;
                write_file(&path, &(text + "\n"))?;
                Ok(path)
            }
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)?;
    Ok(())
}
