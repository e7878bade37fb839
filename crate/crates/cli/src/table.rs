//! CSV output with `#` comment lines ahead of the header, and the reader
//! for it.

use std::fs;
use std::path::Path;

use crate::config::{ConfigFile, RunConfig};
use crate::error::CliError;

const CONFIG_PREFIX: &str = "config ";

/// Twelve significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    /// Comment lines without the leading `# `.
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        let body = w.into_inner().expect("in-memory write");
        out.push_str(std::str::from_utf8(&body).expect("utf-8 fields"));
        out
    }

    pub fn parse(text: &str) -> Result<Table, CliError> {
        let comments = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .map(|l| l.trim_start_matches('#').trim_start().to_string())
            .collect();
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let bad = |e: csv::Error| CliError::config(format!("csv: {e}"));
        let header = reader.headers().map_err(bad)?.iter().map(String::from).collect();
        let rows = reader
            .records()
            .map(|r| r.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<Result<_, _>>()
            .map_err(bad)?;
        Ok(Table {
            comments,
            header,
            rows,
        })
    }

    pub fn read(path: &Path) -> Result<Table, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Table::parse(&text)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        self.rows.iter().map(|r| r[k].parse().ok()).collect()
    }

    pub fn text_column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    /// The configuration echoed in the comment block, if any.
    pub fn config(&self) -> Option<Result<RunConfig, CliError>> {
        let json = self.comments.iter().find_map(|c| c.strip_prefix(CONFIG_PREFIX))?;
        Some(ConfigFile::from_json(json).and_then(ConfigFile::resolve))
    }
}

pub(crate) fn config_comment(config: &RunConfig) -> String {
    format!("{CONFIG_PREFIX}{}", config.echo().to_json())
}
