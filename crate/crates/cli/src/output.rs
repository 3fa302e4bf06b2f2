use std::fs;
use std::path::PathBuf;

use serde::Serialize;

use crate::args::{Command, Format, OutputArgs};
use crate::CliError;

/// Writes the files of one run into its output directory and keeps an
/// inventory for run.json.
pub struct Output {
    dir: PathBuf,
    formats: Vec<Format>,
    written: Vec<String>,
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    tool: &'static str,
    version: &'static str,
    #[serde(flatten)]
    command: &'a Command,
    outputs: &'a [String],
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    details: serde_json::Value,
}

impl Output {
    pub fn create(args: &OutputArgs) -> Result<Self, CliError> {
        fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
        Ok(Self {
            dir: args.out.clone(),
            formats: args.format.clone(),
            written: Vec::new(),
        })
    }

    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_owned());
        Ok(())
    }

    /// Writes `name` if CSV output is enabled.
    pub fn csv<E>(&mut self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> Result<(), E>) -> Result<(), CliError>
    where
        CliError: From<E>,
    {
        if !self.wants(Format::Csv) {
            return Ok(());
        }
        let mut buf = Vec::new();
        fill(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if !self.wants(Format::Json) {
            return Ok(());
        }
        self.write_json(name, value)
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn svg(&mut self, name: &str, render: impl FnOnce() -> String) -> Result<(), CliError> {
        if !self.wants(Format::Svg) {
            return Ok(());
        }
        self.write(name, render().as_bytes())
    }

    /// Writes run.json, always, with the full command so it can be replayed.
    pub fn finish(mut self, command: &Command, details: serde_json::Value) -> Result<Vec<String>, CliError> {
        let outputs = self.written.clone();
        let meta = RunMetadata {
            tool: "covbranch",
            version: env!("CARGO_PKG_VERSION"),
            command,
            outputs: &outputs,
            details,
        };
        self.write_json("run.json", &meta)?;
        Ok(self.written)
    }
}
