//! Report envelope, exit statuses and output.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

/// Bumped whenever a field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    VerificationFailed,
    NotConverged,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::VerificationFailed => 4,
            Status::NotConverged => 5,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(layerpack::Error),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(layerpack::Error::Resource { .. }) => 3,
            CliError::Lib(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Lib(e) => e.fmt(f),
        }
    }
}

impl From<layerpack::Error> for CliError {
    fn from(e: layerpack::Error) -> Self {
        CliError::Lib(e)
    }
}

/// What a command produced, before the envelope is added.
pub struct Outcome {
    pub result: Value,
    /// `None` for commands that draw no random numbers.
    pub seed: Option<u64>,
    pub tolerances: Map<String, Value>,
    /// Table form, emitted instead of JSON when the command asked for CSV.
    pub csv: Option<String>,
    pub status: Status,
}

impl Outcome {
    pub fn json(result: impl Serialize) -> Self {
        Outcome { result: to_value(result), seed: None, tolerances: Map::new(), csv: None, status: Status::Success }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_owned(), Value::from(value));
        self
    }

    pub fn csv(mut self, csv: Option<String>) -> Self {
        self.csv = csv;
        self
    }

    pub fn status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }
}

pub fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    schema_version: u32,
    command: &'a str,
    config: &'a Value,
    seed: Option<u64>,
    tolerances: &'a Map<String, Value>,
    result: &'a Value,
    duration_secs: Option<f64>,
}

/// Renders the outcome as a JSON document, or as CSV preceded by `#` lines
/// carrying the same metadata.
pub fn render(command: &str, config: &Value, outcome: &Outcome, duration_secs: Option<f64>) -> String {
    let envelope = Envelope {
        tool: "layerpack",
        version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        command,
        config,
        seed: outcome.seed,
        tolerances: &outcome.tolerances,
        result: &outcome.result,
        duration_secs,
    };
    match &outcome.csv {
        None => {
            let mut s = serde_json::to_string_pretty(&envelope).expect("report serializes");
            s.push('\n');
            s
        }
        Some(csv) => {
            let mut s = String::new();
            s.push_str(&format!("# tool: layerpack {}\n", envelope.version));
            s.push_str(&format!("# schema_version: {SCHEMA_VERSION}\n"));
            s.push_str(&format!("# command: {command}\n"));
            s.push_str(&format!("# config: {}\n", compact(config)));
            s.push_str(&format!("# seed: {}\n", compact(&outcome.seed)));
            s.push_str(&format!("# tolerances: {}\n", compact(&outcome.tolerances)));
            s.push_str(&format!("# duration_secs: {}\n", compact(&duration_secs)));
            s.push_str(csv);
            s
        }
    }
}

fn compact(v: &impl Serialize) -> String {
    serde_json::to_string(v).expect("report values serialize")
}

pub fn write(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
