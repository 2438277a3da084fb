use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: &str = "thinfree-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

/// Wrapper written around every subcommand result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub schema: String,
    pub tool_version: String,
    pub command: String,
    /// Arguments after the program name; running them again replays the run.
    pub argv: Vec<String>,
    /// Parsed arguments with defaults filled in.
    pub config: Value,
    pub timing: Timing,
    pub results: Value,
}

impl ReportEnvelope {
    pub fn new(command: &str, argv: &[String], config: Value, results: Value, wall_seconds: f64) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            argv: argv.to_vec(),
            config,
            timing: Timing { wall_seconds },
            results,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
