//! Deterministic scenario runner.
//!
//! One seed fixes everything: a per-run generator creates the server key,
//! and each session forks its own generators from `(seed, session index)`,
//! so a session's values do not depend on how many sessions run or in which
//! order. Time is a [`LogicalClock`]; there is no wall clock anywhere.

mod channel;
mod clock;
mod export;
mod report;
mod session;
mod tamper;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::ProtocolError;

pub use channel::{ChannelRecord, Direction, EavesdropChannel};
pub use clock::LogicalClock;
pub use export::{
    export_transcripts, leaks_path_for, read_leaks, read_transcripts, replay_attacks, write_jsonl,
    AuthIRecord, LeakRecord, TranscriptRecord, TruthRecord,
};
pub use report::{AttackResult, Report, SessionRecord, Summary, TamperResult, SCHEMA_VERSION};
pub use session::{run_all, run_honest, run_kssti, run_pfs, run_scenario, run_tamper, RunOutput};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{file}:{line}: {msg}")]
    Decode {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("{file}: schema version {found:?} is not supported (expected {SCHEMA_VERSION:?})")]
    SchemaVersionMismatch { file: String, found: String },
    #[error("transcripts use params `{transcripts}` but leaks use `{leaks}`")]
    ParamsMismatch { transcripts: String, leaks: String },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Honest,
    Kssti,
    Pfs,
    Tamper,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamSet {
    Test,
    Desk,
}

impl ParamSet {
    pub fn label(self) -> &'static str {
        match self {
            Self::Test => "test",
            Self::Desk => "desk",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub param_set: ParamSet,
    pub seed: u64,
    pub sessions: u64,
    pub delta_max_millis: u64,
    pub clock_step_millis: u64,
    pub tampers_per_field: u32,
    pub output_format: OutputFormat,
    pub registry_path: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Honest,
            param_set: ParamSet::Test,
            seed: 1,
            sessions: 10,
            delta_max_millis: 1_000,
            clock_step_millis: 10,
            tampers_per_field: 50,
            output_format: OutputFormat::Json,
            registry_path: None,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.sessions == 0 {
            return Err(HarnessError::Config("sessions must be at least 1".into()));
        }
        if self.clock_step_millis == 0 {
            return Err(HarnessError::Config("clock step must be positive".into()));
        }
        if matches!(self.scenario, Scenario::Tamper | Scenario::All) && self.tampers_per_field == 0
        {
            return Err(HarnessError::Config(
                "tampers per field must be at least 1".into(),
            ));
        }
        Ok(())
    }
}
