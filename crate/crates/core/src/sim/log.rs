//! JSON Lines episode logs. Episode logs and human demonstrations share the
//! schema and differ only in `source`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::env::SimConfig;
use super::metrics::{EpisodeResult, Outcome, PassEvent, TimedState};
use super::reward::{RewardBreakdown, Status};
use super::robot::RobotState;
use crate::action::Action;
use crate::encoding::{HumanState, ObservationFrame};

pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogSource {
    /// Policy rollout.
    Episode,
    /// Teleoperated demonstration.
    Human,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub version: u32,
    pub source: LogSource,
    pub template: String,
    pub seed: u64,
    pub policy: String,
    /// SHA-256 of the serialized config, hex.
    pub config_hash: String,
    pub config: SimConfig,
    pub start: RobotState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    /// Clock after the step.
    pub t: f64,
    /// Observation the action was chosen from.
    pub obs: ObservationFrame,
    pub action: Action,
    pub applied: Action,
    pub clamped: bool,
    pub robot: RobotState,
    pub reward: RewardBreakdown,
    pub detections: Vec<HumanState>,
    pub pass_events: Vec<PassEvent>,
    pub status: Status,
    /// Observation after a terminal step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_obs: Option<ObservationFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogLine {
    Header(LogHeader),
    Step(StepRecord),
    Error { message: String },
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("missing header line")]
    MissingHeader,
}

pub fn config_hash(config: &SimConfig) -> String {
    let text = serde_json::to_string(config).expect("config serializes");
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `a-000007.jsonl`: sorts by template, then seed.
pub fn log_file_name(template: &str, seed: u64) -> String {
    format!("{template}-{seed:06}.jsonl")
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub header: LogHeader,
    pub steps: Vec<StepRecord>,
    pub error: Option<String>,
}

impl EpisodeLog {
    pub fn new(header: LogHeader) -> Self {
        Self {
            header,
            steps: Vec::new(),
            error: None,
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut line = |l: &LogLine| {
            out.push_str(&serde_json::to_string(l).expect("log line serializes"));
            out.push('\n');
        };
        line(&LogLine::Header(self.header.clone()));
        for s in &self.steps {
            line(&LogLine::Step(s.clone()));
        }
        if let Some(message) = &self.error {
            line(&LogLine::Error {
                message: message.clone(),
            });
        }
        out
    }

    /// Writes to a temporary sibling and renames it into place.
    pub fn write_atomic(&self, path: &Path) -> Result<(), LogError> {
        write_atomic(path, self.to_jsonl().as_bytes())
    }

    /// Parses a log, skipping lines that do not decode. Returns the log and
    /// the number of skipped lines.
    pub fn parse(text: &str) -> Result<(Self, usize), LogError> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut error = None;
        let mut skipped = 0;
        for raw in text.lines().filter(|l| !l.trim().is_empty()) {
            match serde_json::from_str::<LogLine>(raw) {
                Ok(LogLine::Header(h)) if header.is_none() => header = Some(h),
                Ok(LogLine::Step(s)) => steps.push(s),
                Ok(LogLine::Error { message }) => error = Some(message),
                Ok(LogLine::Header(_)) | Err(_) => skipped += 1,
            }
        }
        let header = header.ok_or(LogError::MissingHeader)?;
        Ok((Self { header, steps, error }, skipped))
    }

    pub fn read(path: &Path) -> Result<(Self, usize), LogError> {
        let text = std::fs::read_to_string(path).map_err(|e| LogError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text)
    }

    /// Reconstructs the episode result from the records alone.
    pub fn result(&self) -> EpisodeResult {
        let last = self.steps.last();
        let outcome = match (&self.error, last.map(|s| s.status)) {
            (Some(_), _) => Outcome::Error,
            (None, Some(Status::Success)) => Outcome::Success,
            (None, Some(Status::Collision)) => Outcome::Collision,
            (None, Some(Status::Timeout)) => Outcome::Timeout,
            (None, _) => Outcome::Error,
        };
        let error = match outcome {
            Outcome::Error => Some(
                self.error
                    .clone()
                    .unwrap_or_else(|| "log ends before the episode finished".into()),
            ),
            _ => None,
        };
        let mut trajectory = vec![TimedState {
            t: 0.0,
            state: self.header.start,
        }];
        trajectory.extend(self.steps.iter().map(|s| TimedState {
            t: s.t,
            state: s.robot,
        }));
        EpisodeResult {
            template: self.header.template.clone(),
            seed: self.header.seed,
            outcome,
            elapsed: last.map_or(0.0, |s| s.t),
            trajectory,
            pass_events: self.steps.iter().flat_map(|s| s.pass_events.clone()).collect(),
            error,
        }
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), LogError> {
    let io = |e| LogError::Io {
        path: path.display().to_string(),
        source: e,
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("log");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(io)
}
