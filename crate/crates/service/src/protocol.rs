//! Wire types. Every message is `{"seq": n, "kind": k, "payload": {...}}`.

use gapnav::action::Action;
use gapnav::encoding::{HumanState, ObservationFrame};
use gapnav::geom::Vec2;
use gapnav::guidance::GuidancePoint;
use gapnav::sim::metrics::PassEvent;
use gapnav::sim::reward::RewardBreakdown;
use gapnav::sim::{Status, World};
use serde::{Deserialize, Serialize};

/// A request or reply with its sequence number. Replies echo the request's
/// number; a line whose `seq` cannot be read gets `seq: null` back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub seq: Option<u64>,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("protocol types always serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Request {
    Reset(ResetPayload),
    Step(Action),
    RenderState(Empty),
    SetRecording(RecordingPayload),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Reply {
    /// Reply to `reset`, and to `step` while the episode runs.
    Obs(ObsPayload),
    /// Reply to the `step` that ended the episode.
    Done(ObsPayload),
    RenderState(Box<RenderPayload>),
    SetRecording(RecordingPayload),
    Error(ErrorPayload),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Empty {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResetPayload {
    pub template: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordingPayload {
    pub enabled: bool,
    /// In an ack: the demo file written by this change, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsPayload {
    pub session: u64,
    pub template: String,
    pub seed: u64,
    pub step: u64,
    pub time: f64,
    pub status: Status,
    pub obs: ObservationFrame,
    /// Absent on the reset reply.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub info: Option<StepInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub reward: RewardBreakdown,
    pub applied: Action,
    pub clamped: bool,
    pub clearance: f64,
    pub pass_events: Vec<PassEvent>,
    /// Files written because the episode ended.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub written: Vec<String>,
}

/// Ground truth for drawing, plus what the sensors made of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderPayload {
    pub session: u64,
    pub step: u64,
    pub status: Status,
    pub recording: bool,
    pub world: World,
    /// Lidar hit points in world coordinates.
    pub lidar: Vec<Vec2>,
    pub detections: Vec<HumanState>,
    pub guidance: Vec<GuidancePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Not JSON, or not an envelope.
    Malformed,
    UnknownKind,
    /// Payload missing or of the wrong shape for its kind.
    BadPayload,
    /// `seq` missing or not above the previous one.
    BadSequence,
    NoActiveEpisode,
    EpisodeOver,
    NonFiniteAction,
    UnknownTemplate,
    /// The scenario generator could not satisfy the template.
    Scenario,
    Storage,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub code: ErrorCode,
    pub message: String,
}

const KINDS: [&str; 4] = ["reset", "step", "render_state", "set_recording"];

/// Decodes one request line. On failure returns the error reply to send,
/// carrying whatever `seq` could be read.
pub fn parse_request(line: &str) -> Result<Envelope<Request>, Envelope<Reply>> {
    let fail = |seq, code, message: String| Envelope {
        seq,
        body: Reply::Error(ErrorPayload { code, message }),
    };
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| {
        // still echo seq when only a payload value is bad, e.g. 1e999
        #[derive(Deserialize)]
        struct SeqOnly {
            seq: Option<u64>,
        }
        let seq = serde_json::from_str::<SeqOnly>(line).ok().and_then(|s| s.seq);
        fail(seq, ErrorCode::Malformed, e.to_string())
    })?;
    let Some(obj) = value.as_object() else {
        return Err(fail(None, ErrorCode::Malformed, "expected a JSON object".into()));
    };
    let seq = obj.get("seq").and_then(|s| s.as_u64());
    if seq.is_none() {
        return Err(fail(None, ErrorCode::BadSequence, "seq must be a non-negative integer".into()));
    }
    let kind = match obj.get("kind").and_then(|k| k.as_str()) {
        Some(k) if KINDS.contains(&k) => k.to_string(),
        Some(k) => return Err(fail(seq, ErrorCode::UnknownKind, format!("unknown kind {k:?}"))),
        None => return Err(fail(seq, ErrorCode::Malformed, "missing kind".into())),
    };
    // parse the text again so floats go straight from text to f64
    serde_json::from_str::<Envelope<Request>>(line)
        .map_err(|e| fail(seq, ErrorCode::BadPayload, format!("{kind}: {e}")))
}

pub fn error(seq: Option<u64>, code: ErrorCode, message: impl Into<String>) -> Envelope<Reply> {
    Envelope {
        seq,
        body: Reply::Error(ErrorPayload {
            code,
            message: message.into(),
        }),
    }
}
