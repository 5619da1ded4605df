//! One connection's state: the running episode, its log, and demo recording.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use gapnav::action::Action;
use gapnav::sim::log::{log_file_name, EpisodeLog, LogSource};
use gapnav::sim::runner::{header, step_record};
use gapnav::sim::scenario::Catalog;
use gapnav::sim::{Env, EnvError, SimConfig};

use crate::protocol::{
    error, parse_request, Empty, Envelope, ErrorCode, ObsPayload, RecordingPayload, RenderPayload,
    Reply, Request, ResetPayload, StepInfo,
};

/// Policy name written into logs of service-driven episodes.
pub const EXTERNAL_POLICY: &str = "external";
/// Policy name written into demo headers.
pub const HUMAN_POLICY: &str = "human";

/// Configuration and counters common to every session of one service.
#[derive(Debug)]
pub struct Shared {
    pub sim: SimConfig,
    pub catalog: Catalog,
    /// Finished episodes are written here when set.
    pub log_dir: Option<PathBuf>,
    /// Demo recordings go here.
    pub demo_dir: PathBuf,
    next_session: AtomicU64,
}

impl Shared {
    pub fn new(sim: SimConfig, catalog: Catalog, log_dir: Option<PathBuf>, demo_dir: PathBuf) -> Self {
        Self {
            sim,
            catalog,
            log_dir,
            demo_dir,
            next_session: AtomicU64::new(1),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SessionStats {
    pub episodes: u64,
    pub steps: u64,
    pub demos: u64,
}

pub struct Session {
    id: u64,
    shared: Arc<Shared>,
    env: Option<Env>,
    log: Option<EpisodeLog>,
    recording: bool,
    demo: Option<EpisodeLog>,
    last_seq: Option<u64>,
    stats: SessionStats,
}

type Outcome = Result<Reply, (ErrorCode, String)>;

impl Session {
    pub fn new(shared: Arc<Shared>) -> Self {
        Self {
            id: shared.next_session.fetch_add(1, Ordering::Relaxed),
            shared,
            env: None,
            log: None,
            recording: false,
            demo: None,
            last_seq: None,
            stats: SessionStats::default(),
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn stats(&self) -> SessionStats {
        self.stats
    }

    pub fn env(&self) -> Option<&Env> {
        self.env.as_ref()
    }

    /// One request line in, one reply line out (without the newline).
    pub fn handle_line(&mut self, line: &str) -> String {
        let reply = match parse_request(line) {
            Ok(req) => self.handle(req),
            Err(reply) => reply,
        };
        reply.to_line()
    }

    pub fn handle(&mut self, req: Envelope<Request>) -> Envelope<Reply> {
        let seq = req.seq;
        match (seq, self.last_seq) {
            (None, _) => return error(None, ErrorCode::BadSequence, "missing seq"),
            (Some(s), Some(last)) if s <= last => {
                return error(seq, ErrorCode::BadSequence, format!("seq {s} is not above {last}"))
            }
            _ => self.last_seq = seq,
        }
        let outcome = match req.body {
            Request::Reset(p) => self.reset(p),
            Request::Step(a) => self.step(a),
            Request::RenderState(Empty {}) => self.render(),
            Request::SetRecording(p) => self.set_recording(p.enabled),
        };
        match outcome {
            Ok(body) => Envelope { seq, body },
            Err((code, message)) => error(seq, code, message),
        }
    }

    /// Flushes a pending demo. Call when the connection goes away.
    pub fn close(&mut self) -> Result<Option<PathBuf>, (ErrorCode, String)> {
        self.flush_demo()
    }

    fn reset(&mut self, p: ResetPayload) -> Outcome {
        let template = self
            .shared
            .catalog
            .get(&p.template)
            .map_err(|e| (ErrorCode::UnknownTemplate, e.to_string()))?;
        let env = Env::reset(&self.shared.sim, template, p.seed).map_err(env_error)?;
        self.flush_demo()?;
        self.log = Some(EpisodeLog::new(header(
            &self.shared.sim,
            &env,
            EXTERNAL_POLICY,
            LogSource::Episode,
        )));
        self.env = Some(env);
        self.stats.episodes += 1;
        if self.recording {
            self.start_demo();
        }
        Ok(Reply::Obs(self.obs_payload(None)))
    }

    fn step(&mut self, action: Action) -> Outcome {
        let env = self
            .env
            .as_mut()
            .ok_or((ErrorCode::NoActiveEpisode, "no active episode".to_string()))?;
        let obs = env.observation().clone();
        let out = env.step(action).map_err(env_error)?;
        self.stats.steps += 1;
        let env = self.env.as_ref().expect("checked above");
        let record = step_record(env, obs, action, out.clone());
        if let Some(demo) = self.demo.as_mut() {
            demo.steps.push(record.clone());
        }
        if let Some(log) = self.log.as_mut() {
            log.steps.push(record);
        }
        let mut written = Vec::new();
        if out.status.is_done() {
            if let Some(path) = self.flush_demo()? {
                written.push(path.display().to_string());
            }
            if let Some(path) = self.write_episode_log()? {
                written.push(path.display().to_string());
            }
        }
        let info = StepInfo {
            reward: out.reward,
            applied: out.applied,
            clamped: out.clamped,
            clearance: out.clearance,
            pass_events: out.pass_events,
            written,
        };
        let payload = self.obs_payload(Some(info));
        Ok(if out.status.is_done() {
            Reply::Done(payload)
        } else {
            Reply::Obs(payload)
        })
    }

    fn render(&mut self) -> Outcome {
        let env = self
            .env
            .as_ref()
            .ok_or((ErrorCode::NoActiveEpisode, "no active episode".to_string()))?;
        let pose = env.robot().pose;
        let p = env.perception();
        Ok(Reply::RenderState(Box::new(RenderPayload {
            session: self.id,
            step: env.steps(),
            status: env.status(),
            recording: self.recording,
            world: env.world().clone(),
            lidar: p
                .scan
                .iter()
                .map(|r| pose.to_world(gapnav::geom::Vec2::from_angle(r.angle) * r.distance))
                .collect(),
            detections: p.detections.clone(),
            guidance: p.guidance.clone(),
        })))
    }

    fn set_recording(&mut self, enabled: bool) -> Outcome {
        let mut path = None;
        if enabled && !self.recording {
            let running = self.env.as_ref().is_some_and(|e| !e.status().is_done());
            if !running {
                return Err((ErrorCode::NoActiveEpisode, "no active episode".into()));
            }
            self.start_demo();
        } else if !enabled {
            path = self.flush_demo()?;
        }
        self.recording = enabled;
        Ok(Reply::SetRecording(RecordingPayload {
            enabled,
            path: path.map(|p| p.display().to_string()),
        }))
    }

    fn start_demo(&mut self) {
        let env = self.env.as_ref().expect("demo needs an episode");
        self.demo = Some(EpisodeLog::new(header(
            &self.shared.sim,
            env,
            HUMAN_POLICY,
            LogSource::Human,
        )));
    }

    /// Writes the pending demo if it holds any steps.
    fn flush_demo(&mut self) -> Result<Option<PathBuf>, (ErrorCode, String)> {
        let Some(demo) = self.demo.take() else {
            return Ok(None);
        };
        if demo.steps.is_empty() {
            return Ok(None);
        }
        self.stats.demos += 1;
        let name = format!(
            "demo-s{}-{:03}-{}",
            self.id,
            self.stats.demos,
            log_file_name(&demo.header.template, demo.header.seed)
        );
        let path = self.shared.demo_dir.join(name);
        write(&demo, &path)?;
        Ok(Some(path))
    }

    fn write_episode_log(&mut self) -> Result<Option<PathBuf>, (ErrorCode, String)> {
        let (Some(dir), Some(log)) = (&self.shared.log_dir, self.log.take()) else {
            return Ok(None);
        };
        let path = dir.join(log_file_name(&log.header.template, log.header.seed));
        write(&log, &path)?;
        Ok(Some(path))
    }

    fn obs_payload(&self, info: Option<StepInfo>) -> ObsPayload {
        let env = self.env.as_ref().expect("payload needs an episode");
        ObsPayload {
            session: self.id,
            template: env.template().to_string(),
            seed: env.seed(),
            step: env.steps(),
            time: env.time(),
            status: env.status(),
            obs: env.observation().clone(),
            info,
        }
    }
}

fn write(log: &EpisodeLog, path: &Path) -> Result<(), (ErrorCode, String)> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)
        .map_err(|e| (ErrorCode::Storage, format!("{}: {e}", dir.display())))?;
    log.write_atomic(path)
        .map_err(|e| (ErrorCode::Storage, format!("{}: {e}", path.display())))
}

fn env_error(e: EnvError) -> (ErrorCode, String) {
    let code = match e {
        EnvError::NonFiniteAction => ErrorCode::NonFiniteAction,
        EnvError::EpisodeOver => ErrorCode::EpisodeOver,
        EnvError::Scenario(_) => ErrorCode::Scenario,
        EnvError::Config(_) | EnvError::Encoding(_) => ErrorCode::Internal,
    };
    (code, e.to_string())
}
