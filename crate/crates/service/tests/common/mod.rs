#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use gapnav::action::Action;
use gapnav::encoding::ObservationFrame;
use gapnav::sim::scenario::Catalog;
use gapnav::sim::SimConfig;
use gapnav_service::protocol::{Envelope, Reply, Request, ResetPayload};
use gapnav_service::Shared;

pub fn shared(log_dir: Option<&Path>, demo_dir: &Path) -> Arc<Shared> {
    Arc::new(Shared::new(
        SimConfig::default(),
        Catalog::builtin(),
        log_dir.map(Path::to_path_buf),
        demo_dir.to_path_buf(),
    ))
}

/// Deterministic closed-loop script: steer toward the goal with a wobble.
pub fn script(obs: &ObservationFrame, k: u64) -> Action {
    let wobble = 0.25 * (k as f64 * 0.7).sin();
    Action::new(0.9, (obs.goal.angle + wobble).clamp(-0.785, 0.785))
}

pub fn reset(seq: u64, template: &str, seed: u64) -> String {
    Envelope {
        seq: Some(seq),
        body: Request::Reset(ResetPayload {
            template: template.into(),
            seed,
        }),
    }
    .to_line()
}

pub fn step(seq: u64, a: Action) -> String {
    Envelope {
        seq: Some(seq),
        body: Request::Step(a),
    }
    .to_line()
}

pub fn parse(line: &str) -> Envelope<Reply> {
    serde_json::from_str(line).unwrap_or_else(|e| panic!("{e}: {line}"))
}

pub fn obs_of(reply: &Envelope<Reply>) -> &ObservationFrame {
    match &reply.body {
        Reply::Obs(p) | Reply::Done(p) => &p.obs,
        other => panic!("expected an observation, got {other:?}"),
    }
}
