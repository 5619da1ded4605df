use gapnav::action::Action;
use gapnav::encoding::{GoalPolar, ObservationFrame, PolarVector, FRAME_VERSION};
use gapnav::sim::metrics::{PassEvent, PassSide};
use gapnav::sim::reward::{RewardBreakdown, RewardCase};
use gapnav::sim::Status;
use gapnav_service::protocol::{
    Empty, Envelope, ErrorCode, ErrorPayload, ObsPayload, RecordingPayload, Reply, Request,
    ResetPayload, StepInfo,
};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, Just(0.0), Just(-0.0), Just(f64::MIN_POSITIVE), Just(0.1 + 0.2)]
}

fn unit() -> impl Strategy<Value = f64> {
    prop_oneof![0.0f64..=1.0, Just(1.0 / 3.0), Just(0.0)]
}

fn frame() -> impl Strategy<Value = ObservationFrame> {
    (1usize..8).prop_flat_map(|n| {
        (
            prop::collection::vec(unit(), n * 3),
            prop::collection::vec(prop::collection::vec(unit(), n), 1..4),
            prop::collection::vec(0u32..2_000_000, 0..3),
            unit(),
            -3.0f64..3.0,
            prop::array::uniform3(prop::array::uniform2(-1.0f64..=1.0)),
        )
            .prop_map(move |(v, humans, ids, d, a, hist)| ObservationFrame {
                version: FRAME_VERSION,
                n,
                guidance: PolarVector::from_values(v[..n].to_vec()),
                laser_now: PolarVector::from_values(v[n..2 * n].to_vec()),
                laser_prev: PolarVector::from_values(v[2 * n..].to_vec()),
                humans: humans.into_iter().map(PolarVector::from_values).collect(),
                human_ids: ids,
                goal: GoalPolar { distance: d, angle: a },
                action_history: hist,
            })
    })
}

fn status() -> impl Strategy<Value = Status> {
    prop_oneof![
        Just(Status::Running),
        Just(Status::Success),
        Just(Status::Collision),
        Just(Status::Timeout)
    ]
}

fn info() -> impl Strategy<Value = StepInfo> {
    (finite(), finite(), finite(), any::<bool>(), finite(), prop::collection::vec("[a-z/.]{1,12}", 0..2))
        .prop_map(|(p, s, c, clamped, clearance, written)| StepInfo {
            reward: RewardBreakdown {
                progress: p,
                steering: s,
                case: RewardCase::Band,
                case_value: c,
                safety: c,
                total: p + s + c,
            },
            applied: Action::new(p, s),
            clamped,
            clearance,
            pass_events: vec![PassEvent {
                pedestrian: 3,
                time: clearance,
                side: PassSide::Behind,
            }],
            written,
        })
}

fn request() -> impl Strategy<Value = Request> {
    prop_oneof![
        ("[a-h]", any::<u64>()).prop_map(|(template, seed)| Request::Reset(ResetPayload { template, seed })),
        (finite(), finite()).prop_map(|(v, s)| Request::Step(Action::new(v, s))),
        Just(Request::RenderState(Empty {})),
        any::<bool>().prop_map(|enabled| Request::SetRecording(RecordingPayload { enabled, path: None })),
    ]
}

fn obs_payload() -> impl Strategy<Value = ObsPayload> {
    (any::<u64>(), any::<u64>(), any::<u64>(), finite(), status(), frame(), prop::option::of(info()))
        .prop_map(|(session, seed, step, time, status, obs, info)| ObsPayload {
            session,
            template: "d".into(),
            seed,
            step,
            time,
            status,
            obs,
            info,
        })
}

fn reply() -> impl Strategy<Value = Reply> {
    prop_oneof![
        obs_payload().prop_map(Reply::Obs),
        obs_payload().prop_map(Reply::Done),
        (any::<bool>(), prop::option::of("[a-z/]{1,10}"))
            .prop_map(|(enabled, path)| Reply::SetRecording(RecordingPayload { enabled, path })),
        ".{0,20}".prop_map(|message| Reply::Error(ErrorPayload {
            code: ErrorCode::NoActiveEpisode,
            message
        })),
    ]
}

proptest! {
    #[test]
    fn requests_survive_a_round_trip(seq in prop::option::of(any::<u64>()), body in request()) {
        let msg = Envelope { seq, body };
        let line = msg.to_line();
        prop_assert!(!line.contains('\n'));
        let back: Envelope<Request> = serde_json::from_str(&line).unwrap();
        prop_assert_eq!(back, msg);
    }

    #[test]
    fn replies_survive_a_round_trip(seq in prop::option::of(any::<u64>()), body in reply()) {
        let msg = Envelope { seq, body };
        let line = msg.to_line();
        prop_assert!(!line.contains('\n'));
        let back: Envelope<Reply> = serde_json::from_str(&line).unwrap();
        prop_assert_eq!(back, msg);
    }
}

#[test]
fn envelope_shape_on_the_wire() {
    let msg = Envelope {
        seq: Some(3),
        body: Request::Step(Action::new(0.5, -0.1)),
    };
    assert_eq!(
        msg.to_line(),
        r#"{"seq":3,"kind":"step","payload":{"speed":0.5,"steer":-0.1}}"#
    );
    let err = gapnav_service::protocol::error(Some(4), ErrorCode::NoActiveEpisode, "no active episode");
    assert_eq!(
        err.to_line(),
        r#"{"seq":4,"kind":"error","payload":{"code":"no_active_episode","message":"no active episode"}}"#
    );
}
