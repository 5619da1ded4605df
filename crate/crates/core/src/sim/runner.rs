//! Running whole episodes, singly or as a parallel batch.

use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;

use super::env::{Env, SimConfig, StepOutcome};
use crate::action::Action;
use crate::encoding::ObservationFrame;
use super::log::{config_hash, EpisodeLog, LogHeader, LogSource, StepRecord, LOG_VERSION};
use super::metrics::EpisodeResult;
use super::scenario::Catalog;
use crate::policy::Policy;

pub fn header(config: &SimConfig, env: &Env, policy: &str, source: LogSource) -> LogHeader {
    LogHeader {
        version: LOG_VERSION,
        source,
        template: env.template().to_string(),
        seed: env.seed(),
        policy: policy.to_string(),
        config_hash: config_hash(config),
        config: *config,
        start: *env.robot(),
    }
}

fn error_log(config: &SimConfig, template: &str, seed: u64, policy: &str, message: String) -> EpisodeLog {
    let mut log = EpisodeLog::new(LogHeader {
        version: LOG_VERSION,
        source: LogSource::Episode,
        template: template.to_string(),
        seed,
        policy: policy.to_string(),
        config_hash: config_hash(config),
        config: *config,
        start: Default::default(),
    });
    log.error = Some(message);
    log
}

/// Log line for the step `env` just took from `obs` under `action`.
pub fn step_record(env: &Env, obs: ObservationFrame, action: Action, out: StepOutcome) -> StepRecord {
    StepRecord {
        step: env.steps(),
        t: env.time(),
        obs,
        action,
        applied: out.applied,
        clamped: out.clamped,
        robot: *env.robot(),
        reward: out.reward,
        detections: env.perception().detections.clone(),
        pass_events: out.pass_events,
        status: out.status,
        final_obs: out.status.is_done().then_some(out.obs),
    }
}

/// Steps `policy` from reset until the episode ends, logging every step.
/// Failures end the episode with an error line instead of aborting.
pub fn run_episode(
    config: &SimConfig,
    catalog: &Catalog,
    template: &str,
    seed: u64,
    policy: &mut dyn Policy,
    policy_name: &str,
) -> (EpisodeResult, EpisodeLog) {
    let reset = catalog
        .get(template)
        .map_err(|e| e.to_string())
        .and_then(|t| Env::reset(config, t, seed).map_err(|e| e.to_string()));
    let mut env = match reset {
        Ok(env) => env,
        Err(e) => {
            let log = error_log(config, template, seed, policy_name, e);
            return (log.result(), log);
        }
    };
    let mut log = EpisodeLog::new(header(config, &env, policy_name, LogSource::Episode));
    while !env.status().is_done() {
        let obs = env.observation().clone();
        let action = policy.act(&obs);
        let out = match env.step(action) {
            Ok(out) => out,
            Err(e) => {
                log.error = Some(e.to_string());
                break;
            }
        };
        log.steps.push(step_record(&env, obs, action, out));
    }
    (log.result(), log)
}

/// Runs every `(template, seed)` job in parallel with a fresh policy each;
/// results come back in job order. A panicking episode becomes an error
/// result and the batch carries on.
pub fn run_batch<P, F>(
    config: &SimConfig,
    catalog: &Catalog,
    jobs: &[(String, u64)],
    make_policy: F,
    policy_name: &str,
) -> Vec<(EpisodeResult, EpisodeLog)>
where
    P: Policy,
    F: Fn() -> P + Sync,
{
    jobs.par_iter()
        .map(|(template, seed)| {
            let run = catch_unwind(AssertUnwindSafe(|| {
                let mut policy = make_policy();
                run_episode(config, catalog, template, *seed, &mut policy, policy_name)
            }));
            run.unwrap_or_else(|panic| {
                let message = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "episode panicked".into());
                let log = error_log(config, template, *seed, policy_name, message);
                (log.result(), log)
            })
        })
        .collect()
}
