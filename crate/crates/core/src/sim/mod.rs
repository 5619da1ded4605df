//! Deterministic 2D simulator: kinematics, world, sensors, reward,
//! scenarios, metrics, and the stepping environment built from them.

pub mod detect;
pub mod env;
pub mod lidar;
pub mod log;
pub mod metrics;
pub mod raster;
pub mod reward;
pub mod robot;
pub mod runner;
pub mod scenario;
pub mod world;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use env::{Env, EnvError, SimConfig, StepOutcome};
pub use reward::{RewardParams, Status};
pub use robot::{step_robot, RobotParams, RobotState};
pub use world::{Obstacle, Pedestrian, World};

/// RNG stream for scenario generation.
pub const STREAM_SCENARIO: u64 = 0;
/// RNG stream for the detection model.
pub const STREAM_DETECTION: u64 = 1;

/// ChaCha8 seeded from `seed`, on a separate stream per consumer so that
/// adding draws in one never shifts the other.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
