//! Monte Carlo play of a linear-Gaussian game.
//!
//! Every trajectory draws V ~ N(0, Σ) and w^i_t ~ N(0, Q^i), runs each
//! player's private estimate and the public offset f online from realized
//! actions, and records the stage rewards. Trajectory k uses ChaCha stream k of
//! the master seed, so results do not depend on how trajectories are scheduled.

mod check;
mod rollout;
mod stats;

pub use check::{filter_consistency_check, ConsistencyReport};
pub use rollout::{
    replay_f, simulate, simulate_one, simulate_sequential, RolloutPlan, SimConfig, SimOutput,
    TrajectoryRecord,
};
pub use stats::{empirical_value, paired_difference, Estimate, Summary};

#[cfg(feature = "parallel")]
pub use rollout::simulate_parallel;
