//! Linear structured equilibria of linear-Gaussian games.
//!
//! Each player's value at stage t is a quadratic in `[v̂^i_t; f_t]`. The
//! backward pass builds the stage objective from the lifted reward plus the
//! propagated continuation value and maximizes it over `a^i`. The outer loop
//! alternates the strategy-dependent forward filter with that backward pass.

mod backward;
mod centralized;
mod layouts;
mod lift;
mod newton;
mod propagate;
mod solve;
mod stage;
mod value;

pub use backward::{backward_pass, BackwardOutput};
pub use centralized::{solve_centralized, CentralizedSolution};
pub use layouts::StageLayouts;
pub use lift::lift_reward;
pub use propagate::{next_state_map, propagate_value, Propagation};
pub use solve::{solve_equilibrium, IterationRecord, Solution};
pub use stage::{best_response_stage, stage_objective, StageSolution};
pub use value::{expected_equilibrium_value, expected_player_values, Quad, ValueFn};

/// Condition number of `W_aa` beyond which a stage is reported ill-conditioned.
pub const COND_LIMIT: f64 = 1e12;
