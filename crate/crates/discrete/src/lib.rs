//! Exact belief machinery for finite dynamic games with a static hidden
//! state: private beliefs ξ^i_t, conditional public beliefs π^i_t stored as
//! weighted particle sets, the controlled Markov kernel of (π_t, ξ^i_t), and
//! verification of structured candidates by dynamic programming.
//!
//! Stages are zero-based in the API and one-based in messages and reports.
//! Everything is checked against [`enumerate`], which sums the full joint
//! distribution over histories.

pub mod belief;
pub mod checks;
pub mod enumerate;
pub mod equilibrium;

pub use belief::{
    belief_over_others, init_private, init_public, markov_kernel, update_private_belief, update_private_or_reset,
    update_public_all, update_public_belief, update_public_or_reset, ConditionalPublicBelief, Fallback, PartialStrategy,
    Particle, PrivateBelief,
};
pub use checks::{oracle_report, verify_conditional_independence, ConditionalIndependenceReport, OracleReport};
pub use enumerate::{enumerate_histories, Enumeration, HistoryNode, StructuredPolicy};
pub use equilibrium::{
    search_equilibrium, verify_equilibrium, BeliefRuleTheta, StageGain, TableTheta, Theta, ThetaEntry, ThetaPolicy, ThetaRow,
    VerificationReport,
};

use pbe_core::{DiscreteGameSpec, Error, Result};

/// Size limits for enumeration and search.
#[derive(Clone, Debug)]
pub struct Caps {
    pub max_states: usize,
    pub max_obs: usize,
    pub max_actions: usize,
    pub max_horizon: usize,
    pub max_players: usize,
    pub max_histories: usize,
    pub max_profiles: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_states: 4,
            max_obs: 4,
            max_actions: 3,
            max_horizon: 3,
            max_players: 3,
            max_histories: 2_000_000,
            max_profiles: 1_000_000,
        }
    }
}

impl Caps {
    pub fn check(&self, spec: &DiscreteGameSpec) -> Result<()> {
        let over = |what: &str, got: usize, cap: usize| {
            (got > cap).then(|| Error::Cap(format!("{what} = {got} exceeds {cap}")))
        };
        let n = spec.num_players;
        let checks = [
            over("states", spec.num_states(), self.max_states),
            over("observations", (0..n).map(|i| spec.num_obs(i)).max().unwrap_or(0), self.max_obs),
            over("actions", (0..n).map(|i| spec.num_actions(i)).max().unwrap_or(0), self.max_actions),
            over("horizon", spec.horizon, self.max_horizon),
            over("players", n, self.max_players),
        ];
        match checks.into_iter().flatten().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}
