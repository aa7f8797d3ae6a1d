//! Private and public Kalman recursions for the linear-Gaussian game.
//!
//! Player i filters the stacked state `s^i = [v; v̂^{-i}_{t-1}]` from
//! `y^i = [a^{-i}_{t-1} - m^{-i}_{t-1}; x^i_t]`. The public recursion runs a
//! conditional filter on `[v; v̂_{t-1}]` observed through `[v; a_{t-1} - m_{t-1}]`
//! and yields `E_t`, `f_t` with `E[v̂^i_t | v, a_{1:t-1}] = E^i_t v + f^i_t`.
//!
//! Everything here except `f` and the private means depends on the strategy
//! matrices only, never on realized play.
//!
//! Time indices are 0-based: stage `t` in code is stage `t + 1` of the game.

mod model;
mod private;
mod public;

pub use model::{build_private_model, PrivateFilterModel};
pub use private::{estimate_of_estimates, init_private, private_step, PrivateFilterState};
pub use public::{
    forward_pass, forward_prefix, init_public, joseph_filtered, public_step, update_f, PublicStage, StageGains,
    Trajectory,
};

use pbe_core::{Error, Mat, Result};

pub(crate) const PSD_TOL: f64 = 1e-9;
pub(crate) const INNOV_TOL: f64 = 1e-8;

pub(crate) fn check_psd(m: &Mat, what: &str) -> Result<()> {
    if m.nrows() == 0 {
        return Ok(());
    }
    let lo = pbe_core::linalg::min_eig(m);
    if !(lo >= -PSD_TOL * (1.0 + pbe_core::linalg::max_abs(m))) {
        return Err(Error::Numerical(format!("{what} lost positive semidefiniteness (min eig {lo:e})")));
    }
    Ok(())
}
