//! Shared types for the structured-equilibrium toolkit.
//!
//! Game specifications (finite and linear-Gaussian), the run configuration,
//! JSON loading with validation, and the dense linear-algebra helpers every
//! other crate leans on.

pub mod blocks;
pub mod config;
pub mod discrete;
pub mod error;
pub mod linalg;
pub mod load;
pub mod lqg;
pub mod strategy;

pub use blocks::{Blk, Layout};
pub use config::{Method, RunConfig};
pub use discrete::DiscreteGameSpec;
pub use error::{Error, Result};
pub use load::{load_spec, AnySpec, Kind, LoadedConfig};
pub use lqg::LqgGameSpec;
pub use strategy::{LinearStageStrategy, Profile};

pub type Mat = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;
