//! Two-dimensional discrete-time quantum walks with ε-parametrized coins.
//!
//! The crate checks when a walk admits a continuous-time limit (a lattice
//! Hamiltonian) and a continuous-spacetime "plastic" limit (a first-order PDE),
//! builds the limiting operators, and measures convergence of the walk towards
//! them.
//!
//! Conventions used throughout:
//! - rotations `R_m(w) = exp(-i w σ_m / 2)`;
//! - coins `C = e^{iδ} R_z(ζ) R_y(θ) R_z(φ)`;
//! - shift symbol `Ŝ(k) = e^{ikΔσ_z}`, walk symbol `Ŵ = Ŝ_x C_x Ŝ_y C_y`;
//! - forward DFT kernel `e^{-ik·l}`, unnormalized; the inverse carries `1/(NxNy)`.

pub mod algebra;
pub mod coinwalk;
pub mod config;
pub mod error;
pub mod lattice;
pub mod limits;
pub mod par;
pub mod plastic;
mod rational;
pub mod verify;

pub use algebra::{Axis, Mat2, C64};
pub use coinwalk::{CoinJet, JetMode, KGrid, WalkConfig};
pub use error::{Error, Result};
pub use par::Execution;
pub use rational::RationalExp;
