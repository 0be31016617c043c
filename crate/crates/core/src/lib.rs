//! Simulation and exact boundary control of a one-dimensional dynamic
//! debonding model.
//!
//! A film occupies `0 < x < ℓ(t)` and obeys the wave equation
//! `y_tt = y_xx`, with the boundary control `y(t, 0) = u(t)` and
//! `y(t, ℓ(t)) = 0` at the debonding front. The front advances according to
//! Griffith's criterion with toughness `κ`.
//!
//! - [`func1d`]: sampled functions and monotone maps.
//! - [`model`]: states, fronts, controls and the Griffith kernel.
//! - [`forward`]: forward simulation and field reconstruction.
//! - [`branch`]: backward computation of final front branches.
//! - [`control`]: synthesis of controls steering one state to another.

pub mod branch;
pub mod control;
pub mod error;
pub mod forward;
pub mod func1d;
pub mod model;

pub use error::{Error, Result};
pub use func1d::{MonotoneMap, SampledFunction, Side};
pub use model::{ControlSignal, FrontCurve, InitialState, Regularity, TargetState, Toughness};
