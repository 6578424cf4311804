//! Simulation and fluid-limit analysis of multiclass slotted ALOHA with
//! impatient customers.

// `!(x > 0.0)` deliberately rejects NaN alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fluid;
pub mod harness;
pub mod model;
pub mod rng;
pub mod simulator;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{ArrivalSpec, IntegerState, ModelParams, ValidatedModel, E_INV};
pub use trajectory::FluidTrajectory;
