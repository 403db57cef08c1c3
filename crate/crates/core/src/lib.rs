//! Ramp-merge simulator and the expert teacher agent that adjudicates joint
//! actions for connected autonomous vehicles.

pub mod scalar;
pub mod sim;
pub mod teacher;
pub mod testkit;

pub use scalar::Scalar;

/// Scalar type used by the simulator state.
pub type Real = f64;
pub type IdmParams64 = sim::IdmParams<f64>;
pub type IdmParams32 = sim::IdmParams<f32>;
