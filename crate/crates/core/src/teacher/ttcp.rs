//! Time-to-conflict-point difference.

use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("distance to conflict point must be non-negative, got {0}")]
pub struct NegativeDistance(pub f64);

/// Speeds below this floor are treated as the floor (m/s).
pub const SPEED_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ttcp<S> {
    pub ttcp_i: S,
    pub ttcp_j: S,
    pub delta: S,
}

pub fn time_to_point<S: Scalar>(distance: S, speed: S) -> Result<S, NegativeDistance> {
    if distance < S::zero() || distance.is_nan() {
        return Err(NegativeDistance(distance.as_f64()));
    }
    Ok(distance / speed.max(S::lit(SPEED_FLOOR)))
}

/// `|d_i / v_i − d_j / v_j|` together with both times.
pub fn delta_ttcp<S: Scalar>(d_i: S, v_i: S, d_j: S, v_j: S) -> Result<Ttcp<S>, NegativeDistance> {
    let ttcp_i = time_to_point(d_i, v_i)?;
    let ttcp_j = time_to_point(d_j, v_j)?;
    Ok(Ttcp { ttcp_i, ttcp_j, delta: (ttcp_i - ttcp_j).abs() })
}
