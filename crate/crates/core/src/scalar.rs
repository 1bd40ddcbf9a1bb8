//! Scalar abstraction shared by every numeric module.
//!
//! Positions are meters, times are seconds, speeds are m/s. All of the
//! arithmetic in this crate is closed-form (sums, differences, ratios), so any
//! IEEE float works; `f64` is the production type.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real number type the library is generic over.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance (seconds) under which a constraint-graph cycle is still
    /// considered non-negative.
    fn cycle_tolerance() -> Self;

    /// Tolerance (m/s) for accepting a synthesized speed that lands a rounding
    /// error outside its bounds.
    fn speed_tolerance() -> Self;

    /// Converts an `f64` literal. Panics only if the type cannot represent
    /// finite doubles at all.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("scalar type must represent f64 literals")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn cycle_tolerance() -> Self {
        1e-9
    }

    fn speed_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    // Single precision carries ~7 digits; horizons of a few hundred seconds
    // leave rounding noise around 1e-5 s.
    fn cycle_tolerance() -> Self {
        1e-3
    }

    fn speed_tolerance() -> Self {
        1e-4
    }
}
