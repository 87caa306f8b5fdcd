//! Scalar abstraction for the numerical core.
//!
//! All estimators and the simulator are generic over [`Real`], so the same
//! code runs in `f32` or `f64`. Concrete `f64` aliases for the main domain
//! types live at the crate root; choose `f32` only when memory pressure
//! outweighs the precision loss in the tolerance-sensitive identities.

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable throughout the library.
///
/// The bound set is the intersection of what the linear algebra, the
/// estimators, and the simulator need: IEEE arithmetic with transcendentals
/// (`Float`), conversions for constants and output (`FromPrimitive`,
/// `ToPrimitive`), in-place arithmetic, summation, and thread safety.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Display + Debug + Send + Sync + 'static
{
    /// Converts an `f64` constant, panicking if the type cannot approximate it.
    ///
    /// # Panics
    /// Panics for exotic scalar types that reject the conversion; `f32` and
    /// `f64` always succeed.
    fn from_const(value: f64) -> Self {
        Self::from_f64(value).expect("scalar type must represent f64 constants")
    }

    /// Lossy view as `f64`, for output formatting and diagnostics.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar type must convert to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Display
        + Debug
        + Send
        + Sync
        + 'static
{
}
