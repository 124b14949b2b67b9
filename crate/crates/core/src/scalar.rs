//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the numeric code is generic over (`f32` or `f64`).
///
/// The associated constants carry the precision-dependent tolerances the
/// eigensolver and the invariant checks use by default.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Default residual tolerance for the eigensolver.
    const EIGEN_TOL: f64;
    /// Maximum tolerated asymmetry (relative to the largest entry) of a matrix
    /// handed to the symmetric eigensolver.
    const SYMMETRY_TOL: f64;
    /// Allowed deviation of a probe direction's norm from 1.
    const UNIT_TOL: f64;
    /// Short type name used in diagnostics.
    const NAME: &'static str;

    /// Converts an `f64` literal or computed value into this type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    /// Widens to `f64`.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar always widens to f64")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::of(n as f64)
    }
}

impl Scalar for f64 {
    const EIGEN_TOL: f64 = 1e-10;
    const SYMMETRY_TOL: f64 = 1e-8;
    const UNIT_TOL: f64 = 1e-8;
    const NAME: &'static str = "f64";
}

impl Scalar for f32 {
    const EIGEN_TOL: f64 = 1e-5;
    const SYMMETRY_TOL: f64 = 1e-4;
    const UNIT_TOL: f64 = 1e-5;
    const NAME: &'static str = "f32";
}
