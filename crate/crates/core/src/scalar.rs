//! Numeric abstractions shared by the analytic modules.
//!
//! Two tiers are used:
//!
//! * [`Field`] is anything closed under `+ - * /` with an ordering. The Erlang
//!   recurrences only need this, so they also run over exact rationals.
//! * [`Real`] adds the transcendental functions (`exp`, `sqrt`, ...) needed by
//!   root finding, the RBF layer and the fidelity metrics. Implemented for
//!   `f32` and `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Ordered field: enough structure for the Erlang B/C recurrences.
pub trait Field: Num + Clone + PartialOrd + Debug {
    fn from_count(v: u32) -> Self;
}

impl Field for f32 {
    fn from_count(v: u32) -> Self {
        v as f32
    }
}

impl Field for f64 {
    fn from_count(v: u32) -> Self {
        v as f64
    }
}

impl Field for num_rational::BigRational {
    fn from_count(v: u32) -> Self {
        num_rational::BigRational::from_integer(v.into())
    }
}

/// Floating point scalar: f32 or f64
pub trait Real: Field + Float + FromPrimitive + ToPrimitive + Display + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    fn count(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
