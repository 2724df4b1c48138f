//! Total variation gradient flows: exact event-driven solvers for step
//! functions and radial stacks, minimizing movements, the fourth-order and
//! fractional flows, calibrability tests, extinction bounds and regularity
//! checks.
//!
//! The exact solvers are generic over [`Field`]; the aliases below fix the
//! two scalar types the CLI uses.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod core;
pub mod error;
pub mod exact1d;
pub mod fracflow;
pub mod fourth;
pub mod minmov;
pub mod radial2;
pub mod regularity;
pub mod scalar;

pub use crate::core::{
    EventKind, FlowEvent, FlowTrajectory, Geometry, GridSignal, JumpMeasure, RadialStack, Signature,
    StepFunction1D,
};
pub use crate::error::{Result, TvError};
pub use crate::scalar::Field;

/// Step function with double-precision breakpoints and values.
pub type Step1D = StepFunction1D<f64>;
/// Radial stack with double-precision radii and values.
pub type Stack = RadialStack<f64>;
/// Step function in exact rational arithmetic.
pub type RationalStep1D = StepFunction1D<num_rational::BigRational>;
/// Radial stack in exact rational arithmetic.
pub type RationalStack = RadialStack<num_rational::BigRational>;
