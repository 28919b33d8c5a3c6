//! Numeric laboratory for multiparameter Forelli-Rudin type integral
//! operators on the Siegel upper half-space.
//!
//! The crate evaluates the operators `T_{a,b,c}` and `S_{a,b,c}` (and their
//! two-parameter tensor extensions acting on functions over `U x U`), encodes
//! the sharp boundedness criteria between weighted mixed-norm Lebesgue
//! spaces, and cross-checks every closed-form identity against importance
//! sampled Monte-Carlo integration.
//!
//! All numeric code is generic over the scalar type through [`Real`];
//! concrete `f64` aliases live at the crate root. The verification suites
//! and the command-line front end work in `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

pub mod closed_forms;
pub mod criteria;
pub mod experiments;
pub mod geometry;
pub mod mixed_norm;
pub mod operators;
pub mod sampler;
pub mod schur;
pub mod space;

/// Scalar type the whole laboratory is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for converting an `f64` literal into the working scalar.
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Absolute tolerance used for the exact-equality conditions of the
/// boundedness criteria and for identity checks between algebraic routes.
pub const EQ_TOL: f64 = 1e-12;

pub use closed_forms::{Divergence, Eval};
pub use criteria::{CaseTag, ConditionCheck, Outcome, Verdict};
pub use geometry::SiegelPoint;
pub use operators::{DistParams, FrParams};
pub use sampler::{Estimate, ProposalConfig};
pub use space::{ExponentPair, Setting, WeightPair};

pub type Complex64 = num_complex::Complex<f64>;
pub type SiegelPoint64 = geometry::SiegelPoint<f64>;
pub type ExponentPair64 = space::ExponentPair<f64>;
pub type WeightPair64 = space::WeightPair<f64>;
pub type Setting64 = space::Setting<f64>;
pub type FrParams64 = operators::FrParams<f64>;
pub type DistParams64 = operators::DistParams<f64>;
pub type Estimate64 = sampler::Estimate<f64>;
pub type ProposalConfig64 = sampler::ProposalConfig<f64>;
pub type Verdict64 = criteria::Verdict<f64>;
pub type SeparableFn64 = mixed_norm::SeparableFn<f64>;
pub type SchurCertificate64 = schur::SchurCertificate<f64>;
