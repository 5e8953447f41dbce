//! Best-constant machinery.
//!
//! Three independent routes bracket or compute optimal constants:
//!
//! * [`bessel_shoot`]/[`bessel_threshold`] — shooting for the radial ODE
//!   `y'' + ((n-1)/r + V'/V) y' + (cW/V) y = 0` with bisection on `c`;
//! * [`sl_min`] — smallest generalized eigenvalue of a 1-D Sturm–Liouville
//!   discretization;
//! * [`certify_lower_bound`]/[`trial_upper_bound`] — sampled pointwise weight
//!   domination (lower) and Rayleigh quotients over trial families (upper).

mod bracket;
mod ode;
mod sturm;

pub use bracket::{
    certify_lower_bound, trial_upper_bound, ConstantBracket, InterpolantTrial, PowerLogBump,
    RadialLadder, RadialTrialFamily, SamplePlan, TruncatedProfile,
};
pub use ode::{bessel_shoot, bessel_threshold, BesselProblem, BesselVerdict};
pub use sturm::{sl_min, BoundaryCondition, SlResult, SturmLiouvilleProblem};

use crate::calculus::EvalError;
use crate::geometry::GeometryError;
use crate::weights::WeightError;

#[derive(Debug, Clone, thiserror::Error)]
pub enum ConstantsError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("invalid bracket [{lo}, {hi}]: need a positive verdict at the left end and a vanishing verdict at the right end")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("verdicts are not monotone in c near {c}")]
    NonMonotone { c: f64 },
    #[error("integrator step underflow near r = {location}")]
    StepUnderflow { location: f64 },
    #[error("iteration failed to converge")]
    NonConvergence,
    #[error("mesh must have at least 64 intervals, got {0}")]
    BadMesh(usize),
    #[error("operator factorization failed; discretized form not positive definite")]
    Factorization,
    #[error("degenerate trial function (denominator {denominator})")]
    DegenerateTrial { denominator: f64 },
    #[error("target weight not positive at {at:?}")]
    TargetNotPositive { at: Vec<f64> },
    #[error("no admissible sample points in the plan")]
    EmptySample,
}
