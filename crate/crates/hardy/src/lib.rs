//! Numerical workbench for first-order weighted Hardy inequalities.
//!
//! The central object is the exact integral identity
//!
//! ```text
//! ∫ V ‖∇_g u‖² dg = ∫ [div_g(V F) − V ‖F‖²] u² dg + ∫ V ‖∇_g u + u F‖² dg
//! ```
//!
//! valid for compactly supported `u` on any geometry presented by a frame of
//! vector fields and a volume density. Choosing `F = −∇_g f / f` for a positive
//! potential `f` turns the bracketed term into the weight `W = −div_g(V ∇_g f)/f`,
//! and discarding the nonnegative remainder yields a Hardy inequality
//! `∫ V ‖∇_g u‖² dg ≥ ∫ W u² dg`.
//!
//! The crate derives such weights pointwise with truncated Taylor (jet)
//! arithmetic — no finite differences, so identity residuals are pure
//! quadrature error — and provides:
//!
//! * [`calculus`] — expression mini-language and second-order jet arithmetic;
//! * [`geometry`] — frame-field presentations of Euclidean, half-space,
//!   hyperbolic-ball, Heisenberg, Grushin and edge geometries, with gradient,
//!   divergence and Laplace–Beltrami operators;
//! * [`weights`] — weight derivation from `(V, F)`, `(V, f)` and the `L^p`
//!   variant, plus multipolar fields;
//! * [`quadrature`] — tensor Gauss–Legendre grids and smooth compactly
//!   supported test functions with exact jets;
//! * [`verify`] — identity and inequality checks with two-resolution reports;
//! * [`constants`] — best-constant machinery: radial ODE shooting with
//!   bisection, a Sturm–Liouville eigensolver, sampled lower-bound
//!   certificates and trial-family upper bounds;
//! * [`bench`] — a scenario catalog with JSON reporting, also exposed through
//!   the `hardy` command line tool.
//!
//! Every example under `examples/` is runnable with `cargo run --example`.

pub mod bench;
pub mod calculus;
pub mod constants;
pub mod geometry;
pub mod quadrature;
pub mod verify;
pub mod weights;

#[cfg(test)]
pub(crate) mod testpoly;

pub use calculus::{jet2_eval, parse_expression, Jet2, ScalarFieldExpr, VectorFieldExpr};
pub use geometry::{frame_divergence, frame_gradient, laplace_beltrami, FramePoint, GeometryContext};
pub use quadrature::{build_grid, integrate, make_bump, QuadratureGrid, TestFunction};
pub use weights::{
    derive_weight_field, derive_weight_lp, derive_weight_potential, multipolar_field,
    PoleConfiguration, WeightProblem,
};

/// Convenient alias used throughout: named parameter bindings for expressions.
pub type Params = std::collections::BTreeMap<String, f64>;

/// Build a [`Params`] map from `(name, value)` pairs.
pub fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}
