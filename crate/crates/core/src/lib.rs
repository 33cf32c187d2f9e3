//! Hermite spectral workbench for the semilinear heat equation
//! `∂ₜu + (−Δ + |x|²)^β u = f(u)` on `ℝ^d`, `d ∈ {1, 2}`.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the `*64` / `*32` aliases below name the concrete
//! instantiations. Experiments and the command-line front end run in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod hermite;
pub mod orlicz;
pub mod propagator;
pub mod quadrature;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use hermite::{
    forward_transform, hermite_function, hermite_functions, inverse_transform, phi_alpha, FieldClass, FnField, Grid, GridKind, MultiIndex,
    PhysicalField, PointFn, SpectralField, SpectralPlan,
};
pub use orlicz::{gamma, lq_norm, luxemburg_norm, NormValue, YoungFunction};
pub use propagator::{apply_semigroup, mehler_apply, smoothing_ratio_sweep, FractionalOrder, SmoothingReport};
pub use quadrature::QuadratureRule;
pub use scalar::Real;
pub use solver::{feasible_exponents, run, step, NonlinearitySpec, SolverConfig, Stepper, Trajectory, Verdict};

pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type PhysicalField64 = PhysicalField<f64>;
pub type PhysicalField32 = PhysicalField<f32>;
pub type SpectralField64 = SpectralField<f64>;
pub type SpectralField32 = SpectralField<f32>;
pub type QuadratureRule64 = QuadratureRule<f64>;
pub type QuadratureRule32 = QuadratureRule<f32>;
