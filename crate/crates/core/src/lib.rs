//! Finite-difference solver for Cournot mean-field games of controls.
//!
//! Producers hold an exhaustible reserve `x ∈ [0, L]`, extract it at rate `q`
//! and sell into a market whose price depends on aggregate production. The
//! equilibrium couples a backward HJB equation for the producers' value
//! function with a forward Fokker-Planck equation for the reserve density,
//! and is computed here by smoothed policy iteration on an implicit
//! finite-difference scheme.
//!
//! All numerics are generic over a [`Scalar`] (any `num_traits::Float`);
//! the `*F64` aliases at the crate root cover the common case.
//!
//! Module map:
//! - [`grid`]: space-time mesh, fields with ghost column, discrete norms.
//! - [`model`]: economic parameters, price/demand pairs, Hamiltonian.
//! - [`operators`]: stencils, tridiagonal assembly and the Thomas solver.
//! - [`fpk`]: forward density march.
//! - [`hjb`]: policy evaluation and best response.
//! - [`spi`]: the smoothed policy iteration loop and its diagnostics.

pub mod error;
pub mod fpk;
pub mod grid;
pub mod hjb;
pub mod model;
pub mod operators;
pub mod scalar;
pub mod spi;

pub use error::{Error, Result};
pub use fpk::{initial_density, solve_forward, BumpSpec, DensityEvolution};
pub use grid::{build_grid, Alignment, FieldKind, GridSpec, SpaceTimeField, TimeSeries};
pub use hjb::{best_response_solve, policy_evaluation, BestResponse, ValueEvolution};
pub use model::{DiffusionProfile, ModelParams, PriceModel};
pub use operators::{BoundaryClosure, TridiagonalSystem};
pub use scalar::Scalar;
pub use spi::{
    spi_solve, EquilibriumSolution, IterationDiagnostics, LearningSchedule, SpiConfig,
};

pub type GridSpecF64 = GridSpec<f64>;
pub type SpaceTimeFieldF64 = SpaceTimeField<f64>;
pub type TimeSeriesF64 = TimeSeries<f64>;
pub type ModelParamsF64 = ModelParams<f64>;
pub type PriceModelF64 = PriceModel<f64>;
pub type DiffusionProfileF64 = DiffusionProfile<f64>;
pub type SpiConfigF64 = SpiConfig<f64>;
pub type EquilibriumSolutionF64 = EquilibriumSolution<f64>;

pub type GridSpecF32 = GridSpec<f32>;
pub type ModelParamsF32 = ModelParams<f32>;
pub type EquilibriumSolutionF32 = EquilibriumSolution<f32>;
