//! Simulator and analysis library for the three-qubit nonequilibrium quantum
//! absorption refrigerator: a target qubit cooled through a resonant virtual
//! qubit of a strongly coupled spiral-engine pair.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix double precision, which every tolerance in the test suite
//! assumes.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dissipation;
pub mod experiments;
pub mod invariants;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod scalar;
pub mod steadystate;

pub use dissipation::{assemble_liouvillian, LindbladChannel, Refrigerator};
pub use linalg::{ComplexMatrix, DensityMatrix};
pub use model::{Frame, ModelParams, PopulationConvention, Temperature, ThermalPopulations};
pub use observables::{CurrentReport, PerformanceReport};
pub use scalar::Real;
pub use steadystate::{SteadyDecomposition, SteadyStateResult};

pub type ModelParams64 = ModelParams<f64>;
pub type ModelParams32 = ModelParams<f32>;
pub type Frame64 = Frame<f64>;
pub type Matrix64 = ComplexMatrix<f64>;
pub type Matrix32 = ComplexMatrix<f32>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type Refrigerator64 = Refrigerator<f64>;
pub type Refrigerator32 = Refrigerator<f32>;
pub type SteadyState64 = SteadyStateResult<f64>;
pub type CurrentReport64 = CurrentReport<f64>;
pub type PerformanceReport64 = PerformanceReport<f64>;
