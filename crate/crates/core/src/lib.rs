//! Finite volume schemes for `∂ₜu = div(f(u)∇V + ∇r(u))`.
//!
//! The crate is generic over the scalar type (`f32` or `f64`, see [`Real`]);
//! the aliases at the crate root fix the scalar to `f64`, which is what the
//! command-line tool and the experiments use.

pub mod config;
pub mod diagnostics;
pub mod driftdiffusion;
pub mod equilibrium;
pub mod error;
pub mod experiment;
pub mod flux;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod output;
pub mod quadrature;
pub mod real;
pub mod solver;

pub use error::{Error, Result};
pub use real::Real;

pub type Mesh1D = mesh::Mesh1D<f64>;
pub type MeshND = mesh::MeshND<f64>;
pub type ProblemModel = model::ProblemModel<f64>;
pub type Discretization = solver::Discretization<f64>;
pub type State = solver::State<f64>;
pub type SolverConfig = solver::SolverConfig<f64>;
pub type BoundaryCondition = solver::BoundaryCondition<f64>;
pub type DDSystem = driftdiffusion::DDSystem<f64>;
pub type DDState = driftdiffusion::DDState<f64>;
pub type DiagnosticsRecord = diagnostics::DiagnosticsRecord<f64>;
pub type ConvergenceTable = diagnostics::ConvergenceTable<f64>;
