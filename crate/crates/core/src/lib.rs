//! Interior-point solvers for mathematical programs with complementarity
//! constraints (MPCCs).

pub mod bench;
pub mod cli;
pub mod crossover;
pub mod error;
pub mod ipm;
pub mod linalg;
pub mod model;
pub mod options;
pub mod penalty;
pub mod relax;
pub mod result;

pub use error::{Result, SolverError};
pub use options::{Algorithm, Options};
pub use result::SolveResult;
