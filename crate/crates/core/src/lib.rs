//! Calabi quasimorphisms restricted to toric Hamiltonians, evaluated as
//! linear functionals on functions over moment polytopes, measured trees
//! and their products.

pub mod basespace;
pub mod decompose;
pub mod error;
pub mod funcspace;
pub mod measure;
pub mod poly;
pub mod quadrature;
pub mod quasistate;
pub mod symmetry;

pub use basespace::{BasePoint, BaseSpace, MeasuredTree, Simplex, TreePoint};
pub use error::{Error, Result};
pub use funcspace::SmoothFunction;
pub use measure::{Engine, PushforwardMeasure, QuasiStateMeasure};
pub use quasistate::{Convention, QuasiStateModel, ToricHamiltonian};
