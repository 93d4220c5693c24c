//! Wave functions, linear operators, probability density and current, and
//! the first-order probabilistic estimators built on them.

mod density;
mod estimate;
mod operator;
mod params;
mod wavefunction;

pub use density::{density_current, density_current_with, DensityCurrent, DENSITY_FLOOR};
pub use estimate::{central_moment, correlation, estimate, estimate_pair, Deviation, EstimatorReport};
pub use operator::{apply_operator, NormalForm, OperatorSpec, ScalarField};
pub use params::PhysicalParams;
pub use wavefunction::{Representation, WaveFunction, NORM_TOL};
