//! Grids, quadrature, finite-difference stencils and transfer kernels.

mod domain;
mod grid;
mod kernel;
mod stencil;

pub use domain::Domain;
pub use grid::{integrate, Grid, Grid2D, GridKind, QuadratureRule, StencilAccuracy};
pub use kernel::{apply_kernel, gaussian_kernel, gaussian_kernel_with, TransferKernel};
pub use stencil::differentiate;

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

/// Real or complex grid samples.
pub trait Sample:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
}

impl Sample for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Sample for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}
