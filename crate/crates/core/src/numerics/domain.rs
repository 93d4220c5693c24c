use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stencil::differentiate_strided;
use super::{Grid, Grid2D, Sample};
use crate::error::{ensure, Result};

/// The sampling domain of a field: a 1D grid or a 2D tensor grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    One(Grid),
    Two(Grid2D),
}

impl From<Grid> for Domain {
    fn from(g: Grid) -> Self {
        Domain::One(g)
    }
}

impl From<Grid2D> for Domain {
    fn from(g: Grid2D) -> Self {
        Domain::Two(g)
    }
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::One(_) => 1,
            Domain::Two(_) => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Domain::One(g) => g.len(),
            Domain::Two(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn weights(&self) -> Vec<f64> {
        match self {
            Domain::One(g) => g.weights(),
            Domain::Two(g) => g.weights(),
        }
    }

    /// Coordinates of node `idx`; the second entry is zero in 1D.
    pub fn node(&self, idx: usize) -> [f64; 2] {
        match self {
            Domain::One(g) => [g.node(idx), 0.0],
            Domain::Two(g) => g.node(idx),
        }
    }

    pub fn axis(&self, axis: usize) -> Option<&Grid> {
        match (self, axis) {
            (Domain::One(g), 0) => Some(g),
            (Domain::Two(g), 0) => Some(&g.x),
            (Domain::Two(g), 1) => Some(&g.y),
            _ => None,
        }
    }

    pub fn as_line(&self) -> Option<&Grid> {
        match self {
            Domain::One(g) => Some(g),
            Domain::Two(_) => None,
        }
    }

    pub fn matches(&self, other: &Domain) -> bool {
        match (self, other) {
            (Domain::One(a), Domain::One(b)) => a.matches(b),
            (Domain::Two(a), Domain::Two(b)) => a.matches(b),
            _ => false,
        }
    }

    pub fn integrate<T: Sample>(&self, samples: &[T]) -> Result<T> {
        ensure!(
            samples.len() == self.len(),
            "sample length {} does not match domain size {}",
            samples.len(),
            self.len()
        );
        Ok(self
            .weights()
            .iter()
            .zip(samples)
            .fold(T::zero(), |acc, (&w, &f)| acc + f * w))
    }

    /// `(f, g) = ∫ conj(f) g`.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Result<Complex64> {
        ensure!(
            f.len() == self.len() && g.len() == self.len(),
            "inner product operands do not match the domain size {}",
            self.len()
        );
        Ok(self
            .weights()
            .iter()
            .zip(f.iter().zip(g))
            .fold(Complex64::new(0.0, 0.0), |acc, (&w, (a, b))| acc + a.conj() * b * w))
    }

    pub fn norm_sqr(&self, f: &[Complex64]) -> Result<f64> {
        let w = self.weights();
        ensure!(f.len() == w.len(), "sample length does not match the domain");
        Ok(w.iter().zip(f).map(|(w, v)| w * v.norm_sqr()).sum())
    }

    /// Partial derivative of order 1 or 2 along `axis`.
    pub fn derivative<T: Sample>(&self, samples: &[T], axis: usize, order: usize) -> Result<Vec<T>> {
        ensure!(order == 1 || order == 2, "derivative order must be 1 or 2, got {order}");
        ensure!(
            samples.len() == self.len(),
            "sample length {} does not match domain size {}",
            samples.len(),
            self.len()
        );
        let mut out = vec![T::zero(); samples.len()];
        match self {
            Domain::One(g) => {
                ensure!(axis == 0, "axis {axis} is invalid for a 1D domain");
                differentiate_strided(g, samples, 0, 1, order, &mut out);
            }
            Domain::Two(g) => {
                let (nx, ny) = (g.x.len(), g.y.len());
                match axis {
                    0 => (0..ny).for_each(|j| differentiate_strided(&g.x, samples, j, ny, order, &mut out)),
                    1 => (0..nx).for_each(|i| differentiate_strided(&g.y, samples, i * ny, 1, order, &mut out)),
                    _ => return Err(crate::error::contract(format!("axis {axis} is invalid for a 2D domain"))),
                }
            }
        }
        Ok(out)
    }
}
