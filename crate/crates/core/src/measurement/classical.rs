use serde::Serialize;

use super::{ErrorEntry, ErrorReport};
use crate::error::{ensure, Result};
use crate::numerics::{integrate, Grid, Grid2D, TransferKernel};
use crate::relations::RelationVerdict;

const NORM_TOL: f64 = 1e-10;

/// A probability density of a classical random variable on a line grid.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicalDistribution {
    grid: Grid,
    density: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(grid: Grid, density: Vec<f64>) -> Result<Self> {
        ensure!(density.len() == grid.len(), "density length does not match the grid");
        ensure!(
            density.iter().all(|w| w.is_finite() && *w >= 0.0),
            "density must be finite and non-negative"
        );
        let total = integrate(&grid, &density)?;
        ensure!((total - 1.0).abs() < NORM_TOL, "density integrates to {total}, not 1");
        Ok(Self { grid, density })
    }

    /// Sample `f` and divide by its integral.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let raw: Vec<f64> = grid.nodes().into_iter().map(f).collect();
        let total = integrate(&grid, &raw)?;
        ensure!(total > 0.0 && total.is_finite(), "density has integral {total}");
        Self::new(grid, raw.into_iter().map(|w| w / total).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }
}

/// `w_out(a) = ∫ G(a, a') w_in(a') da'`.
pub fn classical_transform(w: &ClassicalDistribution, kernel: &TransferKernel) -> Result<ClassicalDistribution> {
    ensure!(kernel.source().matches(&w.grid), "kernel grid does not match the distribution");
    let out = kernel.apply(&w.density)?;
    // the kernel conserves the uniform-weight sum; Simpson end weights differ slightly
    let total = integrate(kernel.target(), &out)?;
    ensure!(
        (total - 1.0).abs() < TRUNCATION_TOL,
        "transformed density integrates to {total}; widen the grid"
    );
    ClassicalDistribution::new(kernel.target().clone(), out.into_iter().map(|v| v / total).collect())
}

/// Mean, standard deviation and central moments of orders 2 through 6.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalMoments {
    pub mean: f64,
    pub std: f64,
    /// `central[n - 2]` is the `n`-th central moment.
    pub central: Vec<f64>,
}

impl ClassicalMoments {
    pub fn central(&self, order: usize) -> Option<f64> {
        order.checked_sub(2).and_then(|i| self.central.get(i)).copied()
    }
}

const TRUNCATION_TOL: f64 = 1e-4;

pub const MAX_CLASSICAL_ORDER: usize = 6;

pub fn classical_estimate(w: &ClassicalDistribution) -> Result<ClassicalMoments> {
    let nodes = w.grid.nodes();
    let weighted = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
        let v: Vec<f64> = nodes.iter().zip(&w.density).map(|(a, p)| f(*a) * p).collect();
        integrate(&w.grid, &v)
    };
    let mean = weighted(&|a| a)?;
    let central = (2..=MAX_CLASSICAL_ORDER)
        .map(|n| weighted(&|a| (a - mean).powi(n as i32)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassicalMoments {
        mean,
        std: central[0].max(0.0).sqrt(),
        central,
    })
}

/// `ε` of the mean, the standard deviation and central moments `3..=max_order`.
pub fn error_indicators_classical(
    input: &ClassicalDistribution,
    output: &ClassicalDistribution,
    max_order: usize,
) -> Result<ErrorReport> {
    ensure!(
        (2..=MAX_CLASSICAL_ORDER).contains(&max_order),
        "max_order must be in 2..={MAX_CLASSICAL_ORDER}, got {max_order}"
    );
    ensure!(input.grid.matches(&output.grid), "in and out distributions live on different grids");
    let a = classical_estimate(input)?;
    let b = classical_estimate(output)?;
    let mut r = ErrorReport::default();
    r.push(ErrorEntry::new("mean", a.mean, b.mean));
    r.push(ErrorEntry::new("std", a.std, b.std));
    for n in 3..=max_order {
        r.push(ErrorEntry::new(
            format!("central_{n}"),
            a.central(n).unwrap_or(0.0),
            b.central(n).unwrap_or(0.0),
        ));
    }
    Ok(r)
}

/// Joint density of two classical random variables on a 2D grid.
#[derive(Debug, Clone)]
pub struct ClassicalJoint {
    grid: Grid2D,
    density: Vec<f64>,
}

impl ClassicalJoint {
    /// Normalize a non-negative sample array.
    pub fn new(grid: Grid2D, density: Vec<f64>) -> Result<Self> {
        ensure!(density.len() == grid.len(), "density length does not match the grid");
        ensure!(
            density.iter().all(|w| w.is_finite() && *w >= 0.0),
            "density must be finite and non-negative"
        );
        let total: f64 = grid.weights().iter().zip(&density).map(|(q, w)| q * w).sum();
        ensure!(total > 0.0, "joint density is zero");
        Ok(Self {
            grid,
            density: density.into_iter().map(|w| w / total).collect(),
        })
    }

    /// Means, standard deviations and covariance of the two variables.
    pub fn moments(&self) -> ([f64; 2], [f64; 2], f64) {
        let q = self.grid.weights();
        let expect = |f: &dyn Fn([f64; 2]) -> f64| -> f64 {
            (0..self.density.len())
                .map(|i| q[i] * self.density[i] * f(self.grid.node(i)))
                .sum()
        };
        let m = [expect(&|p| p[0]), expect(&|p| p[1])];
        let va = expect(&|p| (p[0] - m[0]).powi(2));
        let vb = expect(&|p| (p[1] - m[1]).powi(2));
        let cov = expect(&|p| (p[0] - m[0]) * (p[1] - m[1]));
        (m, [va.max(0.0).sqrt(), vb.max(0.0).sqrt()], cov)
    }

    /// `Δa Δb >= |<δa δb>|`.
    pub fn csf(&self) -> RelationVerdict {
        let (_, s, cov) = self.moments();
        RelationVerdict {
            lhs: s[0] * s[1],
            rhs: cov.abs(),
            margin: s[0] * s[1] - cov.abs(),
            applicable: None,
            defects: Vec::new(),
        }
    }
}
