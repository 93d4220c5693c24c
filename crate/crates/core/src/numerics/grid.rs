use serde::{Deserialize, Serialize};

use super::Sample;
use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridKind {
    /// Closed interval; both end points are nodes.
    Line,
    /// Half-open interval; the upper bound is identified with the lower one.
    Periodic,
}

/// Quadrature used on line grids. Periodic grids always use the rectangle rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureRule {
    /// Composite Simpson when the node count is odd, trapezoid otherwise.
    Simpson,
    Trapezoid,
}

/// Interior accuracy of the central difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StencilAccuracy {
    Fourth,
    Sixth,
}

impl StencilAccuracy {
    pub(crate) fn half_width(self) -> usize {
        match self {
            StencilAccuracy::Fourth => 2,
            StencilAccuracy::Sixth => 3,
        }
    }
}

/// Uniform one-dimensional grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    kind: GridKind,
    lower: f64,
    upper: f64,
    n: usize,
    quadrature: QuadratureRule,
    stencil: StencilAccuracy,
}

pub const MIN_NODES: usize = 8;

impl Grid {
    fn new(kind: GridKind, lower: f64, upper: f64, n: usize) -> Result<Self> {
        ensure!(n >= MIN_NODES, "grid needs at least {MIN_NODES} nodes, got {n}");
        ensure!(
            lower.is_finite() && upper.is_finite() && upper > lower,
            "grid bounds must be finite with upper > lower, got [{lower}, {upper}]"
        );
        Ok(Self {
            kind,
            lower,
            upper,
            n,
            quadrature: QuadratureRule::Simpson,
            stencil: match kind {
                GridKind::Line => StencilAccuracy::Fourth,
                GridKind::Periodic => StencilAccuracy::Sixth,
            },
        })
    }

    pub fn line(lower: f64, upper: f64, n: usize) -> Result<Self> {
        Self::new(GridKind::Line, lower, upper, n)
    }

    pub fn periodic(lower: f64, upper: f64, n: usize) -> Result<Self> {
        Self::new(GridKind::Periodic, lower, upper, n)
    }

    /// Line grid on `[center - half_width, center + half_width]`.
    pub fn centered(center: f64, half_width: f64, n: usize) -> Result<Self> {
        Self::line(center - half_width, center + half_width, n)
    }

    pub fn with_quadrature(mut self, rule: QuadratureRule) -> Self {
        self.quadrature = rule;
        self
    }

    pub fn with_stencil(mut self, accuracy: StencilAccuracy) -> Self {
        self.stencil = accuracy;
        self
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn is_periodic(&self) -> bool {
        self.kind == GridKind::Periodic
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn quadrature(&self) -> QuadratureRule {
        self.quadrature
    }

    pub fn stencil(&self) -> StencilAccuracy {
        self.stencil
    }

    pub fn spacing(&self) -> f64 {
        match self.kind {
            GridKind::Line => (self.upper - self.lower) / (self.n - 1) as f64,
            GridKind::Periodic => (self.upper - self.lower) / self.n as f64,
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lower + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Quadrature weights such that `sum(w[i] * f[i])` approximates the integral.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let n = self.n;
        match (self.kind, self.quadrature) {
            (GridKind::Periodic, _) => vec![h; n],
            (GridKind::Line, QuadratureRule::Simpson) if n % 2 == 1 => (0..n)
                .map(|i| {
                    if i == 0 || i == n - 1 {
                        h / 3.0
                    } else if i % 2 == 1 {
                        4.0 * h / 3.0
                    } else {
                        2.0 * h / 3.0
                    }
                })
                .collect(),
            (GridKind::Line, _) => (0..n)
                .map(|i| if i == 0 || i == n - 1 { h / 2.0 } else { h })
                .collect(),
        }
    }

    /// Whether two grids describe the same nodes.
    pub fn matches(&self, other: &Grid) -> bool {
        let tol = 1e-12 * (self.upper - self.lower).abs().max(1.0);
        self.kind == other.kind
            && self.n == other.n
            && (self.lower - other.lower).abs() <= tol
            && (self.upper - other.upper).abs() <= tol
    }
}

/// Integrate grid samples with the grid's quadrature rule.
pub fn integrate<T: Sample>(grid: &Grid, samples: &[T]) -> Result<T> {
    ensure!(
        samples.len() == grid.len(),
        "sample length {} does not match grid length {}",
        samples.len(),
        grid.len()
    );
    Ok(grid
        .weights()
        .iter()
        .zip(samples)
        .fold(T::zero(), |acc, (&w, &f)| acc + f * w))
}

/// Tensor product of two line grids. Samples are stored x-major:
/// node `(i, j)` lives at index `i * ny + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x: Grid,
    pub y: Grid,
}

impl Grid2D {
    pub fn new(x: Grid, y: Grid) -> Result<Self> {
        ensure!(
            x.kind() == GridKind::Line && y.kind() == GridKind::Line,
            "both axes of a 2D grid must be line grids"
        );
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.y.len() + j
    }

    pub fn node(&self, idx: usize) -> [f64; 2] {
        let ny = self.y.len();
        [self.x.node(idx / ny), self.y.node(idx % ny)]
    }

    pub fn weights(&self) -> Vec<f64> {
        let wx = self.x.weights();
        let wy = self.y.weights();
        wx.iter()
            .flat_map(|a| wy.iter().map(move |b| a * b))
            .collect()
    }

    pub fn matches(&self, other: &Grid2D) -> bool {
        self.x.matches(&other.x) && self.y.matches(&other.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_small_or_inverted_grids() {
        assert!(Grid::line(0.0, 1.0, 7).is_err());
        assert!(Grid::line(1.0, 0.0, 16).is_err());
        assert!(Grid::periodic(0.0, f64::NAN, 16).is_err());
    }

    #[test]
    fn spacing_per_kind() {
        let line = Grid::line(0.0, 1.0, 11).unwrap();
        assert!((line.spacing() - 0.1).abs() < 1e-15);
        let ring = Grid::periodic(0.0, 1.0, 10).unwrap();
        assert!((ring.spacing() - 0.1).abs() < 1e-15);
        assert!((ring.node(9) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn periodic_constant() {
        let g = Grid::periodic(0.0, 2.0 * PI, 64).unwrap();
        let v = integrate(&g, &vec![1.0; 64]).unwrap();
        assert!((v - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn periodic_sin_squared() {
        let g = Grid::periodic(0.0, 2.0 * PI, 64).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|x| x.sin().powi(2)).collect();
        assert!((integrate(&g, &f).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn normalized_gaussian_on_line() {
        for n in [2001, 2000] {
            let g = Grid::line(-10.0, 10.0, n).unwrap();
            let f: Vec<f64> = g
                .nodes()
                .iter()
                .map(|x| (-x * x / 2.0).exp() / (2.0 * PI).sqrt())
                .collect();
            assert!((integrate(&g, &f).unwrap() - 1.0).abs() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let g = Grid::line(0.0, 2.0, 9).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|x| x * x * x - x).collect();
        assert!((integrate(&g, &f).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn length_mismatch_is_a_contract_violation() {
        let g = Grid::line(0.0, 1.0, 9).unwrap();
        assert!(integrate(&g, &[1.0; 8]).is_err());
    }

    #[test]
    fn grid2d_weights_integrate_area() {
        let g = Grid2D::new(Grid::line(0.0, 2.0, 9).unwrap(), Grid::line(0.0, 3.0, 10).unwrap())
            .unwrap();
        let area: f64 = g.weights().iter().sum();
        assert!((area - 6.0).abs() < 1e-13);
        assert_eq!(g.node(g.index(8, 9)), [2.0, 3.0]);
        assert!(Grid2D::new(Grid::periodic(0.0, 1.0, 8).unwrap(), g.y.clone()).is_err());
    }
}
