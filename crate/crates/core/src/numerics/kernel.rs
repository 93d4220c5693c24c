//! Doubly stochastic transfer kernels.
//!
//! A kernel maps a density sampled on its source grid to a density on its
//! target grid, `out[i] = h * sum_j K[i][j] * in[j]`. Both discrete marginals,
//! `h * sum_j K[i][j]` and `h * sum_i K[i][j]`, equal one.

use std::borrow::Cow;

use serde::Serialize;

use super::Grid;
use crate::error::{ensure, Result};
use crate::exec::Exec;

const MARGINAL_TOL: f64 = 1e-10;
const SINKHORN_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Serialize)]
enum Storage {
    /// Row-major `n x n` density, per unit source length.
    Dense(Vec<f64>),
    /// `K[i][j] = scale[i] * profile[|i - j|] * scale[j]`.
    Scaled { profile: Vec<f64>, scale: Vec<f64> },
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferKernel {
    source: Grid,
    target: Grid,
    storage: Storage,
    width: f64,
    /// Largest `|i - j|` with a non-zero entry.
    band: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let m = a.len().min(b.len());
    let (a, b) = (&a[..m], &b[..m]);
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// `out[i] = sum_{|i - j| <= band} profile[|i - j|] * v[j]`.
fn banded_toeplitz(exec: Exec, profile: &[f64], band: usize, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let reversed: Vec<f64> = profile[..=band.min(n - 1)].iter().rev().copied().collect();
    let last = reversed.len() - 1;
    exec.map_range(n, |i| {
        let lo = i.saturating_sub(band);
        let hi = (i + band + 1).min(n);
        // reversed[last - m] = profile[m]
        dot(&v[i..hi], profile) + dot(&v[lo..i], &reversed[last - (i - lo)..last])
    })
}

impl TransferKernel {
    /// Build from an explicit dense density on a single grid. The matrix is
    /// taken as is; no normalization is applied.
    pub fn from_dense(grid: Grid, density: Vec<f64>, width: f64) -> Result<Self> {
        let n = grid.len();
        ensure!(density.len() == n * n, "kernel needs {} entries, got {}", n * n, density.len());
        ensure!(
            density.iter().all(|v| v.is_finite() && *v >= 0.0),
            "kernel entries must be finite and non-negative"
        );
        Ok(Self {
            source: grid.clone(),
            target: grid,
            storage: Storage::Dense(density),
            width,
            band: n.saturating_sub(1),
        })
    }

    /// The ideal device: `K = identity / h`.
    pub fn identity(grid: &Grid) -> Self {
        let n = grid.len();
        let mut profile = vec![0.0; n.max(1)];
        profile[0] = 1.0 / grid.spacing();
        Self {
            source: grid.clone(),
            target: grid.clone(),
            storage: Storage::Scaled {
                profile,
                scale: vec![1.0; n],
            },
            width: 0.0,
            band: 0,
        }
    }

    pub fn source(&self) -> &Grid {
        &self.source
    }

    pub fn target(&self) -> &Grid {
        &self.target
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d[i * self.len() + j],
            Storage::Scaled { profile, scale } => scale[i] * profile[i.abs_diff(j)] * scale[j],
        }
    }

    pub fn row(&self, i: usize) -> Cow<'_, [f64]> {
        let n = self.len();
        match &self.storage {
            Storage::Dense(d) => Cow::Borrowed(&d[i * n..(i + 1) * n]),
            Storage::Scaled { .. } => Cow::Owned((0..n).map(|j| self.entry(i, j)).collect()),
        }
    }

    /// `h * sum_j K[i][j]` for every target node `i`.
    pub fn row_integrals(&self) -> Vec<f64> {
        let h = self.source.spacing();
        match &self.storage {
            Storage::Dense(d) => d.chunks(self.len()).map(|r| h * r.iter().sum::<f64>()).collect(),
            Storage::Scaled { profile, scale } => banded_toeplitz(Exec::default(), profile, self.band, scale)
                .iter()
                .zip(scale)
                .map(|(t, s)| h * s * t)
                .collect(),
        }
    }

    /// `h * sum_i K[i][j]` for every source node `j`.
    pub fn column_integrals(&self) -> Vec<f64> {
        let n = self.len();
        let h = self.target.spacing();
        match &self.storage {
            Storage::Dense(d) => {
                let mut cols = vec![0.0; n];
                for row in d.chunks(n) {
                    for (c, v) in cols.iter_mut().zip(row) {
                        *c += v;
                    }
                }
                cols.iter_mut().for_each(|c| *c *= h);
                cols
            }
            // symmetric
            Storage::Scaled { .. } => self.row_integrals(),
        }
    }

    /// Largest deviation of either marginal from one.
    pub fn marginal_error(&self) -> f64 {
        self.row_integrals()
            .into_iter()
            .chain(self.column_integrals())
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.apply_with(Exec::default(), samples)
    }

    pub fn apply_with(&self, exec: Exec, samples: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        ensure!(
            samples.len() == n,
            "sample length {} does not match kernel source grid length {n}",
            samples.len()
        );
        let h = self.source.spacing();
        Ok(match &self.storage {
            Storage::Dense(d) => exec.map_range(n, |i| {
                h * d[i * n..(i + 1) * n].iter().zip(samples).map(|(k, f)| k * f).sum::<f64>()
            }),
            Storage::Scaled { profile, scale } => {
                let scaled: Vec<f64> = samples.iter().zip(scale).map(|(f, s)| f * s).collect();
                banded_toeplitz(exec, profile, self.band, &scaled)
                    .iter()
                    .zip(scale)
                    .map(|(t, s)| h * s * t)
                    .collect()
            }
        })
    }
}

/// `out = K in`, see [`TransferKernel::apply`].
pub fn apply_kernel(kernel: &TransferKernel, samples: &[f64]) -> Result<Vec<f64>> {
    kernel.apply(samples)
}

/// Gaussian transfer kernel `∝ exp(-(x - x')² / 2 width²)`, normalized so both
/// discrete marginals equal one. A zero width gives the identity kernel.
pub fn gaussian_kernel(grid: &Grid, width: f64) -> Result<TransferKernel> {
    gaussian_kernel_with(Exec::default(), grid, width)
}

pub fn gaussian_kernel_with(exec: Exec, grid: &Grid, width: f64) -> Result<TransferKernel> {
    ensure!(width.is_finite() && width >= 0.0, "kernel width must be >= 0, got {width}");
    if width == 0.0 {
        return Ok(TransferKernel::identity(grid));
    }
    let n = grid.len();
    let h = grid.spacing();
    let periodic = grid.is_periodic();

    // Translation-invariant profile by lag; on periodic grids use the nearest image.
    let profile: Vec<f64> = (0..n)
        .map(|lag| {
            let d = if periodic { lag.min(n - lag) } else { lag } as f64 * h;
            (-d * d / (2.0 * width * width)).exp()
        })
        .collect();
    let band = if periodic {
        n - 1
    } else {
        profile.iter().rposition(|&v| v > 0.0).unwrap_or(0)
    };
    let matvec = |d: &[f64]| -> Vec<f64> { banded_toeplitz(exec, &profile, band, d).iter().map(|v| h * v).collect() };

    // Symmetric Sinkhorn scaling K = D G D with d_i (G d)_i h = 1.
    let mut d: Vec<f64> = matvec(&vec![1.0; n]).iter().map(|r| 1.0 / r.sqrt()).collect();
    for _ in 0..SINKHORN_MAX_ITER {
        let gd = matvec(&d);
        let err = d
            .iter()
            .zip(&gd)
            .map(|(a, b)| (a * b - 1.0).abs())
            .fold(0.0, f64::max);
        if err < MARGINAL_TOL * 0.1 {
            break;
        }
        d.iter_mut().zip(&gd).for_each(|(a, b)| *a = (*a / b).sqrt());
    }

    let kernel = TransferKernel {
        source: grid.clone(),
        target: grid.clone(),
        storage: Storage::Scaled { profile, scale: d },
        width,
        band,
    };
    let err = kernel.marginal_error();
    ensure!(
        err < MARGINAL_TOL,
        "kernel normalization did not converge (marginal error {err:.3e}, width {width})"
    );
    Ok(kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;
    use std::f64::consts::PI;

    fn gaussian(grid: &Grid, mean: f64, std: f64) -> Vec<f64> {
        grid.nodes()
            .iter()
            .map(|x| (-(x - mean).powi(2) / (2.0 * std * std)).exp() / (std * (2.0 * PI).sqrt()))
            .collect()
    }

    fn moments(grid: &Grid, f: &[f64]) -> (f64, f64, f64) {
        let x = grid.nodes();
        let m0 = integrate(grid, f).unwrap();
        let m1 = integrate(grid, &f.iter().zip(&x).map(|(f, x)| f * x).collect::<Vec<_>>()).unwrap() / m0;
        let var = integrate(grid, &f.iter().zip(&x).map(|(f, x)| f * (x - m1).powi(2)).collect::<Vec<_>>())
            .unwrap()
            / m0;
        (m0, m1, var.sqrt())
    }

    #[test]
    fn zero_width_is_identity() {
        let g = Grid::centered(0.0, 8.0, 257).unwrap();
        let k = gaussian_kernel(&g, 0.0).unwrap();
        let f = gaussian(&g, 0.3, 1.0);
        let out = k.apply(&f).unwrap();
        assert!(out.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(k.marginal_error() < 1e-12);
    }

    #[test]
    fn marginals_hold_for_several_widths() {
        let g = Grid::centered(0.0, 10.0, 401).unwrap();
        for w in [0.01, 0.3, 1.0, 4.0] {
            let k = gaussian_kernel(&g, w).unwrap();
            assert!(k.marginal_error() < 1e-10, "width {w}: {}", k.marginal_error());
            assert!((0..g.len()).all(|i| k.row(i).iter().all(|&v| v >= 0.0)));
        }
        let ring = Grid::periodic(0.0, 2.0 * PI, 128).unwrap();
        assert!(gaussian_kernel(&ring, 0.5).unwrap().marginal_error() < 1e-10);
    }

    #[test]
    fn widths_add_in_quadrature() {
        let (sigma, gamma): (f64, f64) = (1.0, 0.5);
        let g = Grid::centered(0.0, 8.0 * (sigma * sigma + gamma * gamma).sqrt(), 1025).unwrap();
        let out = gaussian_kernel(&g, gamma).unwrap().apply(&gaussian(&g, 0.0, sigma)).unwrap();
        let (m0, _, std) = moments(&g, &out);
        assert!((m0 - 1.0).abs() < 1e-10);
        let expected = (sigma * sigma + gamma * gamma).sqrt();
        assert!(((std - expected) / expected).abs() < 1e-6, "std {std} vs {expected}");
    }

    #[test]
    fn negative_width_rejected() {
        let g = Grid::line(0.0, 1.0, 16).unwrap();
        assert!(gaussian_kernel(&g, -0.1).is_err());
        let k = gaussian_kernel(&g, 0.2).unwrap();
        assert!(k.apply(&[1.0; 15]).is_err());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let g = Grid::centered(0.0, 6.0, 301).unwrap();
        let a = gaussian_kernel_with(Exec::Sequential, &g, 0.4).unwrap();
        let b = gaussian_kernel_with(Exec::Parallel, &g, 0.4).unwrap();
        assert!((0..g.len()).all(|i| a.row(i) == b.row(i)));
        let f = gaussian(&g, 0.5, 1.0);
        assert_eq!(a.apply_with(Exec::Sequential, &f).unwrap(), b.apply_with(Exec::Parallel, &f).unwrap());
    }
}
