use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::numerics::Grid;
use crate::qstate::PhysicalParams;

/// Largest `|χ''|` tolerated at the upper frequency edge.
pub const TAIL_TOL: f64 = 1e-8;

/// Imaginary part of a susceptibility sampled on `ω >= 0`; negative frequencies
/// follow from oddness.
#[derive(Debug, Clone, Serialize)]
pub struct SusceptibilitySpectrum {
    grid: Grid,
    chi: Vec<f64>,
}

impl SusceptibilitySpectrum {
    pub fn new(grid: Grid, chi: Vec<f64>) -> Result<Self> {
        ensure!(!grid.is_periodic(), "frequency grid must be a line grid");
        ensure!(grid.lower() >= 0.0, "frequency grid must start at or above zero");
        ensure!(chi.len() == grid.len(), "spectrum length does not match the grid");
        ensure!(chi.iter().all(|c| c.is_finite()), "spectrum samples must be finite");
        Ok(Self { grid, chi })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let chi = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, chi)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }
}

/// `(ħ/2π) ∫ coth(ħω / 2 k_B T) χ''(ω) dω` over the whole frequency axis.
pub fn fdt_dispersion(spec: &SusceptibilitySpectrum, temperature: f64, params: &PhysicalParams) -> Result<f64> {
    params.validate()?;
    ensure!(
        temperature > 0.0 && temperature.is_finite(),
        "temperature must be positive, got {temperature}"
    );
    let tail = spec.chi.last().copied().unwrap_or(0.0).abs();
    if tail >= TAIL_TOL {
        return Err(Error::NonIntegrable(format!(
            "|chi''| = {tail:.3e} at the grid edge {} (needs < {TAIL_TOL:e})",
            spec.grid.upper()
        )));
    }
    let (hbar, kt) = (params.hbar, params.k_b * temperature);
    let w = spec.grid.weights();
    let omega = spec.grid.nodes();
    let mut total = 0.0;
    for i in 0..omega.len() {
        let x = hbar * omega[i] / (2.0 * kt);
        let f = if omega[i] == 0.0 {
            // coth(x) χ'' → (2 k_B T / ħ) dχ''/dω at the origin
            let slope = if omega.len() > 1 { spec.chi[1] / omega[1] } else { 0.0 };
            2.0 * kt / hbar * slope
        } else {
            spec.chi[i] / x.tanh()
        };
        total += w[i] * f;
    }
    Ok(hbar / std::f64::consts::PI * total)
}

/// Gaussian thermodynamic fluctuation model of one macroscopic quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoModel {
    /// `∂Ā/∂X̄_α`.
    pub gradient: Vec<f64>,
    /// `∂²S̄/∂X̄_α∂X̄_β`, negative definite.
    pub hessian: Vec<Vec<f64>>,
    pub k_b: f64,
}

/// `k_B gᵀ (−H)⁻¹ g`.
pub fn thermo_dispersion(model: &ThermoModel) -> Result<f64> {
    let n = model.gradient.len();
    ensure!(n > 0, "gradient is empty");
    ensure!(model.k_b >= 0.0 && model.k_b.is_finite(), "k_B must be non-negative");
    ensure!(
        model.hessian.len() == n && model.hessian.iter().all(|r| r.len() == n),
        "hessian must be {n} x {n}"
    );
    let h = DMatrix::from_fn(n, n, |i, j| model.hessian[i][j]);
    let asym = (&h - h.transpose()).abs().max();
    ensure!(asym <= 1e-12 * h.abs().max().max(1.0), "hessian is not symmetric");
    let neg = -h;
    let chol = neg
        .cholesky()
        .ok_or_else(|| crate::error::contract("entropy hessian is not negative definite"))?;
    let g = DVector::from_vec(model.gradient.clone());
    let x = chol.solve(&g);
    Ok(model.k_b * g.dot(&x))
}
