use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::exec::Exec;
use crate::numerics::{gaussian_kernel_with, Domain, Grid, TransferKernel};
use crate::qstate::{DensityCurrent, EstimatorReport, OperatorSpec, PhysicalParams, DENSITY_FLOOR};

const MARGINAL_TOL: f64 = 1e-10;

/// Default density floor of [`out_estimate`].
pub const OUT_DENSITY_FLOOR: f64 = DENSITY_FLOOR;

/// A quantum measuring device on a line: `Γ` acts on the density and `Λ` on the current.
#[derive(Debug, Clone)]
pub struct MeasurementChannel {
    gamma: Arc<TransferKernel>,
    lambda: Arc<TransferKernel>,
}

impl MeasurementChannel {
    pub fn new(gamma: Arc<TransferKernel>, lambda: Arc<TransferKernel>) -> Result<Self> {
        ensure!(
            !gamma.source().is_periodic() && gamma.source().matches(lambda.source()),
            "density and current kernels must share one line grid"
        );
        for (name, k) in [("density", &gamma), ("current", &lambda)] {
            let err = k.marginal_error();
            ensure!(err < MARGINAL_TOL, "{name} kernel marginal error {err:.3e} exceeds {MARGINAL_TOL:e}");
        }
        Ok(Self { gamma, lambda })
    }

    /// Gaussian kernels of widths `gamma` and `lambda`.
    pub fn gaussian(grid: &Grid, gamma: f64, lambda: f64) -> Result<Self> {
        Self::gaussian_with(Exec::default(), grid, gamma, lambda)
    }

    pub fn gaussian_with(exec: Exec, grid: &Grid, gamma: f64, lambda: f64) -> Result<Self> {
        let g = Arc::new(gaussian_kernel_with(exec, grid, gamma)?);
        let l = if lambda == gamma {
            g.clone()
        } else {
            Arc::new(gaussian_kernel_with(exec, grid, lambda)?)
        };
        Self::new(g, l)
    }

    /// The ideal device.
    pub fn ideal(grid: &Grid) -> Self {
        let k = Arc::new(TransferKernel::identity(grid));
        Self {
            gamma: k.clone(),
            lambda: k,
        }
    }

    pub fn gamma(&self) -> &TransferKernel {
        &self.gamma
    }

    pub fn lambda(&self) -> &TransferKernel {
        &self.lambda
    }

    pub fn grid(&self) -> &Grid {
        self.gamma.source()
    }
}

/// `rho_out = Γ rho_in`, `J_out = Λ J_in`.
pub fn qms_apply(channel: &MeasurementChannel, dc: &DensityCurrent) -> Result<DensityCurrent> {
    qms_apply_with(Exec::default(), channel, dc)
}

pub fn qms_apply_with(exec: Exec, channel: &MeasurementChannel, dc: &DensityCurrent) -> Result<DensityCurrent> {
    let grid = line_grid(&dc.domain)?;
    ensure!(grid.matches(channel.grid()), "channel grid does not match the density grid");
    let rho = channel.gamma.apply_with(exec, &dc.rho)?;
    let current = channel.lambda.apply_with(exec, &dc.current[0])?;
    DensityCurrent::new(dc.domain.clone(), rho, vec![current])
}

fn line_grid(domain: &Domain) -> Result<&Grid> {
    match domain {
        Domain::One(g) if !g.is_periodic() => Ok(g),
        _ => Err(crate::error::contract("measurement channels act on line grids only")),
    }
}

/// Means, deviations and pairwise correlations of several observables in an out-state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutEstimates {
    pub means: Vec<Complex64>,
    pub stds: Vec<f64>,
    /// `correlations[i][j] = C(A_i, A_j)`.
    pub correlations: Vec<Vec<Complex64>>,
    /// `|∫ dJ/dx|`, zero for a current that vanishes at the grid ends.
    pub continuity_residual: f64,
}

impl OutEstimates {
    pub fn report(&self, i: usize) -> EstimatorReport {
        EstimatorReport {
            mean: self.means[i],
            std: self.stds[i],
            correlation: None,
        }
    }

    pub fn report_pair(&self, i: usize, j: usize) -> EstimatorReport {
        EstimatorReport {
            correlation: Some(self.correlations[i][j]),
            ..self.report(i)
        }
    }
}

/// `Psi e^{-iΦ}` and its first two derivatives with the phase factor stripped,
/// all expressed through `rho` and `J`.
struct Stripped {
    amplitude: Vec<f64>,
    first: Vec<Complex64>,
    second: Vec<Complex64>,
    continuity_residual: f64,
}

fn stripped(dc: &DensityCurrent, params: &PhysicalParams, floor: f64) -> Result<Stripped> {
    let grid = line_grid(&dc.domain)?;
    ensure!(floor >= 0.0, "density floor must be non-negative, got {floor}");
    let domain = Domain::One(grid.clone());
    let j = &dc.current[0];
    let u: Vec<f64> = dc.rho.iter().map(|r| r.sqrt()).collect();
    let du = domain.derivative(&u, 0, 1)?;
    let d2u = domain.derivative(&u, 0, 2)?;
    let dj = domain.derivative(j, 0, 1)?;
    let ratio = params.mass / params.hbar;
    let n = u.len();
    let mut first = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    for i in 0..n {
        if dc.rho[i] < floor || u[i] == 0.0 {
            first.push(Complex64::new(du[i], 0.0));
            second.push(Complex64::new(d2u[i], 0.0));
            continue;
        }
        let v = ratio * j[i] / u[i];
        first.push(Complex64::new(du[i], v));
        second.push(Complex64::new(d2u[i] - v * (v / u[i]), ratio * dj[i] / u[i]));
    }
    let continuity_residual = domain.integrate(&dj)?.abs();
    Ok(Stripped {
        amplitude: u,
        first,
        second,
        continuity_residual,
    })
}

/// `e^{-iΦ} A Psi` for an operator of derivative order at most two in `x`.
fn stripped_action(s: &Stripped, grid: &Grid, op: &OperatorSpec) -> Result<Vec<Complex64>> {
    if op.max_axis() > 0 {
        return Err(Error::UnsupportedOperator(format!("{op} acts on more than one axis")));
    }
    let nf = op.normal_form()?;
    if nf.max_order() > 2 {
        return Err(Error::UnsupportedOperator(format!(
            "{op} has derivative order {} (at most 2 is computable from density and current)",
            nf.max_order()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for term in nf.terms() {
        let order = term.order();
        for (i, o) in out.iter_mut().enumerate() {
            let c = term.coefficient_at([grid.node(i), 0.0]);
            let base = match order {
                0 => Complex64::new(s.amplitude[i], 0.0),
                1 => s.first[i],
                _ => s.second[i],
            };
            *o += c * base;
        }
    }
    Ok(out)
}

/// Out-state estimators of several observables at once.
pub fn out_estimates(
    dc: &DensityCurrent,
    ops: &[OperatorSpec],
    params: &PhysicalParams,
    floor: f64,
) -> Result<OutEstimates> {
    params.validate()?;
    let s = stripped(dc, params, floor)?;
    let grid = line_grid(&dc.domain)?;
    let w = grid.weights();
    let mut means = Vec::with_capacity(ops.len());
    let mut deviations = Vec::with_capacity(ops.len());
    for op in ops {
        let a = stripped_action(&s, grid, op)?;
        let mean: Complex64 = w.iter().zip(&s.amplitude).zip(&a).map(|((w, u), a)| a * (w * u)).sum();
        deviations.push(a.iter().zip(&s.amplitude).map(|(a, u)| a - mean * u).collect::<Vec<_>>());
        means.push(mean);
    }
    let inner = |f: &[Complex64], g: &[Complex64]| -> Complex64 {
        w.iter().zip(f).zip(g).map(|((w, f), g)| f.conj() * g * *w).sum()
    };
    let correlations: Vec<Vec<Complex64>> = deviations
        .iter()
        .map(|f| deviations.iter().map(|g| inner(f, g)).collect())
        .collect();
    let stds = (0..ops.len()).map(|i| correlations[i][i].re.max(0.0).sqrt()).collect();
    Ok(OutEstimates {
        means,
        stds,
        correlations,
        continuity_residual: s.continuity_residual,
    })
}

/// Mean and standard deviation of `op` in the state described by `dc`.
pub fn out_estimate(dc: &DensityCurrent, op: &OperatorSpec, params: &PhysicalParams) -> Result<EstimatorReport> {
    out_estimate_with(dc, op, params, OUT_DENSITY_FLOOR)
}

/// As [`out_estimate`], dropping the `J^2 / rho` and `J' / rho^½` terms where `rho < floor`.
pub fn out_estimate_with(
    dc: &DensityCurrent,
    op: &OperatorSpec,
    params: &PhysicalParams,
    floor: f64,
) -> Result<EstimatorReport> {
    Ok(out_estimates(dc, std::slice::from_ref(op), params, floor)?.report(0))
}

/// `n`-th central moment of a multiplicative observable, from the density alone.
pub fn out_central_moment(dc: &DensityCurrent, op: &OperatorSpec, n: usize) -> Result<f64> {
    ensure!(n >= 1, "moment order must be at least 1");
    let nf = op.normal_form()?;
    if nf.max_order() > 0 {
        return Err(Error::UnsupportedOperator(format!(
            "higher moments of {op} are not determined by density and current"
        )));
    }
    let values: Vec<f64> = (0..dc.domain.len())
        .map(|i| {
            let p = dc.domain.node(i);
            nf.terms().iter().map(|t| t.coefficient_at(p)).sum::<Complex64>().re
        })
        .collect();
    let weighted = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
        let v: Vec<f64> = values.iter().zip(&dc.rho).map(|(a, r)| f(*a) * r).collect();
        dc.domain.integrate(&v)
    };
    let mean = weighted(&|a| a)?;
    weighted(&|a| (a - mean).powi(n as i32))
}
