//! Analytic constructors for the states used as evidence, and a named
//! catalog of them with closed-form moment tables.

mod catalog;

pub use catalog::{catalog, catalog_specs, observable, MomentOracle, StateCatalogEntry, StateSpec};

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{ensure, Error, Result};
use crate::numerics::{Grid, Grid2D, QuadratureRule, StencilAccuracy};
use crate::qstate::{PhysicalParams, Representation, WaveFunction};

/// Highest oscillator level accepted by [`qo_eigenstate`].
pub const MAX_QO_LEVEL: usize = 12;

/// Half-widths (in units of the state's scale) a line grid must cover.
pub const SPAN_SIGMAS: f64 = 8.0;

fn require_span(grid: &Grid, center: f64, half_width: f64, what: &str) -> Result<()> {
    let slack = 1e-9 * half_width.max(1.0);
    if grid.lower() > center - half_width + slack || grid.upper() < center + half_width - slack {
        return Err(Error::Truncation(format!(
            "{what} needs [{}, {}] but the grid covers [{}, {}]",
            center - half_width,
            center + half_width,
            grid.lower(),
            grid.upper()
        )));
    }
    Ok(())
}

/// Normalized Hermite functions `psi_0..=psi_n` at `xi`.
pub fn hermite_functions(n: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(PI.powf(-0.25) * (-xi * xi / 2.0).exp());
    if n >= 1 {
        out.push(SQRT_2 * xi * out[0]);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Harmonic oscillator eigenstate `n` in the coordinate representation.
pub fn qo_eigenstate(n: usize, params: &PhysicalParams, grid: &Grid) -> Result<WaveFunction> {
    if n > MAX_QO_LEVEL {
        return Err(Error::UnsupportedOrder {
            order: n,
            max: MAX_QO_LEVEL,
        });
    }
    ensure!(!grid.is_periodic(), "oscillator eigenstates need a line grid");
    let w = params.require_omega()?;
    let ell = (params.hbar / (params.mass * w)).sqrt();
    let turning = (2.0 * n as f64 + 1.0).sqrt();
    require_span(grid, 0.0, (turning + SPAN_SIGMAS) * ell, "oscillator eigenstate")?;
    WaveFunction::from_fn(grid.clone(), *params, Representation::Coordinate, |p| {
        Complex64::new(hermite_functions(n, p[0] / ell)[n] / ell.sqrt(), 0.0)
    })
}

/// Line grid wide enough for oscillator levels up to `n`.
pub fn qo_grid(n: usize, params: &PhysicalParams, nodes: usize) -> Result<Grid> {
    let w = params.require_omega()?;
    let ell = (params.hbar / (params.mass * w)).sqrt();
    let half = ((2.0 * n as f64 + 1.0).sqrt() + SPAN_SIGMAS + 1.0) * ell;
    Ok(Grid::centered(0.0, half, nodes)?.with_stencil(StencilAccuracy::Sixth))
}

/// Number eigenstate `exp(-i n phi) / sqrt(2 pi)` on a periodic `[0, 2pi)` grid.
pub fn qo_phase_state(n: u32, params: &PhysicalParams, grid: &Grid) -> Result<WaveFunction> {
    ensure!(grid.is_periodic(), "phase states need a periodic grid");
    ensure!(
        grid.lower().abs() < 1e-12 && (grid.upper() - 2.0 * PI).abs() < 1e-12,
        "phase states need the grid [0, 2pi), got [{}, {})",
        grid.lower(),
        grid.upper()
    );
    let n = n as f64;
    WaveFunction::from_fn(grid.clone(), *params, Representation::Phase, |p| {
        Complex64::from_polar((2.0 * PI).sqrt().recip(), -n * p[0])
    })
}

/// Periodic time-representation analogue of the phase state:
/// `exp(-2 pi i n tau / T) / sqrt(T)` on `[0, T)`.
pub fn time_phase_state(n: u32, params: &PhysicalParams, grid: &Grid) -> Result<WaveFunction> {
    ensure!(grid.is_periodic(), "time phase states need a periodic grid");
    let period = grid.upper() - grid.lower();
    let freq = 2.0 * PI * n as f64 / period;
    WaveFunction::from_fn(grid.clone(), *params, Representation::Time, |p| {
        Complex64::from_polar(period.sqrt().recip(), -freq * p[0])
    })
}

/// Gaussian packet with `|Psi| ∝ exp(-(x - x0)^2 / 4 sigma^2)` and phase `k x`.
pub fn gaussian_packet(x0: f64, sigma: f64, k: f64, params: &PhysicalParams, grid: &Grid) -> Result<WaveFunction> {
    free_packet_at(x0, sigma, k, 0.0, params, grid)
}

/// Complex width `sigma (1 + i hbar t / 2 m sigma^2)` of a freely evolving packet.
fn evolved_width(sigma: f64, t: f64, params: &PhysicalParams) -> Complex64 {
    Complex64::new(sigma, params.hbar * t / (2.0 * params.mass * sigma))
}

/// The Gaussian packet after free evolution for time `t`.
pub fn free_packet_at(
    x0: f64,
    sigma: f64,
    k: f64,
    t: f64,
    params: &PhysicalParams,
    grid: &Grid,
) -> Result<WaveFunction> {
    ensure!(sigma > 0.0 && sigma.is_finite(), "packet width must be positive, got {sigma}");
    ensure!(x0.is_finite() && k.is_finite() && t.is_finite(), "packet parameters must be finite");
    ensure!(!grid.is_periodic(), "packets need a line grid");
    let s = evolved_width(sigma, t, params);
    let center = x0 + params.hbar * k * t / params.mass;
    require_span(grid, center, SPAN_SIGMAS * s.norm(), "Gaussian packet")?;
    let pref = (2.0 * PI * sigma * sigma).powf(-0.25) * (s / sigma).sqrt().inv();
    let omega = params.hbar * k * k / (2.0 * params.mass);
    WaveFunction::from_fn(grid.clone(), *params, Representation::Coordinate, |p| {
        let u = p[0] - center;
        let gauss = (-(u * u) / (4.0 * sigma * s)).exp();
        pref * gauss * Complex64::from_polar(1.0, k * (p[0] - x0) - omega * t)
    })
}

/// Line grid covering a packet with `nodes` points.
pub fn packet_grid(x0: f64, sigma: f64, k: f64, t: f64, params: &PhysicalParams, nodes: usize) -> Result<Grid> {
    let s = evolved_width(sigma, t, params).norm();
    let center = x0 + params.hbar * k * t / params.mass;
    Ok(Grid::centered(center, (SPAN_SIGMAS + 2.0) * s, nodes)?.with_stencil(StencilAccuracy::Sixth))
}

fn well_corners(a: f64, b: f64) -> ([f64; 2], [f64; 2]) {
    let r = SQRT_2.recip();
    ([-b * r, 0.0], [a * r, (a + b) * r])
}

/// Square grid on the bounding box of the rotated well whose spacing puts
/// the well's edges on grid diagonals. The node count is the smallest value
/// at or above `target_nodes` achieving that, or `target_nodes` itself when
/// `a / b` is not a ratio of small integers.
pub fn well_grid(a: f64, b: f64, target_nodes: usize) -> Result<Grid2D> {
    ensure!(0.0 < a && a < b, "the well needs 0 < a < b, got a = {a}, b = {b}");
    let aligned = |n: usize| {
        let m = (n - 1) as f64;
        [2.0 * a * m / (a + b), 2.0 * b * m / (a + b)]
            .iter()
            .all(|v| (v - v.round()).abs() < 1e-9)
    };
    let n = (target_nodes..target_nodes + 1024)
        .find(|&n| aligned(n))
        .unwrap_or(target_nodes);
    let (lo, hi) = well_corners(a, b);
    let axis = |l: f64, h: f64| -> Result<Grid> {
        Ok(Grid::line(l, h, n)?
            .with_quadrature(QuadratureRule::Trapezoid)
            .with_stencil(StencilAccuracy::Sixth))
    };
    Grid2D::new(axis(lo[0], hi[0])?, axis(lo[1], hi[1])?)
}

/// Ground state of the rectangular well `0 < x1 < a`, `0 < y1 < b` with
/// `x1 = (x + y)/sqrt 2`, `y1 = (y - x)/sqrt 2`.
pub fn well2d_ground(a: f64, b: f64, params: &PhysicalParams, grid: &Grid2D) -> Result<WaveFunction> {
    ensure!(0.0 < a && a < b, "the well needs 0 < a < b, got a = {a}, b = {b}");
    let (lo, hi) = well_corners(a, b);
    let tol = 1e-9 * b;
    ensure!(
        grid.x.lower() <= lo[0] + tol
            && grid.x.upper() >= hi[0] - tol
            && grid.y.lower() <= lo[1] + tol
            && grid.y.upper() >= hi[1] - tol,
        "grid does not cover the rotated well"
    );
    let edge = 1e-12 * b;
    WaveFunction::from_fn(grid.clone(), *params, Representation::Coordinate, |p| {
        let x1 = (p[0] + p[1]) / SQRT_2;
        let y1 = (p[1] - p[0]) / SQRT_2;
        if x1 <= edge || x1 >= a - edge || y1 <= edge || y1 >= b - edge {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new((PI * x1 / a).sin() * (PI * y1 / b).sin(), 0.0)
        }
    })
}

/// Closed-form ground energy `(hbar^2 pi^2 / 2m)(1/a^2 + 1/b^2)` of the well.
pub fn well_energy(a: f64, b: f64, params: &PhysicalParams) -> f64 {
    params.hbar * params.hbar * PI * PI / (2.0 * params.mass) * (1.0 / (a * a) + 1.0 / (b * b))
}

/// Kinetic energy as the quadratic form `sum_i |p_i Psi|^2 / 2m`.
///
/// For a state with a kink (the well ground state at its walls) this only
/// needs first derivatives, so it converges faster than `(Psi, T Psi)`.
pub fn kinetic_energy_form(wf: &WaveFunction) -> Result<f64> {
    let p = wf.params();
    let domain = wf.domain();
    let mut total = 0.0;
    for axis in 0..domain.dim() {
        let d = domain.derivative(wf.samples(), axis, 1)?;
        total += domain.norm_sqr(&d)?;
    }
    Ok(p.hbar * p.hbar * total / (2.0 * p.mass))
}
