use serde::Serialize;

use super::WaveFunction;
use crate::error::{ensure, Result};
use crate::numerics::Domain;

/// Below this density the current is set to zero.
pub const DENSITY_FLOOR: f64 = 1e-14;

/// Probability density and probability current of a state.
#[derive(Debug, Clone, Serialize)]
pub struct DensityCurrent {
    pub domain: Domain,
    pub rho: Vec<f64>,
    /// One array per axis.
    pub current: Vec<Vec<f64>>,
}

impl DensityCurrent {
    pub fn new(domain: Domain, rho: Vec<f64>, current: Vec<Vec<f64>>) -> Result<Self> {
        ensure!(rho.len() == domain.len(), "density length does not match the domain");
        ensure!(current.len() == domain.dim(), "need one current array per axis");
        ensure!(
            current.iter().all(|j| j.len() == domain.len()),
            "current length does not match the domain"
        );
        ensure!(
            rho.iter().all(|r| r.is_finite() && *r >= 0.0),
            "density must be finite and non-negative"
        );
        ensure!(
            current.iter().flatten().all(|j| j.is_finite()),
            "current must be finite"
        );
        Ok(Self { domain, rho, current })
    }

    pub fn total(&self) -> f64 {
        self.domain.integrate(&self.rho).expect("lengths checked on construction")
    }

    /// `∫ J` along `axis`.
    pub fn current_integral(&self, axis: usize) -> f64 {
        self.domain
            .integrate(&self.current[axis])
            .expect("lengths checked on construction")
    }
}

/// `rho = |Psi|^2` and `J = (hbar/m) Im(conj(Psi) grad Psi)`.
pub fn density_current(wf: &WaveFunction) -> Result<DensityCurrent> {
    density_current_with(wf, DENSITY_FLOOR)
}

/// As [`density_current`], zeroing the current only where `rho < floor`.
pub fn density_current_with(wf: &WaveFunction, floor: f64) -> Result<DensityCurrent> {
    ensure!(floor >= 0.0, "density floor must be non-negative, got {floor}");
    let domain = wf.domain().clone();
    let psi = wf.samples();
    let p = wf.params();
    let rho: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
    let mut current = Vec::with_capacity(domain.dim());
    for axis in 0..domain.dim() {
        let d = domain.derivative(psi, axis, 1)?;
        current.push(
            psi.iter()
                .zip(&d)
                .zip(&rho)
                .map(|((z, dz), r)| {
                    if *r < floor {
                        0.0
                    } else {
                        p.hbar / p.mass * (z.conj() * dz).im
                    }
                })
                .collect(),
        );
    }
    DensityCurrent::new(domain, rho, current)
}
