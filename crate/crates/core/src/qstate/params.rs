use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Physical constants of a scenario, in whatever unit system the caller uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
    /// Angular frequency of the oscillator, when there is one.
    pub omega: Option<f64>,
    pub k_b: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            omega: None,
            k_b: 1.0,
        }
    }
}

impl PhysicalParams {
    pub fn new(hbar: f64, mass: f64, omega: Option<f64>, k_b: f64) -> Result<Self> {
        let p = Self { hbar, mass, omega, k_b };
        p.validate()?;
        Ok(p)
    }

    /// Natural units with an oscillator frequency.
    pub fn oscillator(omega: f64) -> Result<Self> {
        Self::new(1.0, 1.0, Some(omega), 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.hbar > 0.0 && self.hbar.is_finite(), "hbar must be positive, got {}", self.hbar);
        ensure!(self.mass > 0.0 && self.mass.is_finite(), "mass must be positive, got {}", self.mass);
        if let Some(w) = self.omega {
            ensure!(w > 0.0 && w.is_finite(), "omega must be positive, got {w}");
        }
        ensure!(self.k_b >= 0.0 && self.k_b.is_finite(), "k_B must be non-negative, got {}", self.k_b);
        Ok(())
    }

    pub fn require_omega(&self) -> Result<f64> {
        self.omega
            .ok_or_else(|| crate::error::contract("an oscillator frequency omega is required"))
    }

    /// Ground-state position spread `sqrt(hbar / 2 m omega)`.
    pub fn oscillator_length(&self) -> Result<f64> {
        Ok((self.hbar / (2.0 * self.mass * self.require_omega()?)).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PhysicalParams::new(0.0, 1.0, None, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, -1.0, None, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, Some(0.0), 1.0).is_err());
        let p = PhysicalParams::oscillator(2.0).unwrap();
        assert!((p.oscillator_length().unwrap() - 0.5).abs() < 1e-15);
        assert!(PhysicalParams::default().require_omega().is_err());
    }
}
