//! Closed-form predictions for a Gaussian packet and an oscillator ground
//! state observed through Gaussian measurement channels.

use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::qstate::PhysicalParams;

/// A Gaussian input packet and the widths of the density and current channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnexScenario {
    pub x0: f64,
    pub sigma: f64,
    pub k: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub params: PhysicalParams,
}

impl AnnexScenario {
    pub fn new(x0: f64, sigma: f64, k: f64, gamma: f64, lambda: f64, params: PhysicalParams) -> Result<Self> {
        let s = Self {
            x0,
            sigma,
            k,
            gamma,
            lambda,
            params,
        };
        s.validate()?;
        Ok(s)
    }

    /// The oscillator ground state `x0 = 0, k = 0, sigma = sqrt(hbar / 2 m omega)`.
    pub fn oscillator(gamma: f64, lambda: f64, params: PhysicalParams) -> Result<Self> {
        let sigma = params.oscillator_length()?;
        Self::new(0.0, sigma, 0.0, gamma, lambda, params)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.sigma > 0.0 && self.sigma.is_finite(), "sigma must be positive, got {}", self.sigma);
        ensure!(self.gamma >= 0.0 && self.gamma.is_finite(), "gamma must be non-negative, got {}", self.gamma);
        ensure!(self.lambda >= 0.0 && self.lambda.is_finite(), "lambda must be non-negative, got {}", self.lambda);
        ensure!(self.x0.is_finite() && self.k.is_finite(), "x0 and k must be finite");
        self.params.validate()
    }

    /// `sigma^2 + gamma^2`, the variance of the output density.
    pub fn rho_var(&self) -> f64 {
        self.sigma * self.sigma + self.gamma * self.gamma
    }

    /// `sigma^2 + lambda^2`, the variance of the output current profile.
    pub fn current_var(&self) -> f64 {
        self.sigma * self.sigma + self.lambda * self.lambda
    }

    /// `sigma^2 + 2 gamma^2 - lambda^2`; the output momentum spread is finite only when this is positive.
    pub fn momentum_domain(&self) -> f64 {
        2.0 * self.rho_var() - self.current_var()
    }

    /// Width of the `J^2 / rho` integrand, when finite.
    pub fn effective_width(&self) -> Option<f64> {
        let d = self.momentum_domain();
        (d > 0.0).then(|| (self.rho_var() * self.current_var() / d).sqrt())
    }
}

/// Which trailing term of the closed-form momentum error the numbers support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumBranch {
    /// `ε{Δp} = |Δ_out p - hbar k|`, the expression as printed.
    TrailingK,
    /// `ε{Δp} = |Δ_out p - hbar / 2 sigma|`, subtracting the input spread.
    TrailingInputSpread,
}

impl MomentumBranch {
    pub fn label(&self) -> &'static str {
        match self {
            MomentumBranch::TrailingK => "trailing_hbar_k",
            MomentumBranch::TrailingInputSpread => "trailing_hbar_over_2sigma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PacketPredictions {
    pub rho_out_std: f64,
    pub current_out_std: f64,
    pub eps_mean_x: f64,
    pub eps_mean_p: f64,
    pub eps_corr_xp: f64,
    pub eps_std_x: f64,
    pub std_x_out: f64,
    pub std_p_in: f64,
    pub std_p_out: f64,
    pub eps_std_p_trailing_k: f64,
    pub eps_std_p_trailing_input_spread: f64,
}

impl PacketPredictions {
    pub fn eps_std_p(&self, branch: MomentumBranch) -> f64 {
        match branch {
            MomentumBranch::TrailingK => self.eps_std_p_trailing_k,
            MomentumBranch::TrailingInputSpread => self.eps_std_p_trailing_input_spread,
        }
    }
}

pub fn annex_packet_predictions(s: &AnnexScenario) -> Result<PacketPredictions> {
    s.validate()?;
    let d = s.momentum_domain();
    if d <= 0.0 {
        return Err(Error::OutOfDomain(format!(
            "the output momentum spread needs sigma^2 + 2 gamma^2 - lambda^2 > 0, got {d}"
        )));
    }
    let hbar = s.params.hbar;
    let (vr, vj) = (s.rho_var(), s.current_var());
    let bracket = s.k * s.k * vr / (vj * d).sqrt() - s.k * s.k + 1.0 / (4.0 * vr);
    let std_p_out = hbar * bracket.max(0.0).sqrt();
    let std_p_in = hbar / (2.0 * s.sigma);
    Ok(PacketPredictions {
        rho_out_std: vr.sqrt(),
        current_out_std: vj.sqrt(),
        eps_mean_x: 0.0,
        eps_mean_p: 0.0,
        eps_corr_xp: 0.0,
        eps_std_x: vr.sqrt() - s.sigma,
        std_x_out: vr.sqrt(),
        std_p_in,
        std_p_out,
        eps_std_p_trailing_k: (std_p_out - hbar * s.k).abs(),
        eps_std_p_trailing_input_spread: (std_p_out - std_p_in).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatorPredictions {
    pub mean_h_in: f64,
    pub std_h_in: f64,
    pub mean_h_out: f64,
    pub std_h_out: f64,
    pub eps_mean_h: f64,
    pub eps_std_h: f64,
}

pub fn annex_oscillator_predictions(s: &AnnexScenario) -> Result<OscillatorPredictions> {
    s.validate()?;
    let p = &s.params;
    let w = p.require_omega()?;
    let ground = p.oscillator_length()?;
    ensure!(
        (s.sigma - ground).abs() <= 1e-9,
        "sigma {} differs from the ground-state width {ground}",
        s.sigma
    );
    ensure!(s.x0 == 0.0 && s.k == 0.0, "the oscillator scenario needs x0 = 0 and k = 0");
    let (h, m, g2) = (p.hbar, p.mass, s.gamma * s.gamma);
    let q = h + 2.0 * m * w * g2;
    let mean_h_in = h * w / 2.0;
    let mean_h_out = w * (h * h + q * q) / (4.0 * q);
    let std_h_out = 2f64.sqrt() * m * w * w * g2 * (h + m * w * g2) / q;
    Ok(OscillatorPredictions {
        mean_h_in,
        std_h_in: 0.0,
        mean_h_out,
        std_h_out,
        eps_mean_h: (mean_h_out - mean_h_in).abs(),
        eps_std_h: std_h_out,
    })
}
