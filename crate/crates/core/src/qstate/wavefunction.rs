use num_complex::Complex64;
use serde::Serialize;

use super::PhysicalParams;
use crate::error::{ensure, Error, Result};
use crate::numerics::Domain;

/// Tolerance on `|∫|Ψ|² - 1|` accepted as "normalized" by the estimators.
pub const NORM_TOL: f64 = 1e-9;

/// Which variable the samples are a function of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Representation {
    Coordinate,
    Phase,
    Time,
}

#[derive(Debug, Clone, Serialize)]
pub struct WaveFunction {
    domain: Domain,
    #[serde(skip)]
    samples: Vec<Complex64>,
    params: PhysicalParams,
    representation: Representation,
}

impl WaveFunction {
    /// Wrap raw samples. The result is not normalized; see [`WaveFunction::normalize`].
    pub fn new(
        domain: impl Into<Domain>,
        samples: Vec<Complex64>,
        params: PhysicalParams,
        representation: Representation,
    ) -> Result<Self> {
        let domain = domain.into();
        ensure!(
            samples.len() == domain.len(),
            "wave function has {} samples for a domain of {} nodes",
            samples.len(),
            domain.len()
        );
        ensure!(
            samples.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "wave function samples must be finite"
        );
        params.validate()?;
        Ok(Self {
            domain,
            samples,
            params,
            representation,
        })
    }

    /// Sample `f` at every node, then normalize.
    pub fn from_fn(
        domain: impl Into<Domain>,
        params: PhysicalParams,
        representation: Representation,
        f: impl Fn([f64; 2]) -> Complex64,
    ) -> Result<Self> {
        let domain = domain.into();
        let samples = (0..domain.len()).map(|i| f(domain.node(i))).collect();
        Self::new(domain, samples, params, representation)?.normalize()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn norm_sqr(&self) -> f64 {
        self.domain
            .norm_sqr(&self.samples)
            .expect("samples match the domain by construction")
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < NORM_TOL
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        ensure!((n - 1.0).abs() < NORM_TOL, "wave function is not normalized (norm² = {n})");
        Ok(())
    }

    pub fn normalize(&self) -> Result<WaveFunction> {
        let n = self.norm_sqr();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::DegenerateState(n));
        }
        let s = 1.0 / n.sqrt();
        Ok(Self {
            samples: self.samples.iter().map(|z| z * s).collect(),
            ..self.clone()
        })
    }

    /// Multiply by `exp(i alpha)`.
    pub fn with_global_phase(&self, alpha: f64) -> WaveFunction {
        let phase = Complex64::from_polar(1.0, alpha);
        Self {
            samples: self.samples.iter().map(|z| z * phase).collect(),
            ..self.clone()
        }
    }

    /// `(self, other)`; both must live on the same domain.
    pub fn overlap(&self, other: &WaveFunction) -> Result<Complex64> {
        ensure!(self.domain.matches(&other.domain), "wave functions live on different grids");
        self.domain.inner(&self.samples, &other.samples)
    }
}
