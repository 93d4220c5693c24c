use num_complex::Complex64;
use serde::Serialize;

use super::{OperatorSpec, WaveFunction};
use crate::error::{ensure, Result};

/// Mean, standard deviation and (for pairs) correlation of an observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorReport {
    pub mean: Complex64,
    pub std: f64,
    pub correlation: Option<Complex64>,
}

/// `⟨A⟩` together with the deviation vector `δA Psi = (A - ⟨A⟩) Psi`.
#[derive(Debug, Clone)]
pub struct Deviation {
    pub mean: Complex64,
    pub vector: Vec<Complex64>,
}

impl Deviation {
    pub fn of(wf: &WaveFunction, op: &OperatorSpec) -> Result<Self> {
        wf.require_normalized()?;
        let a_psi = op.normal_form()?.apply(wf.domain(), wf.samples())?;
        let mean = wf.domain().inner(wf.samples(), &a_psi)?;
        let vector = a_psi.iter().zip(wf.samples()).map(|(a, s)| a - mean * s).collect();
        Ok(Self { mean, vector })
    }

    pub fn std(&self, wf: &WaveFunction) -> Result<f64> {
        Ok(wf.domain().norm_sqr(&self.vector)?.sqrt())
    }
}

pub fn estimate(wf: &WaveFunction, op: &OperatorSpec) -> Result<EstimatorReport> {
    let d = Deviation::of(wf, op)?;
    Ok(EstimatorReport {
        mean: d.mean,
        std: d.std(wf)?,
        correlation: None,
    })
}

/// `C(A, B) = (δA Psi, δB Psi)`.
pub fn correlation(wf: &WaveFunction, a: &OperatorSpec, b: &OperatorSpec) -> Result<Complex64> {
    let da = Deviation::of(wf, a)?;
    let db = Deviation::of(wf, b)?;
    wf.domain().inner(&da.vector, &db.vector)
}

/// Mean and deviation of `A` together with the correlation `C(A, B)`.
pub fn estimate_pair(wf: &WaveFunction, a: &OperatorSpec, b: &OperatorSpec) -> Result<EstimatorReport> {
    let da = Deviation::of(wf, a)?;
    let db = Deviation::of(wf, b)?;
    Ok(EstimatorReport {
        mean: da.mean,
        std: da.std(wf)?,
        correlation: Some(wf.domain().inner(&da.vector, &db.vector)?),
    })
}

/// `((δA)^r Psi, (δB)^s Psi)`.
pub fn central_moment(wf: &WaveFunction, a: &OperatorSpec, b: &OperatorSpec, r: usize, s: usize) -> Result<Complex64> {
    ensure!(r + s >= 1, "central moment needs r + s >= 1");
    let left = deviation_power(wf, a, r)?;
    let right = deviation_power(wf, b, s)?;
    wf.domain().inner(&left, &right)
}

fn deviation_power(wf: &WaveFunction, op: &OperatorSpec, k: usize) -> Result<Vec<Complex64>> {
    if k == 0 {
        wf.require_normalized()?;
        return Ok(wf.samples().to_vec());
    }
    let d = Deviation::of(wf, op)?;
    let nf = op.clone().shifted(d.mean).normal_form()?;
    let mut v = d.vector;
    for _ in 1..k {
        v = nf.apply(wf.domain(), &v)?;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid;
    use crate::qstate::{PhysicalParams, Representation};
    use std::f64::consts::PI;

    fn packet(x0: f64, sigma: f64, k: f64) -> WaveFunction {
        let g = Grid::centered(x0, 12.0 * sigma, 2401).unwrap();
        WaveFunction::from_fn(g, PhysicalParams::default(), Representation::Coordinate, |q| {
            let u = q[0] - x0;
            Complex64::from_polar((-u * u / (4.0 * sigma * sigma)).exp(), k * q[0])
        })
        .unwrap()
    }

    #[test]
    fn gaussian_position_moments() {
        let r = estimate(&packet(2.0, 1.0, 0.0), &OperatorSpec::position(0)).unwrap();
        assert!((r.mean.re - 2.0).abs() < 1e-8 && r.mean.im.abs() < 1e-12);
        assert!((r.std - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gaussian_central_moments() {
        let wf = packet(0.0, 1.0, 0.0);
        let x = OperatorSpec::position(0);
        let m2 = central_moment(&wf, &x, &x, 2, 0).unwrap();
        let m3 = central_moment(&wf, &x, &x, 3, 0).unwrap();
        let m4 = central_moment(&wf, &x, &x, 4, 0).unwrap();
        assert!((m2.re - 1.0).abs() < 1e-8);
        assert!(m3.norm() < 1e-8);
        assert!((m4.re - 3.0).abs() < 1e-6);
        let c = central_moment(&wf, &x, &x, 1, 1).unwrap();
        assert!((c - estimate_pair(&wf, &x, &x).unwrap().correlation.unwrap()).norm() < 1e-14);
    }

    #[test]
    fn std_squared_is_second_moment() {
        let p = PhysicalParams::default();
        let wf = packet(0.5, 0.8, 1.3);
        let op = OperatorSpec::momentum(0, &p);
        let r = estimate(&wf, &op).unwrap();
        let m2 = central_moment(&wf, &op, &op, 1, 1).unwrap();
        assert!((r.std * r.std - m2.re).abs() < 1e-9 * m2.re);
        assert!((r.mean.re - 1.3).abs() < 1e-7);
    }

    #[test]
    fn phase_state_moments() {
        let g = Grid::periodic(0.0, 2.0 * PI, 2048).unwrap();
        let wf = WaveFunction::from_fn(g, PhysicalParams::default(), Representation::Phase, |q| {
            Complex64::from_polar(1.0, -2.0 * q[0])
        })
        .unwrap();
        let n = estimate(&wf, &OperatorSpec::number_phase()).unwrap();
        assert!((n.mean.re - 2.0).abs() < 1e-8 && n.std < 1e-8);
        let phi = estimate(&wf, &OperatorSpec::phase()).unwrap();
        assert!((phi.std - PI / 3f64.sqrt()).abs() < 1e-6, "{}", phi.std);
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let g = Grid::centered(0.0, 5.0, 101).unwrap();
        let wf = WaveFunction::new(
            g,
            vec![Complex64::new(1.0, 0.0); 101],
            PhysicalParams::default(),
            Representation::Coordinate,
        )
        .unwrap();
        assert!(estimate(&wf, &OperatorSpec::position(0)).is_err());
    }
}
