//! Fluctuation relations: the Cauchy–Schwarz formula, the
//! Robertson–Schrödinger relation with its applicability test, hermiticity
//! defects, Gram determinants and the two-state (multi-temporal) variant.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure, Result};
use crate::exec::Exec;
use crate::qstate::{Deviation, OperatorSpec, WaveFunction};
use crate::states::{catalog_specs, observable, StateSpec};

/// Both defects must be below this for the Robertson–Schrödinger relation to apply.
pub const APPLICABILITY_TOL: f64 = 1e-8;

/// The two sides of a fluctuation inequality `lhs >= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// Only set by [`rsur_margin`].
    pub applicable: Option<bool>,
    pub defects: Vec<Complex64>,
}

impl RelationVerdict {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            margin: lhs - rhs,
            applicable: None,
            defects: Vec::new(),
        }
    }
}

/// `ΔA ΔB >= |(δA Psi, δB Psi)|`, valid for every state.
pub fn csf_margin(wf: &WaveFunction, a: &OperatorSpec, b: &OperatorSpec) -> Result<RelationVerdict> {
    multi_temporal_csf(wf, wf, a, b)
}

/// `Δ_1A Δ_2B >= |(δA Psi_1, δB Psi_2)|` with each deviation taken about its own state's mean.
pub fn multi_temporal_csf(
    wf1: &WaveFunction,
    wf2: &WaveFunction,
    a: &OperatorSpec,
    b: &OperatorSpec,
) -> Result<RelationVerdict> {
    ensure!(wf1.domain().matches(wf2.domain()), "the two states live on different grids");
    let da = Deviation::of(wf1, a)?;
    let db = Deviation::of(wf2, b)?;
    let lhs = da.std(wf1)? * db.std(wf2)?;
    let rhs = wf1.domain().inner(&da.vector, &db.vector)?.norm();
    Ok(RelationVerdict::new(lhs, rhs))
}

/// `d1 = (A Psi, B Psi) - (Psi, AB Psi)` and `d2 = (B Psi, A Psi) - (Psi, BA Psi)`.
pub fn hermiticity_defect(wf: &WaveFunction, a: &OperatorSpec, b: &OperatorSpec) -> Result<(Complex64, Complex64)> {
    let s = Sandwiches::new(wf, a, b)?;
    Ok(s.defects())
}

struct Sandwiches {
    a_b: Complex64,
    b_a: Complex64,
    ab: Complex64,
    ba: Complex64,
}

impl Sandwiches {
    fn new(wf: &WaveFunction, a: &OperatorSpec, b: &OperatorSpec) -> Result<Self> {
        let d = wf.domain();
        let psi = wf.samples();
        let apsi = a.normal_form()?.apply(d, psi)?;
        let bpsi = b.normal_form()?.apply(d, psi)?;
        // AB as a single normal form, so that no stencil straddles the jump
        // of a coordinate on a periodic grid.
        let ab_nf = a.clone().compose(b.clone()).normal_form()?;
        let ba_nf = b.clone().compose(a.clone()).normal_form()?;
        let a_b = d.inner(&apsi, &bpsi)?;
        let ab = d.inner(psi, &ab_nf.apply(d, psi)?)?;
        let ba = d.inner(psi, &ba_nf.apply(d, psi)?)?;
        Ok(Self {
            a_b,
            b_a: a_b.conj(),
            ab,
            ba,
        })
    }

    fn defects(&self) -> (Complex64, Complex64) {
        (self.a_b - self.ab, self.b_a - self.ba)
    }
}

/// `ΔA ΔB >= |⟨[A, B]⟩| / 2`, flagged inapplicable when either hermiticity defect is not negligible.
pub fn rsur_margin(wf: &WaveFunction, a: &OperatorSpec, b: &OperatorSpec) -> Result<RelationVerdict> {
    let da = Deviation::of(wf, a)?;
    let db = Deviation::of(wf, b)?;
    let lhs = da.std(wf)? * db.std(wf)?;
    let s = Sandwiches::new(wf, a, b)?;
    let rhs = 0.5 * (s.ab - s.ba).norm();
    let (d1, d2) = s.defects();
    let mut v = RelationVerdict::new(lhs, rhs);
    v.applicable = Some(d1.norm() < APPLICABILITY_TOL && d2.norm() < APPLICABILITY_TOL);
    v.defects = vec![d1, d2];
    Ok(v)
}

/// Correlation matrix of several observables and its determinant.
#[derive(Debug, Clone)]
pub struct GramReport {
    pub matrix: DMatrix<Complex64>,
    pub eigenvalues: Vec<f64>,
    pub determinant: f64,
    /// Largest diagonal entry.
    pub scale: f64,
    /// Largest `|M_jk - conj(M_kj)|`.
    pub hermiticity_error: f64,
}

/// `det[(δA_j Psi, δA_k Psi)]`, evaluated as the product of the eigenvalues
/// of the Hermitian part.
pub fn gram_determinant(wf: &WaveFunction, ops: &[OperatorSpec]) -> Result<GramReport> {
    ensure!(ops.len() >= 2, "a Gram determinant needs at least two observables");
    let devs = ops.iter().map(|op| Deviation::of(wf, op)).collect::<Result<Vec<_>>>()?;
    let r = ops.len();
    let mut m = DMatrix::<Complex64>::zeros(r, r);
    for j in 0..r {
        for k in 0..r {
            m[(j, k)] = wf.domain().inner(&devs[j].vector, &devs[k].vector)?;
        }
    }
    let hermiticity_error = (0..r)
        .flat_map(|j| (0..r).map(move |k| (j, k)))
        .map(|(j, k)| (m[(j, k)] - m[(k, j)].conj()).norm())
        .fold(0.0, f64::max);
    let hermitian = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eigenvalues: Vec<f64> = SymmetricEigen::new(hermitian).eigenvalues.iter().copied().collect();
    let scale = (0..r).map(|j| m[(j, j)].re).fold(0.0, f64::max);
    Ok(GramReport {
        determinant: eigenvalues.iter().product(),
        matrix: m,
        eigenvalues,
        scale,
        hermiticity_error,
    })
}

/// One state and operator pair of the relation catalog.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogCase {
    pub state: String,
    pub a: String,
    pub b: String,
    pub csf: RelationVerdict,
    pub rsur: RelationVerdict,
}

/// Evaluate both relations on every catalog state and operator pair.
pub fn evaluate_catalog(exec: Exec) -> Result<Vec<CatalogCase>> {
    let specs = catalog_specs();
    let per_state = exec.map_slice(&specs, evaluate_state);
    let mut out = Vec::new();
    for cases in per_state {
        out.extend(cases?);
    }
    Ok(out)
}

/// Evaluate the relations on every operator pair of one state.
pub fn evaluate_state(spec: &StateSpec) -> Result<Vec<CatalogCase>> {
    let wf = spec.build()?;
    spec.pairs()
        .iter()
        .map(|(a, b)| evaluate_pair(spec, &wf, a, b))
        .collect()
}

/// Evaluate both relations for one named pair on an already built state.
pub fn evaluate_pair(spec: &StateSpec, wf: &WaveFunction, a: &str, b: &str) -> Result<CatalogCase> {
    let (oa, ob) = (observable(a, spec)?, observable(b, spec)?);
    Ok(CatalogCase {
        state: spec.to_string(),
        a: a.to_string(),
        b: b.to_string(),
        csf: csf_margin(wf, &oa, &ob)?,
        rsur: rsur_margin(wf, &oa, &ob)?,
    })
}
