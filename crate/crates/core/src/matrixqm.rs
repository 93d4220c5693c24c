//! Finite-dimensional operators and density matrices: truncated Fock
//! ladders, spin magnetization, Gibbs states and the density-matrix forms of
//! the fluctuation relations.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{ensure, Result};
use crate::exec::Exec;
use crate::qstate::EstimatorReport;
use crate::relations::RelationVerdict;

pub type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;
pub const MAX_SPINS: usize = 8;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A dense operator on a `d`-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteOperator {
    matrix: CMatrix,
    hermitian: bool,
}

impl FiniteOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        ensure!(matrix.is_square(), "operator matrix must be square");
        ensure!(matrix.nrows() >= 1, "operator matrix must be non-empty");
        let hermitian = max_abs(&(&matrix - matrix.adjoint())) < HERMITIAN_TOL;
        Ok(Self { matrix, hermitian })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = values.iter().map(|x| c(*x)).collect();
        Self::new(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(v)))
    }

    pub fn identity(d: usize) -> Self {
        Self {
            matrix: CMatrix::identity(d, d),
            hermitian: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> FiniteOperator {
        Self {
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    /// Largest eigenvalue-sorted spectrum of a Hermitian operator, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        ensure!(self.hermitian, "eigenvalues are only provided for Hermitian operators");
        let mut e: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        Ok(e)
    }
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        ensure!(matrix.is_square() && matrix.nrows() >= 1, "density matrix must be square and non-empty");
        let herm = max_abs(&(&matrix - matrix.adjoint()));
        ensure!(herm < HERMITIAN_TOL, "density matrix is not Hermitian (error {herm})");
        let tr = matrix.trace();
        ensure!((tr - c(1.0)).norm() < 1e-12, "density matrix trace is {tr}");
        let min = SymmetricEigen::new(matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        ensure!(min >= -1e-12, "density matrix has eigenvalue {min}");
        Ok(Self { matrix })
    }

    /// `|v><v|` for a (not necessarily normalized) vector.
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        ensure!(n > 0.0, "pure state vector is zero");
        let v = nalgebra::DVector::from_iterator(v.len(), v.iter().map(|z| z / n.sqrt()));
        Self::new(&v * v.adjoint())
    }

    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = weights.iter().map(|x| c(*x)).collect();
        Self::new(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(v)))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: CMatrix::identity(d, d) * c(1.0 / d as f64),
        }
    }

    /// `G G† / Tr(G G†)` with `G` a complex Gaussian matrix.
    pub fn random(d: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        let g = random_complex(d, rng);
        let w = &g * g.adjoint();
        let tr = w.trace();
        let mut m = w / tr;
        hermitize(&mut m);
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

fn hermitize(m: &mut CMatrix) {
    let h = (&*m + m.adjoint()) * c(0.5);
    *m = h;
}

fn random_complex(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

/// `(G + G†) / 2` with `G` a complex Gaussian matrix.
pub fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> FiniteOperator {
    let g = random_complex(d, rng);
    let mut h = (&g + g.adjoint()) * c(0.5);
    hermitize(&mut h);
    FiniteOperator {
        matrix: h,
        hermitian: true,
    }
}

/// Annihilation, creation and number operators truncated to `d` levels.
pub fn fock_ladder(d: usize) -> Result<(FiniteOperator, FiniteOperator, FiniteOperator)> {
    ensure!(d >= 2, "Fock space needs at least two levels, got {d}");
    let a = CMatrix::from_fn(d, d, |i, j| if j == i + 1 { c((j as f64).sqrt()) } else { c(0.0) });
    let ad = a.adjoint();
    let levels: Vec<f64> = (0..d).map(|k| k as f64).collect();
    Ok((FiniteOperator::new(a)?, FiniteOperator::new(ad)?, FiniteOperator::diagonal(&levels)?))
}

fn pauli() -> [CMatrix; 3] {
    let z = c(0.0);
    let o = c(1.0);
    let i = Complex64::new(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// Total magnetization `M_a = (gamma hbar / 2) sum_k sigma_a^(k)` of `n` spins.
pub fn spin_magnetization(n: usize, gamma: f64, hbar: f64) -> Result<[FiniteOperator; 3]> {
    ensure!((1..=MAX_SPINS).contains(&n), "spin count must be in 1..={MAX_SPINS}, got {n}");
    let s = pauli();
    let id = CMatrix::identity(2, 2);
    let dim = 1usize << n;
    let make = |alpha: usize| -> Result<FiniteOperator> {
        let mut total = CMatrix::zeros(dim, dim);
        for k in 0..n {
            let mut m = CMatrix::identity(1, 1);
            for site in 0..n {
                m = m.kronecker(if site == k { &s[alpha] } else { &id });
            }
            total += m;
        }
        FiniteOperator::new(total * c(gamma * hbar / 2.0))
    };
    Ok([make(0)?, make(1)?, make(2)?])
}

/// `AB - BA`.
pub fn commutator(a: &FiniteOperator, b: &FiniteOperator) -> Result<FiniteOperator> {
    ensure!(a.dim() == b.dim(), "operators have dimensions {} and {}", a.dim(), b.dim());
    FiniteOperator::new(&a.matrix * &b.matrix - &b.matrix * &a.matrix)
}

/// Gibbs state `exp(-H / k_B T) / Z`.
pub fn thermal_state(h: &FiniteOperator, temperature: f64, k_b: f64) -> Result<DensityMatrix> {
    ensure!(temperature > 0.0 && temperature.is_finite(), "temperature must be positive, got {temperature}");
    ensure!(k_b > 0.0, "k_B must be positive");
    ensure!(h.is_hermitian(), "the Hamiltonian must be Hermitian");
    let eig = SymmetricEigen::new(h.matrix.clone());
    let e0 = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = eig.eigenvalues.iter().map(|e| (-(e - e0) / (k_b * temperature)).exp()).collect();
    let z: f64 = w.iter().sum();
    let v = &eig.eigenvectors;
    let d = h.dim();
    let mut rho = CMatrix::zeros(d, d);
    for (k, wk) in w.iter().enumerate() {
        let col = v.column(k);
        rho += col * col.adjoint() * c(wk / z);
    }
    hermitize(&mut rho);
    let tr = rho.trace();
    DensityMatrix::new(rho / tr)
}

fn deviation(rho: &DensityMatrix, a: &FiniteOperator) -> Result<(f64, CMatrix)> {
    ensure!(a.is_hermitian(), "observable must be Hermitian");
    ensure!(a.dim() == rho.dim(), "operator dimension {} does not match the state ({})", a.dim(), rho.dim());
    let mean = (&rho.matrix * &a.matrix).trace().re;
    let d = a.dim();
    Ok((mean, &a.matrix - CMatrix::identity(d, d) * c(mean)))
}

/// `<A> = Tr(A rho)` and `ΔA = sqrt(Tr(δA rho δA))`.
pub fn rho_estimate(rho: &DensityMatrix, a: &FiniteOperator) -> Result<EstimatorReport> {
    let (mean, da) = deviation(rho, a)?;
    let var = (&da * &rho.matrix * &da).trace().re;
    Ok(EstimatorReport {
        mean: c(mean),
        std: var.max(0.0).sqrt(),
        correlation: None,
    })
}

/// Both density-matrix relations for one pair of observables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoMargins {
    /// `ΔA ΔB >= |Tr(rho δA δB)|`.
    pub csf: RelationVerdict,
    /// `ΔA ΔB >= |Tr(rho [A, B])| / 2`.
    pub rsur: RelationVerdict,
    pub commuting: bool,
    /// `[A, B] = 0` while the correlation bound is still positive.
    pub commuting_with_positive_bound: bool,
}

pub fn rho_relation_margins(rho: &DensityMatrix, a: &FiniteOperator, b: &FiniteOperator) -> Result<RhoMargins> {
    let ra = rho_estimate(rho, a)?;
    let rb = rho_estimate(rho, b)?;
    let (_, da) = deviation(rho, a)?;
    let (_, db) = deviation(rho, b)?;
    let lhs = ra.std * rb.std;
    let corr = (&rho.matrix * &da * &db).trace().norm();
    let comm = commutator(a, b)?;
    let comm_mean = (&rho.matrix * comm.matrix()).trace().norm();
    let scale = max_abs(a.matrix()) * max_abs(b.matrix());
    let commuting = max_abs(comm.matrix()) <= 1e-12 * scale.max(1.0);
    let verdict = |rhs: f64| RelationVerdict {
        lhs,
        rhs,
        margin: lhs - rhs,
        applicable: None,
        defects: Vec::new(),
    };
    let csf = verdict(corr);
    let mut rsur = verdict(0.5 * comm_mean);
    rsur.applicable = Some(true);
    Ok(RhoMargins {
        commuting_with_positive_bound: commuting && corr > 1e-12,
        csf,
        rsur,
        commuting,
    })
}

/// Seeds and sizes of the random `(rho, A, B)` ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub per_dim: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            seed: 0x5eed_2024,
            dims: vec![2, 3, 4, 8],
            per_dim: 100,
        }
    }
}

/// One random triple and its margins.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSample {
    pub dim: usize,
    pub index: usize,
    pub margins: RhoMargins,
}

/// Evaluate the relations on random triples. Each triple draws from its own
/// ChaCha stream, so results do not depend on the execution strategy.
pub fn random_ensemble(config: &EnsembleConfig, exec: Exec) -> Result<Vec<EnsembleSample>> {
    let jobs: Vec<(usize, usize)> = config
        .dims
        .iter()
        .flat_map(|&d| (0..config.per_dim).map(move |i| (d, i)))
        .collect();
    exec.map_slice(&jobs, |&(dim, index)| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(((dim as u64) << 32) | index as u64);
        let rho = DensityMatrix::random(dim, &mut rng)?;
        let a = random_hermitian(dim, &mut rng);
        let b = random_hermitian(dim, &mut rng);
        Ok(EnsembleSample {
            dim,
            index,
            margins: rho_relation_margins(&rho, &a, &b)?,
        })
    })
    .into_iter()
    .collect()
}
