use num_complex::Complex64;
use qfluct::matrixqm::*;
use qfluct::Exec;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn ladder_commutator_has_truncation_corner() {
    let (a, ad, n) = fock_ladder(5).unwrap();
    let comm = commutator(&a, &ad).unwrap();
    let diag: Vec<f64> = (0..5).map(|i| comm.matrix()[(i, i)].re).collect();
    let want = [1.0, 1.0, 1.0, 1.0, -4.0];
    assert!(diag.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-14), "{diag:?}");
    assert!(max_abs(&(n.matrix() - ad.matrix() * a.matrix())) < 1e-14);
    let (_, _, n8) = fock_ladder(8).unwrap();
    let mut v = vec![c(0.0); 8];
    v[3] = c(1.0);
    let r = rho_estimate(&DensityMatrix::pure(&v).unwrap(), &n8).unwrap();
    assert_eq!(r.mean.re, 3.0);
}

#[test]
fn magnetization_algebra() {
    for n in 1..=4 {
        for (gamma, hbar) in [(1.0, 1.0), (2.0, 0.5)] {
            let m = spin_magnetization(n, gamma, hbar).unwrap();
            for (a, b, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                let lhs = commutator(&m[a], &m[b]).unwrap();
                let rhs = m[k].matrix() * Complex64::new(0.0, hbar * gamma);
                assert!(max_abs(&(lhs.matrix() - rhs)) < 1e-12, "n={n}");
            }
            assert!(m.iter().all(|x| x.is_hermitian()));
        }
    }
    let mz = &spin_magnetization(2, 1.0, 1.0).unwrap()[2];
    let e = mz.eigenvalues().unwrap();
    let want = [-1.0, 0.0, 0.0, 1.0];
    assert!(e.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn commutator_of_self_vanishes() {
    let a = FiniteOperator::diagonal(&[1.0, 5.0, -2.0]).unwrap();
    assert_eq!(max_abs(commutator(&a, &a).unwrap().matrix()), 0.0);
    assert!(commutator(&a, &FiniteOperator::identity(2)).is_err());
}

#[test]
fn thermal_limits() {
    let h = FiniteOperator::diagonal(&[0.0, 1.0, 2.5]).unwrap();
    let hot = thermal_state(&h, 1e9, 1.0).unwrap();
    assert!(max_abs(&(hot.matrix() - DensityMatrix::maximally_mixed(3).matrix())) < 1e-6);
    let cold = thermal_state(&h, 1e-6, 1.0).unwrap();
    assert!((cold.matrix()[(0, 0)].re - 1.0).abs() < 1e-6);
    let two = thermal_state(&FiniteOperator::diagonal(&[0.0, 1.0]).unwrap(), 1.0, 1.0).unwrap();
    let e = (-1.0f64).exp();
    assert!((two.matrix()[(0, 0)].re - 1.0 / (1.0 + e)).abs() < 1e-14);
    assert!((two.matrix()[(1, 1)].re - e / (1.0 + e)).abs() < 1e-14);
    let r = rho_estimate(&two, &FiniteOperator::diagonal(&[0.0, 1.0]).unwrap()).unwrap();
    assert!((r.mean.re - e / (1.0 + e)).abs() < 1e-14);
    assert!(thermal_state(&h, 0.0, 1.0).is_err());
}

#[test]
fn estimator_examples() {
    let sz = FiniteOperator::diagonal(&[1.0, -1.0]).unwrap();
    let r = rho_estimate(&DensityMatrix::maximally_mixed(2), &sz).unwrap();
    assert!(r.mean.norm() < 1e-15 && (r.std - 1.0).abs() < 1e-15);
    let r = rho_estimate(&DensityMatrix::pure(&[c(0.0), c(1.0)]).unwrap(), &sz).unwrap();
    assert!(r.std < 1e-12);
    let mut off = CMatrix::zeros(2, 2);
    off[(0, 1)] = c(1.0);
    let non_herm = FiniteOperator::new(off).unwrap();
    assert!(rho_estimate(&DensityMatrix::maximally_mixed(2), &non_herm).is_err());
}

#[test]
fn commuting_counterexample() {
    let a = FiniteOperator::diagonal(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    let b = FiniteOperator::diagonal(&[2.0, 1.0, 1.0, 3.0]).unwrap();
    let rho = DensityMatrix::diagonal(&[0.4, 0.1, 0.1, 0.4]).unwrap();
    let m = rho_relation_margins(&rho, &a, &b).unwrap();
    assert!(m.commuting && m.commuting_with_positive_bound);
    // sum_i rho_i (a_i - 2.5)(b_i - 2.2)
    assert!((m.csf.rhs - 0.6).abs() < 1e-12);
    assert!(m.rsur.rhs == 0.0 && m.csf.margin >= -1e-10);
}

#[test]
fn equal_observables_saturate() {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
    let rho = DensityMatrix::random(4, &mut rng).unwrap();
    let a = random_hermitian(4, &mut rng);
    let m = rho_relation_margins(&rho, &a, &a).unwrap();
    assert!(m.csf.margin.abs() < 1e-10);
}

#[test]
fn thermal_spin_pair() {
    let m = spin_magnetization(2, 1.0, 1.0).unwrap();
    let h = FiniteOperator::new(m[2].matrix() * c(-1.0) + m[0].matrix() * c(0.3)).unwrap();
    let rho = thermal_state(&h, 0.7, 1.0).unwrap();
    let r = rho_relation_margins(&rho, &m[0], &m[1]).unwrap();
    assert!(r.csf.margin >= -1e-10 && r.rsur.margin >= -1e-10);
}

#[test]
fn random_ensemble_holds_and_is_reproducible() {
    let cfg = EnsembleConfig::default();
    let seq = random_ensemble(&cfg, Exec::Sequential).unwrap();
    let par = random_ensemble(&cfg, Exec::Parallel).unwrap();
    assert_eq!(seq.len(), 400);
    for (s, p) in seq.iter().zip(&par) {
        assert_eq!(s.margins, p.margins);
        assert!(s.margins.csf.margin >= -1e-10);
        assert!(s.margins.rsur.margin >= -1e-10);
    }
}
