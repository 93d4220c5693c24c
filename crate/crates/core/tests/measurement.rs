use std::f64::consts::PI;

use qfluct::measurement::*;
use qfluct::numerics::{gaussian_kernel, Grid, StencilAccuracy, TransferKernel};
use qfluct::qstate::{density_current_with, OperatorSpec, PhysicalParams};
use qfluct::states::gaussian_packet;
use qfluct::Error;

fn normal(x: f64, mean: f64, std: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * std * std)).exp() / (std * (2.0 * PI).sqrt())
}

fn gaussian_dist(grid: &Grid, mean: f64, std: f64) -> ClassicalDistribution {
    ClassicalDistribution::from_fn(grid.clone(), |x| normal(x, mean, std)).unwrap()
}

fn line(center: f64, half_width: f64, n: usize) -> Grid {
    Grid::centered(center, half_width, n).unwrap().with_stencil(StencilAccuracy::Sixth)
}

#[test]
fn identity_kernel_leaves_distribution() {
    let g = Grid::centered(0.0, 10.0, 801).unwrap();
    let w = gaussian_dist(&g, 0.7, 1.3);
    let out = classical_transform(&w, &TransferKernel::identity(&g)).unwrap();
    assert!(out.density().iter().zip(w.density()).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn classical_width_addition() {
    let g = Grid::centered(0.0, 8.0 * (1.25f64.sqrt() + 0.5), 1601).unwrap();
    let out = classical_transform(&gaussian_dist(&g, 0.0, 1.0), &gaussian_kernel(&g, 0.5).unwrap()).unwrap();
    let m = classical_estimate(&out).unwrap();
    assert!((m.std - 1.25f64.sqrt()).abs() < 1e-6, "{}", m.std);
}

#[test]
fn transform_preserves_normalization() {
    let g = Grid::centered(0.0, 12.0, 1201).unwrap();
    // skewed, two-humped input
    let w = ClassicalDistribution::from_fn(g.clone(), |x| normal(x, -1.0, 0.4) + 3.0 * normal(x, 2.0, 1.5) * (1.0 + 0.3 * x.tanh())).unwrap();
    for width in [0.1, 0.7, 2.0] {
        let out = classical_transform(&w, &gaussian_kernel(&g, width).unwrap()).unwrap();
        let total: f64 = g.weights().iter().zip(out.density()).map(|(q, v)| q * v).sum();
        assert!((total - 1.0).abs() < 1e-10, "width {width}: {total}");
    }
    let edge = ClassicalDistribution::from_fn(g.clone(), |x| normal(x, 11.0, 0.5)).unwrap();
    assert!(classical_transform(&edge, &gaussian_kernel(&g, 2.0).unwrap()).is_err());
}

#[test]
fn mismatched_grids_rejected() {
    let a = Grid::centered(0.0, 5.0, 101).unwrap();
    let b = Grid::centered(0.0, 5.0, 103).unwrap();
    assert!(classical_transform(&gaussian_dist(&a, 0.0, 1.0), &gaussian_kernel(&b, 0.3).unwrap()).is_err());
    assert!(error_indicators_classical(&gaussian_dist(&a, 0.0, 1.0), &gaussian_dist(&b, 0.0, 1.0), 3).is_err());
    assert!(ClassicalDistribution::new(a.clone(), vec![1.0; 101]).is_err());
}

#[test]
fn classical_moments() {
    let ring = Grid::line(0.0, 2.0 * PI, 2001).unwrap();
    let u = ClassicalDistribution::from_fn(ring, |_| 1.0).unwrap();
    assert!((classical_estimate(&u).unwrap().std - PI / 3f64.sqrt()).abs() < 1e-10);

    let g = Grid::centered(1.0, 20.0, 2001).unwrap();
    let m = classical_estimate(&gaussian_dist(&g, 1.0, 2.0)).unwrap();
    assert!((m.mean - 1.0).abs() < 1e-8 && (m.std - 2.0).abs() < 1e-8);
    assert!(m.central(3).unwrap().abs() < 1e-8 && m.central(5).unwrap().abs() < 1e-8);
    // Gaussian central moments 3 sigma^4 and 15 sigma^6
    assert!((m.central(4).unwrap() - 48.0).abs() < 1e-6);
    assert!((m.central(6).unwrap() - 960.0).abs() < 1e-5);
}

#[test]
fn classical_error_indicators() {
    let g = Grid::centered(0.0, 10.0, 1001).unwrap();
    let w = gaussian_dist(&g, 0.0, 1.0);
    let r = error_indicators_classical(&w, &w, 6).unwrap();
    assert_eq!(r.entries.len(), 6);
    assert_eq!(r.max_epsilon(), 0.0);
    assert!(error_indicators_classical(&w, &w, 7).is_err());

    let g = Grid::centered(0.0, 8.0 * 9.0, 4001).unwrap();
    let w = gaussian_dist(&g, 0.0, 3.0);
    let out = classical_transform(&w, &gaussian_kernel(&g, 4.0).unwrap()).unwrap();
    let r = error_indicators_classical(&w, &out, 4).unwrap();
    assert!((r.epsilon("std").unwrap() - 2.0).abs() < 1e-6);
    assert!(r.epsilon("mean").unwrap() < 1e-8);
    assert!(r.entries.iter().all(|e| e.epsilon >= 0.0));
}

fn packet_dc(x0: f64, sigma: f64, k: f64, grid: &Grid) -> qfluct::qstate::DensityCurrent {
    let wf = gaussian_packet(x0, sigma, k, &PhysicalParams::default(), grid).unwrap();
    density_current_with(&wf, 0.0).unwrap()
}

#[test]
fn ideal_channel_is_identity() {
    let g = line(0.0, 12.0, 1024);
    let dc = packet_dc(0.3, 1.0, 1.5, &g);
    let out = qms_apply(&MeasurementChannel::ideal(&g), &dc).unwrap();
    assert!(out.rho.iter().zip(&dc.rho).all(|(a, b)| (a - b).abs() < 1e-12));
    assert!(out.current[0].iter().zip(&dc.current[0]).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn packet_through_channel_matches_closed_profiles() {
    let (sigma, gamma, lambda, k): (f64, f64, f64, f64) = (1.0, 0.6, 0.8, 1.5);
    let (sr, sj) = ((sigma * sigma + gamma * gamma).sqrt(), (sigma * sigma + lambda * lambda).sqrt());
    let g = line(0.0, 8.0 * (sj + lambda), 2048);
    let dc = packet_dc(0.0, sigma, k, &g);
    let out = qms_apply(&MeasurementChannel::gaussian(&g, gamma, lambda).unwrap(), &dc).unwrap();
    assert!((out.total() - 1.0).abs() < 1e-10);
    assert!((out.current_integral(0) - dc.current_integral(0)).abs() < 1e-9);
    // rho_out and J_out are Gaussians of widths sqrt(sigma^2 + gamma^2) and sqrt(sigma^2 + lambda^2)
    for i in 0..g.len() {
        let x = g.node(i);
        assert!((out.rho[i] - normal(x, 0.0, sr)).abs() < 1e-9, "rho at {x}");
        assert!((out.current[0][i] - k * normal(x, 0.0, sj)).abs() < 1e-9, "J at {x}");
    }
}

#[test]
fn channel_rejects_other_grids() {
    let g = line(0.0, 10.0, 512);
    let h = line(0.0, 10.0, 520);
    let ch = MeasurementChannel::gaussian(&g, 0.3, 0.3).unwrap();
    assert!(qms_apply(&ch, &packet_dc(0.0, 1.0, 0.0, &h)).is_err());
    let ring = Grid::periodic(0.0, 2.0 * PI, 256).unwrap();
    assert!(MeasurementChannel::gaussian(&ring, 0.3, 0.3).is_err());
}

#[test]
fn position_mean_is_density_quadrature() {
    let p = PhysicalParams::default();
    let g = line(0.5, 14.0, 1500);
    let out = qms_apply(&MeasurementChannel::gaussian(&g, 0.9, 0.2).unwrap(), &packet_dc(0.5, 1.2, 0.7, &g)).unwrap();
    let r = out_estimate(&out, &OperatorSpec::position(0), &p).unwrap();
    let direct: f64 = g.weights().iter().enumerate().map(|(i, w)| w * g.node(i) * out.rho[i]).sum();
    assert!((r.mean.re - direct).abs() < 1e-14 && r.mean.im == 0.0);
}

#[test]
fn momentum_mean_is_mass_times_current() {
    let p = PhysicalParams::new(1.0, 2.0, None, 1.0).unwrap();
    let g = line(0.0, 20.0, 2048);
    let wf = gaussian_packet(0.0, 1.0, 1.3, &p, &g).unwrap();
    let dc = density_current_with(&wf, 0.0).unwrap();
    for (gamma, lambda) in [(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)] {
        let out = qms_apply(&MeasurementChannel::gaussian(&g, gamma, lambda).unwrap(), &dc).unwrap();
        let r = out_estimate(&out, &OperatorSpec::momentum(0, &p), &p).unwrap();
        assert!((r.mean.re - 1.3).abs() < 1e-8);
        assert!((r.mean.re - p.mass * out.current_integral(0)).abs() < 1e-8);
    }
}

#[test]
fn oscillator_energy_through_density_channel() {
    let p = PhysicalParams::oscillator(1.0).unwrap();
    let sigma = p.oscillator_length().unwrap();
    let h = OperatorSpec::oscillator_hamiltonian(&p).unwrap();
    for gamma in [0.3, 1.0, 2.0] {
        let s2 = sigma * sigma + gamma * gamma;
        let g = line(0.0, 8.0 * (s2.sqrt() + gamma), 2048);
        let wf = gaussian_packet(0.0, sigma, 0.0, &p, &g).unwrap();
        let out = qms_apply(
            &MeasurementChannel::gaussian(&g, gamma, 0.0).unwrap(),
            &density_current_with(&wf, 0.0).unwrap(),
        )
        .unwrap();
        let r = out_estimate(&out, &h, &p).unwrap();
        // real Gaussian amplitude of variance s2: <p^2> = hbar^2 / 4 s2, <x^2> = s2
        let oracle = 1.0 / (8.0 * s2) + 0.5 * s2;
        assert!(((r.mean.re - oracle) / oracle).abs() < 1e-4, "gamma {gamma}: {} vs {oracle}", r.mean.re);
    }
}

#[test]
fn quantum_error_indicators() {
    let p = PhysicalParams::default();
    let (sigma, gamma): (f64, f64) = (0.8, 0.6);
    let g = line(0.0, 8.0 * (1.0 + gamma), 2048);
    let wf = gaussian_packet(0.0, sigma, 0.0, &p, &g).unwrap();
    let dc = density_current_with(&wf, 0.0).unwrap();
    let x = OperatorSpec::position(0);
    let reports = |dc: &qfluct::qstate::DensityCurrent| {
        vec![NamedReport::new("x", out_estimate(dc, &x, &p).unwrap())]
    };
    let input = reports(&dc);
    let ideal = error_indicators_quantum(&input, &reports(&qms_apply(&MeasurementChannel::ideal(&g), &dc).unwrap())).unwrap();
    assert!(ideal.max_epsilon() < 1e-15);
    let out = qms_apply(&MeasurementChannel::gaussian(&g, gamma, 0.0).unwrap(), &dc).unwrap();
    let r = error_indicators_quantum(&input, &reports(&out)).unwrap();
    assert!((r.epsilon("std_x").unwrap() - ((sigma * sigma + gamma * gamma).sqrt() - sigma)).abs() < 1e-8);

    let other = vec![NamedReport::new("p", input[0].report)];
    assert!(error_indicators_quantum(&input, &other).is_err());
    assert!(error_indicators_quantum(&input, &[]).is_err());
}

#[test]
fn oscillator_energy_spread_error() {
    let p = PhysicalParams::oscillator(1.0).unwrap();
    let s = qfluct::annex::AnnexScenario::oscillator(0.7, 0.0, p).unwrap();
    let r = run_oscillator(&s, &PipelineConfig::default()).unwrap();
    // real Gaussian of variance s2: Var H = (1/(8 s2^2) + 2 s2^2 - 1) / 4
    let s2: f64 = 0.5 + 0.49;
    let oracle = ((1.0 / (8.0 * s2 * s2) + 2.0 * s2 * s2 - 1.0) / 4.0).sqrt();
    let eps = r.errors.epsilon("std_H").unwrap();
    assert!(((eps - oracle) / oracle).abs() < 1e-4, "{eps} vs {oracle}");
}

#[test]
fn unsupported_operators() {
    let p = PhysicalParams::default();
    let g = line(0.0, 10.0, 512);
    let dc = packet_dc(0.0, 1.0, 0.0, &g);
    let p3 = OperatorSpec::momentum(0, &p).power(3);
    assert!(matches!(out_estimate(&dc, &p3, &p), Err(Error::UnsupportedOperator(_))));
    assert!(matches!(out_estimate(&dc, &OperatorSpec::momentum(1, &p), &p), Err(Error::UnsupportedOperator(_))));
}

#[test]
fn continuity_residual_is_small() {
    let p = PhysicalParams::default();
    let g = line(0.0, 24.0, 2048);
    let out = qms_apply(&MeasurementChannel::gaussian(&g, 0.5, 1.0).unwrap(), &packet_dc(0.0, 1.0, 2.0, &g)).unwrap();
    let e = out_estimates(&out, &[OperatorSpec::momentum(0, &p).power(2)], &p, 1e-280).unwrap();
    assert!(e.continuity_residual < 1e-8);
}

fn lorentzian_pair(w: f64, w0: f64, gamma: f64) -> f64 {
    (gamma / ((w - w0).powi(2) + gamma * gamma) - gamma / ((w + w0).powi(2) + gamma * gamma)) / PI
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

#[test]
fn fdt_lorentzian_matches_fine_quadrature() {
    let p = PhysicalParams::default();
    let gamma = 0.1;
    let grid = Grid::line(0.0, 400.0, 400_001).unwrap();
    let spec = SusceptibilitySpectrum::from_fn(grid, |w| lorentzian_pair(w, 1.0, gamma)).unwrap();
    let value = fdt_dispersion(&spec, 1.0, &p).unwrap();
    // integrand coth(w / 2) chi''(w), regular at 0
    let f = |w: f64| {
        if w == 0.0 {
            2.0 * 4.0 * gamma / (PI * (1.0 + gamma * gamma).powi(2))
        } else {
            lorentzian_pair(w, 1.0, gamma) / (w / 2.0).tanh()
        }
    };
    let peak = simpson(f, 0.5, 1.5, 1_000_000);
    let rest = simpson(f, 0.0, 0.5, 5_000) + simpson(f, 1.5, 400.0, 4_000_000);
    let oracle = (peak + rest) / PI;
    assert!((value - oracle).abs() < 1e-5, "{value} vs {oracle}");
}

#[test]
fn fdt_limits() {
    let grid = Grid::line(0.0, 400.0, 200_001).unwrap();
    let spec = SusceptibilitySpectrum::from_fn(grid.clone(), |w| lorentzian_pair(w, 1.0, 0.1)).unwrap();
    let w = grid.weights();
    let nodes = grid.nodes();
    let chi = spec.chi();

    // classical: (2 k_B T / pi) int_0^inf chi''/w, independent of hbar
    let kt = 2000.0;
    let classical: f64 = 2.0 * kt / PI
        * (1..nodes.len()).map(|i| w[i] * chi[i] / nodes[i]).sum::<f64>()
        + 2.0 * kt / PI * w[0] * chi[1] / nodes[1];
    for hbar in [0.5, 1.0] {
        let p = PhysicalParams::new(hbar, 1.0, None, 1.0).unwrap();
        let v = fdt_dispersion(&spec, kt, &p).unwrap();
        assert!(((v - classical) / classical).abs() < 1e-3, "hbar {hbar}: {v} vs {classical}");
    }

    // quantum: (hbar / pi) int_0^inf chi'', independent of k_B
    let quantum: f64 = (0..nodes.len()).map(|i| w[i] * chi[i]).sum::<f64>() / PI;
    for k_b in [1.0, 0.1] {
        let p = PhysicalParams::new(1.0, 1.0, None, k_b).unwrap();
        let v = fdt_dispersion(&spec, 1e-3, &p).unwrap();
        assert!(((v - quantum) / quantum).abs() < 1e-4, "{v} vs {quantum}");
    }
    assert!(fdt_dispersion(&spec, 0.0, &PhysicalParams::default()).is_err());
    assert!(fdt_dispersion(&spec, 1.0, &PhysicalParams::default()).unwrap() >= 0.0);
}

#[test]
fn fdt_heavy_tail_flagged() {
    let grid = Grid::line(0.0, 50.0, 5001).unwrap();
    let spec = SusceptibilitySpectrum::from_fn(grid, |w| lorentzian_pair(w, 1.0, 0.1)).unwrap();
    assert!(matches!(fdt_dispersion(&spec, 1.0, &PhysicalParams::default()), Err(Error::NonIntegrable(_))));
}

#[test]
fn thermodynamic_dispersion() {
    let one = ThermoModel {
        gradient: vec![1.0],
        hessian: vec![vec![-1.0]],
        k_b: 1.0,
    };
    assert_eq!(thermo_dispersion(&one).unwrap(), 1.0);
    assert_eq!(thermo_dispersion(&ThermoModel { k_b: 0.0, ..one.clone() }).unwrap(), 0.0);

    let (a, b, c) = (-2.0, 0.5, -1.0);
    let m = ThermoModel {
        gradient: vec![1.0, 3.0],
        hessian: vec![vec![a, b], vec![b, c]],
        k_b: 0.7,
    };
    // (-H)^-1 for [[2, -0.5], [-0.5, 1]]
    let det = (-a) * (-c) - b * b;
    let inv = [[-c / det, b / det], [b / det, -a / det]];
    let g = [1.0, 3.0];
    let oracle = 0.7 * (0..2).map(|i| (0..2).map(|j| g[i] * inv[i][j] * g[j]).sum::<f64>()).sum::<f64>();
    let v = thermo_dispersion(&m).unwrap();
    assert!((v - oracle).abs() < 1e-14);
    let doubled = thermo_dispersion(&ThermoModel { k_b: 1.4, ..m.clone() }).unwrap();
    assert!((doubled - 2.0 * v).abs() < 1e-14);

    let indefinite = ThermoModel {
        gradient: vec![1.0, 1.0],
        hessian: vec![vec![-1.0, 0.0], vec![0.0, 1.0]],
        k_b: 1.0,
    };
    assert!(matches!(thermo_dispersion(&indefinite), Err(Error::Contract(_))));
    let asym = ThermoModel {
        hessian: vec![vec![-1.0, 0.2], vec![0.0, -1.0]],
        ..indefinite
    };
    assert!(thermo_dispersion(&asym).is_err());
}
