use clap::Args;
use serde::Serialize;

use qfluct::annex::AnnexScenario;
use qfluct::measurement::{run_oscillator, run_packet, run_sweep, OscillatorReport, PacketReport};
use qfluct::qstate::PhysicalParams;

use crate::config::{CliError, RunConfig};
use crate::output::emit;

#[derive(Debug, Clone, Args)]
pub struct PacketArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub k: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
}

#[derive(Debug, Clone, Args)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub packet: PacketArgs,
    /// Width of the density kernel.
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Width of the current kernel.
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Measure the oscillator ground state instead of a packet; `--sigma`, `--x0` and `--k` are ignored.
    #[arg(long)]
    pub oscillator: bool,
    /// Oscillator frequency.
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub packet: PacketArgs,
    /// Density-kernel widths: `a,b,c` or `start:stop:count`.
    #[arg(long)]
    pub gammas: String,
    /// Current-kernel widths: `a,b,c` or `start:stop:count`.
    #[arg(long, default_value = "0")]
    pub lambdas: String,
}

/// One measured packet. Columns are documented in `schema/columns.json`.
#[derive(Debug, Clone, Serialize)]
pub struct PacketRow {
    pub x0: f64,
    pub sigma: f64,
    pub k: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub hbar: f64,
    pub mass: f64,
    pub nodes: usize,
    pub half_width: f64,
    pub mean_x_in: f64,
    pub std_x_in: f64,
    pub mean_p_in: f64,
    pub std_p_in: f64,
    pub corr_xp_in_re: f64,
    pub corr_xp_in_im: f64,
    pub mean_x_out: f64,
    pub std_x_out: f64,
    pub mean_p_out: f64,
    pub std_p_out: f64,
    pub corr_xp_out_re: f64,
    pub corr_xp_out_im: f64,
    pub rho_out_std: f64,
    pub current_out_std: Option<f64>,
    pub eps_mean_x: f64,
    pub eps_std_x: f64,
    pub eps_mean_p: f64,
    pub eps_std_p: f64,
    pub eps_corr_xp: f64,
    pub oracle_rho_out_std: f64,
    pub oracle_current_out_std: f64,
    pub oracle_eps_std_x: f64,
    pub oracle_std_p_out: f64,
    pub oracle_eps_std_p_trailing_hbar_k: f64,
    pub oracle_eps_std_p_trailing_hbar_over_2sigma: f64,
    pub momentum_branch: String,
    pub rel_rho_out_std: f64,
    pub rel_eps_std_x: f64,
    pub rel_std_p_out: f64,
    pub rel_eps_std_p: f64,
    pub max_rel: f64,
    pub continuity_residual: f64,
    pub pass: bool,
}

impl PacketRow {
    fn new(r: &PacketReport, rel_tol: f64) -> Self {
        let s = &r.scenario;
        let m = &r.measurement;
        let pr = &r.predictions;
        let get = |list: &[qfluct::measurement::NamedReport], name: &str| {
            list.iter().find(|n| n.name == name).map(|n| n.report).expect("pipeline reports x and p")
        };
        let (xi, pi, xo, po) = (get(&m.input, "x"), get(&m.input, "p"), get(&m.output, "x"), get(&m.output, "p"));
        let ci = xi.correlation.unwrap_or_default();
        let co = xo.correlation.unwrap_or_default();
        let eps = |n: &str| m.errors.epsilon(n).unwrap_or(f64::NAN);
        let rel = |n: &str| r.comparison(n).map_or(f64::NAN, |c| c.rel);
        Self {
            x0: s.x0,
            sigma: s.sigma,
            k: s.k,
            gamma: s.gamma,
            lambda: s.lambda,
            hbar: s.params.hbar,
            mass: s.params.mass,
            nodes: m.nodes,
            half_width: m.half_width,
            mean_x_in: xi.mean.re,
            std_x_in: xi.std,
            mean_p_in: pi.mean.re,
            std_p_in: pi.std,
            corr_xp_in_re: ci.re,
            corr_xp_in_im: ci.im,
            mean_x_out: xo.mean.re,
            std_x_out: xo.std,
            mean_p_out: po.mean.re,
            std_p_out: po.std,
            corr_xp_out_re: co.re,
            corr_xp_out_im: co.im,
            rho_out_std: m.rho_out_std,
            current_out_std: m.current_out_std,
            eps_mean_x: eps("mean_x"),
            eps_std_x: eps("std_x"),
            eps_mean_p: eps("mean_p"),
            eps_std_p: eps("std_p"),
            eps_corr_xp: eps("corr_x_p"),
            oracle_rho_out_std: pr.rho_out_std,
            oracle_current_out_std: pr.current_out_std,
            oracle_eps_std_x: pr.eps_std_x,
            oracle_std_p_out: pr.std_p_out,
            oracle_eps_std_p_trailing_hbar_k: pr.eps_std_p_trailing_k,
            oracle_eps_std_p_trailing_hbar_over_2sigma: pr.eps_std_p_trailing_input_spread,
            momentum_branch: r.branch.label().to_string(),
            rel_rho_out_std: rel("rho_out_std"),
            rel_eps_std_x: rel("eps_std_x"),
            rel_std_p_out: rel("std_p_out"),
            rel_eps_std_p: rel("eps_std_p"),
            max_rel: r.max_rel(),
            continuity_residual: m.continuity_residual,
            pass: r.max_rel() <= rel_tol,
        }
    }
}

/// The oscillator ground state through a density kernel. Columns are documented in `schema/columns.json`.
#[derive(Debug, Clone, Serialize)]
pub struct OscillatorRow {
    pub gamma: f64,
    pub lambda: f64,
    pub hbar: f64,
    pub mass: f64,
    pub omega: f64,
    pub nodes: usize,
    pub half_width: f64,
    pub mean_h_in: f64,
    pub std_h_in: f64,
    pub mean_h_out: f64,
    pub std_h_out: f64,
    pub eps_mean_h: f64,
    pub eps_std_h: f64,
    pub eps_mean_x: f64,
    pub eps_std_x: f64,
    pub eps_mean_p: f64,
    pub eps_std_p: f64,
    pub oracle_mean_h_out: f64,
    pub oracle_std_h_out: f64,
    pub oracle_eps_mean_h: f64,
    pub oracle_eps_std_h: f64,
    pub rel_mean_h_out: f64,
    pub rel_std_h_out: f64,
    pub max_rel: f64,
    pub pass: bool,
}

impl OscillatorRow {
    fn new(r: &OscillatorReport, rel_tol: f64) -> Self {
        let s = &r.scenario;
        let h_in = r.input("H").expect("pipeline reports H").report;
        let h_out = r.output("H").expect("pipeline reports H").report;
        let eps = |n: &str| r.errors.epsilon(n).unwrap_or(f64::NAN);
        let rel = |n: &str| r.comparison(n).map_or(f64::NAN, |c| c.rel);
        Self {
            gamma: s.gamma,
            lambda: s.lambda,
            hbar: s.params.hbar,
            mass: s.params.mass,
            omega: s.params.omega.unwrap_or(f64::NAN),
            nodes: r.nodes,
            half_width: r.half_width,
            mean_h_in: h_in.mean.re,
            std_h_in: h_in.std,
            mean_h_out: h_out.mean.re,
            std_h_out: h_out.std,
            eps_mean_h: eps("mean_H"),
            eps_std_h: eps("std_H"),
            eps_mean_x: eps("mean_x"),
            eps_std_x: eps("std_x"),
            eps_mean_p: eps("mean_p"),
            eps_std_p: eps("std_p"),
            oracle_mean_h_out: r.predictions.mean_h_out,
            oracle_std_h_out: r.predictions.std_h_out,
            oracle_eps_mean_h: r.predictions.eps_mean_h,
            oracle_eps_std_h: r.predictions.eps_std_h,
            rel_mean_h_out: rel("mean_h_out"),
            rel_std_h_out: rel("std_h_out"),
            max_rel: r.max_rel(),
            pass: r.max_rel() <= rel_tol,
        }
    }
}

fn params(p: &PacketArgs, omega: Option<f64>) -> Result<PhysicalParams, CliError> {
    Ok(PhysicalParams::new(p.hbar, p.mass, omega, 1.0)?)
}

fn failed_rows(rows: impl Iterator<Item = (bool, String)>) -> Result<(), CliError> {
    let bad: Vec<String> = rows.filter(|(pass, _)| !pass).map(|(_, n)| n).collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("pipeline disagrees with the closed form at: {}", bad.join("; "))))
    }
}

pub fn cmd_measure(args: &MeasureArgs, config: &RunConfig) -> Result<(), CliError> {
    if args.oscillator {
        let s = AnnexScenario::oscillator(args.gamma, args.lambda, params(&args.packet, Some(args.omega))?)?;
        let row = OscillatorRow::new(&run_oscillator(&s, &config.pipeline)?, config.rel_tol);
        emit(config, "measure", std::slice::from_ref(&row))?;
        return failed_rows(std::iter::once((row.pass, format!("gamma={}", row.gamma))));
    }
    let p = &args.packet;
    let s = AnnexScenario::new(p.x0, p.sigma, p.k, args.gamma, args.lambda, params(p, None)?)?;
    let row = PacketRow::new(&run_packet(&s, &config.pipeline)?, config.rel_tol);
    emit(config, "measure", std::slice::from_ref(&row))?;
    failed_rows(std::iter::once((row.pass, format!("gamma={},lambda={}", row.gamma, row.lambda))))
}

/// Parse `a,b,c` or `start:stop:count`.
pub fn parse_range(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: String| CliError::Usage(format!("{flag}: {msg}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad(format!("'{t}' is not a number")));
    let values = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:count".into()));
        }
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad(format!("'{}' is not a count", parts[2])))?;
        match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(num)
            .collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err(bad("empty range".into()));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(bad(format!("widths must be finite and non-negative, got {v}")));
    }
    let mut values = values;
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(values)
}

pub fn cmd_scan(args: &ScanArgs, config: &RunConfig) -> Result<(), CliError> {
    let gammas = parse_range("--gammas", &args.gammas)?;
    let lambdas = parse_range("--lambdas", &args.lambdas)?;
    let p = &args.packet;
    let params = params(p, None)?;
    let mut scenarios = Vec::with_capacity(gammas.len() * lambdas.len());
    for &g in &gammas {
        for &l in &lambdas {
            scenarios.push(AnnexScenario::new(p.x0, p.sigma, p.k, g, l, params)?);
        }
    }
    let rows: Vec<PacketRow> = run_sweep(&scenarios, &config.pipeline)?
        .iter()
        .map(|r| PacketRow::new(&r.report, config.rel_tol))
        .collect();
    emit(config, "scan", &rows)?;
    failed_rows(
        rows.iter()
            .map(|r| (r.pass, format!("gamma={},lambda={}", r.gamma, r.lambda))),
    )
}
