use clap::{Args, ValueEnum};
use serde::Serialize;

use qfluct::matrixqm::{commutator, random_ensemble, spin_magnetization, EnsembleConfig};
use qfluct::qstate::{OperatorSpec, PhysicalParams};
use qfluct::relations::{
    csf_margin, evaluate_catalog, gram_determinant, multi_temporal_csf, rsur_margin, RelationVerdict,
};
use qfluct::states::{free_packet_at, observable, packet_grid, StateSpec};
use qfluct::Exec;

use crate::config::{CliError, RunConfig};
use crate::output::emit;

const GRAM_TOL: f64 = 1e-9;
const HERMITICITY_TOL: f64 = 1e-10;
const COMMUTATOR_TOL: f64 = 1e-12;
const ENSEMBLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Relation {
    Csf,
    Rsur,
    Gram,
}

impl Relation {
    fn label(self) -> &'static str {
        match self {
            Relation::Csf => "CSF",
            Relation::Rsur => "RSUR",
            Relation::Gram => "GRAM",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Restrict to one state, e.g. `qo:n=3` or `packet:x0=0,sigma=1,k=2`.
    #[arg(long)]
    pub state: Option<String>,
    /// Relation to evaluate on `--state` (all applicable ones by default).
    #[arg(long, value_enum, requires = "state")]
    pub relation: Option<Relation>,
    /// Comma-separated observables, e.g. `x,p`.
    #[arg(long, value_delimiter = ',', requires = "state")]
    pub ops: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct VerifyRow {
    pub name: String,
    pub ops: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// Empty unless the row is an RSUR check.
    pub applicable: Option<bool>,
    pub pass: bool,
}

impl VerifyRow {
    fn csf(name: String, ops: String, v: &RelationVerdict, tol: f64) -> Self {
        Self {
            name,
            ops,
            lhs: v.lhs,
            rhs: v.rhs,
            margin: v.margin,
            applicable: None,
            pass: v.margin >= -tol,
        }
    }

    /// An inapplicable RSUR is expected to fail and does not count against the run.
    fn rsur(name: String, ops: String, v: &RelationVerdict, tol: f64) -> Self {
        let applicable = v.applicable.unwrap_or(true);
        Self {
            applicable: Some(applicable),
            pass: !applicable || v.margin >= -tol,
            ..Self::csf(name, ops, v, tol)
        }
    }
}

pub fn cmd_verify(args: &VerifyArgs, config: &RunConfig) -> Result<(), CliError> {
    let rows = match &args.state {
        Some(state) => single_state(state, args, config)?,
        None => full_suite(config)?,
    };
    emit(config, "verify", &rows)?;
    let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{} check(s) failed: {}", failed.len(), failed.join("; "))))
    }
}

fn single_state(state: &str, args: &VerifyArgs, config: &RunConfig) -> Result<Vec<VerifyRow>, CliError> {
    let spec: StateSpec = state
        .parse()
        .map_err(|e: qfluct::Error| CliError::Usage(format!("--state: {e}")))?;
    let wf = spec.build()?;
    let names: Vec<String> = match &args.ops {
        Some(ops) => ops.iter().map(|s| s.trim().to_string()).collect(),
        None => Vec::new(),
    };
    let resolve = |n: &str| observable(n, &spec).map_err(|e| CliError::Usage(format!("--ops: {e}")));
    let relations = match args.relation {
        Some(r) => vec![r],
        None => vec![Relation::Csf, Relation::Rsur],
    };
    let mut rows = Vec::new();
    for rel in relations {
        let name = format!("{spec} {}", rel.label());
        match rel {
            Relation::Gram => {
                let ops = if names.is_empty() {
                    spec.observables().iter().map(|s| s.to_string()).collect()
                } else {
                    names.clone()
                };
                let resolved = ops.iter().map(|n| resolve(n)).collect::<Result<Vec<_>, _>>()?;
                rows.push(gram_row(name, ops.join(","), &wf, &resolved)?);
            }
            Relation::Csf | Relation::Rsur => {
                let pairs: Vec<(String, String)> = if names.is_empty() {
                    spec.pairs().iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
                } else {
                    if names.len() != 2 {
                        return Err(CliError::Usage(format!("--ops needs two observables for {}", rel.label())));
                    }
                    vec![(names[0].clone(), names[1].clone())]
                };
                for (a, b) in pairs {
                    let (oa, ob) = (resolve(&a)?, resolve(&b)?);
                    let ops = format!("{a},{b}");
                    rows.push(if rel == Relation::Csf {
                        VerifyRow::csf(name.clone(), ops, &csf_margin(&wf, &oa, &ob)?, config.margin_tol)
                    } else {
                        VerifyRow::rsur(name.clone(), ops, &rsur_margin(&wf, &oa, &ob)?, config.margin_tol)
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn gram_row(
    name: String,
    ops: String,
    wf: &qfluct::qstate::WaveFunction,
    resolved: &[OperatorSpec],
) -> Result<VerifyRow, CliError> {
    let g = gram_determinant(wf, resolved)?;
    let floor = GRAM_TOL * g.scale.powi(resolved.len() as i32);
    Ok(VerifyRow {
        name,
        ops,
        lhs: g.determinant,
        rhs: 0.0,
        margin: g.determinant,
        applicable: None,
        pass: g.determinant >= -floor && g.hermiticity_error < HERMITICITY_TOL,
    })
}

fn full_suite(config: &RunConfig) -> Result<Vec<VerifyRow>, CliError> {
    let mut rows = Vec::new();
    for case in evaluate_catalog(Exec::default())? {
        let ops = format!("{},{}", case.a, case.b);
        rows.push(VerifyRow::csf(format!("{} CSF", case.state), ops.clone(), &case.csf, config.margin_tol));
        rows.push(VerifyRow::rsur(format!("{} RSUR", case.state), ops, &case.rsur, config.margin_tol));
    }

    let osc = PhysicalParams::oscillator(1.0)?;
    for n in 0..4 {
        let spec = StateSpec::Oscillator { n, params: osc };
        let ops: Vec<OperatorSpec> = ["p", "x", "H"].iter().map(|o| observable(o, &spec)).collect::<Result<_, _>>()?;
        rows.push(gram_row(format!("{spec} GRAM"), "p,x,H".into(), &spec.build()?, &ops)?);
    }

    let p = PhysicalParams::default();
    let (x0, sigma, k, t) = (0.0, 1.0, 1.0, 1.0);
    let grid = packet_grid(x0, sigma, k, t, &p, 4001)?;
    let w0 = free_packet_at(x0, sigma, k, 0.0, &p, &grid)?;
    let w1 = free_packet_at(x0, sigma, k, t, &p, &grid)?;
    for (a, b, oa, ob) in [
        ("x", "x", OperatorSpec::position(0), OperatorSpec::position(0)),
        ("x", "p", OperatorSpec::position(0), OperatorSpec::momentum(0, &p)),
    ] {
        let v = multi_temporal_csf(&w0, &w1, &oa, &ob)?;
        rows.push(VerifyRow::csf(
            format!("free:x0={x0},sigma={sigma},k={k},t=0|t={t} MULTI"),
            format!("{a},{b}"),
            &v,
            config.margin_tol,
        ));
    }

    for n in 1..=4 {
        let m = spin_magnetization(n, 1.0, p.hbar)?;
        let lhs = commutator(&m[0], &m[1])?;
        let rhs = m[2].matrix() * num_complex::Complex64::new(0.0, p.hbar);
        let err = (lhs.matrix() - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
        rows.push(VerifyRow {
            name: format!("spins:n={n} COMMUTATOR"),
            ops: "Mx,My".into(),
            lhs: err,
            rhs: COMMUTATOR_TOL,
            margin: COMMUTATOR_TOL - err,
            applicable: None,
            pass: err < COMMUTATOR_TOL,
        });
    }

    let ensemble = EnsembleConfig {
        seed: config.seed,
        ..EnsembleConfig::default()
    };
    let samples = random_ensemble(&ensemble, Exec::default())?;
    for &d in &ensemble.dims {
        let of_dim: Vec<_> = samples.iter().filter(|s| s.dim == d).collect();
        let worst = |f: &dyn Fn(&qfluct::matrixqm::RhoMargins) -> &RelationVerdict| {
            of_dim
                .iter()
                .map(|s| f(&s.margins))
                .min_by(|a, b| a.margin.total_cmp(&b.margin))
                .cloned()
        };
        for (label, v) in [
            ("CSF", worst(&|m| &m.csf)),
            ("RSUR", worst(&|m| &m.rsur)),
        ] {
            if let Some(v) = v {
                rows.push(VerifyRow::csf(
                    format!("rho:d={d},samples={} {label}", of_dim.len()),
                    "A,B".into(),
                    &v,
                    ENSEMBLE_TOL,
                ));
            }
        }
    }
    Ok(rows)
}
