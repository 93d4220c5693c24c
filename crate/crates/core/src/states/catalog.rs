use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::*;
use crate::error::{contract, Result};
use crate::qstate::{OperatorSpec, PhysicalParams, WaveFunction};

const QO_NODES: usize = 2401;
const PHASE_NODES: usize = 2048;
const PACKET_NODES: usize = 4001;
const WELL_NODES: usize = 512;

/// A named state together with its constructor parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    Oscillator { n: usize, params: PhysicalParams },
    Phase { n: u32, params: PhysicalParams },
    TimePhase { n: u32, period: f64, params: PhysicalParams },
    Packet { x0: f64, sigma: f64, k: f64, params: PhysicalParams },
    FreePacket { x0: f64, sigma: f64, k: f64, t: f64, params: PhysicalParams },
    Well { a: f64, b: f64, params: PhysicalParams },
}

impl StateSpec {
    pub fn params(&self) -> &PhysicalParams {
        match self {
            StateSpec::Oscillator { params, .. }
            | StateSpec::Phase { params, .. }
            | StateSpec::TimePhase { params, .. }
            | StateSpec::Packet { params, .. }
            | StateSpec::FreePacket { params, .. }
            | StateSpec::Well { params, .. } => params,
        }
    }

    /// Build the state on its default grid.
    pub fn build(&self) -> Result<WaveFunction> {
        match *self {
            StateSpec::Oscillator { n, ref params } => qo_eigenstate(n, params, &qo_grid(n, params, QO_NODES)?),
            StateSpec::Phase { n, ref params } => {
                qo_phase_state(n, params, &Grid::periodic(0.0, 2.0 * PI, PHASE_NODES)?)
            }
            StateSpec::TimePhase { n, period, ref params } => {
                ensure!(period > 0.0, "period must be positive");
                time_phase_state(n, params, &Grid::periodic(0.0, period, PHASE_NODES)?)
            }
            StateSpec::Packet { x0, sigma, k, ref params } => {
                ensure!(sigma > 0.0, "packet width must be positive, got {sigma}");
                gaussian_packet(x0, sigma, k, params, &packet_grid(x0, sigma, k, 0.0, params, PACKET_NODES)?)
            }
            StateSpec::FreePacket { x0, sigma, k, t, ref params } => {
                ensure!(sigma > 0.0, "packet width must be positive, got {sigma}");
                free_packet_at(x0, sigma, k, t, params, &packet_grid(x0, sigma, k, t, params, PACKET_NODES)?)
            }
            StateSpec::Well { a, b, ref params } => well2d_ground(a, b, params, &well_grid(a, b, WELL_NODES)?),
        }
    }

    /// Observable names meaningful for this state.
    pub fn observables(&self) -> &'static [&'static str] {
        match self {
            StateSpec::Oscillator { .. } => &["x", "p", "H"],
            StateSpec::Phase { .. } => &["N", "phi"],
            StateSpec::TimePhase { .. } => &["E", "t"],
            StateSpec::Packet { .. } | StateSpec::FreePacket { .. } => &["x", "p", "H"],
            StateSpec::Well { .. } => &["x", "y", "px", "py", "H"],
        }
    }

    /// Operator pairs examined for this state by the relation catalog.
    pub fn pairs(&self) -> &'static [(&'static str, &'static str)] {
        match self {
            StateSpec::Oscillator { .. } => &[("x", "p"), ("p", "H"), ("x", "H")],
            StateSpec::Phase { .. } => &[("N", "phi"), ("phi", "N")],
            StateSpec::TimePhase { .. } => &[("E", "t")],
            StateSpec::Packet { .. } | StateSpec::FreePacket { .. } => &[("x", "p"), ("p", "H")],
            StateSpec::Well { .. } => &[("px", "py"), ("x", "px"), ("y", "py")],
        }
    }

    /// Closed-form moments of the state.
    pub fn moments(&self) -> Vec<MomentOracle> {
        match *self {
            StateSpec::Oscillator { n, ref params } => {
                let w = params.omega.unwrap_or(1.0);
                let e = n as f64 + 0.5;
                vec![
                    MomentOracle::new("x", 0.0, (e * params.hbar / (params.mass * w)).sqrt(), 1e-8),
                    MomentOracle::new("p", 0.0, (e * params.hbar * params.mass * w).sqrt(), 1e-7),
                    MomentOracle::new("H", params.hbar * w * e, 0.0, 1e-6),
                ]
            }
            StateSpec::Phase { n, .. } => vec![
                MomentOracle::new("N", n as f64, 0.0, 1e-8),
                MomentOracle::new("phi", PI * (1.0 - 1.0 / PHASE_NODES as f64), PI / 3f64.sqrt(), 1e-6),
            ],
            StateSpec::TimePhase { n, period, ref params } => vec![
                MomentOracle::new("E", params.hbar * 2.0 * PI * n as f64 / period, 0.0, 1e-8),
                MomentOracle::new("t", 0.5 * period * (1.0 - 1.0 / PHASE_NODES as f64), period / 12f64.sqrt(), 1e-6 * period),
            ],
            StateSpec::Packet { x0, sigma, k, ref params } => vec![
                MomentOracle::new("x", x0, sigma, 1e-8),
                MomentOracle::new("p", params.hbar * k, params.hbar / (2.0 * sigma), 1e-8),
            ],
            StateSpec::FreePacket { x0, sigma, k, t, ref params } => {
                let tau = params.hbar * t / (2.0 * params.mass * sigma * sigma);
                vec![
                    MomentOracle::new("x", x0 + params.hbar * k * t / params.mass, sigma * (1.0 + tau * tau).sqrt(), 1e-6),
                    MomentOracle::new("p", params.hbar * k, params.hbar / (2.0 * sigma), 1e-8),
                ]
            }
            StateSpec::Well { a, b, ref params } => {
                let q = params.hbar * PI / (a * b);
                let dp = q * ((a * a + b * b) / 2.0).sqrt();
                vec![
                    MomentOracle::relative("px", 0.0, dp, 1e-3),
                    MomentOracle::relative("py", 0.0, dp, 1e-3),
                ]
            }
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Oscillator { n, params } => write!(f, "qo:n={n},omega={}", params.omega.unwrap_or(1.0)),
            StateSpec::Phase { n, .. } => write!(f, "qo_phase:n={n}"),
            StateSpec::TimePhase { n, period, .. } => write!(f, "time:n={n},period={period}"),
            StateSpec::Packet { x0, sigma, k, .. } => write!(f, "packet:x0={x0},sigma={sigma},k={k}"),
            StateSpec::FreePacket { x0, sigma, k, t, .. } => write!(f, "free:x0={x0},sigma={sigma},k={k},t={t}"),
            StateSpec::Well { a, b, .. } => write!(f, "well:a={a},b={b}"),
        }
    }
}

impl FromStr for StateSpec {
    type Err = crate::Error;

    /// Parse `name:key=value,...`. Every state also accepts `hbar` and `mass`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv: Vec<(String, f64)> = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| contract(format!("expected key=value, got '{item}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| contract(format!("'{v}' is not a number")))?;
            kv.push((k.trim().to_string(), v));
        }
        let allowed: &[&str] = match name.trim() {
            "qo" => &["n", "omega"],
            "qo_phase" | "phase" => &["n"],
            "time" => &["n", "period"],
            "packet" => &["x0", "sigma", "k"],
            "free" => &["x0", "sigma", "k", "t"],
            "well" => &["a", "b"],
            other => return Err(contract(format!("unknown state '{other}'"))),
        };
        for (k, _) in &kv {
            ensure!(
                allowed.contains(&k.as_str()) || k == "hbar" || k == "mass",
                "unknown key '{k}' for state '{name}'"
            );
        }
        let get = |key: &str, default: f64| kv.iter().rev().find(|(k, _)| k == key).map_or(default, |(_, v)| *v);
        let level = |key: &str| -> Result<f64> {
            let v = get(key, 0.0);
            ensure!(v >= 0.0 && v.fract() == 0.0, "'{key}' must be a non-negative integer, got {v}");
            Ok(v)
        };
        let omega = if name == "qo" { Some(get("omega", 1.0)) } else { None };
        let params = PhysicalParams::new(get("hbar", 1.0), get("mass", 1.0), omega, 1.0)?;
        Ok(match name.trim() {
            "qo" => StateSpec::Oscillator { n: level("n")? as usize, params },
            "qo_phase" | "phase" => StateSpec::Phase { n: level("n")? as u32, params },
            "time" => StateSpec::TimePhase {
                n: level("n")? as u32,
                period: get("period", 2.0 * PI),
                params,
            },
            "packet" => StateSpec::Packet {
                x0: get("x0", 0.0),
                sigma: get("sigma", 1.0),
                k: get("k", 0.0),
                params,
            },
            "free" => StateSpec::FreePacket {
                x0: get("x0", 0.0),
                sigma: get("sigma", 1.0),
                k: get("k", 0.0),
                t: get("t", 0.0),
                params,
            },
            _ => StateSpec::Well {
                a: get("a", 1.0),
                b: get("b", 2.0),
                params,
            },
        })
    }
}

/// Resolve an observable name against a state's representation.
pub fn observable(name: &str, spec: &StateSpec) -> Result<OperatorSpec> {
    ensure!(
        spec.observables().contains(&name),
        "observable '{name}' is not defined for state '{spec}'"
    );
    let p = spec.params();
    Ok(match name {
        "x" | "phi" | "t" => OperatorSpec::position(0),
        "y" => OperatorSpec::position(1),
        "p" | "px" => OperatorSpec::momentum(0, p),
        "py" => OperatorSpec::momentum(1, p),
        "N" => OperatorSpec::number_phase(),
        "E" => OperatorSpec::energy_time(p),
        "H" => match spec {
            StateSpec::Oscillator { .. } => OperatorSpec::oscillator_hamiltonian(p)?,
            StateSpec::Well { .. } => OperatorSpec::kinetic(2, p),
            _ => OperatorSpec::kinetic(1, p),
        },
        _ => unreachable!("names are checked above"),
    })
}

/// A closed-form mean and standard deviation of one observable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentOracle {
    pub observable: String,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    /// Absolute tolerance.
    pub tol: f64,
}

impl MomentOracle {
    fn new(observable: &str, mean: f64, std: f64, tol: f64) -> Self {
        Self {
            observable: observable.into(),
            mean: Some(mean),
            std: Some(std),
            tol,
        }
    }

    fn relative(observable: &str, mean: f64, std: f64, rel: f64) -> Self {
        Self::new(observable, mean, std, rel * std.abs().max(mean.abs()))
    }
}

/// A constructed catalog state.
#[derive(Debug, Clone)]
pub struct StateCatalogEntry {
    pub name: String,
    pub spec: StateSpec,
    pub wf: WaveFunction,
    pub moments: Vec<MomentOracle>,
}

impl StateCatalogEntry {
    pub fn build(spec: StateSpec) -> Result<Self> {
        Ok(Self {
            name: spec.to_string(),
            wf: spec.build()?,
            moments: spec.moments(),
            spec,
        })
    }
}

/// Specs of every catalog state.
pub fn catalog_specs() -> Vec<StateSpec> {
    let nat = PhysicalParams::default();
    let osc = |w: f64| PhysicalParams { omega: Some(w), ..nat };
    let mut specs: Vec<StateSpec> = (0..=4).map(|n| StateSpec::Oscillator { n, params: osc(1.0) }).collect();
    specs.extend((0..=3).map(|n| StateSpec::Phase { n, params: nat }));
    specs.extend([
        StateSpec::Packet { x0: 2.0, sigma: 1.0, k: 0.0, params: nat },
        StateSpec::Packet { x0: 0.0, sigma: 1.0, k: 2.0, params: nat },
        StateSpec::Packet { x0: 1.0, sigma: 0.5, k: -1.5, params: nat },
        StateSpec::Well { a: 1.0, b: 2.0, params: nat },
        StateSpec::Well { a: 1.0, b: 3.0, params: nat },
        StateSpec::FreePacket { x0: 0.0, sigma: 1.0, k: 0.0, t: 1.0, params: nat },
        StateSpec::FreePacket { x0: 0.0, sigma: 1.0, k: 1.0, t: 0.5, params: nat },
        StateSpec::TimePhase { n: 2, period: 2.0 * PI, params: nat },
    ]);
    specs
}

/// Build every catalog state.
pub fn catalog() -> Result<Vec<StateCatalogEntry>> {
    catalog_specs().into_iter().map(StateCatalogEntry::build).collect()
}
