//! Measurement modeled as an information channel: classical distributions
//! and quantum density/current pairs pass through stochastic kernels, and
//! error indicators compare estimators before and after.

mod channel;
mod classical;
mod pipeline;
mod report;
mod thermal;

pub use channel::{
    out_central_moment, out_estimate, out_estimate_with, out_estimates, qms_apply, qms_apply_with, MeasurementChannel,
    OutEstimates, OUT_DENSITY_FLOOR,
};
pub use classical::{
    classical_estimate, classical_transform, error_indicators_classical, ClassicalDistribution, ClassicalJoint,
    ClassicalMoments, MAX_CLASSICAL_ORDER,
};
pub use pipeline::{
    branch_match, refine_packet, run_oscillator, run_packet, run_packet_on, run_sweep, scenario_half_width,
    BranchMatch, KernelCache, OracleComparison, OscillatorReport, PacketMeasurement, PacketReport, PipelineConfig,
    RefinementLevel, RefinementReport, SweepRow, SweepSpec, BRANCH_TOL, CONVERGENCE_TOL, DIVERGENCE_GROWTH,
};
pub use report::{error_indicators_quantum, ErrorEntry, ErrorReport, NamedReport};
pub use thermal::{fdt_dispersion, thermo_dispersion, SusceptibilitySpectrum, ThermoModel, TAIL_TOL};
