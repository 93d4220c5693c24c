use serde::Serialize;

use crate::error::{ensure, Result};
use crate::qstate::EstimatorReport;

/// One in/out comparison `ε = |out - in|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorEntry {
    pub name: String,
    pub input: f64,
    pub output: f64,
    pub epsilon: f64,
}

impl ErrorEntry {
    pub fn new(name: impl Into<String>, input: f64, output: f64) -> Self {
        Self {
            name: name.into(),
            input,
            output,
            epsilon: (output - input).abs(),
        }
    }
}

/// Error indicators of a measurement.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ErrorReport {
    pub entries: Vec<ErrorEntry>,
}

impl ErrorReport {
    pub fn push(&mut self, entry: ErrorEntry) {
        self.entries.push(entry);
    }

    pub fn get(&self, name: &str) -> Option<&ErrorEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// `ε` of the named entry.
    pub fn epsilon(&self, name: &str) -> Option<f64> {
        self.get(name).map(|e| e.epsilon)
    }

    pub fn max_epsilon(&self) -> f64 {
        self.entries.iter().map(|e| e.epsilon).fold(0.0, f64::max)
    }
}

/// An estimator report labeled with its observable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedReport {
    pub name: String,
    pub report: EstimatorReport,
    /// Name of the second observable when `report.correlation` is set.
    pub partner: Option<String>,
}

impl NamedReport {
    pub fn new(name: impl Into<String>, report: EstimatorReport) -> Self {
        Self {
            name: name.into(),
            report,
            partner: None,
        }
    }

    pub fn pair(name: impl Into<String>, partner: impl Into<String>, report: EstimatorReport) -> Self {
        Self {
            name: name.into(),
            report,
            partner: Some(partner.into()),
        }
    }
}

/// `ε` of means, standard deviations and correlations between matching lists.
///
/// Complex correlations are compared by modulus of their difference.
pub fn error_indicators_quantum(inputs: &[NamedReport], outputs: &[NamedReport]) -> Result<ErrorReport> {
    ensure!(inputs.len() == outputs.len(), "in and out lists have different lengths");
    let mut report = ErrorReport::default();
    for (a, b) in inputs.iter().zip(outputs) {
        ensure!(
            a.name == b.name && a.partner == b.partner,
            "observable lists do not match: {} vs {}",
            a.name,
            b.name
        );
        report.push(ErrorEntry::new(format!("mean_{}", a.name), a.report.mean.re, b.report.mean.re));
        report.push(ErrorEntry::new(format!("std_{}", a.name), a.report.std, b.report.std));
        if let (Some(ci), Some(co), Some(p)) = (a.report.correlation, b.report.correlation, &a.partner) {
            report.push(ErrorEntry {
                name: format!("corr_{}_{}", a.name, p),
                input: ci.norm(),
                output: co.norm(),
                epsilon: (co - ci).norm(),
            });
        }
    }
    Ok(report)
}
