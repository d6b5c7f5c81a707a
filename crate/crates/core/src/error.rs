use thiserror::Error;

use crate::graph::Violation;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input: unparsable files, unknown vertices, wrong domains.
    Input,
    /// Well-formed input outside the mathematical domain of an operation.
    Domain,
    /// A search or certificate could not be established.
    Verification,
    /// A numeric guard tripped (precision budget, cancellation check).
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex {vertex} (graph has {num_vertices} vertices)")]
    UnknownVertex { vertex: usize, num_vertices: usize },

    #[error("invalid graph: {}", join_violations(.0))]
    InvalidGraph(Vec<Violation>),

    #[error("vertex function has {found} values, graph has {expected} vertices")]
    DomainMismatch { expected: usize, found: usize },

    #[error("non-finite value at vertex {vertex}")]
    NonFiniteValue { vertex: usize },

    #[error("negative value {value} at vertex {vertex}")]
    NegativeValue { vertex: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("construction needs {requested} vertices, budget is {budget}")]
    BudgetExceeded { requested: f64, budget: usize },

    #[error("test function is supported on boundary vertex {vertex}")]
    SupportOnBoundary { vertex: usize },

    #[error("cutoff support B(o, {radius}) does not fit inside the interior (offending vertex {vertex})")]
    CutoffDoesNotFit { radius: usize, vertex: usize },

    #[error("ball of radius {radius} has zero volume")]
    ZeroVolume { radius: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("calibration failed: no n0 <= {n0_cap} works; best n0 = {best_n0} with window minimum {best_minimum} (target {target})")]
    CalibrationFailed {
        n0_cap: u64,
        best_n0: u64,
        best_minimum: f64,
        target: f64,
    },

    #[error("certificate rejected: residual {residual:e} > 0 at layer {n}")]
    CertificateRejected { n: u64, residual: f64 },

    #[error("precision guard tripped at n = {n}: {detail}")]
    PrecisionGuard { n: u64, detail: String },

    #[error("working precision of {bits} bits is below the required {required} bits")]
    InsufficientPrecision { bits: usize, required: usize },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::UnknownVertex { .. }
            | Error::InvalidGraph(_)
            | Error::DomainMismatch { .. }
            | Error::NonFiniteValue { .. }
            | Error::Parse { .. } => ErrorKind::Input,
            Error::NegativeValue { .. }
            | Error::InvalidParameter { .. }
            | Error::BudgetExceeded { .. }
            | Error::SupportOnBoundary { .. }
            | Error::CutoffDoesNotFit { .. }
            | Error::ZeroVolume { .. } => ErrorKind::Domain,
            Error::CalibrationFailed { .. } | Error::CertificateRejected { .. } => {
                ErrorKind::Verification
            }
            Error::PrecisionGuard { .. } | Error::InsufficientPrecision { .. } => {
                ErrorKind::Numeric
            }
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
