use alloc::string::String;

/// Errors raised by jet-level operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{op}: dimension mismatch (expected {expected}, found {found})")]
    Dimension {
        op: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{op}: map component {component} has a nonzero constant term")]
    InvalidMap { op: &'static str, component: usize },
    #[error("{op}: linear part is singular")]
    NonInvertible { op: &'static str },
    #[error("{op}: form is not closed (residual {residual})")]
    NotClosed { op: &'static str, residual: String },
    #[error("cocycle_defect: terms of degree {found} remain below degree {degree}")]
    NotPrepared { degree: u32, found: u32 },
    #[error("{op}: homological equation has no solution at degree {degree}")]
    NoSolution { op: &'static str, degree: u32 },
    #[error("invariant_projection: invariants and images do not split the space")]
    NotReductive,
    #[error("{op}: constant part is not in standard form; normalize first")]
    NormalizeFirst { op: &'static str },
    #[error("{op}: input is not invariant under generator {generator}")]
    NotEquivariant { op: &'static str, generator: usize },
    #[error("formal_flow: linear part of the field is not nilpotent")]
    IllPosed,
    #[error("formal_flow: Picard iteration did not stabilise after {iterations} steps")]
    NoConvergence { iterations: usize },
    #[error("{op}: expression is singular at the evaluation point")]
    Singularity { op: &'static str },
    #[error("b_primitive: restriction of the log part to z = 0 is not closed")]
    NotLocallyBExact,
    #[error("{op}: map does not preserve the hypersurface z = 0")]
    InvalidBMap { op: &'static str },
    #[error("{op}: bivector fails the Jacobi identity (residual {residual})")]
    NotPoisson { op: &'static str, residual: String },
    #[error("weinstein_split: unsolvable step at degree {degree}")]
    SplitFailure { degree: u32 },
    #[error("{op}: {reason}")]
    Invalid { op: &'static str, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
