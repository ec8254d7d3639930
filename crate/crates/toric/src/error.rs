//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("support differences span a lattice of rank {rank} < {n}")]
    RankDeficient { rank: usize, n: usize },
    #[error("support {0} has fewer than two points")]
    TooFewPoints(usize),
    #[error("support {i} lies entirely on its face in direction {xi:?}")]
    DegenerateSupport { i: usize, xi: Vec<i64> },
    #[error("weighted covariance of support {0} is singular")]
    DegenerateGram(usize),
    #[error("equation {0} has zero coefficient vector")]
    ZeroEquation(usize),
    #[error("coefficient ({0}, {1}) is zero")]
    ZeroCoefficient(usize, usize),
    #[error("facet gap eta is zero or undefined")]
    ZeroEta,
    #[error("imbalance invariant is infinite (zero coefficient)")]
    InfiniteKappa,
    #[error("Jacobian is singular")]
    SingularJacobian,
    #[error("Newton iteration did not converge")]
    NoConvergence,
    #[error("alpha {0} outside (0, alpha0]")]
    OutOfRange(f64),
    #[error("delta {delta} exceeds the admissible maximum {max}")]
    DeltaTooLarge { delta: f64, max: f64 },
    #[error("mixed volume {nv} not divisible by lattice determinant {det}")]
    InternalInconsistency { nv: i64, det: i64 },
    #[error("resultant vanishes identically")]
    ResultantDegenerate,
    #[error("leading or trailing coefficient vanishes")]
    LeadingZero,
    #[error("no brute-force oracle for n = {0}")]
    OracleUnavailable(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("path stalled at t = {0}")]
    StepStalled(f64),
    #[error("path diverged to toric infinity")]
    InfinityDiverged,
    #[error("Newton-step budget exceeded")]
    BudgetExceeded,
    #[error("could not find start roots: found {found} of {expected}")]
    StartIncomplete { found: usize, expected: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable identifier of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::RankDeficient { .. } => "RankDeficient",
            Error::TooFewPoints(_) => "TooFewPoints",
            Error::DegenerateSupport { .. } => "DegenerateSupport",
            Error::DegenerateGram(_) => "DegenerateGram",
            Error::ZeroEquation(_) => "ZeroEquation",
            Error::ZeroCoefficient(..) => "ZeroCoefficient",
            Error::ZeroEta => "ZeroEta",
            Error::InfiniteKappa => "InfiniteKappa",
            Error::SingularJacobian => "SingularJacobian",
            Error::NoConvergence => "NoConvergence",
            Error::OutOfRange(_) => "OutOfRange",
            Error::DeltaTooLarge { .. } => "DeltaTooLarge",
            Error::InternalInconsistency { .. } => "InternalInconsistency",
            Error::ResultantDegenerate => "ResultantDegenerate",
            Error::LeadingZero => "LeadingZero",
            Error::OracleUnavailable(_) => "OracleUnavailable",
            Error::Dimension(_) => "Dimension",
            Error::StepStalled(_) => "StepStalled",
            Error::InfinityDiverged => "InfinityDiverged",
            Error::BudgetExceeded => "BudgetExceeded",
            Error::StartIncomplete { .. } => "StartIncomplete",
            Error::Parse(_) => "Parse",
        }
    }

    /// Failures of the numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularJacobian
                | Error::NoConvergence
                | Error::ResultantDegenerate
                | Error::StepStalled(_)
                | Error::InfinityDiverged
                | Error::BudgetExceeded
                | Error::StartIncomplete { .. }
        )
    }
}
