//! Error-to-exit-code mapping: 2 for violated assumptions or invalid
//! inputs, 3 for solver failures, 4 for I/O.

use dln_core::bounds::BoundError;
use dln_core::experiments::ExperimentError;
use dln_core::lp::LpError;
use dln_core::nullspace::NullspaceError;
use dln_core::numerics::{LinAlgError, QuadError, RootError};
use dln_core::potentials::PotentialError;
use dln_core::sharpness::SharpnessError;
use dln_core::solvers::SolverError;

pub const EXIT_ASSUMPTION: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_IO: u8 = 4;

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn assumption(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_ASSUMPTION,
            message: message.into(),
        }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_SOLVER,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::io(format!("JSON: {e}"))
    }
}

impl From<LinAlgError> for CliError {
    fn from(e: LinAlgError) -> Self {
        CliError::assumption(e.to_string())
    }
}

impl From<LpError> for CliError {
    fn from(e: LpError) -> Self {
        match e {
            LpError::Infeasible | LpError::Shape(_) | LpError::SignConflict { .. } => {
                CliError::assumption(e.to_string())
            }
            LpError::LinAlg(inner) => inner.into(),
            LpError::Unbounded | LpError::MaxIterations { .. } => CliError::solver(e.to_string()),
        }
    }
}

impl From<PotentialError> for CliError {
    fn from(e: PotentialError) -> Self {
        match e {
            PotentialError::BadDepth(_) | PotentialError::BadAlpha(_) => {
                CliError::assumption(e.to_string())
            }
            PotentialError::DomainViolation { .. } | PotentialError::Overflow { .. } => {
                CliError::solver(e.to_string())
            }
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Lp(inner) => inner.into(),
            _ => CliError::solver(e.to_string()),
        }
    }
}

impl From<NullspaceError> for CliError {
    fn from(e: NullspaceError) -> Self {
        match e {
            NullspaceError::Lp(inner) => inner.into(),
            NullspaceError::LinAlg(inner) => inner.into(),
            NullspaceError::DegenerateSupport | NullspaceError::DegenerateWeights { .. } => {
                CliError::assumption(e.to_string())
            }
        }
    }
}

impl From<BoundError> for CliError {
    fn from(e: BoundError) -> Self {
        CliError::assumption(e.to_string())
    }
}

impl From<SharpnessError> for CliError {
    fn from(e: SharpnessError) -> Self {
        match e {
            SharpnessError::InvalidParameters(_) => CliError::assumption(e.to_string()),
            SharpnessError::Potential(inner) => inner.into(),
            SharpnessError::NoBracket | SharpnessError::DomainViolation => {
                CliError::solver(e.to_string())
            }
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::InvalidDims(_) | ExperimentError::DegenerateFit => {
                CliError::assumption(e.to_string())
            }
            ExperimentError::Lp(inner) => inner.into(),
            ExperimentError::Solver(inner) => inner.into(),
            ExperimentError::Nullspace(inner) => inner.into(),
            ExperimentError::Bound(inner) => inner.into(),
        }
    }
}

impl From<RootError> for CliError {
    fn from(e: RootError) -> Self {
        CliError::solver(e.to_string())
    }
}

impl From<QuadError> for CliError {
    fn from(e: QuadError) -> Self {
        CliError::solver(e.to_string())
    }
}
