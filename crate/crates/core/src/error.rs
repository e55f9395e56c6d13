use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("curvature must be negative, got {0}")]
    NonNegativeCurvature(f64),

    #[error("degenerate quad: ν1 + ν2 vanishes")]
    DegenerateQuad,

    #[error("quad unsolvable: curvature variation too large (1 + α = {discriminant})")]
    UnsolvableQuad { discriminant: f64 },

    #[error("quad index ({i}, {j}) out of range for a {ni}x{nj} grid")]
    IndexOutOfRange { i: usize, j: usize, ni: usize, nj: usize },

    #[error("at sector {sector}, node ({i}, {j}): {source}")]
    AtNode {
        sector: usize,
        i: usize,
        j: usize,
        source: Box<Error>,
    },

    #[error("grid too coarse for prescribed curvature: edge {index} needs sin δ = {ratio} > 1")]
    GridTooCoarse { index: usize, ratio: f64 },

    #[error("outer iteration did not converge in {} iterations (last CHANGE = {})",
        .history.len(), .history.last().copied().unwrap_or(f64::NAN))]
    NonConvergence { history: Vec<f64> },

    #[error("continuation stage {stage} (ε = {epsilon}): {source}")]
    Stage {
        stage: usize,
        epsilon: f64,
        source: Box<Error>,
    },

    #[error("sector angles must sum to 2π, got {sum}")]
    AngleSum { sum: f64 },

    #[error("branch order m = {0} must be odd and at least 3")]
    EvenBranchOrder(usize),

    #[error("degenerate triangle in quad of sector {sector} at ({i}, {j})")]
    DegenerateTriangle { sector: usize, i: usize, j: usize },

    #[error("glued boundaries disagree: position {position}, normal {normal}")]
    GluingMismatch { position: f64, normal: f64 },

    #[error("node ({i}, {j}) of sector {sector} is not reachable from the origin")]
    Unreachable { sector: usize, i: usize, j: usize },

    #[error("no distance source given")]
    NoSources,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Whether the failure came from the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::DegenerateQuad
            | Error::UnsolvableQuad { .. }
            | Error::GridTooCoarse { .. }
            | Error::NonConvergence { .. }
            | Error::DegenerateTriangle { .. }
            | Error::GluingMismatch { .. }
            | Error::Unreachable { .. } => true,
            Error::AtNode { source, .. } | Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn at(self, sector: usize, i: usize, j: usize) -> Error {
        Error::AtNode {
            sector,
            i,
            j,
            source: Box::new(self),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Error {
        Error::InvalidParameter(msg.into())
    }
}
