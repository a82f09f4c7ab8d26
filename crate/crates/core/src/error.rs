use thiserror::Error;

/// Errors raised by graph construction and the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("internal line `{0}` is a tadpole (both endpoints equal)")]
    TadpoleEdge(String),
    #[error("internal line `{0}` has non-positive or non-finite length {1}")]
    NonpositiveLength(String, f64),
    #[error("`{0}` references unknown vertex `{1}`")]
    DanglingReference(String, String),
    #[error("graph is disconnected: vertex `{0}` is not reachable")]
    DisconnectedGraph(String),
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("graph has no external lines")]
    NoExternalLines,
    #[error("vertex `{0}` has no incident edges")]
    IsolatedVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("edge sequence is not a walk: {0}")]
    NotAWalk(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("graph has no internal lines")]
    NoInternalLines,
    #[error("I - K(beta) is numerically singular (reciprocal condition {rcond:e})")]
    SingularD { rcond: f64 },
    #[error("exponent overflow: Re(beta) * max length = {0} exceeds 700")]
    Overflow(f64),
    #[error("A + ikB is singular at k = {0}")]
    SingularPencil(String),
    #[error("boundary conditions (A, B) are rank deficient (rank {rank} < {dim})")]
    RankDeficient { rank: usize, dim: usize },
    #[error("scattering system is inconsistent (relative residual {0:e})")]
    InconsistentSystem(f64),
    #[error("boundary conditions couple slots of different vertices ({0})")]
    NonLocal(String),
    #[error("quadrature supports at most 2 internal lines, graph has {0}")]
    TooManyInternalLines(usize),
    #[error("generating function entry vanishes, mean value undefined")]
    ZeroDenominator,
    #[error("traversal mean via length scaling is undefined at beta = 0")]
    ZeroBeta,
    #[error("transition collection is not stochastic: {0}")]
    NotStochastic(String),
    #[error("columns of M(`{0}`) are not equal")]
    ColumnsNotEqual(String),
    #[error("more than one line joins `{0}` and `{1}`")]
    MultiEdge(String, String),
    #[error("column sums are not 1: {0}")]
    NotNormalized(String),
    #[error("vertex chain is invalid: {0}")]
    InvalidChain(String),
    #[error("graph falls apart after the puncture: `{0}` is unreachable")]
    IsolatedRemainder(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Name of the variant, for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::TadpoleEdge(..) => "TadpoleEdge",
            Error::NonpositiveLength(..) => "NonpositiveLength",
            Error::DanglingReference(..) => "DanglingReference",
            Error::DisconnectedGraph(..) => "DisconnectedGraph",
            Error::DuplicateId(..) => "DuplicateId",
            Error::NoExternalLines => "NoExternalLines",
            Error::IsolatedVertex(..) => "IsolatedVertex",
            Error::UnknownEdge(..) => "UnknownEdge",
            Error::UnknownVertex(..) => "UnknownVertex",
            Error::NotAWalk(..) => "NotAWalk",
            Error::ShapeMismatch(..) => "ShapeMismatch",
            Error::NoInternalLines => "NoInternalLines",
            Error::SingularD { .. } => "SingularD",
            Error::Overflow(..) => "Overflow",
            Error::SingularPencil(..) => "SingularPencil",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::InconsistentSystem(..) => "InconsistentSystem",
            Error::NonLocal(..) => "NonLocal",
            Error::TooManyInternalLines(..) => "TooManyInternalLines",
            Error::ZeroDenominator => "ZeroDenominator",
            Error::ZeroBeta => "ZeroBeta",
            Error::NotStochastic(..) => "NotStochastic",
            Error::ColumnsNotEqual(..) => "ColumnsNotEqual",
            Error::MultiEdge(..) => "MultiEdge",
            Error::NotNormalized(..) => "NotNormalized",
            Error::InvalidChain(..) => "InvalidChain",
            Error::IsolatedRemainder(..) => "IsolatedRemainder",
            Error::InvalidArgument(..) => "InvalidArgument",
            Error::Parse(..) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
