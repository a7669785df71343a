use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex weight {weight} at index {index} is below 1")]
    WeightBelowOne { index: usize, weight: f64 },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("signals or operators live on different signal spaces")]
    SpaceMismatch,

    #[error("adjacency matrix is not symmetric at ({0}, {1})")]
    AsymmetricAdjacency(usize, usize),

    #[error("adjacency matrix has a negative entry at ({0}, {1})")]
    NegativeWeight(usize, usize),

    #[error("adjacency matrix has a nonzero diagonal entry at vertex {0}")]
    NonZeroDiagonal(usize),

    #[error("normalized Laplacian requires unit vertex weights")]
    NormalizedNeedsUnitWeights,

    #[error("vertex {0} is isolated; the normalized Laplacian is undefined")]
    IsolatedVertexInNormalized(usize),

    #[error("graph has no edges; largest Laplacian eigenvalue is zero")]
    DegenerateGraph,

    #[error("operator is not normal (relative defect {defect:.3e})")]
    NotNormal { defect: f64 },

    #[error("operator spectrum leaves [0, 1] (eigenvalue {0})")]
    SpectrumOutOfRange(f64),

    #[error("eigensolver did not converge")]
    EigenSolverFailed,

    #[error("spectrum is empty")]
    EmptySpectrum,

    #[error("filter bank has lower frame bound {lower} <= 0")]
    EmptyFrame { lower: f64 },

    #[error("filter bank has no filters")]
    NoFilters,

    #[error("no tabulated kernel sample within {max_distance} of {point}")]
    SampleOutOfRange { point: String, max_distance: f64 },

    #[error("constant vector is not in the kernel of the shift operator")]
    ConstantVectorNotInKernel,

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("architecture is malformed: {0}")]
    InvalidArchitecture(String),

    #[error("feature trees have different shapes")]
    ShapeMismatch,

    #[error("chosen eigenvector has a non-positive entry ({0:.3e})")]
    NonPositiveEigenvector(f64),

    #[error("vector is not an eigenvector of the layer operator (residual {0:.3e})")]
    NotAnEigenvector(f64),

    #[error("gap assumption B*m >= eta violated in layer {layer}: B*m = {bm:.6}, eta = {eta:.6}")]
    GapAssumptionViolated { layer: usize, bm: f64, eta: f64 },

    #[error("layer {0} lacks a lower Lipschitz constant")]
    MissingLowerLipschitz(usize),

    #[error("a kernel in layer {0} lacks a Lipschitz bound")]
    MissingLipschitzBound(usize),

    #[error("lowest eigenvalue is degenerate (multiplicity {0})")]
    DegenerateGroundState(usize),

    #[error("operator has no zero eigenvalue (lowest is {0:.3e})")]
    NoZeroEigenvalue(f64),

    #[error("edge weights are not compatible with the shift operator's vertex weights")]
    EdgeWeightsIncompatible,

    #[error("atoms {0} and {1} coincide")]
    CoincidentAtoms(usize, usize),

    #[error("charge {charge} of atom {index} is not positive")]
    NonPositiveCharge { index: usize, charge: f64 },

    #[error("omega lies within {margin} of the spectrum (distance {distance:.3e})")]
    OmegaInSpectrum { distance: f64, margin: f64 },

    #[error("kernel is not holomorphic")]
    NotHolomorphic,

    #[error("graph is disconnected; eccentricity is undefined")]
    DisconnectedForEccentricity,

    #[error("clique enumeration is capped at {cap} vertices (graph has {size})")]
    CliqueCapExceeded { cap: usize, size: usize },

    #[error("unknown descriptor {0:?}")]
    UnknownDescriptor(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("feature dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("kernel system is singular")]
    SingularSystem,

    #[error("too few samples: {samples} for {required}")]
    TooFewSamples { samples: usize, required: usize },

    #[error("dataset not found: {0}")]
    DatasetNotFound(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
