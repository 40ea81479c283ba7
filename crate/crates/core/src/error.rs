use thiserror::Error;

/// Errors surfaced by the exact-arithmetic engines.
///
/// Domain precondition violations are kept separate from schema/shape
/// problems so the CLI can map them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("lattice containment violated: {0}")]
    Containment(String),

    #[error("map is not a local homomorphism")]
    NonLocalHom,

    #[error("map does not respect monoids: {0}")]
    NotMonoidMap(String),

    #[error("malformed diagram: {0}")]
    MalformedDiagram(String),

    #[error("no face map from cone `{from}` into cone `{to}`")]
    MissingFaceMap { from: String, to: String },

    #[error("no common ambient cone for {0}")]
    NoCommonAmbient(String),

    #[error("invalid cone complex: {0}")]
    InvalidComplex(String),

    #[error("invalid tropical type: {0}")]
    InvalidType(String),

    #[error("not a contraction morphism: {0}")]
    NotAContraction(String),

    #[error("split component {0} is not realizable")]
    UnrealizableComponent(usize),

    #[error("type is not rigid: moduli cone has dimension {dim}")]
    NonRigid { dim: usize },

    #[error("complex carries no base map delta")]
    DeltaMissing,

    #[error("type is not defined over the base: {0}")]
    NotOverBase(String),

    #[error("wall-type invariant violated: {0}")]
    WallInvariant(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("divisibility violated: {0}")]
    Divisibility(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("no generic configuration found after {0} perturbation attempts")]
    NonGeneric(usize),

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
