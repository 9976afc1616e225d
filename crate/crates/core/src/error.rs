use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("boundary partition does not match the graph: {0}")]
    PartitionMismatch(String),
    #[error("enumeration budget exceeded: {what} needs {size}, budget is {budget}")]
    TooLarge {
        what: &'static str,
        size: usize,
        budget: usize,
    },
    #[error("no dual is defined for this graph: {0}")]
    NoDual(String),
    #[error("invalid Dobrushin arcs (property {property}): {reason}")]
    InvalidArcs { property: u8, reason: String },
    #[error("configuration violates the boundary condition: {0}")]
    InvalidConfiguration(String),
    #[error("cluster weight q = {0} is not supported by this update")]
    InvalidQ(f64),
    #[error("event geometry is outside the graph: {0}")]
    GeometryOutOfRange(String),
    #[error("invalid contour: {0}")]
    InvalidContour(String),
    #[error("invalid vertex set: {0}")]
    InvalidVertexSet(String),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("relative gap undefined: reference probability is zero")]
    ZeroDenominator,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
