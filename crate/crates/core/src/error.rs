use thiserror::Error;

/// Error type for mesh construction, assembly, solving and sweep drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid material parameter: {0}")]
    InvalidMaterial(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("boundary condition error: {0}")]
    Boundary(String),

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("mechanics system has no constrained displacement dofs (rigid modes)")]
    RigidModes,

    #[error("no stable penalty value found: {0}")]
    NoStableBeta(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
