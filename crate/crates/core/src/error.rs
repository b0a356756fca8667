use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    Asymmetric { asymmetry: f64 },

    #[error(
        "not a proper rotation: |R^T R - I| = {orthogonality:.3e}, |det R - 1| = {det_defect:.3e}"
    )]
    NotRotation { orthogonality: f64, det_defect: f64 },

    #[error("direction is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("method {0} expects a 21-parameter vector, not a matrix")]
    WrongArity(&'static str),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("node {node} is not reachable from node 0 through the strut network")]
    Disconnected { node: usize },

    #[error(
        "stiffness system is singular beyond rigid translation (null-space dimension {nullity})"
    )]
    Singular { nullity: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lattice '{name}': {source}")]
    Item {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl Error {
    pub(crate) fn in_lattice(self, name: &str) -> Self {
        Error::Item {
            name: name.to_string(),
            source: Box::new(self),
        }
    }
}
