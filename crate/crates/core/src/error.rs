use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline stage, used to tag failures of a full run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Mesh,
    Topology,
    Space,
    Assembly,
    Solve,
    Errors,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Mesh => "mesh",
            Stage::Topology => "topology",
            Stage::Space => "space",
            Stage::Assembly => "assembly",
            Stage::Solve => "solve",
            Stage::Errors => "errors",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bounding box: {0}")]
    InvalidBoundingBox(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown case `{0}` (expected halfplane, circle, annulus or flower)")]
    UnknownCase(String),

    #[error("level set gradient is singular at ({x}, {y}): {reason}")]
    SingularGradient { x: f64, y: f64, reason: &'static str },

    #[error("no boundary intersection along ray from ({x}, {y}) within |s| <= {smax}")]
    NoIntersection { x: f64, y: f64, smax: f64 },

    #[error("no quadrature rule of exactness degree {0} (supported: 0..=10)")]
    UnsupportedQuadrature(usize),

    #[error("interface chain through element {element} leaves the background mesh")]
    OpenChain { element: usize },

    #[error("interface chain broken at element {element}")]
    BrokenChain { element: usize },

    #[error("assembly failed on element {element}: {source}")]
    Assembly {
        element: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("singular system matrix (pivot {pivot})")]
    SingularMatrix { pivot: usize },

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("{stage} stage failed: {source}")]
    Pipeline {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Error {
        Error::Pipeline {
            stage,
            source: Box::new(self),
        }
    }
}
