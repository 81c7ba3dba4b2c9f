use thiserror::Error;

/// Errors from the forward scene model.
#[derive(Debug, Clone, Error)]
pub enum GeometryError {
    #[error("scatterer {index} coincides with the sensing array origin")]
    ScattererAtOrigin { index: usize },

    #[error("scatterer {index} coincides with transmit cluster {cluster}")]
    ScattererAtCluster { index: usize, cluster: String },

    #[error("scatterer {index} is labeled `{label}` which does not exist in the scene layout")]
    LabelMismatch { index: usize, label: String },

    #[error("invalid scene: {0}")]
    InvalidScene(String),
}

/// Errors from the sensing solvers.
#[derive(Debug, Clone, Error)]
pub enum SolverError {
    /// The path count is below the feasibility bound for the requested task.
    #[error("infeasible: P<{required} ({task} needs at least {required} paths, got {got})")]
    InsufficientPaths {
        task: &'static str,
        required: usize,
        got: usize,
    },

    /// The populated clusters cannot excite one of the shape unknowns.
    #[error("unobservable {dimension}: populated clusters {populated:?} leave its column zero")]
    UnobservableDimension {
        dimension: &'static str,
        populated: Vec<u8>,
    },

    /// The assembled system lost column rank (collinear or duplicated geometry).
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    /// The left null space came out empty, so no orientation discriminant exists.
    #[error("empty left null space: the system is not overdetermined")]
    EmptyNullSpace,

    /// No orientation produced a residual dip; the observations are inconsistent.
    #[error(
        "no consistent orientation: best residual {best:.3e} (grid mean {mean:.3e}, floor {floor:.3e})"
    )]
    NoConsistentOrientation { best: f64, mean: f64, floor: f64 },

    /// A multi-cluster operation received an observation without a cluster label.
    #[error("observation {index} carries no cluster label; multi-cluster sensing requires one")]
    MissingClusterLabel { index: usize },
}
