use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid robot model: {0}")]
    InvalidModel(String),

    #[error("hit-and-run chord is empty at walk {walk}")]
    EmptyChord { walk: usize },

    #[error("hit-and-run chord is unbounded; the polytope must be bounded")]
    UnboundedChord,

    #[error("sampling seed lies outside the polytope (violation {violation:e})")]
    SeedOutside { violation: f64 },

    #[error("distance gradient undefined: point lies on the segment")]
    GradientUndefined,

    #[error("segment is likely in collision (candidate at distance {distance:e})")]
    SegmentInCollision { distance: f64 },

    #[error("seed segment is not strictly inside the domain")]
    SeedOutsideDomain,

    #[error("rejection sampling exhausted after {attempts} attempts")]
    SamplingExhausted { attempts: usize },

    #[error("voxel map grid does not match the roadmap grid: {0}")]
    GridMismatch(String),

    #[error("inverse kinematics failed: {0}")]
    IkFailed(String),

    #[error("no path found in the roadmap")]
    NoPath,

    #[error("start and goal coincide")]
    AlreadyAtGoal,

    #[error("endpoint is in collision or outside its terminal set")]
    InfeasibleEndpoint,

    #[error("consecutive sets do not intersect at transition {0}")]
    InfeasibleTransition(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
