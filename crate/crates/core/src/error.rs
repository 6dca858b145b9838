use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("io error: {0}")]
    Stream(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
    #[error("message has no score for dimension `{0}`")]
    MissingScore(String),
    #[error("user `{0}` has no outgoing edges")]
    UndefinedUser(String),
    #[error("neighbor `{0}` has no location")]
    UnlocatedNeighbor(String),
    #[error("unknown area `{0}`")]
    UnknownArea(String),
    #[error("need at least {needed} areas, got {got}")]
    TooFewAreas { needed: usize, got: usize },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("need more than {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("vector is constant")]
    ConstantVector,
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Process exit code: 1 for input problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::DegenerateFit(_)
            | Error::RankDeficient
            | Error::TooFewObservations { .. }
            | Error::ConstantVector => 2,
            _ => 1,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
