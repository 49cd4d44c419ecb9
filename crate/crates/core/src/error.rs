use std::fmt;

use thiserror::Error;

/// Pipeline stage a failure is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Frontend,
    Dataflow,
    Candidates,
    Features,
    Forest,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Frontend => "frontend",
            Stage::Dataflow => "dataflow",
            Stage::Candidates => "candidates",
            Stage::Features => "features",
            Stage::Forest => "forest",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse context of {file_id}: {message}")]
    Parse { file_id: String, message: String },

    #[error("invalid recommendation point {file_id}:{line}:{column}: {reason}")]
    InvalidPoint {
        file_id: String,
        line: usize,
        column: usize,
        reason: String,
    },

    #[error("receiver has no data-flow relations")]
    EmptyFlow,

    #[error("no candidate APIs: no typed receiver, imports, or definitions in context")]
    EmptyCandidates,

    #[error("n-gram training corpus is empty")]
    EmptyCorpus,

    #[error("training data has a single class; both labels are required")]
    DegenerateData,

    #[error("true API `{truth}` is not among the generated candidates")]
    SkippedPoint { truth: String },

    #[error("bundle format version mismatch: found {found}, expected {expected}")]
    VersionMismatch { found: String, expected: String },

    #[error("corrupt model bundle: {0}")]
    CorruptBundle(String),

    #[error("invalid corpus manifest: {0}")]
    Manifest(String),

    #[error("{stage} stage failed: {source}")]
    Pipeline {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

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

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// The stage this error is attributed to, if it came out of the pipeline.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Pipeline { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    /// Strips pipeline attribution.
    pub fn root(&self) -> &Error {
        match self {
            Error::Pipeline { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
