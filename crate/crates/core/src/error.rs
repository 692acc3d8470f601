use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed PLY header: {0}")]
    PlyHeader(String),

    #[error("PLY vertex element is missing the `{0}` property")]
    PlyMissingProperty(&'static str),

    #[error("malformed PLY body: {0}")]
    PlyBody(String),

    #[error("scene has no points")]
    EmptyScene,

    #[error("point {0} has a non-finite position")]
    NonFinitePoint(usize),

    #[error("invalid proposals file: {0}")]
    ProposalFormat(String),

    #[error("proposal `{id}`: index {index} out of range for scene with {len} points")]
    IndexOutOfRange { id: String, index: usize, len: usize },

    #[error("duplicate object id `{0}`")]
    DuplicateObject(String),

    #[error("proposal `{id}`: {reason}")]
    InvalidProposal { id: String, reason: String },

    #[error("bounding box has zero extent in both x and y")]
    DegenerateBox,

    #[error("camera position coincides with its target")]
    CoincidentTarget,

    #[error("look direction is vertical; right vector is undefined")]
    VerticalLookDirection,

    #[error("every point of the object projects behind the camera")]
    BehindCamera,

    #[error("camera dropout of {drop} views requires more than {views} views")]
    DropoutTooLarge { drop: usize, views: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("metadata record: {0}")]
    Metadata(#[from] serde_json::Error),

    #[error("PNG encoding failed: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
