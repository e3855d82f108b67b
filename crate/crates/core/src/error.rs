use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {locus}: {message}")]
    Parse { locus: String, message: String },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("unknown id: {0}")]
    UnknownId(String),

    #[error("unknown edge ({0}, {1})")]
    UnknownEdge(u32, u32),

    #[error("numerical divergence at tick {tick}: node {node} has a non-finite coordinate")]
    NumericalDivergence { tick: u64, node: u32 },

    #[error("treemap needs at least one community with positive weight")]
    NoCommunities,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(locus: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            locus: locus.into(),
            message: message.into(),
        }
    }
}
