use std::io;

/// Errors shared by loaders and configuration handling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown scene archetype {0:?}")]
    UnknownArchetype(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}
