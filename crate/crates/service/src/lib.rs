//! Live session service: runs one session at a time at wall-clock rate,
//! streams snapshots over a websocket and takes resistance input from an
//! operator. The frame schema is described in `docs/protocol.md`.

pub mod engine;
pub mod protocol;
pub mod server;

pub use engine::{replay_session, write_session, Command, ConfigEntry, ConfigRegistry, Engine, EngineOptions};
pub use protocol::{Role, ServerFrame, Snapshot, SCHEMA_VERSION};
pub use server::{Server, MAX_INPUT_HZ};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] pace_align::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    WebSocket(Box<tokio_tungstenite::tungstenite::Error>),

    #[error("unknown config id {0:?}")]
    UnknownConfig(String),

    #[error("invalid service options: {0}")]
    Options(String),

    #[error("control loop has stopped")]
    EngineStopped,
}

impl From<tokio_tungstenite::tungstenite::Error> for Error {
    fn from(e: tokio_tungstenite::tungstenite::Error) -> Self {
        Error::WebSocket(Box::new(e))
    }
}
