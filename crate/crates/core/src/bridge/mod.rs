//! Length-prefixed request/response protocol that moves next-state
//! computation into a separate process.

mod client;
mod endpoint;
mod server;
pub mod wire;

use std::io;

use thiserror::Error;

pub use client::{connect, connect_with_timeout, RemoteProvider, DEFAULT_CONNECT_TIMEOUT};
pub use endpoint::{Endpoint, ENDPOINT_ENV};
pub use server::{serve, ServeStats, Server};
pub use wire::{Chunk, Message, PROTOCOL_VERSION};

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("cannot bind {endpoint}: {source}")]
    Bind {
        endpoint: String,
        #[source]
        source: io::Error,
    },
    #[error("could not connect to {endpoint}: {last}")]
    ConnectTimeout { endpoint: String, last: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}
