//! Session service for the multi-layout engine: JSON commands in, layout
//! frames out over a WebSocket, with per-session study telemetry.

pub mod codec;
pub mod protocol;
pub mod registry;
pub mod server;
pub mod session;
pub mod telemetry;

pub use codec::{decode_binary, encode_binary, encode_json, DecodeError};
pub use protocol::{ClientCommand, ClientMessage, FrameFormat, ServerMessage};
pub use server::{bind, router, serve, ServerConfig};
pub use session::{Condition, Session};
pub use telemetry::{SessionLog, CSV_HEADER};
