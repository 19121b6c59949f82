//! Live human-vs-agent play. A fixed-rate tick advances each session's
//! match; the human side plays the latest input received since the last
//! tick and the agent side queries its policy on the same tick.

mod protocol;
mod server;
mod session;

pub use protocol::{format_buttons, parse_buttons, parse_client, parse_server, valid_server_line, ClientMessage, ProtocolError};
pub use server::{asset_path, PlayServer, ServerHandle, ServerOptions};
pub use session::{FinishedMatch, Reply, Session, DEFAULT_TICK_RATE, MAX_TICK_RATE, MIN_TICK_RATE};
