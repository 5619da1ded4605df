//! Episode-stepping service. Each connection is one session owning one
//! simulated episode at a time; requests and replies are newline-delimited
//! JSON envelopes `{seq, kind, payload}`. The same payloads travel over a
//! WebSocket mirror, one envelope per text message. See `PROTOCOL.md`.

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{Envelope, ErrorCode, Reply, Request};
pub use server::{bind, Bound, ServiceConfig};
pub use session::{Session, Shared};
