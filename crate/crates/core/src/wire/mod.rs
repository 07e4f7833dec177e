//! Byte formats and a minimal TCP transport.

mod client;
pub mod codec;
pub mod frame;
mod server;

pub use client::Client;
pub use codec::PublicParams;
pub use frame::{Frame, MsgType};
pub use server::{Server, ServerConfig};

/// Default cap on a frame's length field: 1 GiB.
pub const DEFAULT_MAX_FRAME: usize = 1 << 30;

pub const ADDR_ENV: &str = "CBPIR_ADDR";
pub const MAX_FRAME_ENV: &str = "CBPIR_MAX_FRAME";

pub fn max_frame_from_env() -> usize {
    std::env::var(MAX_FRAME_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_FRAME)
}
