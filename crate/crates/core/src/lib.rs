pub mod analysis;
pub mod attack;
pub mod error;
pub mod gf;
pub mod lincode;
pub mod matfq;
pub mod scheme;
pub mod wire;

pub use error::{Error, Result};
