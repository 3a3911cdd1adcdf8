pub mod array;
pub mod beam_search;
pub mod block;
pub mod channel;
pub mod error;
pub mod golay;
pub mod phy;
pub mod precoder;
pub mod sim;

pub use error::{Error, Result};
