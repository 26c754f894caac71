//! Packet scheduling on a line network with bounded buffers and link capacities.

pub mod bench;
pub mod bounding;
pub mod error;
pub mod flow;
pub mod grid;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod shortsolver;
pub mod solve;
pub mod tiling;

pub use error::{Error, Result};
