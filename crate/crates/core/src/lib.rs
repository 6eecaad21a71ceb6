pub mod adapter;
pub mod dialect;
pub mod effectiveness;
pub mod efficiency;
pub mod encoding;
pub mod engine;
pub mod error;
pub mod harness;
pub mod model;
pub mod sampling;

pub use error::{Error, Result};
