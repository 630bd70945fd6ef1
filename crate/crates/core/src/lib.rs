//! Random spanning forests of lattice boxes and finite graphs: Wilson
//! sampling, loop-erased walks, induced-component graphs, bush
//! decompositions and effective-resistance bounds.

pub mod analysis;
pub mod error;
pub mod graph;
pub mod resample;
pub mod resistance;
pub mod rng;
pub mod stats;
pub mod walk;
pub mod wilson;

pub use error::{Error, Result};
pub use rng::RngStream;

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
