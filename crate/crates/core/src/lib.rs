pub mod baseline;
pub mod coloring;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod pipeline;
pub mod prior;
pub mod raster;
pub mod sampler;
pub mod sensors;
pub mod sim;

pub use error::{Error, Result};
