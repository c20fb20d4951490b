//! File formats: scan logs, run configuration and raster images. Polygon
//! maps are read and written by [`crate::coloring::Coloring::to_json`] and
//! [`crate::coloring::Coloring::from_json`].

mod config;
mod log;
mod pgm;

pub use config::RunConfig;
pub use log::ScanLog;
pub use pgm::{read_raster, write_raster, GreyImage, RasterSidecar};
