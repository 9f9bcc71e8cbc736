//! Resonator geometries and their Dirichlet spectra.

mod cache;
mod geometry;
mod table;

use thiserror::Error;

pub use cache::{
    cache_load, cache_store, read_header, read_table, write_table, CacheError, CacheHeader,
    FORMAT_VERSION, MAGIC,
};
pub use geometry::{Point, ResonatorGeometry, EDGE_TOLERANCE, TRIANGLE_VERTICES};
pub use table::{
    enumerate_modes, enumerate_modes_with, EnumerationOptions, Junctions, Mode, ModeTable,
    DEFAULT_MAX_MODES,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("eigenvalue cutoff must be positive and finite, got {0}")]
    InvalidCutoff(f64),
    #[error("no eigenvalue of {geometry} lies below {lambda_max}")]
    NoModes { lambda_max: f64, geometry: String },
    #[error("enumeration would produce {count} modes, above the cap of {cap}")]
    TooManyModes { count: usize, cap: usize },
    #[error("point {0} lies outside the resonator")]
    OutsideDomain(Point),
    #[error("junction {0} is not strictly inside the resonator")]
    JunctionNotInterior(Point),
    #[error("both junctions sit at {0}")]
    CoincidentJunctions(Point),
    #[error("quantum numbers {0:?} do not label a mode of this geometry")]
    InadmissibleMode((u32, u32)),
}
