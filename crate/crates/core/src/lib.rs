pub mod dedup;
pub mod error;
pub mod extract;
pub mod geostat;
pub mod ingest;
pub mod label;
pub mod model;
pub mod pipeline;
pub mod rectify;
pub mod report;

pub use error::{Error, Result};
