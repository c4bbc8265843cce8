//! Readers (and the matching writers) for every file the pipeline consumes.

mod areas;
mod lexicon;
mod manifest;
pub mod pnm;
mod tables;

pub use areas::{load_areas, parse_areas};
pub use lexicon::{load_lexicon, parse_lexicon, KeywordLexicon};
pub use manifest::{load_manifest, parse_manifest, render_manifest, resolve_relative};
pub use pnm::{load_label_raster, write_label_raster};
pub use tables::{
    load_ads, load_predictions, load_texts, parse_ads, parse_predictions, parse_texts,
    render_ads, render_predictions,
};
