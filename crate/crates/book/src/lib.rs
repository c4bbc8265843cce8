//! The guide under `book/src`, compiled as doc-tests so its examples run
//! under `cargo test`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}
#[doc = include_str!("../../../book/src/extract.md")]
pub mod extract {}
#[doc = include_str!("../../../book/src/rectify.md")]
pub mod rectify {}
#[doc = include_str!("../../../book/src/dedup.md")]
pub mod dedup {}
#[doc = include_str!("../../../book/src/label.md")]
pub mod label {}
#[doc = include_str!("../../../book/src/geostat.md")]
pub mod geostat {}
#[doc = include_str!("../../../book/src/report.md")]
pub mod report {}
#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}
