//! Frontal-view rectification of extracted ads.
//!
//! The hull is reduced to a quadrilateral, a homography sends that quad to a
//! square canonical frame, and the masked source image is resampled into it.

mod homography;
mod quad;
mod warp;

pub use homography::{homography_from_quad, Homography, MIN_DET};
pub use quad::{fit_quad, polygon_area, Quad, EXHAUSTIVE_LIMIT};
pub use warp::{warp, FloatImage};

use log::warn;

use crate::error::Result;
use crate::extract::fill_polygon;
use crate::model::AdInstance;

/// Side length of rectified crops (the classifier's input size).
pub const CROP_SIZE: u32 = 224;

/// Quad to rectify for an ad: the fitted quad, or the hull's bounding box
/// when the fitted one admits no homography (triangles, whose inserted
/// midpoint is collinear with an edge).
pub fn ad_quad(ad: &AdInstance, size: u32) -> Result<(Quad, Homography)> {
    let q = fit_quad(&ad.hull)?;
    match homography_from_quad(&q, size, size) {
        Ok(h) => Ok((q, h)),
        Err(e) => {
            warn!("ad {}: {e}; rectifying its bounding box instead", ad.ad_id);
            let b = ad.bbox;
            let (x0, y0, x1, y1) = (b.min_x as f64, b.min_y as f64, b.max_x as f64, b.max_y as f64);
            let q = Quad::new([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])?;
            let h = homography_from_quad(&q, size, size)?;
            Ok((q, h))
        }
    }
}

/// Warps the ad's hull-masked region of `image` to a `size` x `size` crop.
pub fn rectify_ad(ad: &AdInstance, image: &FloatImage, size: u32) -> Result<FloatImage> {
    let (_, h) = ad_quad(ad, size)?;
    let mask = fill_polygon(&ad.hull, image.width, image.height);
    Ok(warp(&image.masked(&mask), &h, size, size))
}
