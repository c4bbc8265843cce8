//! Glue between stages for callers holding everything in memory.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::dedup::{compute_descriptors, Descriptor};
use crate::error::{Error, Result};
use crate::model::AdInstance;
use crate::rectify::{rectify_ad, FloatImage};

/// Rectified crop per ad, in input order.
pub fn rectify_all(
    ads: &[AdInstance],
    photos: &HashMap<String, FloatImage>,
    size: u32,
) -> Result<Vec<FloatImage>> {
    ads.par_iter()
        .map(|ad| {
            let photo = photos.get(&ad.source_image).ok_or_else(|| {
                Error::Invalid(format!("no image {} for ad {}", ad.source_image, ad.ad_id))
            })?;
            rectify_ad(ad, photo, size)
        })
        .collect()
}

/// Rectified crop and its descriptors per ad, in input order.
pub fn rectify_and_describe(
    ads: &[AdInstance],
    photos: &HashMap<String, FloatImage>,
    size: u32,
) -> Result<Vec<(FloatImage, Vec<Descriptor>)>> {
    let crops = rectify_all(ads, photos, size)?;
    Ok(crops
        .into_par_iter()
        .map(|crop| {
            let d = compute_descriptors(&crop);
            (crop, d)
        })
        .collect())
}

/// Descriptors of every ad's rectified crop, keyed by ad id.
pub fn describe_all(
    ads: &[AdInstance],
    photos: &HashMap<String, FloatImage>,
    size: u32,
) -> Result<HashMap<String, Vec<Descriptor>>> {
    Ok(ads
        .iter()
        .zip(rectify_and_describe(ads, photos, size)?)
        .map(|(ad, (_, d))| (ad.ad_id.clone(), d))
        .collect())
}
