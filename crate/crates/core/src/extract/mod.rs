//! Per-advertisement extraction from label rasters.
//!
//! Billboard-class pixels are grouped into 8-connected components, each
//! component is wrapped in its convex hull, and the hull is filled back into
//! a mask. Ads whose filled hull covers fewer than `min_pixels` pixels are
//! dropped.

mod components;
mod hull;
mod mask;

pub use components::{connected_components, PixelComponent};
pub use hull::{convex_hull, doubled_area, is_strictly_convex_ccw, DegenerateHull};
pub use mask::{fill_polygon, Mask};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AdInstance, BBox, GeoImage, LabelRaster};

pub const DEFAULT_MIN_PIXELS: u64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractConfig {
    pub billboard_class: u8,
    pub min_pixels: u64,
}

impl ExtractConfig {
    pub fn new(billboard_class: u8, min_pixels: u64) -> Result<Self> {
        if min_pixels < 1 {
            return Err(Error::Invalid("min_pixels must be at least 1".into()));
        }
        Ok(Self {
            billboard_class,
            min_pixels,
        })
    }
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            billboard_class: 1,
            min_pixels: DEFAULT_MIN_PIXELS,
        }
    }
}

/// Extracts one [`AdInstance`] per billboard component whose filled hull
/// reaches `cfg.min_pixels`.
///
/// Ids are `<image id>_<n>` with `n` counting kept ads from 0 in component
/// order. Components with a degenerate hull (a single row, column or
/// diagonal line) are skipped with a warning.
pub fn extract_ads(
    raster: &LabelRaster,
    image: &GeoImage,
    cfg: &ExtractConfig,
) -> Result<Vec<AdInstance>> {
    if raster.width() != image.width || raster.height() != image.height {
        return Err(Error::DimensionMismatch {
            expected_w: image.width,
            expected_h: image.height,
            actual_w: raster.width(),
            actual_h: raster.height(),
        });
    }
    let mut ads = Vec::new();
    for comp in connected_components(raster, cfg.billboard_class) {
        let hull = match convex_hull(&comp.pixels) {
            Ok(h) => h,
            Err(DegenerateHull) => {
                warn!(
                    "image {}: skipping degenerate component of {} px at {:?}",
                    image.id,
                    comp.size(),
                    <[i32; 4]>::from(comp.bbox)
                );
                continue;
            }
        };
        let filled = fill_polygon(&hull, raster.width(), raster.height()).count();
        if filled < cfg.min_pixels {
            continue;
        }
        let bbox = BBox::of_points(&hull).expect("hull is non-empty");
        ads.push(AdInstance {
            ad_id: format!("{}_{}", image.id, ads.len()),
            source_image: image.id.clone(),
            hull,
            component_pixels: comp.size() as u64,
            filled_pixels: filled,
            bbox,
            lat: image.lat,
            lon: image.lon,
            category: None,
            crop_ref: None,
        });
    }
    Ok(ads)
}

/// Full-frame mask of an extracted ad, regenerated from its hull.
pub fn ad_mask(ad: &AdInstance, width: u32, height: u32) -> Mask {
    fill_polygon(&ad.hull, width, height)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PixelPoint;

    fn image(w: u32, h: u32) -> GeoImage {
        GeoImage {
            id: "img".into(),
            lat: 53.4,
            lon: -2.98,
            captured_at: "2020-01-14T10:00:00Z".parse().unwrap(),
            raster_ref: "img.pgm".into(),
            image_ref: None,
            width: w,
            height: h,
        }
    }

    fn with_blocks(w: u32, h: u32, blocks: &[(u32, u32, u32, u32)]) -> LabelRaster {
        let mut r = LabelRaster::filled(w, h, 0);
        for &(x0, y0, bw, bh) in blocks {
            for y in y0..y0 + bh {
                for x in x0..x0 + bw {
                    r.set(x, y, 1);
                }
            }
        }
        r
    }

    #[test]
    fn fifty_square_block_is_one_ad() {
        let r = with_blocks(100, 100, &[(10, 10, 50, 50)]);
        let ads = extract_ads(&r, &image(100, 100), &ExtractConfig::default()).unwrap();
        assert_eq!(ads.len(), 1);
        let ad = &ads[0];
        assert_eq!(ad.filled_pixels, 2500);
        assert_eq!(ad.component_pixels, 2500);
        assert_eq!(ad.ad_id, "img_0");
        assert_eq!(ad.bbox, BBox::from([10, 10, 59, 59]));
        assert_eq!((ad.lat, ad.lon), (53.4, -2.98));
        ad.check(2000).unwrap();
    }

    #[test]
    fn forty_square_block_is_dropped() {
        let r = with_blocks(100, 100, &[(10, 10, 40, 40)]);
        assert!(extract_ads(&r, &image(100, 100), &ExtractConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn two_blocks_two_ids() {
        let r = with_blocks(200, 100, &[(0, 0, 50, 50), (100, 20, 50, 50)]);
        let ads = extract_ads(&r, &image(200, 100), &ExtractConfig::default()).unwrap();
        let ids: Vec<_> = ads.iter().map(|a| a.ad_id.as_str()).collect();
        assert_eq!(ids, ["img_0", "img_1"]);
    }

    #[test]
    fn hull_fill_covers_concave_component() {
        // An L shape: 60x60 square minus a 30x30 corner.
        let r = with_blocks(100, 100, &[(0, 0, 60, 30), (0, 30, 30, 30)]);
        let ads = extract_ads(&r, &image(100, 100), &ExtractConfig::default()).unwrap();
        assert_eq!(ads.len(), 1);
        assert_eq!(ads[0].component_pixels, 2700);
        assert!(ads[0].filled_pixels > 2700);
        let mask = ad_mask(&ads[0], 100, 100);
        assert_eq!(mask.count(), ads[0].filled_pixels);
    }

    #[test]
    fn degenerate_line_is_skipped() {
        let r = with_blocks(3000, 4, &[(0, 1, 2500, 1)]);
        let cfg = ExtractConfig::new(1, 1).unwrap();
        assert!(extract_ads(&r, &image(3000, 4), &cfg).unwrap().is_empty());
    }

    #[test]
    fn dimension_mismatch() {
        let r = LabelRaster::filled(10, 10, 0);
        assert!(matches!(
            extract_ads(&r, &image(10, 11), &ExtractConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn corner_cut_changes_threshold_outcome() {
        let mut r = with_blocks(100, 100, &[(5, 5, 40, 50)]);
        let img = image(100, 100);
        let kept = extract_ads(&r, &img, &ExtractConfig::default()).unwrap();
        assert_eq!(kept[0].filled_pixels, 2000);
        r.set(5, 5, 0);
        assert!(extract_ads(&r, &img, &ExtractConfig::default()).unwrap().is_empty());
        let cfg = ExtractConfig::new(1, 1).unwrap();
        let ad = &extract_ads(&r, &img, &cfg).unwrap()[0];
        assert_eq!(ad.filled_pixels, 1999);
        assert!(!ad.hull.contains(&PixelPoint::new(5, 5)));
    }
}
