#![allow(dead_code)]

use std::collections::HashMap;

use adscan::extract::{extract_ads, ExtractConfig};
use adscan::model::AdInstance;
use adscan::rectify::FloatImage;
use adscan::report::{demo_spec, generate_scene, SynthScene};

/// Extracted ads of every frame and the photos keyed by image id.
pub fn extract_scene(scene: &SynthScene) -> (Vec<AdInstance>, HashMap<String, FloatImage>) {
    let mut ads = Vec::new();
    let mut photos = HashMap::new();
    for ((img, raster), photo) in scene.images.iter().zip(&scene.labels).zip(&scene.photos) {
        ads.extend(extract_ads(raster, img, &ExtractConfig::default()).unwrap());
        photos.insert(img.id.clone(), photo.clone());
    }
    (ads, photos)
}

pub fn dedup_scene(seed: u64) -> SynthScene {
    generate_scene(&demo_spec(seed)).unwrap()
}
