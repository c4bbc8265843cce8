//! Synthetic street scenes with known ground truth.
//!
//! Each frame is a label raster with billboard-class quads planted at
//! integer vertices, plus a grayscale photo in which every planted quad
//! shows a texture tied to its `true_id`. Frames lie on a straight track at
//! fixed spacing and half-second intervals.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dedup::EARTH_RADIUS_M;
use crate::error::{Error, Result};
use crate::extract::{fill_polygon, is_strictly_convex_ccw, Mask};
use crate::ingest::{pnm, render_manifest, render_predictions};
use crate::model::{AdCategory, BBox, GeoImage, LabelRaster, PixelPoint};
use crate::rectify::{FloatImage, Homography};

const TEXTURE_SIDE: u32 = 128;
const TEXTURE_GRID: usize = 16;
const FRAME_INTERVAL_MS: i64 = 500;

fn default_start() -> [f64; 2] {
    [53.4084, -2.9916]
}
fn default_spacing() -> f64 {
    4.0
}
fn default_jitter() -> u32 {
    2
}
fn default_class() -> u8 {
    1
}
fn default_min_pixels() -> u64 {
    2000
}
fn default_time() -> DateTime<Utc> {
    "2020-01-14T10:00:00Z".parse().expect("valid timestamp")
}

/// One physical advertisement and the frames it is visible in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthAd {
    pub true_id: String,
    pub category: AdCategory,
    /// Top-left corner of the unjittered rectangle.
    pub origin: [i32; 2],
    /// Width and height of the unjittered rectangle.
    pub size: [u32; 2],
    pub frames: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub frames: u32,
    pub width: u32,
    pub height: u32,
    pub seed: u64,
    pub ads: Vec<SynthAd>,
    /// Track start as `[lat, lon]`.
    #[serde(default = "default_start")]
    pub start: [f64; 2],
    /// Meters between consecutive frames.
    #[serde(default = "default_spacing")]
    pub spacing_m: f64,
    /// Bearing of the track, degrees clockwise from north.
    #[serde(default)]
    pub heading_deg: f64,
    /// Maximum per-corner displacement in pixels, drawn per frame.
    #[serde(default = "default_jitter")]
    pub jitter: u32,
    #[serde(default = "default_class")]
    pub billboard_class: u8,
    /// Threshold used to predict which planted regions extraction keeps.
    #[serde(default = "default_min_pixels")]
    pub min_pixels: u64,
    #[serde(default = "default_time")]
    pub start_time: DateTime<Utc>,
}

impl SynthSpec {
    pub fn new(frames: u32, width: u32, height: u32, seed: u64, ads: Vec<SynthAd>) -> Self {
        Self {
            frames,
            width,
            height,
            seed,
            ads,
            start: default_start(),
            spacing_m: default_spacing(),
            heading_deg: 0.0,
            jitter: default_jitter(),
            billboard_class: default_class(),
            min_pixels: default_min_pixels(),
            start_time: default_time(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invalid(m));
        if self.frames == 0 {
            return bad("scene needs at least one frame".into());
        }
        if self.width < 16 || self.height < 16 {
            return bad(format!("frame {}x{} smaller than 16x16", self.width, self.height));
        }
        if !(self.spacing_m.is_finite() && self.spacing_m >= 0.0) {
            return bad(format!("spacing {} must be a non-negative number", self.spacing_m));
        }
        if self.billboard_class == 0 {
            return bad("billboard class 0 is reserved for background".into());
        }
        let mut ids = HashSet::new();
        for ad in &self.ads {
            if !ids.insert(&ad.true_id) {
                return bad(format!("duplicate true_id {}", ad.true_id));
            }
            if ad.size[0] < 2 || ad.size[1] < 2 {
                return bad(format!("ad {}: size must be at least 2x2", ad.true_id));
            }
            if 2 * self.jitter >= ad.size[0].min(ad.size[1]) {
                return bad(format!("ad {}: jitter {} too large for its size", ad.true_id, self.jitter));
            }
            let mut seen = HashSet::new();
            for &f in &ad.frames {
                if f >= self.frames {
                    return bad(format!("ad {}: frame {f} out of range", ad.true_id));
                }
                if !seen.insert(f) {
                    return bad(format!("ad {}: frame {f} listed twice", ad.true_id));
                }
            }
        }
        Ok(())
    }

    pub fn image_id(frame: u32) -> String {
        format!("f{frame:04}")
    }
}

/// A planted region as it appears in one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRegion {
    pub frame: u32,
    pub image_id: String,
    pub true_id: String,
    pub category: AdCategory,
    /// Jittered quad, counter-clockwise.
    pub corners: [PixelPoint; 4],
    pub bbox: BBox,
    /// Filled pixel count of the quad.
    pub pixels: u64,
    /// Whether extraction at `min_pixels` keeps this region.
    pub kept: bool,
    /// Id extraction assigns to the region when kept.
    pub ad_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub seed: u64,
    pub min_pixels: u64,
    pub regions: Vec<TruthRegion>,
}

impl Truth {
    /// Number of physical ads with at least one kept region.
    pub fn distinct_kept(&self) -> usize {
        self.regions
            .iter()
            .filter(|r| r.kept)
            .map(|r| r.true_id.as_str())
            .collect::<HashSet<_>>()
            .len()
    }

    /// Category per extracted ad id.
    pub fn labels(&self) -> BTreeMap<String, AdCategory> {
        self.regions
            .iter()
            .filter_map(|r| r.ad_id.clone().map(|id| (id, r.category)))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SynthScene {
    pub images: Vec<GeoImage>,
    pub labels: Vec<LabelRaster>,
    pub photos: Vec<FloatImage>,
    pub truth: Truth,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

/// Grid of random gray levels overlaid with a few random ellipses.
fn texture(seed: u64, true_id: &str) -> FloatImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(true_id));
    let n = TEXTURE_SIDE as usize;
    let cell = n / TEXTURE_GRID;
    let levels: Vec<f64> = (0..TEXTURE_GRID * TEXTURE_GRID).map(|_| rng.gen_range(0.0..255.0)).collect();
    let mut data: Vec<f64> = (0..n * n)
        .map(|i| {
            let (x, y) = ((i % n) / cell, (i / n) / cell);
            levels[y.min(TEXTURE_GRID - 1) * TEXTURE_GRID + x.min(TEXTURE_GRID - 1)]
        })
        .collect();
    for _ in 0..8 {
        let v: f64 = rng.gen_range(0.0..255.0);
        let (cx, cy) = (rng.gen_range(0.0..n as f64), rng.gen_range(0.0..n as f64));
        let (rx, ry) = (rng.gen_range(6.0..20.0), rng.gen_range(6.0..20.0));
        for y in 0..n {
            for x in 0..n {
                let (dx, dy) = ((x as f64 - cx) / rx, (y as f64 - cy) / ry);
                if dx * dx + dy * dy <= 1.0 {
                    data[y * n + x] = v;
                }
            }
        }
    }
    FloatImage::from_gray(TEXTURE_SIDE, TEXTURE_SIDE, data)
}

fn bilinear(img: &FloatImage, x: f64, y: f64) -> f64 {
    let max_x = (img.width - 1) as f64;
    let max_y = (img.height - 1) as f64;
    let (x, y) = (x.clamp(0.0, max_x), y.clamp(0.0, max_y));
    let (x0, y0) = (x.floor() as u32, y.floor() as u32);
    let (x1, y1) = ((x0 + 1).min(img.width - 1), (y0 + 1).min(img.height - 1));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let top = img.at(x0, y0, 0) * (1.0 - fx) + img.at(x1, y0, 0) * fx;
    let bottom = img.at(x0, y1, 0) * (1.0 - fx) + img.at(x1, y1, 0) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Latitude/longitude `meters` along the track from its start.
fn track_position(spec: &SynthSpec, meters: f64) -> (f64, f64) {
    let m_per_deg = std::f64::consts::PI * EARTH_RADIUS_M / 180.0;
    let h = spec.heading_deg.to_radians();
    let lat = spec.start[0] + meters * h.cos() / m_per_deg;
    let lon = spec.start[1] + meters * h.sin() / (m_per_deg * spec.start[0].to_radians().cos());
    (lat, lon)
}

/// Renders every frame of `spec`. Fully determined by the spec and its seed.
pub fn generate_scene(spec: &SynthSpec) -> Result<SynthScene> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let textures: Vec<FloatImage> = spec.ads.iter().map(|a| texture(spec.seed, &a.true_id)).collect();
    let mut images = Vec::new();
    let mut labels = Vec::new();
    let mut photos = Vec::new();
    let mut regions = Vec::new();

    for frame in 0..spec.frames {
        let image_id = SynthSpec::image_id(frame);
        let (lat, lon) = track_position(spec, frame as f64 * spec.spacing_m);
        images.push(GeoImage {
            id: image_id.clone(),
            lat,
            lon,
            captured_at: spec.start_time + Duration::milliseconds(FRAME_INTERVAL_MS * frame as i64),
            raster_ref: PathBuf::from(format!("frames/{image_id}_labels.pgm")),
            image_ref: Some(PathBuf::from(format!("frames/{image_id}.pgm"))),
            width: w,
            height: h,
        });

        let mut raster = LabelRaster::filled(w, h, 0);
        let sky = h / 8;
        for y in 0..sky {
            for x in 0..w {
                raster.set(x, y, 2);
            }
        }
        let mut photo = FloatImage::from_gray(
            w,
            h,
            (0..w as usize * h as usize).map(|_| rng.gen_range(110.0..120.0)).collect(),
        );
        let mut owner: Vec<u32> = vec![0; w as usize * h as usize];
        let mut frame_regions: Vec<(TruthRegion, u64)> = Vec::new();

        for (k, ad) in spec.ads.iter().enumerate() {
            if !ad.frames.contains(&frame) {
                continue;
            }
            let j = spec.jitter as i32;
            let mut jit = || rng.gen_range(-j..=j);
            let [x0, y0] = ad.origin;
            let (x1, y1) = (x0 + ad.size[0] as i32 - 1, y0 + ad.size[1] as i32 - 1);
            let corners = [
                PixelPoint::new(x0 + jit(), y0 + jit()),
                PixelPoint::new(x1 + jit(), y0 + jit()),
                PixelPoint::new(x1 + jit(), y1 + jit()),
                PixelPoint::new(x0 + jit(), y1 + jit()),
            ];
            if !is_strictly_convex_ccw(&corners) {
                return Err(Error::Invalid(format!("ad {}: jittered quad in frame {frame} is not convex", ad.true_id)));
            }
            let bbox = BBox::of_points(&corners).expect("four corners");
            if bbox.min_x < 0 || bbox.min_y < 0 || bbox.max_x >= w as i32 || bbox.max_y >= h as i32 {
                return Err(Error::Invalid(format!("ad {} leaves frame {frame}", ad.true_id)));
            }
            let mask: Mask = fill_polygon(&corners, w, h);
            let tag = k as u32 + 1;
            let mut first_scan = u64::MAX;
            for y in bbox.min_y as u32..=bbox.max_y as u32 {
                for x in bbox.min_x as u32..=bbox.max_x as u32 {
                    if !mask.get(x, y) {
                        continue;
                    }
                    first_scan = first_scan.min(y as u64 * w as u64 + x as u64);
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                                continue;
                            }
                            let o = owner[ny as usize * w as usize + nx as usize];
                            if o != 0 && o != tag {
                                return Err(Error::Invalid(format!(
                                    "ads {} and {} overlap in frame {frame}",
                                    spec.ads[o as usize - 1].true_id, ad.true_id
                                )));
                            }
                        }
                    }
                    owner[y as usize * w as usize + x as usize] = tag;
                    raster.set(x, y, spec.billboard_class);
                }
            }
            // Photo pixel -> texture coordinates.
            let quad: [[f64; 2]; 4] = corners.map(|p| [p.x as f64, p.y as f64]);
            let s = (TEXTURE_SIDE - 1) as f64;
            let to_tex = Homography::from_correspondences(&quad, &[[0.0, 0.0], [s, 0.0], [s, s], [0.0, s]])?;
            for y in bbox.min_y as u32..=bbox.max_y as u32 {
                for x in bbox.min_x as u32..=bbox.max_x as u32 {
                    if mask.get(x, y) {
                        let [tx, ty] = to_tex.apply(x as f64, y as f64);
                        photo.data[y as usize * w as usize + x as usize] = bilinear(&textures[k], tx, ty);
                    }
                }
            }
            let pixels = mask.count();
            frame_regions.push((
                TruthRegion {
                    frame,
                    image_id: image_id.clone(),
                    true_id: ad.true_id.clone(),
                    category: ad.category,
                    corners,
                    bbox,
                    pixels,
                    kept: pixels >= spec.min_pixels,
                    ad_id: None,
                },
                first_scan,
            ));
        }
        // Same order extraction uses: bbox top, bbox left, first pixel in scan order.
        frame_regions.sort_by_key(|(r, first)| (r.bbox.min_y, r.bbox.min_x, *first));
        let mut ordinal = 0;
        for (mut r, _) in frame_regions {
            if r.kept {
                r.ad_id = Some(format!("{}_{ordinal}", r.image_id));
                ordinal += 1;
            }
            regions.push(r);
        }
        labels.push(raster);
        photos.push(photo);
    }
    Ok(SynthScene {
        images,
        labels,
        photos,
        truth: Truth {
            seed: spec.seed,
            min_pixels: spec.min_pixels,
            regions,
        },
    })
}

/// Demo layout: twelve physical ads above the pixel threshold, five of them
/// seen in three consecutive frames, plus three planted regions below it.
pub fn demo_spec(seed: u64) -> SynthSpec {
    use AdCategory::*;
    let ad = |id: &str, category, origin: [i32; 2], size: [u32; 2], frames: &[u32]| SynthAd {
        true_id: id.into(),
        category,
        origin,
        size,
        frames: frames.to_vec(),
    };
    let ads = vec![
        ad("D1", Food, [40, 120], [140, 112], &[0, 1, 2]),
        ad("D2", Alcohol, [500, 300], [128, 120], &[0, 1, 2]),
        ad("D3", Other, [40, 120], [160, 100], &[3, 4, 5]),
        ad("D4", Gambling, [500, 120], [120, 120], &[5, 6, 7]),
        ad("D5", Other, [260, 300], [152, 104], &[8, 9, 10]),
        ad("S1", Food, [260, 120], [132, 116], &[1]),
        ad("S2", Other, [500, 300], [144, 96], &[3]),
        ad("S3", Other, [700, 120], [120, 112], &[4]),
        ad("S4", Food, [40, 300], [156, 108], &[6]),
        ad("S5", Other, [40, 120], [124, 124], &[8]),
        ad("S6", Alcohol, [700, 300], [140, 100], &[10]),
        ad("S7", Other, [260, 120], [136, 120], &[11]),
        ad("m1", Other, [700, 120], [35, 35], &[0]),
        ad("m2", Food, [260, 300], [36, 36], &[4]),
        ad("m3", Other, [40, 300], [40, 40], &[7]),
    ];
    SynthSpec::new(12, 960, 540, seed, ads)
}

const DEMO_AREAS: [(u8, u8, &str); 3] = [(1, 4, "4b"), (5, 2, "2a"), (9, 7, "7a")];

/// Up to three adjacent rectangular areas splitting the track into equal
/// runs of frames, as a GeoJSON FeatureCollection.
pub fn scene_areas(spec: &SynthSpec) -> String {
    let m_per_deg = std::f64::consts::PI * EARTH_RADIUS_M / 180.0;
    let n = (spec.frames as usize).min(DEMO_AREAS.len());
    let per = (spec.frames as usize).div_ceil(n);
    let lat_m = |m: f64| m / m_per_deg;
    let lon_m = |m: f64| m / (m_per_deg * spec.start[0].to_radians().cos());
    let pos: Vec<(f64, f64)> = (0..spec.frames).map(|f| track_position(spec, f as f64 * spec.spacing_m)).collect();
    let north_south = spec.heading_deg.to_radians().cos().abs() >= spec.heading_deg.to_radians().sin().abs();
    let margin = spec.spacing_m / 2.0 + 1.0;
    let mut features = Vec::new();
    for (k, &(decile, supergroup, group)) in DEMO_AREAS.iter().enumerate().take(n) {
        let first = k * per;
        let last = ((k + 1) * per).min(pos.len()) - 1;
        if first > last {
            break;
        }
        let chunk = &pos[first..=last];
        let (mut lat0, mut lat1, mut lon0, mut lon1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(la, lo) in chunk {
            lat0 = lat0.min(la);
            lat1 = lat1.max(la);
            lon0 = lon0.min(lo);
            lon1 = lon1.max(lo);
        }
        // Shared edges sit halfway between neighbouring frames.
        let (lo_pad, hi_pad) = if north_south {
            (lat_m(margin), lat_m(margin))
        } else {
            (lon_m(margin), lon_m(margin))
        };
        let (cross_lat, cross_lon) = if north_south { (0.0, lon_m(20.0)) } else { (lat_m(20.0), 0.0) };
        let (a_lat0, a_lat1, a_lon0, a_lon1) = if north_south {
            let below = if first == 0 { lat0 - lo_pad } else { (pos[first - 1].0 + lat0) / 2.0 };
            let above = if last + 1 == pos.len() { lat1 + hi_pad } else { (lat1 + pos[last + 1].0) / 2.0 };
            (below.min(above), below.max(above), lon0 - cross_lon, lon1 + cross_lon)
        } else {
            let west = if first == 0 { lon0 - lo_pad } else { (pos[first - 1].1 + lon0) / 2.0 };
            let east = if last + 1 == pos.len() { lon1 + hi_pad } else { (lon1 + pos[last + 1].1) / 2.0 };
            (lat0 - cross_lat, lat1 + cross_lat, west.min(east), west.max(east))
        };
        features.push(serde_json::json!({
            "type": "Feature",
            "properties": {
                "code": format!("SYN{:04}", k + 1),
                "imd_decile": decile,
                "oac_supergroup": supergroup,
                "oac_group": group,
            },
            "geometry": {
                "type": "Polygon",
                "coordinates": [[
                    [a_lon0, a_lat0], [a_lon1, a_lat0], [a_lon1, a_lat1], [a_lon0, a_lat1], [a_lon0, a_lat0]
                ]],
            },
        }));
    }
    let mut s = serde_json::to_string_pretty(&serde_json::json!({
        "type": "FeatureCollection",
        "features": features,
    }))
    .expect("json values serialize");
    s.push('\n');
    s
}

/// Writes `manifest.jsonl`, `truth.json`, `truth_labels.csv`,
/// `areas.geojson` and the frame rasters under `dir`. Returns the manifest
/// path.
pub fn write_scene(spec: &SynthSpec, scene: &SynthScene, dir: &Path) -> Result<PathBuf> {
    let frames = dir.join("frames");
    std::fs::create_dir_all(&frames).map_err(|e| Error::io(&frames, e))?;
    for ((img, raster), photo) in scene.images.iter().zip(&scene.labels).zip(&scene.photos) {
        pnm::write_label_raster(&dir.join(&img.raster_ref), raster)?;
        if let Some(p) = &img.image_ref {
            pnm::write(&dir.join(p), photo.width, photo.height, 1, &photo.to_bytes())?;
        }
    }
    let write = |name: &str, text: String| {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    let manifest = dir.join("manifest.jsonl");
    write("manifest.jsonl", render_manifest(&scene.images))?;
    let mut truth = serde_json::to_string_pretty(&scene.truth).expect("truth serializes");
    truth.push('\n');
    write("truth.json", truth)?;
    write("truth_labels.csv", render_predictions(&scene.truth.labels()))?;
    write("areas.geojson", scene_areas(spec))?;
    Ok(manifest)
}
