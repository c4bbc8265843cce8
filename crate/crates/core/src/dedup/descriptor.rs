//! Corner keypoints with 128-dimensional gradient-orientation histograms.
//!
//! Keypoints are Harris corners on a lightly smoothed image. Each descriptor
//! is a 4x4 grid of 8-bin orientation histograms over the 16x16 window
//! around the keypoint, Gaussian weighted, L2-normalized, clipped at 0.2 and
//! normalized again. Rectified crops are already in a canonical frame, so no
//! orientation or scale normalization is applied.

use crate::error::{Error, Result};
use crate::rectify::FloatImage;

pub const DESCRIPTOR_LEN: usize = 128;
pub const MIN_CROP_SIDE: u32 = 16;
pub const MAX_KEYPOINTS: usize = 400;

const HALF_WINDOW: i64 = 8;
const HARRIS_K: f64 = 0.04;
const RELATIVE_THRESHOLD: f64 = 0.01;
const ABSOLUTE_THRESHOLD: f64 = 1e-2;
const CLIP: f32 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    keypoint: [f32; 2],
    vector: Vec<f32>,
}

impl Descriptor {
    /// Checks length and unit norm (within 1e-5 to allow for `f32` storage).
    pub fn new(keypoint: [f32; 2], vector: Vec<f32>) -> Result<Self> {
        if vector.len() != DESCRIPTOR_LEN {
            return Err(Error::Invalid(format!(
                "descriptor length {} != {DESCRIPTOR_LEN}",
                vector.len()
            )));
        }
        let norm = vector.iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-5 {
            return Err(Error::Invalid(format!("descriptor norm {norm} is not 1")));
        }
        Ok(Self { keypoint, vector })
    }

    pub fn keypoint(&self) -> [f32; 2] {
        self.keypoint
    }

    pub fn vector(&self) -> &[f32] {
        &self.vector
    }
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as i64;
    let k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

/// Separable blur with edge clamping.
fn blur(data: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as i64;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in k.iter().enumerate() {
                let xx = (x as i64 + i as i64 - r).clamp(0, w as i64 - 1) as usize;
                acc += kv * data[y * w + xx];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in k.iter().enumerate() {
                let yy = (y as i64 + i as i64 - r).clamp(0, h as i64 - 1) as usize;
                acc += kv * tmp[yy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

fn gradients(img: &[f64], w: usize, h: usize) -> (Vec<f64>, Vec<f64>) {
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let l = img[y * w + x.saturating_sub(1)];
            let r = img[y * w + (x + 1).min(w - 1)];
            let u = img[y.saturating_sub(1) * w + x];
            let d = img[(y + 1).min(h - 1) * w + x];
            gx[y * w + x] = (r - l) / 2.0;
            gy[y * w + x] = (d - u) / 2.0;
        }
    }
    (gx, gy)
}

/// Keypoints and descriptors of a crop; deterministic, empty for crops
/// smaller than [`MIN_CROP_SIDE`] or without corners.
pub fn compute_descriptors(crop: &FloatImage) -> Vec<Descriptor> {
    if crop.width < MIN_CROP_SIDE || crop.height < MIN_CROP_SIDE {
        return Vec::new();
    }
    let gray = crop.to_gray();
    let (w, h) = (gray.width as usize, gray.height as usize);
    // Work in [0, 1] so thresholds do not depend on the sample range.
    let norm: Vec<f64> = gray.data.iter().map(|v| v / 255.0).collect();
    let smooth = blur(&norm, w, h, 1.0);
    let (gx, gy) = gradients(&smooth, w, h);

    let xx: Vec<f64> = gx.iter().map(|g| g * g).collect();
    let yy: Vec<f64> = gy.iter().map(|g| g * g).collect();
    let xy: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a * b).collect();
    let (sxx, syy, sxy) = (blur(&xx, w, h, 1.5), blur(&yy, w, h, 1.5), blur(&xy, w, h, 1.5));
    // Scaled so typical step-edge corners land well above ABSOLUTE_THRESHOLD.
    let response: Vec<f64> = (0..w * h)
        .map(|i| {
            let det = sxx[i] * syy[i] - sxy[i] * sxy[i];
            let tr = sxx[i] + syy[i];
            (det - HARRIS_K * tr * tr) * 1e4
        })
        .collect();

    let max_r = response.iter().copied().fold(0.0, f64::max);
    let threshold = (RELATIVE_THRESHOLD * max_r).max(ABSOLUTE_THRESHOLD);
    let margin = HALF_WINDOW as usize;
    let mut corners: Vec<(f64, usize, usize)> = Vec::new();
    for y in margin..h.saturating_sub(margin) {
        for x in margin..w.saturating_sub(margin) {
            let r = response[y * w + x];
            if r <= threshold {
                continue;
            }
            // Strict maximum over earlier neighbours, non-strict over later
            // ones, so plateaus yield exactly one corner.
            let mut is_max = true;
            'nb: for dy in -2i64..=2 {
                for dx in -2i64..=2 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let nr = response[ny as usize * w + nx as usize];
                    let earlier = (dy, dx) < (0, 0);
                    if nr > r || (earlier && nr == r) {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                corners.push((r, x, y));
            }
        }
    }
    corners.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("finite response")
            .then((a.2, a.1).cmp(&(b.2, b.1)))
    });
    corners.truncate(MAX_KEYPOINTS);

    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| (a * a + b * b).sqrt()).collect();
    let ang: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| b.atan2(*a)).collect();
    corners
        .into_iter()
        .filter_map(|(_, x, y)| {
            let vector = histogram(&mag, &ang, w, x, y)?;
            let keypoint = refine(&response, w, h, x, y);
            Some(Descriptor { keypoint, vector })
        })
        .collect()
}

fn refine(resp: &[f64], w: usize, h: usize, x: usize, y: usize) -> [f32; 2] {
    let at = |xx: usize, yy: usize| resp[yy * w + xx];
    let offset = |m: f64, c: f64, p: f64| {
        let denom = m - 2.0 * c + p;
        if denom.abs() > 1e-12 {
            (0.5 * (m - p) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    };
    let dx = if x > 0 && x + 1 < w {
        offset(at(x - 1, y), at(x, y), at(x + 1, y))
    } else {
        0.0
    };
    let dy = if y > 0 && y + 1 < h {
        offset(at(x, y - 1), at(x, y), at(x, y + 1))
    } else {
        0.0
    };
    [(x as f64 + dx) as f32, (y as f64 + dy) as f32]
}

fn histogram(mag: &[f64], ang: &[f64], w: usize, cx: usize, cy: usize) -> Option<Vec<f32>> {
    let mut hist = [0.0f64; DESCRIPTOR_LEN];
    let sigma = HALF_WINDOW as f64;
    for dy in -HALF_WINDOW..HALF_WINDOW {
        for dx in -HALF_WINDOW..HALF_WINDOW {
            let (x, y) = ((cx as i64 + dx) as usize, (cy as i64 + dy) as usize);
            let i = y * w + x;
            let (ox, oy) = (dx as f64 + 0.5, dy as f64 + 0.5);
            let weight = (-(ox * ox + oy * oy) / (2.0 * sigma * sigma)).exp() * mag[i];
            if weight == 0.0 {
                continue;
            }
            let cell = ((dy + HALF_WINDOW) / 4 * 4 + (dx + HALF_WINDOW) / 4) as usize;
            let t = (ang[i] + std::f64::consts::PI) / std::f64::consts::TAU * 8.0;
            let b0 = t.floor();
            let frac = t - b0;
            let b0 = (b0 as i64).rem_euclid(8) as usize;
            let b1 = (b0 + 1) % 8;
            hist[cell * 8 + b0] += weight * (1.0 - frac);
            hist[cell * 8 + b1] += weight * frac;
        }
    }
    let n = hist.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(n > 1e-12) {
        return None;
    }
    let mut v: Vec<f32> = hist.iter().map(|x| ((x / n) as f32).min(CLIP)).collect();
    let n2 = v.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    for x in &mut v {
        *x = (*x as f64 / n2) as f32;
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(v: f64) -> FloatImage {
        FloatImage::from_gray(64, 64, vec![v; 64 * 64])
    }

    #[test]
    fn uniform_crop_has_no_features() {
        assert!(compute_descriptors(&uniform(0.0)).is_empty());
        assert!(compute_descriptors(&uniform(128.0)).is_empty());
    }

    #[test]
    fn small_crop_has_no_features() {
        let img = FloatImage::from_gray(15, 40, (0..600).map(|i| (i % 7) as f64 * 30.0).collect());
        assert!(compute_descriptors(&img).is_empty());
    }

    #[test]
    fn square_has_four_corners() {
        let mut data = vec![0.0; 64 * 64];
        for y in 20..44 {
            for x in 20..44 {
                data[y * 64 + x] = 200.0;
            }
        }
        let d = compute_descriptors(&FloatImage::from_gray(64, 64, data));
        assert_eq!(d.len(), 4, "{:?}", d.iter().map(|d| d.keypoint()).collect::<Vec<_>>());
        for desc in &d {
            let n: f64 = desc.vector().iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-6);
            assert!(Descriptor::new(desc.keypoint(), desc.vector().to_vec()).is_ok());
        }
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(Descriptor::new([0.0, 0.0], vec![0.0; 127]).is_err());
        assert!(Descriptor::new([0.0, 0.0], vec![0.5; 128]).is_err());
    }
}
