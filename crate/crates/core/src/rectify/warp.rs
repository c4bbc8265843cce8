use super::homography::Homography;
use crate::extract::Mask;
use crate::ingest::pnm::Pnm;

/// Interleaved floating-point image with one or more channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatImage {
    pub width: u32,
    pub height: u32,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl FloatImage {
    pub fn zeros(width: u32, height: u32, channels: usize) -> Self {
        Self {
            width,
            height,
            channels,
            data: vec![0.0; width as usize * height as usize * channels],
        }
    }

    pub fn from_gray(width: u32, height: u32, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width as usize * height as usize);
        Self {
            width,
            height,
            channels: 1,
            data,
        }
    }

    pub fn from_pnm(p: &Pnm) -> Self {
        let scale = 255.0 / p.maxval as f64;
        Self {
            width: p.width,
            height: p.height,
            channels: p.channels as usize,
            data: p.data.iter().map(|&v| v as f64 * scale).collect(),
        }
    }

    /// Rounds and clamps samples to bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|v| v.round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    #[inline]
    pub fn at(&self, x: u32, y: u32, c: usize) -> f64 {
        self.data[(y as usize * self.width as usize + x as usize) * self.channels + c]
    }

    /// Rec. 601 luma for three-channel images, identity for one channel.
    pub fn to_gray(&self) -> FloatImage {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(self.channels)
            .map(|px| 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2])
            .collect();
        FloatImage::from_gray(self.width, self.height, data)
    }

    /// Zeroes every pixel outside `mask`.
    pub fn masked(&self, mask: &Mask) -> FloatImage {
        assert_eq!((mask.width(), mask.height()), (self.width, self.height));
        let mut out = self.clone();
        for (px, &on) in out.data.chunks_exact_mut(self.channels).zip(mask.bits()) {
            if !on {
                px.fill(0.0);
            }
        }
        out
    }
}

/// Bilinear sample at a real position; `None` outside the pixel grid.
fn sample(img: &FloatImage, sx: f64, sy: f64, out: &mut [f64]) -> bool {
    const EDGE: f64 = 1e-9;
    let (maxx, maxy) = ((img.width - 1) as f64, (img.height - 1) as f64);
    if !(sx >= -EDGE && sy >= -EDGE && sx <= maxx + EDGE && sy <= maxy + EDGE) {
        return false;
    }
    let sx = sx.clamp(0.0, maxx);
    let sy = sy.clamp(0.0, maxy);
    let (x0, y0) = (sx.floor() as u32, sy.floor() as u32);
    let (x1, y1) = ((x0 + 1).min(img.width - 1), (y0 + 1).min(img.height - 1));
    let (fx, fy) = (sx - x0 as f64, sy - y0 as f64);
    for (c, o) in out.iter_mut().enumerate() {
        let top = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
        let bottom = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
        *o = top * (1.0 - fy) + bottom * fy;
    }
    true
}

/// Inverse-mapping warp: output pixel `(x, y)` takes the bilinear sample of
/// `src` at `H^-1 (x, y)`, or 0 when that falls outside the source.
pub fn warp(src: &FloatImage, h: &Homography, out_w: u32, out_h: u32) -> FloatImage {
    let inv = h.inverse();
    let mut out = FloatImage::zeros(out_w, out_h, src.channels);
    if src.width == 0 || src.height == 0 {
        return out;
    }
    let ch = src.channels;
    let mut px = vec![0.0; ch];
    for y in 0..out_h {
        for x in 0..out_w {
            let [sx, sy] = inv.apply(x as f64, y as f64);
            if sample(src, sx, sy, &mut px) {
                let i = (y as usize * out_w as usize + x as usize) * ch;
                out.data[i..i + ch].copy_from_slice(&px);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: u32, h: u32, v: &[f64]) -> FloatImage {
        FloatImage::from_gray(w, h, v.to_vec())
    }

    #[test]
    fn identity_is_noop() {
        let img = gray(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(warp(&img, &Homography::identity(), 3, 2), img);
    }

    #[test]
    fn quarter_turn() {
        // Forward map (u, v) -> (1 - v, u); its inverse sends output (x, y)
        // to source (y, 1 - x).
        let img = gray(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let h = Homography::from_rows([[0.0, -1.0, 1.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let out = warp(&img, &h, 2, 2);
        assert_eq!(out.data, [3.0, 1.0, 4.0, 2.0]);
    }

    #[test]
    fn shift_right_fills_zero() {
        let img = gray(3, 1, &[7.0, 8.0, 9.0]);
        let h = Homography::from_rows([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(warp(&img, &h, 3, 1).data, [0.0, 7.0, 8.0]);
    }

    #[test]
    fn half_pixel_is_bilinear() {
        let img = gray(2, 2, &[0.0, 10.0, 20.0, 30.0]);
        let h = Homography::from_rows([[1.0, 0.0, -0.5], [0.0, 1.0, -0.5], [0.0, 0.0, 1.0]]).unwrap();
        let out = warp(&img, &h, 1, 1);
        assert!((out.data[0] - 15.0).abs() < 1e-12);
    }

    #[test]
    fn color_channels_warp_together() {
        let img = FloatImage {
            width: 2,
            height: 1,
            channels: 3,
            data: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        };
        let h = Homography::from_rows([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(warp(&img, &h, 2, 1).data, [0.0, 0.0, 0.0, 1.0, 2.0, 3.0]);
        assert_eq!(img.to_gray().data.len(), 2);
    }
}
