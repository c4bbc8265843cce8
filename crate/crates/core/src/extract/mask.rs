use crate::error::{Error, Result};
use crate::model::{LabelRaster, PixelPoint};

/// Full-frame binary mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl Mask {
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width as usize * height as usize {
            return Err(Error::Format(format!(
                "mask buffer holds {} values, expected {}",
                bits.len(),
                width as usize * height as usize
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Pixels of `raster` equal to `class`.
    pub fn from_class(raster: &LabelRaster, class: u8) -> Self {
        Self {
            width: raster.width(),
            height: raster.height(),
            bits: raster.classes().iter().map(|&c| c == class).collect(),
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, on: bool) {
        let w = self.width as usize;
        self.bits[y as usize * w + x as usize] = on;
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    /// 0/255 bytes for writing as PGM.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect()
    }
}

/// Rasterizes a convex counter-clockwise polygon by pixel-center containment.
///
/// Pixel `(x, y)` is set iff the integer point `(x, y)` lies inside or on the
/// polygon. Parts of the polygon outside the frame are clipped.
pub fn fill_polygon(hull: &[PixelPoint], width: u32, height: u32) -> Mask {
    let mut mask = Mask::empty(width, height);
    if hull.is_empty() || width == 0 || height == 0 {
        return mask;
    }
    let (mut x0, mut y0, mut x1, mut y1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
    for p in hull {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let x0 = x0.max(0);
    let y0 = y0.max(0);
    let x1 = x1.min(width as i32 - 1);
    let y1 = y1.min(height as i32 - 1);
    let n = hull.len();
    for y in y0..=y1 {
        for x in x0..=x1 {
            let inside = (0..n).all(|i| {
                let (a, b) = (hull[i], hull[(i + 1) % n]);
                let c = (b.x as i64 - a.x as i64) * (y as i64 - a.y as i64)
                    - (b.y as i64 - a.y as i64) * (x as i64 - a.x as i64);
                c >= 0
            });
            if inside {
                mask.set(x as u32, y as u32, true);
            }
        }
    }
    mask
}
