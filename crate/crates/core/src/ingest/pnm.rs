//! Binary PGM (`P5`) and PPM (`P6`) codecs with 8-bit samples.
//!
//! The header grammar is the netpbm one: magic, then width, height and
//! maxval separated by whitespace, with `#` comments running to end of line,
//! then exactly one whitespace byte before the raster. The writer emits the
//! canonical form `P5 <w> <h> 255\n`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::LabelRaster;

/// A decoded netpbm image, one or three interleaved 8-bit channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pnm {
    pub width: u32,
    pub height: u32,
    pub maxval: u8,
    pub channels: u8,
    pub data: Vec<u8>,
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format(format!("malformed header: missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("malformed header: {what} out of range")))
    }
}

/// Decodes a `P5` or `P6` byte stream.
pub fn decode(bytes: &[u8]) -> Result<Pnm> {
    if bytes.len() < 2 {
        return Err(Error::Format("file too short for a netpbm header".into()));
    }
    let channels = match &bytes[..2] {
        b"P5" => 1u8,
        b"P6" => 3u8,
        other => {
            return Err(Error::Format(format!(
                "unsupported magic {}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let mut h = Header { bytes, pos: 2 };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval > 255 {
        return Err(Error::Format(format!(
            "maxval {maxval} exceeds 255 (only 8-bit samples supported)"
        )));
    }
    if maxval == 0 {
        return Err(Error::Format("maxval must be at least 1".into()));
    }
    if width == 0 || height == 0 || width > u32::MAX as u64 || height > u32::MAX as u64 {
        return Err(Error::Format(format!("invalid dimensions {width}x{height}")));
    }
    match bytes.get(h.pos) {
        Some(c) if c.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(Error::Format("missing whitespace after maxval".into())),
    }
    let expected = (width * height) as usize * channels as usize;
    let actual = bytes.len() - h.pos;
    if actual != expected {
        return Err(Error::Format(format!(
            "expected {expected} bytes, got {actual}"
        )));
    }
    Ok(Pnm {
        width: width as u32,
        height: height as u32,
        maxval: maxval as u8,
        channels,
        data: bytes[h.pos..].to_vec(),
    })
}

/// Canonical encoding; `channels` must be 1 (`P5`) or 3 (`P6`).
pub fn encode(width: u32, height: u32, channels: u8, data: &[u8]) -> Vec<u8> {
    assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
    assert_eq!(
        data.len(),
        width as usize * height as usize * channels as usize,
        "pixel buffer length"
    );
    let magic = if channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic} {width} {height} 255\n").into_bytes();
    out.extend_from_slice(data);
    out
}

pub fn read(path: &Path) -> Result<Pnm> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, width: u32, height: u32, channels: u8, data: &[u8]) -> Result<()> {
    std::fs::write(path, encode(width, height, channels, data)).map_err(|e| Error::io(path, e))
}

pub fn decode_label_raster(bytes: &[u8]) -> Result<LabelRaster> {
    let pnm = decode(bytes)?;
    if pnm.channels != 1 {
        return Err(Error::Format("unsupported magic P6 for a label raster".into()));
    }
    LabelRaster::new(pnm.width, pnm.height, pnm.data)
}

pub fn encode_label_raster(raster: &LabelRaster) -> Vec<u8> {
    encode(raster.width(), raster.height(), 1, raster.classes())
}

pub fn load_label_raster(path: &Path) -> Result<LabelRaster> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_label_raster(&bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_label_raster(path: &Path, raster: &LabelRaster) -> Result<()> {
    std::fs::write(path, encode_label_raster(raster)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decodes_minimal_p5() {
        let mut bytes = b"P5 2 2 255\n".to_vec();
        bytes.extend([0, 1, 1, 0]);
        let r = decode_label_raster(&bytes).unwrap();
        assert_eq!((r.width(), r.height()), (2, 2));
        assert_eq!(r.classes(), &[0, 1, 1, 0]);
    }

    #[test]
    fn rejects_ascii_magic() {
        let err = decode(b"P2 2 2 255\n0 1 1 0").unwrap_err();
        assert_eq!(err.to_string(), "unsupported magic P2");
    }

    #[test]
    fn reports_truncation() {
        let mut bytes = b"P5 4 4 255\n".to_vec();
        bytes.extend([0u8; 12]);
        let err = decode(&bytes).unwrap_err();
        assert_eq!(err.to_string(), "expected 16 bytes, got 12");
    }

    #[test]
    fn rejects_sixteen_bit() {
        let err = decode(b"P5 1 1 65535\n\0\0").unwrap_err();
        assert!(err.to_string().contains("maxval 65535"));
    }

    #[test]
    fn accepts_comments_and_mixed_whitespace() {
        let mut bytes = b"P5\n# made by hand\n3\t1\n# another\n7\n".to_vec();
        bytes.extend([1, 2, 3]);
        let p = decode(&bytes).unwrap();
        assert_eq!((p.width, p.height, p.maxval), (3, 1, 7));
        assert_eq!(p.data, [1, 2, 3]);
    }

    #[test]
    fn decodes_p6() {
        let mut bytes = b"P6 1 2 255\n".to_vec();
        bytes.extend([1, 2, 3, 4, 5, 6]);
        let p = decode(&bytes).unwrap();
        assert_eq!(p.channels, 3);
        assert!(decode_label_raster(&bytes).is_err());
    }

    proptest! {
        #[test]
        fn canonical_label_raster_round_trips(
            w in 1u32..12, h in 1u32..12, seed in any::<u64>()
        ) {
            let data: Vec<u8> = (0..w * h)
                .map(|i| (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) >> 33) as u8)
                .collect();
            let canonical = encode(w, h, 1, &data);
            let raster = decode_label_raster(&canonical).unwrap();
            prop_assert_eq!(encode_label_raster(&raster), canonical);
        }
    }
}
