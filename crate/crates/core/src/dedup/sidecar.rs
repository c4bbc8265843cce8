//! Binary descriptor sidecar.
//!
//! Layout, all little-endian: `u32 count`, `u32 dim` (= 128), then
//! `count * dim` `f32` descriptor values row by row, then `count` keypoints
//! as `f32 x, f32 y`.

use std::path::Path;

use super::descriptor::{Descriptor, DESCRIPTOR_LEN};
use crate::error::{Error, Result};

pub fn encode(descs: &[Descriptor]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + descs.len() * (DESCRIPTOR_LEN + 2) * 4);
    out.extend((descs.len() as u32).to_le_bytes());
    out.extend((DESCRIPTOR_LEN as u32).to_le_bytes());
    for d in descs {
        for v in d.vector() {
            out.extend(v.to_le_bytes());
        }
    }
    for d in descs {
        let [x, y] = d.keypoint();
        out.extend(x.to_le_bytes());
        out.extend(y.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Vec<Descriptor>> {
    let word = |i: usize| -> [u8; 4] { bytes[i..i + 4].try_into().expect("4 bytes") };
    if bytes.len() < 8 {
        return Err(Error::Format("descriptor sidecar shorter than its header".into()));
    }
    let count = u32::from_le_bytes(word(0)) as usize;
    let dim = u32::from_le_bytes(word(4)) as usize;
    if dim != DESCRIPTOR_LEN {
        return Err(Error::Format(format!(
            "descriptor sidecar dim {dim}, expected {DESCRIPTOR_LEN}"
        )));
    }
    let expected = 8 + count * (dim + 2) * 4;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "descriptor sidecar: expected {expected} bytes, got {}",
            bytes.len()
        )));
    }
    let f = |i: usize| f32::from_le_bytes(word(i));
    let kp_base = 8 + count * dim * 4;
    (0..count)
        .map(|r| {
            let row = 8 + r * dim * 4;
            let vector = (0..dim).map(|c| f(row + c * 4)).collect();
            let kp = kp_base + r * 8;
            Descriptor::new([f(kp), f(kp + 4)], vector)
        })
        .collect()
}

pub fn read_sidecar(path: &Path) -> Result<Vec<Descriptor>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_sidecar(path: &Path, descs: &[Descriptor]) -> Result<()> {
    std::fs::write(path, encode(descs)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(seed: usize) -> Descriptor {
        let mut v = vec![0.0f32; DESCRIPTOR_LEN];
        v[seed % DESCRIPTOR_LEN] = 0.6;
        v[(seed * 7 + 3) % DESCRIPTOR_LEN] = 0.8;
        Descriptor::new([seed as f32 + 0.25, 2.5], v).unwrap()
    }

    #[test]
    fn round_trip() {
        let d: Vec<_> = (0..5).map(unit).collect();
        let bytes = encode(&d);
        assert_eq!(bytes.len(), 8 + 5 * 130 * 4);
        assert_eq!(decode(&bytes).unwrap(), d);
        assert!(decode(&encode(&[])).unwrap().is_empty());
    }

    #[test]
    fn rejects_wrong_dim_and_length() {
        let mut bytes = encode(&[unit(1)]);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        bytes[4] = 64;
        assert!(decode(&bytes).unwrap_err().to_string().contains("dim 64"));
    }
}
