use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{validate_manifest, GeoImage};

const REQUIRED: [&str; 7] = [
    "id",
    "lat",
    "lon",
    "captured_at",
    "raster_path",
    "width",
    "height",
];

/// Parses JSON Lines manifest text. Blank lines are skipped; line numbers in
/// errors are 1-based physical lines.
pub fn parse_manifest(text: &str) -> Result<Vec<GeoImage>> {
    let mut images = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Line {
            line: line_no,
            message,
        };
        let value: Value =
            serde_json::from_str(line).map_err(|e| err(format!("malformed JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| err("expected a JSON object".into()))?;
        if let Some(missing) = REQUIRED.iter().find(|f| !obj.contains_key(**f)) {
            return Err(err(format!("missing field {missing}")));
        }
        let image: GeoImage = serde_json::from_value(value).map_err(|e| err(e.to_string()))?;
        images.push(image);
    }
    Ok(validate_manifest(images)?)
}

pub fn load_manifest(path: &Path) -> Result<Vec<GeoImage>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text)
}

/// Serializes images back to JSON Lines, one object per line.
pub fn render_manifest(images: &[GeoImage]) -> String {
    let mut out = String::new();
    for img in images {
        out.push_str(&serde_json::to_string(img).expect("GeoImage serializes"));
        out.push('\n');
    }
    out
}

/// Resolves a path found inside a file relative to that file's directory.
pub fn resolve_relative(container: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        container
            .parent()
            .map(|d| d.join(p))
            .unwrap_or_else(|| p.to_path_buf())
    }
}
