//! GeoJSON area boundaries.

use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{AreaUnit, Polygon, Ring};

pub fn parse_areas(text: &str) -> Result<Vec<AreaUnit>> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("malformed GeoJSON: {e}")))?;
    if root.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::Format("expected a GeoJSON FeatureCollection".into()));
    }
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Format("FeatureCollection without features array".into()))?;
    features
        .iter()
        .enumerate()
        .map(|(i, f)| parse_feature(f).map_err(|e| Error::Format(format!("feature {i}: {e}"))))
        .collect()
}

pub fn load_areas(path: &Path) -> Result<Vec<AreaUnit>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_areas(&text)
}

fn parse_feature(feature: &Value) -> Result<AreaUnit> {
    let props = feature
        .get("properties")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Format("missing properties".into()))?;
    let geometry = feature
        .get("geometry")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Format("missing geometry".into()))?;
    let kind = geometry
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Format("geometry without type".into()))?;
    let coords = geometry
        .get("coordinates")
        .ok_or_else(|| Error::Format("geometry without coordinates".into()))?;
    let polygons = match kind {
        "Polygon" => vec![polygon(coords)?],
        "MultiPolygon" => as_array(coords, "MultiPolygon coordinates")?
            .iter()
            .map(polygon)
            .collect::<Result<_>>()?,
        other => {
            return Err(Error::Format(format!("unsupported geometry type {other}")));
        }
    };
    AreaUnit::new(
        string_prop(props, "code")?,
        polygons,
        int_prop(props, "imd_decile")?,
        int_prop(props, "oac_supergroup")?,
        string_prop(props, "oac_group")?,
    )
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Format(format!("{what} must be an array")))
}

fn polygon(coords: &Value) -> Result<Polygon> {
    let mut rings = as_array(coords, "Polygon coordinates")?
        .iter()
        .map(ring)
        .collect::<Result<Vec<_>>>()?;
    if rings.is_empty() {
        return Err(Error::Format("Polygon without rings".into()));
    }
    let exterior = rings.remove(0);
    Polygon::new(exterior, rings)
}

fn ring(v: &Value) -> Result<Ring> {
    as_array(v, "ring")?
        .iter()
        .map(|pos| {
            let pos = as_array(pos, "position")?;
            match (pos.first().and_then(Value::as_f64), pos.get(1).and_then(Value::as_f64)) {
                (Some(lon), Some(lat)) => Ok([lon, lat]),
                _ => Err(Error::Format("position must hold two numbers".into())),
            }
        })
        .collect()
}

fn string_prop(props: &Map<String, Value>, key: &str) -> Result<String> {
    match props.get(key) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Number(n)) => Ok(n.to_string()),
        _ => Err(Error::Format(format!("missing property {key}"))),
    }
}

fn int_prop(props: &Map<String, Value>, key: &str) -> Result<u8> {
    let v = props
        .get(key)
        .ok_or_else(|| Error::Format(format!("missing property {key}")))?;
    let n = match v {
        Value::Number(n) => n.as_i64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
    .ok_or_else(|| Error::Format(format!("property {key} must be an integer")))?;
    u8::try_from(n).map_err(|_| Error::Invalid(format!("property {key} out of range: {n}")))
}
