use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geostat::Assignments;
use crate::model::{AdCategory, AdInstance};

/// Properties carried by one ad point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdPoint {
    pub ad_id: String,
    pub category: Option<AdCategory>,
    pub area_code: Option<String>,
    pub filled_pixels: u64,
    pub lat: f64,
    pub lon: f64,
}

impl AdPoint {
    pub fn of(ad: &AdInstance, assignments: &Assignments) -> Self {
        Self {
            ad_id: ad.ad_id.clone(),
            category: ad.category,
            area_code: assignments.get(&ad.ad_id).map(str::to_string),
            filled_pixels: ad.filled_pixels,
            lat: ad.lat,
            lon: ad.lon,
        }
    }
}

/// One Point feature per ad, coordinates `[lon, lat]`.
pub fn emit_geojson(points: &[AdPoint]) -> String {
    let features: Vec<Value> = points
        .iter()
        .map(|p| {
            json!({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [p.lon, p.lat]},
                "properties": {
                    "ad_id": p.ad_id,
                    "category": p.category,
                    "area_code": p.area_code,
                    "filled_pixels": p.filled_pixels,
                },
            })
        })
        .collect();
    let fc = json!({"type": "FeatureCollection", "features": features});
    let mut s = serde_json::to_string_pretty(&fc).expect("json values serialize");
    s.push('\n');
    s
}

pub fn ads_geojson(ads: &[AdInstance], assignments: &Assignments) -> String {
    let points: Vec<AdPoint> = ads.iter().map(|a| AdPoint::of(a, assignments)).collect();
    emit_geojson(&points)
}

#[derive(Deserialize)]
struct Fc {
    #[serde(rename = "type")]
    kind: String,
    features: Vec<Feature>,
}

#[derive(Deserialize)]
struct Feature {
    geometry: Geometry,
    properties: Props,
}

#[derive(Deserialize)]
struct Geometry {
    #[serde(rename = "type")]
    kind: String,
    coordinates: [f64; 2],
}

#[derive(Deserialize)]
struct Props {
    ad_id: String,
    category: Option<AdCategory>,
    area_code: Option<String>,
    filled_pixels: u64,
}

/// Reads back a collection written by [`emit_geojson`].
pub fn parse_geojson(text: &str) -> Result<Vec<AdPoint>> {
    let fc: Fc = serde_json::from_str(text).map_err(|e| Error::Format(format!("geojson: {e}")))?;
    if fc.kind != "FeatureCollection" {
        return Err(Error::Format(format!("expected FeatureCollection, got {}", fc.kind)));
    }
    fc.features
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            if f.geometry.kind != "Point" {
                return Err(Error::Format(format!(
                    "feature {i}: expected Point, got {}",
                    f.geometry.kind
                )));
            }
            let [lon, lat] = f.geometry.coordinates;
            Ok(AdPoint {
                ad_id: f.properties.ad_id,
                category: f.properties.category,
                area_code: f.properties.area_code,
                filled_pixels: f.properties.filled_pixels,
                lat,
                lon,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn point(lat: f64, lon: f64) -> AdPoint {
        AdPoint {
            ad_id: "img_0".into(),
            category: Some(AdCategory::Food),
            area_code: Some("E01006512".into()),
            filled_pixels: 2500,
            lat,
            lon,
        }
    }

    #[test]
    fn lon_first() {
        let text = emit_geojson(&[point(53.4, -2.98)]);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["features"].as_array().unwrap().len(), 1);
        assert_eq!(v["features"][0]["geometry"]["coordinates"], json!([-2.98, 53.4]));
        assert_eq!(v["features"][0]["properties"]["category"], "food");
    }

    #[test]
    fn empty_collection() {
        let text = emit_geojson(&[]);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v, json!({"type": "FeatureCollection", "features": []}));
        assert!(parse_geojson(&text).unwrap().is_empty());
    }

    #[test]
    fn rejects_other_geometry() {
        let text = r#"{"type":"FeatureCollection","features":[{"type":"Feature",
            "geometry":{"type":"Line","coordinates":[0,0]},
            "properties":{"ad_id":"a","category":null,"area_code":null,"filled_pixels":1}}]}"#;
        assert_eq!(
            parse_geojson(text).unwrap_err().to_string(),
            "feature 0: expected Point, got Line"
        );
    }

    proptest! {
        #[test]
        fn round_trip(
            lat in -90.0f64..90.0,
            lon in -180.0f64..180.0,
            px in 0u64..10_000_000,
            cat in prop::option::of(0usize..4),
            code in prop::option::of("[A-Z][0-9]{8}"),
        ) {
            let p = AdPoint {
                ad_id: format!("frame_{px}"),
                category: cat.map(|c| AdCategory::ALL[c]),
                area_code: code,
                filled_pixels: px,
                lat,
                lon,
            };
            let back = parse_geojson(&emit_geojson(std::slice::from_ref(&p))).unwrap();
            prop_assert_eq!(back, vec![p]);
        }
    }
}
