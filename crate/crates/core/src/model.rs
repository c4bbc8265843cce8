//! Shared domain types.
//!
//! Everything here is an immutable value once constructed. Constructors that
//! can fail check the type's invariants up front so later stages never need to
//! re-validate (ring closure on [`Polygon`], decile and OAC consistency on
//! [`AreaUnit`], buffer length on [`LabelRaster`]).

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One geo-tagged street-level frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoImage {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
    pub captured_at: DateTime<Utc>,
    #[serde(rename = "raster_path")]
    pub raster_ref: PathBuf,
    #[serde(rename = "image_path", default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<PathBuf>,
    pub width: u32,
    pub height: u32,
}

/// A single violated invariant in a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub record: String,
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.record, self.field, self.message)
    }
}

/// Every violation found while validating a batch of records.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} invalid record field(s)", self.issues.len())?;
        for issue in &self.issues {
            write!(f, "; {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Checks coordinate ranges, frame dimensions and id uniqueness.
///
/// All violations are collected; the list is returned untouched when there
/// are none.
pub fn validate_manifest(images: Vec<GeoImage>) -> Result<Vec<GeoImage>, ValidationReport> {
    let mut report = ValidationReport::default();
    let mut seen = HashSet::new();
    for img in &images {
        let mut push = |field, message: String| {
            report.issues.push(Issue {
                record: img.id.clone(),
                field,
                message,
            })
        };
        if !seen.insert(img.id.as_str()) {
            push("id", format!("duplicate id {}", img.id));
        }
        if !(-90.0..=90.0).contains(&img.lat) {
            push("lat", format!("latitude {} outside [-90, 90]", img.lat));
        }
        if !(-180.0..=180.0).contains(&img.lon) {
            push("lon", format!("longitude {} outside [-180, 180]", img.lon));
        }
        if img.width == 0 {
            push("width", "width must be at least 1".into());
        }
        if img.height == 0 {
            push("height", "height must be at least 1".into());
        }
    }
    if report.issues.is_empty() {
        Ok(images)
    } else {
        Err(report)
    }
}

/// Per-pixel semantic class ids, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRaster {
    width: u32,
    height: u32,
    classes: Vec<u8>,
}

impl LabelRaster {
    pub fn new(width: u32, height: u32, classes: Vec<u8>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if classes.len() != expected {
            return Err(Error::Format(format!(
                "raster buffer holds {} values, expected {}x{} = {expected}",
                classes.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            classes,
        })
    }

    pub fn filled(width: u32, height: u32, class: u8) -> Self {
        Self {
            width,
            height,
            classes: vec![class; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn classes(&self) -> &[u8] {
        &self.classes
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.classes[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, class: u8) {
        let w = self.width as usize;
        self.classes[y as usize * w + x as usize] = class;
    }
}

/// Advertisement content category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdCategory {
    Food,
    Alcohol,
    Gambling,
    Other,
}

impl AdCategory {
    pub const ALL: [AdCategory; 4] = [
        AdCategory::Food,
        AdCategory::Alcohol,
        AdCategory::Gambling,
        AdCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AdCategory::Food => "food",
            AdCategory::Alcohol => "alcohol",
            AdCategory::Gambling => "gambling",
            AdCategory::Other => "other",
        }
    }

    /// Position in [`AdCategory::ALL`]; used to index per-category arrays.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AdCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown category '{0}'")]
pub struct UnknownCategory(pub String);

impl FromStr for AdCategory {
    type Err = UnknownCategory;

    /// Case-insensitive; surrounding whitespace is ignored.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "food" => Ok(AdCategory::Food),
            "alcohol" => Ok(AdCategory::Alcohol),
            "gambling" => Ok(AdCategory::Gambling),
            "other" => Ok(AdCategory::Other),
            _ => Err(UnknownCategory(s.trim().to_string())),
        }
    }
}

/// Integer pixel coordinate; serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct PixelPoint {
    pub x: i32,
    pub y: i32,
}

impl PixelPoint {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

impl From<[i32; 2]> for PixelPoint {
    fn from([x, y]: [i32; 2]) -> Self {
        Self { x, y }
    }
}

impl From<PixelPoint> for [i32; 2] {
    fn from(p: PixelPoint) -> Self {
        [p.x, p.y]
    }
}

/// Inclusive pixel bounding box; serialized as `[min_x, min_y, max_x, max_y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[i32; 4]", into = "[i32; 4]")]
pub struct BBox {
    pub min_x: i32,
    pub min_y: i32,
    pub max_x: i32,
    pub max_y: i32,
}

impl BBox {
    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a PixelPoint>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = BBox {
            min_x: first.x,
            min_y: first.y,
            max_x: first.x,
            max_y: first.y,
        };
        for p in it {
            b.include(*p);
        }
        Some(b)
    }

    pub fn include(&mut self, p: PixelPoint) {
        self.min_x = self.min_x.min(p.x);
        self.min_y = self.min_y.min(p.y);
        self.max_x = self.max_x.max(p.x);
        self.max_y = self.max_y.max(p.y);
    }

    pub fn contains(&self, p: PixelPoint) -> bool {
        (self.min_x..=self.max_x).contains(&p.x) && (self.min_y..=self.max_y).contains(&p.y)
    }

    pub fn width(&self) -> u32 {
        (self.max_x - self.min_x + 1) as u32
    }

    pub fn height(&self) -> u32 {
        (self.max_y - self.min_y + 1) as u32
    }
}

impl From<[i32; 4]> for BBox {
    fn from([min_x, min_y, max_x, max_y]: [i32; 4]) -> Self {
        Self {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }
}

impl From<BBox> for [i32; 4] {
    fn from(b: BBox) -> Self {
        [b.min_x, b.min_y, b.max_x, b.max_y]
    }
}

/// One extracted advertisement.
///
/// The location is the camera position of the source frame; no depth is
/// available to place the billboard itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdInstance {
    pub ad_id: String,
    pub source_image: String,
    /// Convex hull of the component, counter-clockwise (positive shoelace area).
    pub hull: Vec<PixelPoint>,
    pub component_pixels: u64,
    pub filled_pixels: u64,
    pub bbox: BBox,
    pub lat: f64,
    pub lon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<AdCategory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crop_ref: Option<PathBuf>,
}

impl AdInstance {
    /// Checks the structural invariants against a minimum filled size.
    pub fn check(&self, min_pixels: u64) -> Result<()> {
        let fail = |msg: String| Err(Error::Invalid(format!("ad {}: {msg}", self.ad_id)));
        if self.filled_pixels < self.component_pixels {
            return fail(format!(
                "filled_pixels {} < component_pixels {}",
                self.filled_pixels, self.component_pixels
            ));
        }
        if self.filled_pixels < min_pixels {
            return fail(format!(
                "filled_pixels {} below minimum {min_pixels}",
                self.filled_pixels
            ));
        }
        if !self.hull.iter().all(|p| self.bbox.contains(*p)) {
            return fail("bbox does not enclose hull".into());
        }
        if !crate::extract::is_strictly_convex_ccw(&self.hull) {
            return fail("hull is not convex and counter-clockwise".into());
        }
        Ok(())
    }
}

/// Parameters of the duplicate-detection graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DedupConfig {
    /// Minimum number of matched features for an edge.
    pub tau: u32,
    /// Distance gate in meters.
    pub distance_m: f64,
    /// Nearest/second-nearest ratio for the matcher.
    pub ratio: f64,
    /// Require `count > tau` instead of `count >= tau`.
    #[serde(default)]
    pub strict: bool,
}

impl DedupConfig {
    pub fn new(tau: u32, distance_m: f64, ratio: f64) -> Result<Self> {
        let cfg = Self {
            tau,
            distance_m,
            ratio,
            strict: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau < 1 {
            return Err(Error::Invalid("tau must be at least 1".into()));
        }
        if !(self.distance_m > 0.0 && self.distance_m.is_finite()) {
            return Err(Error::Invalid(format!(
                "distance must be positive, got {}",
                self.distance_m
            )));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::Invalid(format!(
                "ratio must lie in (0, 1), got {}",
                self.ratio
            )));
        }
        Ok(())
    }

    pub fn admits(&self, matches: usize) -> bool {
        let tau = self.tau as usize;
        if self.strict {
            matches > tau
        } else {
            matches >= tau
        }
    }
}

impl Default for DedupConfig {
    fn default() -> Self {
        Self {
            tau: 60,
            distance_m: 10.0,
            ratio: 0.75,
            strict: false,
        }
    }
}

/// Closed ring of `[lon, lat]` vertices.
pub type Ring = Vec<[f64; 2]>;

/// Simple polygon: one outer ring plus optional holes, all closed.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    exterior: Ring,
    holes: Vec<Ring>,
}

impl Polygon {
    pub fn new(exterior: Ring, holes: Vec<Ring>) -> Result<Self> {
        check_ring(&exterior)?;
        for h in &holes {
            check_ring(h)?;
        }
        Ok(Self { exterior, holes })
    }

    pub fn exterior(&self) -> &Ring {
        &self.exterior
    }

    pub fn holes(&self) -> &[Ring] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.exterior).chain(self.holes.iter())
    }
}

fn check_ring(ring: &Ring) -> Result<()> {
    if ring.len() < 4 {
        return Err(Error::Invalid(format!(
            "ring needs at least 4 positions, got {}",
            ring.len()
        )));
    }
    if ring.first() != ring.last() {
        return Err(Error::Invalid(
            "ring not closed: first vertex differs from last".into(),
        ));
    }
    Ok(())
}

/// One census area with its deprivation decile and OAC classification.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaUnit {
    pub code: String,
    pub polygons: Vec<Polygon>,
    pub imd_decile: u8,
    pub oac_supergroup: u8,
    pub oac_group: String,
}

impl AreaUnit {
    pub fn new(
        code: impl Into<String>,
        polygons: Vec<Polygon>,
        imd_decile: u8,
        oac_supergroup: u8,
        oac_group: impl Into<String>,
    ) -> Result<Self> {
        let code = code.into();
        let oac_group = oac_group.into();
        if !(1..=10).contains(&imd_decile) {
            return Err(Error::Invalid(format!(
                "area {code}: imd_decile {imd_decile} outside 1-10"
            )));
        }
        if !(1..=8).contains(&oac_supergroup) {
            return Err(Error::Invalid(format!(
                "area {code}: oac_supergroup {oac_supergroup} outside 1-8"
            )));
        }
        match oac_group_supergroup(&oac_group) {
            Some(sg) if sg == oac_supergroup => {}
            Some(_) => {
                return Err(Error::Invalid(format!(
                    "group {oac_group} inconsistent with supergroup {oac_supergroup}"
                )))
            }
            None => {
                return Err(Error::Invalid(format!(
                    "area {code}: malformed oac_group '{oac_group}'"
                )))
            }
        }
        if polygons.is_empty() {
            return Err(Error::Invalid(format!("area {code}: no polygons")));
        }
        Ok(Self {
            code,
            polygons,
            imd_decile,
            oac_supergroup,
            oac_group,
        })
    }
}

/// Supergroup encoded by a two-character OAC group code such as `"2a"`.
pub fn oac_group_supergroup(group: &str) -> Option<u8> {
    let mut chars = group.chars();
    let digit = chars.next()?.to_digit(10)? as u8;
    let letter = chars.next()?;
    if chars.next().is_some() || !letter.is_ascii_lowercase() || !(1..=8).contains(&digit) {
        return None;
    }
    Some(digit)
}

/// Grouping used for exposure tables and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    Decile,
    Supergroup,
    Group,
}

impl GroupBy {
    pub fn key(self, area: &AreaUnit) -> String {
        match self {
            GroupBy::Decile => area.imd_decile.to_string(),
            GroupBy::Supergroup => area.oac_supergroup.to_string(),
            GroupBy::Group => area.oac_group.clone(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GroupBy::Decile => "decile",
            GroupBy::Supergroup => "supergroup",
            GroupBy::Group => "group",
        }
    }
}

impl FromStr for GroupBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decile" => Ok(GroupBy::Decile),
            "supergroup" | "oac_supergroup" => Ok(GroupBy::Supergroup),
            "group" | "oac_group" => Ok(GroupBy::Group),
            other => Err(Error::Invalid(format!("unknown grouping '{other}'"))),
        }
    }
}

impl fmt::Display for GroupBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exposure of one group to one category.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CategoryExposure {
    /// Number of ads of the category located in the group.
    pub ads: u64,
    /// Number of images in the group with at least one such ad.
    pub images_with: u64,
    /// `100 * images_with / image_total`.
    pub image_pct: f64,
    /// Share of the category's ads (over all groups) that fall in this group.
    pub ad_share_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureRow {
    pub group: String,
    pub image_total: u64,
    /// Indexed by [`AdCategory::index`].
    pub categories: [CategoryExposure; 4],
}

impl ExposureRow {
    pub fn get(&self, cat: AdCategory) -> &CategoryExposure {
        &self.categories[cat.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureTable {
    pub group_by: GroupBy,
    pub rows: Vec<ExposureRow>,
}

impl ExposureTable {
    /// Sum of ad counts over all groups for a category.
    pub fn total_ads(&self, cat: AdCategory) -> u64 {
        self.rows.iter().map(|r| r.get(cat).ads).sum()
    }

    pub fn total_images(&self) -> u64 {
        self.rows.iter().map(|r| r.image_total).sum()
    }
}

/// Outcome of a Pearson chi-squared test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: u32,
    pub p_value: f64,
    pub stars: String,
}

/// Significance stars: `***` below 0.001, `**` below 0.01, `*` below 0.05.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub category: AdCategory,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when any of the three scores hit a zero denominator and was reported as 0.
    pub zero_division: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per-category and support-weighted precision, recall and F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PRF1Report {
    pub per_class: Vec<ClassScores>,
    pub weighted: WeightedScores,
}

impl PRF1Report {
    pub fn class(&self, cat: AdCategory) -> Option<&ClassScores> {
        self.per_class.iter().find(|c| c.category == cat)
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(id: &str, lat: f64, lon: f64) -> GeoImage {
        GeoImage {
            id: id.into(),
            lat,
            lon,
            captured_at: "2020-01-14T10:00:00Z".parse().unwrap(),
            raster_ref: "a.pgm".into(),
            image_ref: None,
            width: 2048,
            height: 1024,
        }
    }

    #[test]
    fn empty_manifest_is_valid() {
        assert_eq!(validate_manifest(vec![]).unwrap(), vec![]);
    }

    #[test]
    fn in_range_record_accepted() {
        let out = validate_manifest(vec![img("a", 53.4, -2.98)]).unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn duplicate_ids_are_named() {
        let err = validate_manifest(vec![img("img_001", 53.4, -2.9), img("img_001", 53.5, -2.9)])
            .unwrap_err();
        assert_eq!(err.issues.len(), 1);
        assert_eq!(err.issues[0].field, "id");
        assert!(err.to_string().contains("img_001"));
    }

    #[test]
    fn every_violation_is_reported() {
        let mut bad = img("b", 91.0, -181.0);
        bad.width = 0;
        bad.height = 0;
        let err = validate_manifest(vec![img("a", 0.0, 0.0), bad]).unwrap_err();
        let fields: Vec<_> = err.issues.iter().map(|i| i.field).collect();
        assert_eq!(fields, ["lat", "lon", "width", "height"]);
        assert!(err.issues.iter().all(|i| i.record == "b"));
    }

    #[test]
    fn category_round_trip() {
        for c in AdCategory::ALL {
            assert_eq!(c.to_string().parse::<AdCategory>().unwrap(), c);
            assert_eq!(c.as_str().to_uppercase().parse::<AdCategory>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(serde_json::from_str::<AdCategory>(&json).unwrap(), c);
        }
        assert!("fod".parse::<AdCategory>().is_err());
    }

    #[test]
    fn ring_closure_checked_on_construction() {
        let open = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(Polygon::new(open, vec![]).is_err());
        let closed = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]];
        assert!(Polygon::new(closed, vec![]).is_ok());
    }

    #[test]
    fn area_group_must_match_supergroup() {
        let sq = Polygon::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]],
            vec![],
        )
        .unwrap();
        let a = AreaUnit::new("E1", vec![sq.clone()], 3, 2, "2b").unwrap();
        assert_eq!(a.oac_supergroup, 2);
        let err = AreaUnit::new("E1", vec![sq.clone()], 3, 5, "2b").unwrap_err();
        assert_eq!(err.to_string(), "group 2b inconsistent with supergroup 5");
        assert!(AreaUnit::new("E1", vec![sq.clone()], 0, 2, "2b").is_err());
        assert!(AreaUnit::new("E1", vec![sq], 11, 2, "2b").is_err());
    }

    #[test]
    fn stars_follow_thresholds() {
        assert_eq!(significance_stars(0.0009), "***");
        assert_eq!(significance_stars(0.001), "**");
        assert_eq!(significance_stars(0.0099), "**");
        assert_eq!(significance_stars(0.01), "*");
        assert_eq!(significance_stars(0.0499), "*");
        assert_eq!(significance_stars(0.05), "");
        assert_eq!(significance_stars(1.0), "");
    }

    #[test]
    fn dedup_config_bounds() {
        assert!(DedupConfig::new(0, 10.0, 0.75).is_err());
        assert!(DedupConfig::new(60, 0.0, 0.75).is_err());
        assert!(DedupConfig::new(60, 10.0, 1.0).is_err());
        let cfg = DedupConfig::default();
        assert_eq!((cfg.tau, cfg.distance_m), (60, 10.0));
        assert!(cfg.admits(60));
        assert!(!DedupConfig { strict: true, ..cfg }.admits(60));
    }

    #[test]
    fn pixel_point_serializes_as_pair() {
        let p = PixelPoint::new(3, -4);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[3,-4]");
        let b = BBox::from([0, 1, 2, 3]);
        assert_eq!(serde_json::to_string(&b).unwrap(), "[0,1,2,3]");
    }
}
