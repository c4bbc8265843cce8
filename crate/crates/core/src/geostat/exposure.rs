use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use log::warn;

use super::join::Assignments;
use crate::error::{Error, Result};
use crate::model::{
    AdCategory, AdInstance, AreaUnit, CategoryExposure, ExposureRow, ExposureTable, GeoImage, GroupBy,
};

/// Orders group keys numerically when both parse as integers.
pub fn compare_group_keys(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

#[derive(Default)]
struct Acc {
    images: u64,
    ads: [u64; 4],
    images_with: [BTreeSet<String>; 4],
}

/// Per-group exposure counts.
///
/// Images are grouped by their own area assignment; ads by theirs. An image
/// counts towards `images_with` for a category when at least one ad of that
/// category was extracted from it. Groups without images are dropped with a
/// warning.
pub fn exposure_table(
    images: &[GeoImage],
    ads: &[AdInstance],
    image_assign: &Assignments,
    ad_assign: &Assignments,
    areas: &[AreaUnit],
    group_by: GroupBy,
) -> Result<ExposureTable> {
    let group_of: HashMap<&str, String> = areas
        .iter()
        .map(|a| (a.code.as_str(), group_by.key(a)))
        .collect();
    let lookup = |code: Option<&str>| code.and_then(|c| group_of.get(c));
    let mut acc: BTreeMap<String, Acc> = BTreeMap::new();
    let mut image_group: HashMap<&str, &String> = HashMap::new();
    for img in images {
        if let Some(g) = lookup(image_assign.get(&img.id)) {
            acc.entry(g.clone()).or_default().images += 1;
            image_group.insert(&img.id, g);
        }
    }
    for ad in ads {
        let cat = ad
            .category
            .ok_or_else(|| Error::Invalid(format!("ad {} has no category", ad.ad_id)))?;
        let Some(g) = lookup(ad_assign.get(&ad.ad_id)) else {
            continue;
        };
        acc.entry(g.clone()).or_default().ads[cat.index()] += 1;
        if let Some(ig) = image_group.get(ad.source_image.as_str()) {
            acc.entry((*ig).clone()).or_default().images_with[cat.index()]
                .insert(ad.source_image.clone());
        }
    }
    let mut rows: Vec<(String, Acc)> = Vec::new();
    for (g, a) in acc {
        if a.images == 0 {
            warn!("group {g} has no images; dropping {} ads", a.ads.iter().sum::<u64>());
            continue;
        }
        rows.push((g, a));
    }
    rows.sort_by(|a, b| compare_group_keys(&a.0, &b.0));
    let mut totals = [0u64; 4];
    for (_, a) in &rows {
        for c in 0..4 {
            totals[c] += a.ads[c];
        }
    }
    let rows = rows
        .into_iter()
        .map(|(group, a)| ExposureRow {
            categories: std::array::from_fn(|c| {
                let images_with = a.images_with[c].len() as u64;
                CategoryExposure {
                    ads: a.ads[c],
                    images_with,
                    image_pct: percent(images_with, a.images),
                    ad_share_pct: percent(a.ads[c], totals[c]),
                }
            }),
            group,
            image_total: a.images,
        })
        .collect();
    Ok(ExposureTable { group_by, rows })
}

/// `100 * part / whole`, or 0 when `whole` is 0.
pub fn percent(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

/// Image totals per group, in table order.
pub fn image_totals(table: &ExposureTable) -> Vec<(String, u64)> {
    table.rows.iter().map(|r| (r.group.clone(), r.image_total)).collect()
}

/// Category counts per group: ads or images, depending on `basis`.
pub fn category_counts(table: &ExposureTable, cat: AdCategory, basis: CountBasis) -> Vec<u64> {
    table
        .rows
        .iter()
        .map(|r| match basis {
            CountBasis::Ads => r.get(cat).ads,
            CountBasis::Images => r.get(cat).images_with,
        })
        .collect()
}

/// Which count feeds the observed side of the chi-squared test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountBasis {
    #[default]
    Ads,
    Images,
}

impl std::str::FromStr for CountBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ads" => Ok(CountBasis::Ads),
            "images" => Ok(CountBasis::Images),
            other => Err(Error::Invalid(format!("unknown count basis '{other}'"))),
        }
    }
}
