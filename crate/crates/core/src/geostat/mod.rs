//! Spatial join of ads to census areas and the statistics computed over it.

mod chi2;
mod exposure;
mod join;
mod metrics;
mod pip;
pub mod tables;

pub use chi2::{chi2_p_value, chi_squared, gamma_q, ln_gamma, ChiGroup, ChiSquareInput};
pub use exposure::{category_counts, compare_group_keys, exposure_table, image_totals, percent, CountBasis};
pub use join::{join_ads_to_areas, join_images_to_areas, join_points, AreaIndex, Assignments, Overlap};
pub use metrics::{detection_counts, iou, mean_iou, DetectionCounts, Iou, MeanIou};
pub use pip::{point_in_polygon, polygon_bounds};

use crate::error::Result;
use crate::model::{AdCategory, ChiSquareResult, ExposureTable};

/// Chi-squared test of one category's counts across the groups of a table.
pub fn chi_squared_for(table: &ExposureTable, cat: AdCategory, basis: CountBasis) -> Result<ChiSquareResult> {
    let counts = category_counts(table, cat, basis);
    let groups = table
        .rows
        .iter()
        .zip(counts)
        .map(|(r, count)| ChiGroup {
            key: r.group.clone(),
            image_total: r.image_total,
            count,
        })
        .collect();
    chi_squared(&ChiSquareInput { groups })
}
