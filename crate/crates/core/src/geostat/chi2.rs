use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{significance_stars, ChiSquareResult};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

const MAX_ITER: usize = 10_000;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Lower regularized gamma by its power series; converges fast for `x < a + 1`.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Upper regularized gamma by modified Lentz continued fraction; for `x >= a + 1`.
fn upper_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        (1.0 - lower_series(a, x)).clamp(0.0, 1.0)
    } else {
        upper_fraction(a, x).clamp(0.0, 1.0)
    }
}

/// Upper-tail probability of a chi-squared variable with `dof` degrees of freedom.
pub fn chi2_p_value(statistic: f64, dof: u32) -> f64 {
    gamma_q(dof as f64 / 2.0, statistic / 2.0)
}

/// One row of a goodness-of-fit test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiGroup {
    pub key: String,
    pub image_total: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareInput {
    pub groups: Vec<ChiGroup>,
}

/// Folds groups with no images into their adjacent group with fewer images.
fn merge_empty(mut groups: Vec<ChiGroup>) -> Vec<ChiGroup> {
    while let Some(i) = groups.iter().position(|g| g.image_total == 0) {
        if groups.len() == 1 {
            break;
        }
        let left = i.checked_sub(1).map(|j| (j, groups[j].image_total));
        let right = groups.get(i + 1).map(|g| (i + 1, g.image_total));
        let target = match (left, right) {
            (Some(l), Some(r)) => {
                if r.1 < l.1 {
                    r.0
                } else {
                    l.0
                }
            }
            (Some(l), None) => l.0,
            (None, Some(r)) => r.0,
            (None, None) => unreachable!(),
        };
        let g = groups.remove(i);
        let target = if target > i { target - 1 } else { target };
        warn!(
            "group {} has zero expected count; merged into {}",
            g.key, groups[target].key
        );
        let t = &mut groups[target];
        t.key = format!("{}+{}", t.key, g.key);
        t.image_total += g.image_total;
        t.count += g.count;
    }
    groups
}

/// Pearson goodness-of-fit of category counts against image totals.
///
/// Expected counts are the category total distributed in proportion to
/// each group's image total; degrees of freedom are groups minus one.
pub fn chi_squared(input: &ChiSquareInput) -> Result<ChiSquareResult> {
    let groups = merge_empty(input.groups.clone());
    if groups.len() < 2 {
        return Err(Error::Invalid(format!(
            "chi-squared needs at least 2 groups with images, got {}",
            groups.len()
        )));
    }
    let total: u64 = groups.iter().map(|g| g.count).sum();
    if total == 0 {
        return Err(Error::Invalid("chi-squared needs at least one observation".into()));
    }
    let images: u64 = groups.iter().map(|g| g.image_total).sum();
    let statistic: f64 = groups
        .iter()
        .map(|g| {
            let expected = total as f64 * g.image_total as f64 / images as f64;
            let diff = g.count as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let dof = groups.len() as u32 - 1;
    let p_value = chi2_p_value(statistic, dof);
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value,
        stars: significance_stars(p_value).to_string(),
    })
}
