use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{ad_mask, Mask};
use crate::model::{AdInstance, LabelRaster};

/// Intersection over union of two masks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Iou {
    pub value: f64,
    /// Both masks were empty; `value` is then defined as 1.
    pub both_empty: bool,
}

fn same_dims(aw: u32, ah: u32, bw: u32, bh: u32) -> Result<()> {
    if (aw, ah) != (bw, bh) {
        return Err(Error::DimensionMismatch {
            expected_w: aw,
            expected_h: ah,
            actual_w: bw,
            actual_h: bh,
        });
    }
    Ok(())
}

pub fn iou(a: &Mask, b: &Mask) -> Result<Iou> {
    same_dims(a.width(), a.height(), b.width(), b.height())?;
    let (mut inter, mut union) = (0u64, 0u64);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        inter += (x && y) as u64;
        union += (x || y) as u64;
    }
    Ok(if union == 0 {
        Iou {
            value: 1.0,
            both_empty: true,
        }
    } else {
        Iou {
            value: inter as f64 / union as f64,
            both_empty: false,
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanIou {
    pub mean: f64,
    /// `(class, IoU)` for every class present in the ground truth.
    pub per_class: Vec<(u8, f64)>,
}

/// Mean per-class IoU over the classes present in `truth`.
pub fn mean_iou(truth: &LabelRaster, pred: &LabelRaster) -> Result<MeanIou> {
    same_dims(truth.width(), truth.height(), pred.width(), pred.height())?;
    let classes: BTreeSet<u8> = truth.classes().iter().copied().collect();
    let per_class: Vec<(u8, f64)> = classes
        .into_iter()
        .map(|c| {
            iou(&Mask::from_class(truth, c), &Mask::from_class(pred, c)).map(|i| (c, i.value))
        })
        .collect::<Result<_>>()?;
    let mean = if per_class.is_empty() {
        0.0
    } else {
        per_class.iter().map(|p| p.1).sum::<f64>() / per_class.len() as f64
    };
    Ok(MeanIou { mean, per_class })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DetectionCounts {
    pub matched: u64,
    pub false_positives: u64,
    pub missed: u64,
}

/// Greedy one-to-one matching of predicted and ground-truth ads.
///
/// Ground-truth ads below `min_px` filled pixels are ignored. Candidate
/// pairs are taken in descending mask IoU order (ties by index) and
/// accepted while both sides are free and the IoU is at least `iou_match`.
pub fn detection_counts(
    pred: &[AdInstance],
    truth: &[AdInstance],
    width: u32,
    height: u32,
    min_px: u64,
    iou_match: f64,
) -> Result<DetectionCounts> {
    let truth: Vec<&AdInstance> = truth.iter().filter(|a| a.filled_pixels >= min_px).collect();
    let pm: Vec<Mask> = pred.iter().map(|a| ad_mask(a, width, height)).collect();
    let tm: Vec<Mask> = truth.iter().map(|a| ad_mask(a, width, height)).collect();
    let mut pairs = Vec::new();
    for (i, p) in pm.iter().enumerate() {
        for (j, t) in tm.iter().enumerate() {
            let s = iou(p, t)?;
            if !s.both_empty && s.value >= iou_match {
                pairs.push((s.value, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let (mut pu, mut tu) = (vec![false; pm.len()], vec![false; tm.len()]);
    let mut matched = 0;
    for (_, i, j) in pairs {
        if !pu[i] && !tu[j] {
            pu[i] = true;
            tu[j] = true;
            matched += 1;
        }
    }
    Ok(DetectionCounts {
        matched,
        false_positives: pm.len() as u64 - matched,
        missed: tm.len() as u64 - matched,
    })
}
