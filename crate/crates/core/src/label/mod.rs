//! Category assignment and classifier evaluation.

mod eval;
mod keyword;

pub use eval::{evaluate, evaluate_subsampled, ConfusionMatrix, Evaluation};
pub use keyword::{keyword_label, tokenize, KeywordLabeler, DEFAULT_PRIORITY};

use std::collections::BTreeMap;

use log::warn;

use crate::model::{AdCategory, AdInstance};

/// Where categories come from.
pub enum LabelSource<'a> {
    /// External classifier output keyed by ad id.
    Predictions(&'a BTreeMap<String, AdCategory>),
    /// OCR text keyed by ad id, labelled with a keyword matcher.
    Keywords {
        texts: &'a BTreeMap<String, String>,
        labeler: &'a KeywordLabeler,
    },
}

/// Labelled ads plus the number of ads that had no entry in the source.
#[derive(Debug, Clone)]
pub struct Labeled {
    pub ads: Vec<AdInstance>,
    pub warnings: usize,
}

/// Sets every ad's category from `source`; ads the source does not cover
/// become [`AdCategory::Other`] and are counted as warnings.
pub fn apply_labels(ads: &[AdInstance], source: &LabelSource<'_>) -> Labeled {
    let mut warnings = 0;
    let ads = ads
        .iter()
        .map(|ad| {
            let cat = match source {
                LabelSource::Predictions(map) => map.get(&ad.ad_id).copied(),
                LabelSource::Keywords { texts, labeler } => {
                    texts.get(&ad.ad_id).map(|t| labeler.label(t))
                }
            };
            let cat = cat.unwrap_or_else(|| {
                warn!("ad {} has no label source entry; using other", ad.ad_id);
                warnings += 1;
                AdCategory::Other
            });
            AdInstance {
                category: Some(cat),
                ..ad.clone()
            }
        })
        .collect();
    Labeled { ads, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::KeywordLexicon;
    use crate::model::BBox;

    fn ad(id: &str) -> AdInstance {
        AdInstance {
            ad_id: id.into(),
            source_image: "img".into(),
            hull: vec![],
            component_pixels: 1,
            filled_pixels: 1,
            bbox: BBox::from([0, 0, 0, 0]),
            lat: 0.0,
            lon: 0.0,
            category: None,
            crop_ref: None,
        }
    }

    #[test]
    fn copies_predictions() {
        let ads = [ad("a"), ad("b"), ad("c")];
        let preds: BTreeMap<_, _> = [
            ("a".to_string(), AdCategory::Food),
            ("b".to_string(), AdCategory::Gambling),
            ("c".to_string(), AdCategory::Other),
        ]
        .into();
        let out = apply_labels(&ads, &LabelSource::Predictions(&preds));
        assert_eq!(out.warnings, 0);
        let cats: Vec<_> = out.ads.iter().map(|a| a.category.unwrap()).collect();
        assert_eq!(cats, [AdCategory::Food, AdCategory::Gambling, AdCategory::Other]);
    }

    #[test]
    fn missing_prediction_defaults_to_other() {
        let ads = [ad("a"), ad("b"), ad("c")];
        let preds: BTreeMap<_, _> = [
            ("a".to_string(), AdCategory::Food),
            ("b".to_string(), AdCategory::Alcohol),
        ]
        .into();
        let out = apply_labels(&ads, &LabelSource::Predictions(&preds));
        assert_eq!(out.warnings, 1);
        assert_eq!(out.ads[2].category, Some(AdCategory::Other));
    }

    #[test]
    fn empty_input() {
        let preds = BTreeMap::new();
        let out = apply_labels(&[], &LabelSource::Predictions(&preds));
        assert!(out.ads.is_empty());
        assert_eq!(out.warnings, 0);
    }

    #[test]
    fn keywords_source() {
        let lex = vec![
            KeywordLexicon::new(AdCategory::Food, ["pizza"]).unwrap(),
            KeywordLexicon::new(AdCategory::Alcohol, ["gin"]).unwrap(),
            KeywordLexicon::new(AdCategory::Gambling, ["bingo"]).unwrap(),
        ];
        let labeler = KeywordLabeler::new(&lex);
        let texts: BTreeMap<_, _> = [("a".to_string(), "Pizza night".to_string())].into();
        let out = apply_labels(&[ad("a"), ad("b")], &LabelSource::Keywords { texts: &texts, labeler: &labeler });
        assert_eq!(out.ads[0].category, Some(AdCategory::Food));
        assert_eq!(out.ads[1].category, Some(AdCategory::Other));
        assert_eq!(out.warnings, 1);
    }
}
