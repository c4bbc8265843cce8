use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{f1_score, AdCategory, ClassScores, PRF1Report, WeightedScores};

/// Counts indexed `(truth, prediction)` by [`AdCategory::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 4]; 4],
}

impl ConfusionMatrix {
    pub fn add(&mut self, truth: AdCategory, pred: AdCategory) {
        self.counts[truth.index()][pred.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn support(&self, c: AdCategory) -> u64 {
        self.counts[c.index()].iter().sum()
    }

    pub fn predicted(&self, c: AdCategory) -> u64 {
        self.counts.iter().map(|row| row[c.index()]).sum()
    }

    pub fn true_positives(&self, c: AdCategory) -> u64 {
        self.counts[c.index()][c.index()]
    }

    pub fn accuracy(&self) -> f64 {
        let t = self.total();
        if t == 0 {
            return 0.0;
        }
        AdCategory::ALL.iter().map(|&c| self.true_positives(c)).sum::<u64>() as f64 / t as f64
    }

    /// Per-class and weighted scores.
    ///
    /// Classes appear when they occur in the truth or the predictions.
    /// Weighted means use support as weight, so classes absent from the
    /// truth contribute nothing.
    pub fn report(&self) -> PRF1Report {
        let mut per_class = Vec::new();
        for c in AdCategory::ALL {
            let (support, predicted) = (self.support(c), self.predicted(c));
            if support == 0 && predicted == 0 {
                continue;
            }
            let tp = self.true_positives(c) as f64;
            let mut zero_division = false;
            let mut ratio = |num: f64, den: u64| {
                if den == 0 {
                    zero_division = true;
                    0.0
                } else {
                    num / den as f64
                }
            };
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            per_class.push(ClassScores {
                category: c,
                precision,
                recall,
                f1: f1_score(precision, recall),
                support,
                zero_division,
            });
        }
        let total: u64 = per_class.iter().map(|c| c.support).sum();
        let weighted = |f: fn(&ClassScores) -> f64| {
            if total == 0 {
                0.0
            } else {
                per_class.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / total as f64
            }
        };
        let weighted = WeightedScores {
            precision: weighted(|c| c.precision),
            recall: weighted(|c| c.recall),
            f1: weighted(|c| c.f1),
        };
        PRF1Report {
            per_class,
            weighted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub report: PRF1Report,
    pub confusion: ConfusionMatrix,
}

fn check_keys(
    preds: &BTreeMap<String, AdCategory>,
    truth: &BTreeMap<String, AdCategory>,
) -> Result<()> {
    if preds.len() == truth.len() && preds.keys().eq(truth.keys()) {
        return Ok(());
    }
    let only_pred: Vec<_> = preds.keys().filter(|k| !truth.contains_key(*k)).take(5).collect();
    let only_truth: Vec<_> = truth.keys().filter(|k| !preds.contains_key(*k)).take(5).collect();
    Err(Error::KeyMismatch(format!(
        "only in predictions {only_pred:?}, only in truth {only_truth:?}"
    )))
}

/// Scores predictions against ground truth over identical key sets.
pub fn evaluate(
    preds: &BTreeMap<String, AdCategory>,
    truth: &BTreeMap<String, AdCategory>,
) -> Result<Evaluation> {
    check_keys(preds, truth)?;
    let mut confusion = ConfusionMatrix::default();
    for (id, &t) in truth {
        confusion.add(t, preds[id]);
    }
    Ok(Evaluation {
        report: confusion.report(),
        confusion,
    })
}

/// Balanced evaluation: `subsets` random draws of `majority` items, each the
/// size of the `minority` class, evaluated together with every
/// non-majority item; scores are averaged over draws.
pub fn evaluate_subsampled(
    preds: &BTreeMap<String, AdCategory>,
    truth: &BTreeMap<String, AdCategory>,
    minority: AdCategory,
    majority: AdCategory,
    subsets: usize,
    seed: u64,
) -> Result<PRF1Report> {
    check_keys(preds, truth)?;
    if subsets == 0 {
        return Err(Error::Invalid("at least one subset required".into()));
    }
    let minority_n = truth.values().filter(|&&c| c == minority).count();
    let majority_ids: Vec<&String> = truth
        .iter()
        .filter(|(_, &c)| c == majority)
        .map(|(k, _)| k)
        .collect();
    if minority_n == 0 || majority_ids.len() < minority_n {
        return Err(Error::Invalid(format!(
            "cannot draw {minority_n} {majority} items from {}",
            majority_ids.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sums: BTreeMap<AdCategory, (f64, f64, f64, u64)> = BTreeMap::new();
    let mut wsum = (0.0, 0.0, 0.0);
    for _ in 0..subsets {
        let drawn: Vec<&String> = majority_ids
            .choose_multiple(&mut rng, minority_n)
            .copied()
            .collect();
        let mut cm = ConfusionMatrix::default();
        for (id, &t) in truth.iter().filter(|(_, &c)| c != majority) {
            cm.add(t, preds[id]);
        }
        for id in drawn {
            cm.add(majority, preds[id]);
        }
        let r = cm.report();
        for c in &r.per_class {
            let e = sums.entry(c.category).or_default();
            e.0 += c.precision;
            e.1 += c.recall;
            e.2 += c.f1;
            e.3 = c.support;
        }
        wsum.0 += r.weighted.precision;
        wsum.1 += r.weighted.recall;
        wsum.2 += r.weighted.f1;
    }
    let k = subsets as f64;
    Ok(PRF1Report {
        per_class: sums
            .into_iter()
            .map(|(category, (p, r, f, support))| ClassScores {
                category,
                precision: p / k,
                recall: r / k,
                f1: f / k,
                support,
                zero_division: false,
            })
            .collect(),
        weighted: WeightedScores {
            precision: wsum.0 / k,
            recall: wsum.1 / k,
            f1: wsum.2 / k,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use AdCategory::*;

    fn map(pairs: &[(&str, AdCategory)]) -> BTreeMap<String, AdCategory> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn perfect_predictions() {
        let t = map(&[("a", Food), ("b", Other), ("c", Alcohol)]);
        let e = evaluate(&t, &t).unwrap();
        assert!(e.report.per_class.iter().all(|c| c.precision == 1.0 && c.recall == 1.0 && c.f1 == 1.0));
        assert_eq!(e.report.weighted, WeightedScores { precision: 1.0, recall: 1.0, f1: 1.0 });
    }

    #[test]
    fn hand_counted_two_class() {
        let truth = map(&[("1", Food), ("2", Food), ("3", Other), ("4", Other)]);
        let preds = map(&[("1", Food), ("2", Other), ("3", Other), ("4", Other)]);
        let e = evaluate(&preds, &truth).unwrap();
        let food = e.report.class(Food).unwrap();
        assert_eq!((food.precision, food.recall), (1.0, 0.5));
        assert!((food.f1 - 2.0 / 3.0).abs() < 1e-15);
        let other = e.report.class(Other).unwrap();
        assert!((other.precision - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(other.recall, 1.0);
        assert_eq!(e.confusion.counts[Food.index()][Other.index()], 1);
        assert_eq!(e.confusion.total(), 4);
    }

    #[test]
    fn table_f1_from_precision_recall() {
        assert!((f1_score(0.76, 0.619) - 0.68).abs() < 0.005);
        assert!((f1_score(0.662, 0.787) - 0.718).abs() < 0.005);
    }

    #[test]
    fn zero_division_is_flagged() {
        let truth = map(&[("1", Food), ("2", Food)]);
        let preds = map(&[("1", Other), ("2", Other)]);
        let r = evaluate(&preds, &truth).unwrap().report;
        let other = r.class(Other).unwrap();
        assert_eq!(other.support, 0);
        assert!(other.zero_division);
        assert_eq!(other.recall, 0.0);
        assert_eq!(r.weighted.recall, 0.0);
    }

    #[test]
    fn key_mismatch() {
        let a = map(&[("1", Food)]);
        let b = map(&[("2", Food)]);
        assert!(matches!(evaluate(&a, &b), Err(Error::KeyMismatch(_))));
    }

    #[test]
    fn subsampling_balances_classes() {
        let mut truth = BTreeMap::new();
        let mut preds = BTreeMap::new();
        for i in 0..10 {
            truth.insert(format!("f{i}"), Food);
            preds.insert(format!("f{i}"), if i < 6 { Food } else { Other });
        }
        for i in 0..100 {
            truth.insert(format!("o{i:03}"), Other);
            preds.insert(format!("o{i:03}"), if i < 10 { Food } else { Other });
        }
        let r = evaluate_subsampled(&preds, &truth, Food, Other, 5, 42).unwrap();
        let food = r.class(Food).unwrap();
        assert_eq!(food.support, 10);
        assert!((food.recall - 0.6).abs() < 1e-12);
        assert_eq!(r.class(Other).unwrap().support, 10);
        let again = evaluate_subsampled(&preds, &truth, Food, Other, 5, 42).unwrap();
        assert_eq!(r, again);
    }

    fn arb_pairs() -> impl Strategy<Value = Vec<(usize, usize)>> {
        prop::collection::vec((0usize..4, 0usize..4), 1..200)
    }

    proptest! {
        #[test]
        fn self_agreement_is_perfect(cats in prop::collection::vec(0usize..4, 1..50)) {
            let m: BTreeMap<String, AdCategory> =
                cats.iter().enumerate().map(|(i, &c)| (i.to_string(), AdCategory::ALL[c])).collect();
            let r = evaluate(&m, &m).unwrap().report;
            prop_assert!(r.per_class.iter().all(|c| c.f1 == 1.0));
            prop_assert_eq!(r.weighted.f1, 1.0);
        }

        #[test]
        fn weighted_recall_is_accuracy(pairs in arb_pairs()) {
            let mut truth = BTreeMap::new();
            let mut preds = BTreeMap::new();
            for (i, &(t, p)) in pairs.iter().enumerate() {
                truth.insert(i.to_string(), AdCategory::ALL[t]);
                preds.insert(i.to_string(), AdCategory::ALL[p]);
            }
            let e = evaluate(&preds, &truth).unwrap();
            let direct = pairs.iter().filter(|(t, p)| t == p).count() as f64 / pairs.len() as f64;
            prop_assert!((e.report.weighted.recall - direct).abs() < 1e-12);
            prop_assert!((e.confusion.accuracy() - direct).abs() < 1e-12);
            for c in &e.report.per_class {
                prop_assert!((0.0..=1.0).contains(&c.precision));
                prop_assert!((0.0..=1.0).contains(&c.recall));
                prop_assert!((0.0..=1.0).contains(&c.f1));
            }
        }
    }
}
