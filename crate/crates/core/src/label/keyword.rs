use crate::ingest::KeywordLexicon;
use crate::model::AdCategory;

/// Tie-break order used when two categories have the same number of hits.
pub const DEFAULT_PRIORITY: [AdCategory; 3] =
    [AdCategory::Alcohol, AdCategory::Gambling, AdCategory::Food];

/// Lowercases, turns every non-alphanumeric character into a separator and
/// splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    text.chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .to_lowercase()
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

/// Whole-token phrase matcher over a fixed set of lexicons.
#[derive(Debug, Clone)]
pub struct KeywordLabeler {
    phrases: Vec<(AdCategory, Vec<String>)>,
    priority: Vec<AdCategory>,
}

impl KeywordLabeler {
    pub fn new(lexicons: &[KeywordLexicon]) -> Self {
        Self::with_priority(lexicons, &DEFAULT_PRIORITY)
    }

    /// Categories missing from `priority` rank after the listed ones, in
    /// declaration order.
    pub fn with_priority(lexicons: &[KeywordLexicon], priority: &[AdCategory]) -> Self {
        let phrases = lexicons
            .iter()
            .flat_map(|lex| {
                lex.phrases()
                    .map(tokenize)
                    .filter(|t| !t.is_empty())
                    .map(move |t| (lex.category, t))
            })
            .collect();
        let mut priority = priority.to_vec();
        for c in AdCategory::ALL {
            if !priority.contains(&c) {
                priority.push(c);
            }
        }
        Self { phrases, priority }
    }

    /// Hits per category, indexed by [`AdCategory::index`].
    pub fn hits(&self, text: &str) -> [usize; 4] {
        let tokens = tokenize(text);
        let mut hits = [0usize; 4];
        for (cat, phrase) in &self.phrases {
            if phrase.len() > tokens.len() {
                continue;
            }
            hits[cat.index()] += tokens
                .windows(phrase.len())
                .filter(|w| w == &phrase.as_slice())
                .count();
        }
        hits
    }

    pub fn label(&self, text: &str) -> AdCategory {
        let hits = self.hits(text);
        let best = hits.iter().copied().max().unwrap_or(0);
        if best == 0 {
            return AdCategory::Other;
        }
        self.priority
            .iter()
            .copied()
            .find(|c| hits[c.index()] == best)
            .unwrap_or(AdCategory::Other)
    }
}

/// Labels `text` with the default tie priority.
pub fn keyword_label(text: &str, lexicons: &[KeywordLexicon]) -> AdCategory {
    KeywordLabeler::new(lexicons).label(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lexicons() -> Vec<KeywordLexicon> {
        vec![
            KeywordLexicon::new(AdCategory::Food, ["pizza", "fried chicken", "burger"]).unwrap(),
            KeywordLexicon::new(AdCategory::Alcohol, ["carlsberg", "ale", "jack daniel's"]).unwrap(),
            KeywordLexicon::new(AdCategory::Gambling, ["bet365", "casino"]).unwrap(),
        ]
    }

    #[test]
    fn brand_hit() {
        assert_eq!(keyword_label("CARLSBERG on draft", &lexicons()), AdCategory::Alcohol);
    }

    #[test]
    fn no_hit_is_other() {
        assert_eq!(keyword_label("opening hours 9-5", &lexicons()), AdCategory::Other);
    }

    #[test]
    fn tie_prefers_alcohol() {
        assert_eq!(keyword_label("pizza and carlsberg", &lexicons()), AdCategory::Alcohol);
        assert_eq!(keyword_label("casino burger", &lexicons()), AdCategory::Gambling);
    }

    #[test]
    fn majority_wins_over_priority() {
        assert_eq!(
            keyword_label("pizza pizza burger carlsberg", &lexicons()),
            AdCategory::Food
        );
    }

    #[test]
    fn whole_tokens_only() {
        assert_eq!(keyword_label("summer sale", &lexicons()), AdCategory::Other);
        assert_eq!(keyword_label("real ale!", &lexicons()), AdCategory::Alcohol);
    }

    #[test]
    fn multi_word_phrases_are_contiguous() {
        let lex = lexicons();
        assert_eq!(keyword_label("Fried   Chicken.", &lex), AdCategory::Food);
        assert_eq!(keyword_label("fried rice, chicken", &lex), AdCategory::Other);
        assert_eq!(keyword_label("JACK DANIEL'S", &lex), AdCategory::Alcohol);
        assert_eq!(keyword_label("jack daniel s", &lex), AdCategory::Alcohol);
    }

    #[test]
    fn custom_priority() {
        let l = KeywordLabeler::with_priority(&lexicons(), &[AdCategory::Food]);
        assert_eq!(l.label("pizza carlsberg"), AdCategory::Food);
    }

    proptest! {
        #[test]
        fn case_and_punctuation_invariant(
            words in prop::collection::vec(
                prop::sample::select(vec!["pizza", "Carlsberg", "casino", "sale", "ale", "fried", "chicken", "the", "best"]),
                0..8),
            seps in prop::collection::vec(prop::sample::select(vec![" ", ", ", "! ", " - ", ".", "/"]), 8),
        ) {
            let lex = lexicons();
            let plain = words.join(" ");
            let punct: String = words
                .iter()
                .zip(seps.iter().cycle())
                .map(|(w, s)| format!("{w}{s}"))
                .collect();
            let expected = keyword_label(&plain, &lex);
            prop_assert_eq!(keyword_label(&plain.to_uppercase(), &lex), expected);
            prop_assert_eq!(keyword_label(&punct, &lex), expected);
        }
    }
}
