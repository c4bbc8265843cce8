use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::AdCategory;

/// Lowercased, trimmed keyword phrases for one category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordLexicon {
    pub category: AdCategory,
    phrases: BTreeSet<String>,
}

impl KeywordLexicon {
    pub fn new<I, S>(category: AdCategory, phrases: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let phrases: BTreeSet<String> = phrases
            .into_iter()
            .map(|p| normalize_phrase(p.as_ref()))
            .filter(|p| !p.is_empty())
            .collect();
        if phrases.is_empty() {
            return Err(Error::Invalid(format!("empty lexicon: {category}")));
        }
        Ok(Self { category, phrases })
    }

    pub fn phrases(&self) -> impl Iterator<Item = &str> {
        self.phrases.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }
}

fn normalize_phrase(p: &str) -> String {
    p.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses one lexicon file body; `#` lines are comments.
pub fn parse_lexicon(category: AdCategory, text: &str) -> Result<KeywordLexicon> {
    let phrases = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    KeywordLexicon::new(category, phrases)
}

/// Loads `food.txt`, `alcohol.txt` and `gambling.txt` from `dir`.
pub fn load_lexicon(dir: &Path) -> Result<Vec<KeywordLexicon>> {
    [AdCategory::Food, AdCategory::Alcohol, AdCategory::Gambling]
        .into_iter()
        .map(|cat| {
            let path = dir.join(format!("{cat}.txt"));
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            parse_lexicon(cat, &text)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowercases_and_trims() {
        let lex = parse_lexicon(AdCategory::Alcohol, "Carlsberg\n  Guinness  \n").unwrap();
        assert_eq!(lex.phrases().collect::<Vec<_>>(), ["carlsberg", "guinness"]);
    }

    #[test]
    fn comments_only_is_empty() {
        let err = parse_lexicon(AdCategory::Gambling, "# nothing\n#here\n\n").unwrap_err();
        assert_eq!(err.to_string(), "empty lexicon: gambling");
    }

    #[test]
    fn duplicates_collapse() {
        let lex = parse_lexicon(AdCategory::Food, "pizza\npizza\nPIZZA\n").unwrap();
        assert_eq!(lex.phrases().collect::<Vec<_>>(), ["pizza"]);
    }

    #[test]
    fn case_insensitive_and_idempotent() {
        let text = "# brands\nRed  Bull\nJack Daniel's\nstella\n";
        let a = parse_lexicon(AdCategory::Alcohol, text).unwrap();
        let b = parse_lexicon(AdCategory::Alcohol, &text.to_uppercase()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.phrases().next(), Some("jack daniel's"));
        let rendered: String = a.phrases().map(|p| format!("{p}\n")).collect();
        assert_eq!(parse_lexicon(AdCategory::Alcohol, &rendered).unwrap(), a);
    }

    #[test]
    fn missing_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("food.txt"), "pizza\n").unwrap();
        std::fs::write(dir.path().join("alcohol.txt"), "gin\n").unwrap();
        let err = load_lexicon(dir.path()).unwrap_err();
        assert!(err.to_string().contains("gambling.txt"));
        std::fs::write(dir.path().join("gambling.txt"), "bet365\n").unwrap();
        let lex = load_lexicon(dir.path()).unwrap();
        assert_eq!(lex.len(), 3);
        assert_eq!(lex[2].category, AdCategory::Gambling);
    }
}
