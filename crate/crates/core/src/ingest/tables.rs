//! Small CSV sidecars (predictions, ground truth, OCR texts) and the ads
//! JSON Lines file shared by every stage after extraction.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{AdCategory, AdInstance};

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: [&str; 2]) -> Result<()> {
    let headers = rdr.headers().map_err(|e| Error::Line {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.len() != 2 || headers.get(0) != Some(expected[0]) || headers.get(1) != Some(expected[1]) {
        return Err(Error::Line {
            line: 1,
            message: format!("expected header \"{},{}\"", expected[0], expected[1]),
        });
    }
    Ok(())
}

/// Parses rows of `(key, value)` under a two-column header, rejecting
/// duplicate keys.
fn parse_pairs(text: &str, header: [&str; 2]) -> Result<Vec<(usize, String, String)>> {
    let mut rdr = reader(text);
    check_header(&mut rdr, header)?;
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Line {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let key = rec.get(0).unwrap_or_default().to_string();
        let value = rec.get(1).unwrap_or_default().to_string();
        if key.is_empty() {
            return Err(Error::Line {
                line,
                message: format!("empty {}", header[0]),
            });
        }
        if !seen.insert(key.clone()) {
            return Err(Error::Line {
                line,
                message: format!("duplicate {} {key}", header[0]),
            });
        }
        out.push((line, key, value));
    }
    Ok(out)
}

/// `ad_id,category` CSV, as emitted by an external classifier or used as
/// hand-labelled ground truth.
pub fn parse_predictions(text: &str) -> Result<BTreeMap<String, AdCategory>> {
    parse_pairs(text, ["ad_id", "category"])?
        .into_iter()
        .map(|(line, id, cat)| match cat.parse::<AdCategory>() {
            Ok(c) => Ok((id, c)),
            Err(e) => Err(Error::Invalid(format!("{e} line {line}"))),
        })
        .collect()
}

pub fn load_predictions(path: &Path) -> Result<BTreeMap<String, AdCategory>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_predictions(&text)
}

pub fn render_predictions(map: &BTreeMap<String, AdCategory>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["ad_id", "category"]).expect("in-memory write");
    for (id, cat) in map {
        w.write_record([id.as_str(), cat.as_str()]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// `ad_id,text` CSV of OCR output.
pub fn parse_texts(text: &str) -> Result<BTreeMap<String, String>> {
    Ok(parse_pairs(text, ["ad_id", "text"])?
        .into_iter()
        .map(|(_, id, t)| (id, t))
        .collect())
}

pub fn load_texts(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_texts(&text)
}

pub fn parse_ads(text: &str) -> Result<Vec<AdInstance>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Line {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn load_ads(path: &Path) -> Result<Vec<AdInstance>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ads(&text)
}

pub fn render_ads(ads: &[AdInstance]) -> String {
    let mut out = String::new();
    for ad in ads {
        out.push_str(&serde_json::to_string(ad).expect("AdInstance serializes"));
        out.push('\n');
    }
    out
}
