//! CSV renderings of exposure tables, chi-squared results and evaluation
//! metrics.

use crate::error::{Error, Result};
use crate::model::{AdCategory, CategoryExposure, ChiSquareResult, ExposureRow, ExposureTable, GroupBy, PRF1Report};
use crate::label::ConfusionMatrix;

use super::join::Assignments;
use super::metrics::DetectionCounts;

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Header of an exposure CSV: group, image total, then four columns per category.
pub fn exposure_header() -> Vec<String> {
    let mut h = vec!["group".to_string(), "image_total".to_string()];
    for c in AdCategory::ALL {
        for col in ["ads", "images_with", "image_pct", "ad_share_pct"] {
            h.push(format!("{c}_{col}"));
        }
    }
    h
}

/// One row per group. Percentages are written with full round-trip precision.
pub fn render_exposure_csv(table: &ExposureTable) -> String {
    let mut w = writer();
    w.write_record(exposure_header()).expect("in-memory write");
    for r in &table.rows {
        let mut rec = vec![r.group.clone(), r.image_total.to_string()];
        for c in &r.categories {
            rec.push(c.ads.to_string());
            rec.push(c.images_with.to_string());
            rec.push(c.image_pct.to_string());
            rec.push(c.ad_share_pct.to_string());
        }
        w.write_record(rec).expect("in-memory write");
    }
    finish(w)
}

pub fn parse_exposure_csv(text: &str, group_by: GroupBy) -> Result<ExposureTable> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != exposure_header() {
        return Err(Error::Line {
            line: 1,
            message: "unexpected exposure header".into(),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let bad = |col: usize| Error::Line {
            line,
            message: format!("bad value in column {}", header[col]),
        };
        let int = |col: usize| rec[col].parse::<u64>().map_err(|_| bad(col));
        let real = |col: usize| rec[col].parse::<f64>().map_err(|_| bad(col));
        let mut categories = [CategoryExposure::default(); 4];
        for (k, c) in categories.iter_mut().enumerate() {
            let base = 2 + 4 * k;
            *c = CategoryExposure {
                ads: int(base)?,
                images_with: int(base + 1)?,
                image_pct: real(base + 2)?,
                ad_share_pct: real(base + 3)?,
            };
        }
        rows.push(ExposureRow {
            group: rec[0].to_string(),
            image_total: int(1)?,
            categories,
        });
    }
    Ok(ExposureTable { group_by, rows })
}

/// `p` to four significant figures.
pub fn format_p(p: f64) -> String {
    if p == 0.0 {
        return "0".into();
    }
    if p >= 1e-4 {
        let digits = (3 - p.log10().floor() as i32).max(0) as usize;
        format!("{p:.digits$}")
    } else {
        format!("{p:.3e}")
    }
}

/// A chi-squared result cell in the `70.99***` style.
pub fn chi2_cell(r: &ChiSquareResult) -> String {
    format!("{:.2}{}", r.statistic, r.stars)
}

/// One row per category with the test for a single grouping.
///
/// Categories whose test could not be computed carry the reason in `note`.
pub fn render_chi2_csv(group_by: GroupBy, results: &[(AdCategory, Result<ChiSquareResult>)]) -> String {
    let mut w = writer();
    w.write_record(["advert", "grouping", "statistic", "dof", "p_value", "stars", "cell", "note"])
        .expect("in-memory write");
    for (cat, r) in results {
        let rec = match r {
            Ok(r) => [
                cat.to_string(),
                group_by.to_string(),
                format!("{:.2}", r.statistic),
                r.dof.to_string(),
                format_p(r.p_value),
                r.stars.clone(),
                chi2_cell(r),
                String::new(),
            ],
            Err(e) => [
                cat.to_string(),
                group_by.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.to_string(),
            ],
        };
        w.write_record(rec).expect("in-memory write");
    }
    finish(w)
}

/// Per-class and weighted precision, recall and F1.
pub fn render_eval_csv(report: &PRF1Report) -> String {
    let mut w = writer();
    w.write_record(["class", "precision", "recall", "f1", "support", "zero_division"])
        .expect("in-memory write");
    for c in &report.per_class {
        w.write_record([
            c.category.to_string(),
            format!("{:.4}", c.precision),
            format!("{:.4}", c.recall),
            format!("{:.4}", c.f1),
            c.support.to_string(),
            c.zero_division.to_string(),
        ])
        .expect("in-memory write");
    }
    let support: u64 = report.per_class.iter().map(|c| c.support).sum();
    w.write_record([
        "weighted".to_string(),
        format!("{:.4}", report.weighted.precision),
        format!("{:.4}", report.weighted.recall),
        format!("{:.4}", report.weighted.f1),
        support.to_string(),
        String::new(),
    ])
    .expect("in-memory write");
    finish(w)
}

/// Rows are truth, columns are predictions.
pub fn render_confusion_csv(cm: &ConfusionMatrix) -> String {
    let mut w = writer();
    let mut header = vec!["truth\\pred".to_string()];
    header.extend(AdCategory::ALL.iter().map(|c| c.to_string()));
    w.write_record(header).expect("in-memory write");
    for t in AdCategory::ALL {
        let mut rec = vec![t.to_string()];
        rec.extend(cm.counts[t.index()].iter().map(u64::to_string));
        w.write_record(rec).expect("in-memory write");
    }
    finish(w)
}

pub fn render_detection_csv(c: &DetectionCounts, mean_iou: Option<f64>) -> String {
    let mut w = writer();
    w.write_record(["metric", "value"]).expect("in-memory write");
    w.write_record(["matched", &c.matched.to_string()]).expect("in-memory write");
    w.write_record(["false_positives", &c.false_positives.to_string()]).expect("in-memory write");
    w.write_record(["missed", &c.missed.to_string()]).expect("in-memory write");
    if let Some(m) = mean_iou {
        w.write_record(["mean_iou", &format!("{m:.4}")]).expect("in-memory write");
    }
    finish(w)
}

/// `id,area_code` rows in id order; unassigned points have an empty code.
pub fn render_assignments_csv(a: &Assignments) -> String {
    let mut w = writer();
    w.write_record(["id", "area_code"]).expect("in-memory write");
    for (id, code) in &a.codes {
        w.write_record([id.as_str(), code.as_deref().unwrap_or("")]).expect("in-memory write");
    }
    finish(w)
}

/// Reads a file written by [`render_assignments_csv`]. Overlap details are
/// not stored, so the result has none.
pub fn parse_assignments_csv(text: &str) -> Result<Assignments> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(csv_err)?;
    if header.iter().collect::<Vec<_>>() != ["id", "area_code"] {
        return Err(Error::Line {
            line: 1,
            message: "expected header \"id,area_code\"".into(),
        });
    }
    let mut out = Assignments::default();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 2 {
            return Err(Error::Line {
                line,
                message: format!("expected 2 fields, got {}", rec.len()),
            });
        }
        let code = (!rec[1].is_empty()).then(|| rec[1].to_string());
        if out.codes.insert(rec[0].to_string(), code).is_some() {
            return Err(Error::Line {
                line,
                message: format!("duplicate id {}", &rec[0]),
            });
        }
    }
    Ok(out)
}
