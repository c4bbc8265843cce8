use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use log::{info, warn};

use adscan::dedup::{self, sidecar, Descriptor};
use adscan::extract::{extract_ads, ExtractConfig};
use adscan::geostat::{self, tables, CountBasis};
use adscan::ingest::{self, pnm};
use adscan::label::{self, KeywordLabeler, LabelSource};
use adscan::model::{AdCategory, AdInstance, DedupConfig, GeoImage};
use adscan::pipeline;
use adscan::rectify::FloatImage;
use adscan::report::{self, BarMetric, SynthSpec};

use crate::cli::*;
use crate::error::CliError;
use crate::runlog::{Ledger, RunManifest};

type Res<T> = Result<T, CliError>;

fn default_path(given: &Option<PathBuf>, out: &Path, name: &str) -> PathBuf {
    given.clone().unwrap_or_else(|| out.join(name))
}

/// Manifest given on the command line, else the one extract recorded.
fn manifest_path(given: &Option<PathBuf>, run: &RunManifest, stage: &str) -> Res<PathBuf> {
    if let Some(p) = given {
        return Ok(p.clone());
    }
    run.ok_stage("extract")
        .and_then(|r| r.input("manifest"))
        .map(|f| PathBuf::from(&f.path))
        .ok_or_else(|| CliError::usage(stage, "no --manifest given and no extract record to take it from"))
}

fn read_manifest(l: &mut Ledger, path: &Path) -> Res<Vec<GeoImage>> {
    let text = l.read_text("manifest", path)?;
    ingest::parse_manifest(&text).map_err(|e| l.err(e))
}

fn read_ads(l: &mut Ledger, path: &Path) -> Res<Vec<AdInstance>> {
    let text = l.read_text("ads", path)?;
    ingest::parse_ads(&text).map_err(|e| l.err(e))
}

/// Photos of the images the ads come from, keyed by image id.
fn load_photos(
    l: &mut Ledger,
    manifest: &Path,
    images: &[GeoImage],
    ads: &[AdInstance],
) -> Res<HashMap<String, FloatImage>> {
    let needed: HashSet<&str> = ads.iter().map(|a| a.source_image.as_str()).collect();
    let mut photos = HashMap::new();
    for img in images.iter().filter(|i| needed.contains(i.id.as_str())) {
        let rel = img.image_ref.as_ref().ok_or_else(|| {
            CliError::usage(l.stage, format!("image {} has no image_path in the manifest", img.id))
        })?;
        let path = ingest::resolve_relative(manifest, rel);
        let bytes = l.read("photo", &path)?;
        let p = pnm::decode(&bytes).map_err(|e| l.err(adscan::Error::Format(format!("{}: {e}", path.display()))))?;
        if p.width != img.width || p.height != img.height {
            return Err(l.err(adscan::Error::DimensionMismatch {
                expected_w: img.width,
                expected_h: img.height,
                actual_w: p.width,
                actual_h: p.height,
            }));
        }
        photos.insert(img.id.clone(), FloatImage::from_pnm(&p));
    }
    Ok(photos)
}

pub fn extract(a: &ExtractArgs, l: &mut Ledger) -> Res<()> {
    let cfg = ExtractConfig::new(a.billboard_class, a.min_pixels).map_err(|e| l.err(e))?;
    let images = read_manifest(l, &a.manifest)?;
    let mut ads = Vec::new();
    for img in &images {
        let path = ingest::resolve_relative(&a.manifest, &img.raster_ref);
        let bytes = l.read("raster", &path)?;
        let raster = pnm::decode_label_raster(&bytes)
            .map_err(|e| l.err(adscan::Error::Format(format!("{}: {e}", path.display()))))?;
        let found = extract_ads(&raster, img, &cfg)
            .map_err(|e| l.err(adscan::Error::Invalid(format!("image {}: {e}", img.id))))?;
        info!("image {}: {} ads", img.id, found.len());
        ads.extend(found);
    }
    l.write("ads", "ads.jsonl", ingest::render_ads(&ads).as_bytes())?;
    l.count("images", images.len());
    l.count("ads", ads.len());
    Ok(())
}

fn safe_name(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

pub fn rectify(a: &RectifyArgs, l: &mut Ledger, run: &RunManifest) -> Res<()> {
    let ads_path = default_path(&a.ads, &l.out, "ads.jsonl");
    let manifest = manifest_path(&a.manifest, run, l.stage)?;
    if a.crop < dedup::MIN_CROP_SIDE {
        return Err(CliError::usage(l.stage, format!("crop must be at least {}", dedup::MIN_CROP_SIDE)));
    }
    let ads = read_ads(l, &ads_path)?;
    let images = read_manifest(l, &manifest)?;
    let photos = load_photos(l, &manifest, &images, &ads)?;
    let crops = pipeline::rectify_and_describe(&ads, &photos, a.crop).map_err(|e| l.err(e))?;
    let mut out = Vec::with_capacity(ads.len());
    let mut names = HashSet::new();
    for (ad, (crop, descs)) in ads.iter().zip(&crops) {
        let name = safe_name(&ad.ad_id);
        if !names.insert(name.clone()) {
            return Err(CliError::usage(l.stage, format!("ad ids collide as file name {name}")));
        }
        let crop_rel = format!("crops/{name}.pgm");
        let bytes = pnm::encode(crop.width, crop.height, crop.channels as u8, &crop.to_bytes());
        l.write("crop", &crop_rel, &bytes)?;
        l.write("descriptors", &format!("crops/{name}.desc"), &sidecar::encode(descs))?;
        out.push(AdInstance {
            crop_ref: Some(PathBuf::from(crop_rel)),
            ..ad.clone()
        });
    }
    l.write("ads", "rectified.jsonl", ingest::render_ads(&out).as_bytes())?;
    l.count("ads", out.len());
    l.count("descriptors", crops.iter().map(|c| c.1.len()).sum());
    Ok(())
}

/// Descriptors for every ad: sidecars next to the crops when present,
/// computed from the photos otherwise.
fn gather_descriptors(
    a: &DedupArgs,
    l: &mut Ledger,
    run: &RunManifest,
    ads_path: &Path,
    ads: &[AdInstance],
) -> Res<HashMap<String, Vec<Descriptor>>> {
    let mut descs = HashMap::new();
    let mut missing = Vec::new();
    for ad in ads {
        let side = match &ad.crop_ref {
            Some(c) => ingest::resolve_relative(ads_path, c).with_extension("desc"),
            None => l.out.join("crops").join(format!("{}.desc", safe_name(&ad.ad_id))),
        };
        if side.is_file() {
            let bytes = l.read("descriptors", &side)?;
            let d = sidecar::decode(&bytes)
                .map_err(|e| l.err(adscan::Error::Format(format!("{}: {e}", side.display()))))?;
            descs.insert(ad.ad_id.clone(), d);
        } else {
            missing.push(ad.clone());
        }
    }
    if !missing.is_empty() {
        info!("computing descriptors for {} ads", missing.len());
        let manifest = manifest_path(&a.manifest, run, l.stage)?;
        let images = read_manifest(l, &manifest)?;
        let photos = load_photos(l, &manifest, &images, &missing)?;
        let computed = pipeline::describe_all(&missing, &photos, a.crop).map_err(|e| l.err(e))?;
        descs.extend(computed);
    }
    Ok(descs)
}

pub fn dedup(a: &DedupArgs, l: &mut Ledger, run: &RunManifest) -> Res<()> {
    let ads_path = match &a.ads {
        Some(p) => p.clone(),
        None if l.out.join("rectified.jsonl").is_file() => l.out.join("rectified.jsonl"),
        None => l.out.join("ads.jsonl"),
    };
    let cfg = DedupConfig {
        strict: a.strict,
        ..DedupConfig::new(a.tau, a.distance, a.ratio).map_err(|e| l.err(e))?
    };
    let ads = read_ads(l, &ads_path)?;
    let descs = gather_descriptors(a, l, run, &ads_path, &ads)?;
    let outcome = dedup::dedup(&ads, &descs, &cfg).map_err(|e| l.err(e))?;
    if outcome.survivors.len() + outcome.duplicates.len() != ads.len() {
        return Err(CliError::internal(
            l.stage,
            format!(
                "{} survivors and {} duplicates do not account for {} ads",
                outcome.survivors.len(),
                outcome.duplicates.len(),
                ads.len()
            ),
        ));
    }
    l.write("survivors", "survivors.jsonl", ingest::render_ads(&outcome.survivors).as_bytes())?;
    let mut dup = String::from("ad_id,representative_id\n");
    for (ad, rep) in &outcome.duplicates {
        dup.push_str(&format!("{ad},{rep}\n"));
    }
    l.write("duplicates", "duplicates.csv", dup.as_bytes())?;
    let mut comps = String::from("component,ad_id\n");
    for (i, c) in outcome.graph.components.iter().enumerate() {
        for id in c {
            comps.push_str(&format!("{i},{id}\n"));
        }
    }
    l.write("components", "components.csv", comps.as_bytes())?;
    let mut edges = String::from("a,b,matches\n");
    for e in &outcome.graph.edges {
        edges.push_str(&format!("{},{},{}\n", e.a, e.b, e.matches));
    }
    l.write("edges", "edges.csv", edges.as_bytes())?;
    l.count("ads", ads.len());
    l.count("survivors", outcome.survivors.len());
    l.count("duplicates", outcome.duplicates.len());
    l.count("edges", outcome.graph.edges.len());
    Ok(())
}

pub fn label(a: &LabelArgs, l: &mut Ledger) -> Res<()> {
    let ads_path = default_path(&a.ads, &l.out, "survivors.jsonl");
    let ads = read_ads(l, &ads_path)?;
    let labeled = match (&a.predictions, &a.texts, &a.lexicon) {
        (Some(p), _, _) => {
            let text = l.read_text("predictions", p)?;
            let preds = ingest::parse_predictions(&text).map_err(|e| l.err(e))?;
            label::apply_labels(&ads, &LabelSource::Predictions(&preds))
        }
        (None, Some(t), Some(dir)) => {
            let text = l.read_text("texts", t)?;
            let texts = ingest::parse_texts(&text).map_err(|e| l.err(e))?;
            let mut lexicons = Vec::new();
            for cat in [AdCategory::Food, AdCategory::Alcohol, AdCategory::Gambling] {
                let path = dir.join(format!("{cat}.txt"));
                let body = l.read_text("lexicon", &path)?;
                lexicons.push(ingest::parse_lexicon(cat, &body).map_err(|e| l.err(e))?);
            }
            let labeler = KeywordLabeler::new(&lexicons);
            label::apply_labels(
                &ads,
                &LabelSource::Keywords {
                    texts: &texts,
                    labeler: &labeler,
                },
            )
        }
        _ => return Err(CliError::usage(l.stage, "either --predictions or --texts with --lexicon is required")),
    };
    if labeled.warnings > 0 {
        warn!("{} ads had no label entry and were set to other", labeled.warnings);
    }
    l.write("ads", "labeled.jsonl", ingest::render_ads(&labeled.ads).as_bytes())?;
    l.count("ads", labeled.ads.len());
    l.count("unlabeled", labeled.warnings);
    for c in AdCategory::ALL {
        l.count(c.as_str(), labeled.ads.iter().filter(|a| a.category == Some(c)).count());
    }
    Ok(())
}

pub fn join(a: &JoinArgs, l: &mut Ledger, run: &RunManifest) -> Res<()> {
    let ads_path = default_path(&a.ads, &l.out, "labeled.jsonl");
    let manifest = manifest_path(&a.manifest, run, l.stage)?;
    let ads = read_ads(l, &ads_path)?;
    let images = read_manifest(l, &manifest)?;
    let text = l.read_text("areas", &a.areas)?;
    let areas = ingest::parse_areas(&text).map_err(|e| l.err(e))?;
    let ad_assign = geostat::join_ads_to_areas(&ads, &areas);
    let img_assign = geostat::join_images_to_areas(&images, &areas);
    l.write("assignments", "assignments.csv", tables::render_assignments_csv(&ad_assign).as_bytes())?;
    l.write(
        "image_assignments",
        "image_assignments.csv",
        tables::render_assignments_csv(&img_assign).as_bytes(),
    )?;
    l.count("ads", ads.len());
    l.count("ads_unassigned", ad_assign.unassigned().count());
    l.count("images", images.len());
    l.count("images_unassigned", img_assign.unassigned().count());
    l.count("overlaps", ad_assign.overlaps.len() + img_assign.overlaps.len());
    Ok(())
}

/// Inputs of a completed join, re-read and checked against its record.
struct Joined {
    images: Vec<GeoImage>,
    ads: Vec<AdInstance>,
    areas: Vec<adscan::model::AreaUnit>,
    ad_assign: geostat::Assignments,
    img_assign: geostat::Assignments,
}

fn load_joined(l: &mut Ledger, run: &RunManifest, force: bool) -> Res<Joined> {
    let rec = run
        .ok_stage("join")
        .ok_or_else(|| CliError::usage(l.stage, format!("join required before {}", l.stage)))?
        .clone();
    let path_of = |role: &str| rec.input(role).map(|f| PathBuf::from(&f.path));
    let (Some(ads_path), Some(manifest), Some(areas_path)) = (path_of("ads"), path_of("manifest"), path_of("areas"))
    else {
        return Err(CliError::usage(l.stage, "join record is incomplete; re-run join"));
    };
    let ads = read_ads(l, &ads_path)?;
    let images = read_manifest(l, &manifest)?;
    let areas_text = l.read_text("areas", &areas_path)?;
    let a_text = l.read_text("assignments", &l.out.join("assignments.csv"))?;
    let i_text = l.read_text("image_assignments", &l.out.join("image_assignments.csv"))?;
    let mut stale = Vec::new();
    for role in ["ads", "manifest", "areas"] {
        let now = l.inputs.iter().find(|f| f.role == role).map(|f| &f.sha256);
        if now != rec.input(role).map(|f| &f.sha256) {
            stale.push(role);
        }
    }
    for role in ["assignments", "image_assignments"] {
        let now = l.inputs.iter().find(|f| f.role == role).map(|f| &f.sha256);
        if now != rec.output(role).map(|f| &f.sha256) {
            stale.push(role);
        }
    }
    if !stale.is_empty() {
        let msg = format!(
            "{} changed since join (config {}); re-run the upstream stages or pass --force",
            stale.join(", "),
            &rec.config_hash[..12]
        );
        if force {
            warn!("{msg}");
        } else {
            return Err(CliError::usage(l.stage, format!("refusing to mix artifacts from different configs: {msg}")));
        }
    }
    Ok(Joined {
        images,
        ads,
        areas: ingest::parse_areas(&areas_text).map_err(|e| l.err(e))?,
        ad_assign: tables::parse_assignments_csv(&a_text).map_err(|e| l.err(e))?,
        img_assign: tables::parse_assignments_csv(&i_text).map_err(|e| l.err(e))?,
    })
}

pub fn analyze(a: &AnalyzeArgs, l: &mut Ledger, run: &RunManifest) -> Res<()> {
    let j = load_joined(l, run, a.force)?;
    let basis = match a.basis {
        Basis::Ads => CountBasis::Ads,
        Basis::Images => CountBasis::Images,
    };
    for g in a.group_by.expand() {
        let table = geostat::exposure_table(&j.images, &j.ads, &j.img_assign, &j.ad_assign, &j.areas, g)
            .map_err(|e| l.err(e))?;
        l.write("exposure", &format!("exposure_{g}.csv"), tables::render_exposure_csv(&table).as_bytes())?;
        let results: Vec<_> = AdCategory::ALL
            .into_iter()
            .map(|c| (c, geostat::chi_squared_for(&table, c, basis)))
            .collect();
        for (c, r) in &results {
            if let Err(e) = r {
                warn!("{g}/{c}: no chi-squared test: {e}");
            }
        }
        l.write("chi2", &format!("chi2_{g}.csv"), tables::render_chi2_csv(g, &results).as_bytes())?;
        l.count(&format!("groups_{g}"), table.rows.len());
    }
    Ok(())
}

pub fn report(a: &ReportArgs, l: &mut Ledger, run: &RunManifest) -> Res<()> {
    let j = load_joined(l, run, false)?;
    l.write("geojson", "ads.geojson", report::ads_geojson(&j.ads, &j.ad_assign).as_bytes())?;
    let metric = match a.metric {
        Metric::ImagePct => BarMetric::ImagePct,
        Metric::AdSharePct => BarMetric::AdSharePct,
    };
    let mut charts = 0;
    for g in [
        adscan::model::GroupBy::Decile,
        adscan::model::GroupBy::Supergroup,
        adscan::model::GroupBy::Group,
    ] {
        let path = l.out.join(format!("exposure_{g}.csv"));
        if !path.is_file() {
            continue;
        }
        let text = l.read_text("exposure", &path)?;
        let table = tables::parse_exposure_csv(&text, g).map_err(|e| l.err(e))?;
        l.write("svg", &format!("exposure_{g}.svg"), report::emit_svg_bars(&table, metric).as_bytes())?;
        charts += 1;
    }
    l.count("ads", j.ads.len());
    l.count("charts", charts);
    Ok(())
}

pub fn synth(a: &SynthArgs, l: &mut Ledger) -> Res<()> {
    let mut spec: SynthSpec = match &a.spec {
        Some(p) => {
            let text = l.read_text("spec", p)?;
            serde_json::from_str(&text)
                .map_err(|e| l.err(adscan::Error::Format(format!("{}: {e}", p.display()))))?
        }
        None => report::demo_spec(0),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let scene = report::generate_scene(&spec).map_err(|e| l.err(e))?;
    std::fs::create_dir_all(&l.out).map_err(|e| l.err(adscan::Error::io(&l.out, e)))?;
    report::write_scene(&spec, &scene, &l.out).map_err(|e| l.err(e))?;
    for rel in ["manifest.jsonl", "truth.json", "truth_labels.csv", "areas.geojson"] {
        let path = l.out.join(rel);
        let bytes = std::fs::read(&path).map_err(|e| l.err(adscan::Error::io(&path, e)))?;
        l.record_output(rel, rel, &bytes);
    }
    l.count("frames", scene.images.len());
    l.count("regions", scene.truth.regions.len());
    l.count("kept_regions", scene.truth.regions.iter().filter(|r| r.kept).count());
    l.count("distinct_ads", scene.truth.distinct_kept());
    Ok(())
}

fn parse_category(stage: &str, s: &str) -> Res<AdCategory> {
    s.parse().map_err(|_| CliError::usage(stage, format!("unknown category '{s}'")))
}

fn read_labels(l: &mut Ledger, role: &str, path: &Path) -> Res<BTreeMap<String, AdCategory>> {
    let text = l.read_text(role, path)?;
    ingest::parse_predictions(&text).map_err(|e| l.err(e))
}

pub fn eval(a: &EvalArgs, l: &mut Ledger) -> Res<()> {
    if a.predictions.is_none() && a.pred_manifest.is_none() {
        return Err(CliError::usage(
            l.stage,
            "nothing to evaluate; give --predictions/--truth or --pred-manifest/--truth-manifest",
        ));
    }
    if let (Some(p), Some(t)) = (&a.predictions, &a.truth) {
        let preds = read_labels(l, "predictions", p)?;
        let truth = read_labels(l, "truth", t)?;
        let ev = label::evaluate(&preds, &truth).map_err(|e| l.err(e))?;
        let report = match (&a.minority, &a.majority) {
            (Some(mi), Some(ma)) => {
                let (mi, ma) = (parse_category(l.stage, mi)?, parse_category(l.stage, ma)?);
                label::evaluate_subsampled(&preds, &truth, mi, ma, a.subsets, a.seed).map_err(|e| l.err(e))?
            }
            _ => ev.report.clone(),
        };
        l.write("eval_report", "eval_report.csv", tables::render_eval_csv(&report).as_bytes())?;
        l.write("confusion", "confusion.csv", tables::render_confusion_csv(&ev.confusion).as_bytes())?;
        l.count("items", truth.len());
    }
    if let (Some(pm), Some(tm)) = (&a.pred_manifest, &a.truth_manifest) {
        let cfg = ExtractConfig::new(a.billboard_class, 1).map_err(|e| l.err(e))?;
        let pred_imgs = read_manifest(l, pm)?;
        let truth_imgs = read_manifest(l, tm)?;
        let truth_by_id: HashMap<&str, &GeoImage> = truth_imgs.iter().map(|i| (i.id.as_str(), i)).collect();
        let mut counts = geostat::DetectionCounts::default();
        let mut iou_sum = 0.0;
        for pi in &pred_imgs {
            let ti = truth_by_id.get(pi.id.as_str()).ok_or_else(|| {
                l.err(adscan::Error::KeyMismatch(format!("image {} has no ground truth", pi.id)))
            })?;
            let load = |l: &mut Ledger, m: &Path, img: &GeoImage| -> Res<_> {
                let path = ingest::resolve_relative(m, &img.raster_ref);
                let bytes = l.read("raster", &path)?;
                pnm::decode_label_raster(&bytes)
                    .map_err(|e| l.err(adscan::Error::Format(format!("{}: {e}", path.display()))))
            };
            let pr = load(l, pm, pi)?;
            let tr = load(l, tm, ti)?;
            iou_sum += geostat::mean_iou(&tr, &pr).map_err(|e| l.err(e))?.mean;
            let pads = extract_ads(&pr, pi, &ExtractConfig { min_pixels: a.min_pixels, ..cfg }).map_err(|e| l.err(e))?;
            let tads = extract_ads(&tr, ti, &cfg).map_err(|e| l.err(e))?;
            let c = geostat::detection_counts(&pads, &tads, pi.width, pi.height, a.min_pixels, a.iou_match)
                .map_err(|e| l.err(e))?;
            counts.matched += c.matched;
            counts.false_positives += c.false_positives;
            counts.missed += c.missed;
        }
        if pred_imgs.len() != truth_imgs.len() {
            return Err(l.err(adscan::Error::KeyMismatch(format!(
                "{} predicted rasters, {} ground-truth rasters",
                pred_imgs.len(),
                truth_imgs.len()
            ))));
        }
        let miou = (!pred_imgs.is_empty()).then(|| iou_sum / pred_imgs.len() as f64);
        l.write("segmentation", "segmentation.csv", tables::render_detection_csv(&counts, miou).as_bytes())?;
        l.count("images", pred_imgs.len());
    }
    Ok(())
}
