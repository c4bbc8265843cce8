use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Street-level advertisement census: extract, rectify, deduplicate, label
/// and map billboard ads, then test exposure against area deprivation.
#[derive(Debug, Parser)]
#[command(name = "adscan", version)]
pub struct Cli {
    /// Run directory holding every stage's outputs.
    #[arg(long, global = true, env = "ADSCAN_OUT", default_value = "adscan-run")]
    pub out: PathBuf,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Billboard components to ads (ads.jsonl).
    Extract(ExtractArgs),
    /// Frontal crops and descriptor sidecars (rectified.jsonl, crops/).
    Rectify(RectifyArgs),
    /// Drop repeat sightings of the same ad (survivors.jsonl, duplicates.csv).
    Dedup(DedupArgs),
    /// Set categories from predictions or OCR text (labeled.jsonl).
    Label(LabelArgs),
    /// Assign ads and images to areas (assignments.csv, image_assignments.csv).
    Join(JoinArgs),
    /// Exposure tables and chi-squared tests per grouping.
    Analyze(AnalyzeArgs),
    /// GeoJSON of ad points and SVG bar charts of exposure tables.
    Report(ReportArgs),
    /// Generate a synthetic scene with ground truth.
    Synth(SynthArgs),
    /// Score predictions against ground truth.
    Eval(EvalArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Extract(_) => "extract",
            Command::Rectify(_) => "rectify",
            Command::Dedup(_) => "dedup",
            Command::Label(_) => "label",
            Command::Join(_) => "join",
            Command::Analyze(_) => "analyze",
            Command::Report(_) => "report",
            Command::Synth(_) => "synth",
            Command::Eval(_) => "eval",
        }
    }

    /// Flags as JSON, recorded in the run manifest.
    pub fn config(&self) -> serde_json::Value {
        let v = match self {
            Command::Extract(a) => serde_json::to_value(a),
            Command::Rectify(a) => serde_json::to_value(a),
            Command::Dedup(a) => serde_json::to_value(a),
            Command::Label(a) => serde_json::to_value(a),
            Command::Join(a) => serde_json::to_value(a),
            Command::Analyze(a) => serde_json::to_value(a),
            Command::Report(a) => serde_json::to_value(a),
            Command::Synth(a) => serde_json::to_value(a),
            Command::Eval(a) => serde_json::to_value(a),
        };
        v.expect("arguments serialize")
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ExtractArgs {
    /// JSON Lines image manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Class id of billboard pixels in the label rasters.
    #[arg(long, default_value_t = 1)]
    pub billboard_class: u8,
    /// Smallest filled hull kept, in pixels.
    #[arg(long, default_value_t = adscan::extract::DEFAULT_MIN_PIXELS)]
    pub min_pixels: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct RectifyArgs {
    /// Ads to rectify [default: <out>/ads.jsonl].
    #[arg(long)]
    pub ads: Option<PathBuf>,
    /// Image manifest with image_path entries [default: the one extract used].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Side of the square crops.
    #[arg(long, default_value_t = adscan::rectify::CROP_SIZE)]
    pub crop: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct DedupArgs {
    /// Ads to deduplicate [default: <out>/rectified.jsonl, else <out>/ads.jsonl].
    #[arg(long)]
    pub ads: Option<PathBuf>,
    /// Minimum matched features for two ads to count as the same.
    #[arg(long, default_value_t = 60)]
    pub tau: u32,
    /// Distance gate in meters.
    #[arg(long, default_value_t = 10.0)]
    pub distance: f64,
    /// Nearest to second-nearest distance ratio for a match.
    #[arg(long, default_value_t = 0.75)]
    pub ratio: f64,
    /// Require more than tau matches instead of at least tau.
    #[arg(long)]
    pub strict: bool,
    /// Manifest used to compute descriptors missing from the run directory.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Crop side used when descriptors have to be computed.
    #[arg(long, default_value_t = adscan::rectify::CROP_SIZE)]
    pub crop: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct LabelArgs {
    /// Ads to label [default: <out>/survivors.jsonl].
    #[arg(long)]
    pub ads: Option<PathBuf>,
    /// Classifier output, ad_id,category CSV.
    #[arg(long, conflicts_with_all = ["texts", "lexicon"])]
    pub predictions: Option<PathBuf>,
    /// OCR text per ad, ad_id,text CSV.
    #[arg(long, requires = "lexicon")]
    pub texts: Option<PathBuf>,
    /// Directory with food.txt, alcohol.txt and gambling.txt.
    #[arg(long, requires = "texts")]
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct JoinArgs {
    /// Ads to place [default: <out>/labeled.jsonl].
    #[arg(long)]
    pub ads: Option<PathBuf>,
    /// Area polygons as a GeoJSON FeatureCollection.
    #[arg(long)]
    pub areas: PathBuf,
    /// Image manifest [default: the one extract used].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    Decile,
    Supergroup,
    Group,
    All,
}

impl Grouping {
    pub fn expand(self) -> Vec<adscan::model::GroupBy> {
        use adscan::model::GroupBy;
        match self {
            Grouping::Decile => vec![GroupBy::Decile],
            Grouping::Supergroup => vec![GroupBy::Supergroup],
            Grouping::Group => vec![GroupBy::Group],
            Grouping::All => vec![GroupBy::Decile, GroupBy::Supergroup, GroupBy::Group],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Ads,
    Images,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Area attribute the tables group by.
    #[arg(long, value_enum, default_value_t = Grouping::Decile)]
    pub group_by: Grouping,
    /// Counts tested by chi-squared: ads per group or images containing the category.
    #[arg(long, value_enum, default_value_t = Basis::Ads)]
    pub basis: Basis,
    /// Accept artifacts that no longer match the join record.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    ImagePct,
    AdSharePct,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Value plotted in the bar charts.
    #[arg(long, value_enum, default_value_t = Metric::ImagePct)]
    pub metric: Metric,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Scene spec as JSON [default: the built-in demo scene].
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Predicted categories, ad_id,category CSV.
    #[arg(long, requires = "truth")]
    pub predictions: Option<PathBuf>,
    /// True categories, ad_id,category CSV.
    #[arg(long, requires = "predictions")]
    pub truth: Option<PathBuf>,
    /// Balance by drawing majority-class subsets the size of this class.
    #[arg(long, requires = "majority")]
    pub minority: Option<String>,
    /// Class the subsets are drawn from.
    #[arg(long, requires = "minority")]
    pub majority: Option<String>,
    /// Number of balanced subsets averaged.
    #[arg(long, default_value_t = 10)]
    pub subsets: usize,
    /// Seed for drawing the subsets.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Manifest of predicted label rasters.
    #[arg(long, requires = "truth_manifest")]
    pub pred_manifest: Option<PathBuf>,
    /// Manifest of ground-truth label rasters with the same image ids.
    #[arg(long, requires = "pred_manifest")]
    pub truth_manifest: Option<PathBuf>,
    /// Class id of billboard pixels in both rasters.
    #[arg(long, default_value_t = 1)]
    pub billboard_class: u8,
    /// Smallest filled hull counted as an ad, in pixels.
    #[arg(long, default_value_t = adscan::extract::DEFAULT_MIN_PIXELS)]
    pub min_pixels: u64,
    /// Mask IoU needed for a predicted ad to match a true one.
    #[arg(long, default_value_t = 0.5)]
    pub iou_match: f64,
}
