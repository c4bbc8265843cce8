//! Report emission (GeoJSON points, SVG bar charts) and the synthetic
//! scene generator used as an end-to-end oracle.

mod geojson;
mod svg;
pub mod synth;

pub use geojson::{ads_geojson, emit_geojson, parse_geojson, AdPoint};
pub use svg::{axis_max, bar_layout, emit_svg_bars, Bar, BarMetric, BASELINE, CANVAS_H, CANVAS_W, PLOT_H, PLOT_W};
pub use synth::{demo_spec, generate_scene, scene_areas, write_scene, SynthAd, SynthScene, SynthSpec, Truth, TruthRegion};
