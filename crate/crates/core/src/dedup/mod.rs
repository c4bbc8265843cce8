//! Duplicate suppression across nearby frames.
//!
//! Ads captured within `distance_m` of each other are compared by local
//! feature matching. Pairs with at least `tau` matches are joined by an
//! edge, every connected sub-graph is taken to be one physical
//! advertisement, and only the member nearest the sub-graph's centroid is
//! kept.

mod descriptor;
mod geo;
mod graph;
mod matching;
pub mod sidecar;

pub use descriptor::{compute_descriptors, Descriptor, DESCRIPTOR_LEN, MAX_KEYPOINTS, MIN_CROP_SIDE};
pub use geo::{haversine, pairs_within, EARTH_RADIUS_M};
pub use graph::{
    build_dedup_graph, representative_map, select_representatives, DedupGraph, Edge,
    TIE_EPSILON_M,
};
pub use matching::match_count;

use std::collections::{BTreeMap, HashMap};

use crate::error::Result;
use crate::model::{AdInstance, DedupConfig};

/// Result of a full dedup pass.
#[derive(Debug, Clone)]
pub struct DedupOutcome {
    pub graph: DedupGraph,
    pub survivors: Vec<AdInstance>,
    /// Discarded ad id to the id of the representative that replaced it.
    pub duplicates: BTreeMap<String, String>,
}

pub fn dedup(
    ads: &[AdInstance],
    descs: &HashMap<String, Vec<Descriptor>>,
    cfg: &DedupConfig,
) -> Result<DedupOutcome> {
    let graph = build_dedup_graph(ads, descs, cfg)?;
    let reps = representative_map(&graph, ads)?;
    let survivors = select_representatives(&graph, ads)?;
    let duplicates = reps.into_iter().filter(|(ad, rep)| ad != rep).collect();
    Ok(DedupOutcome {
        graph,
        survivors,
        duplicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BBox;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Meters per degree of latitude.
    const M_PER_DEG: f64 = std::f64::consts::PI * EARTH_RADIUS_M / 180.0;

    fn ad(id: &str, lat: f64, lon: f64) -> AdInstance {
        AdInstance {
            ad_id: id.into(),
            source_image: id.into(),
            hull: vec![],
            component_pixels: 2500,
            filled_pixels: 2500,
            bbox: BBox::from([0, 0, 49, 49]),
            lat,
            lon,
            category: None,
            crop_ref: None,
        }
    }

    fn random_set(rng: &mut ChaCha8Rng, n: usize) -> Vec<Descriptor> {
        (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..DESCRIPTOR_LEN).map(|_| rng.gen::<f64>() - 0.5).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                Descriptor::new([0.0, 0.0], v.iter().map(|x| (x / norm) as f32).collect()).unwrap()
            })
            .collect()
    }

    /// Descriptor sets where `shared` rows of every pair in `group` coincide.
    fn sharing(rng: &mut ChaCha8Rng, base: &[Descriptor], shared: usize) -> Vec<Descriptor> {
        let mut d = base[..shared].to_vec();
        d.extend(random_set(rng, base.len() - shared));
        d
    }

    #[test]
    fn distance_gate_blocks_far_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = random_set(&mut rng, 100);
        let lat = 53.4;
        let ads = vec![
            ad("A", lat, -2.98),
            ad("B", lat + 8.0 / M_PER_DEG, -2.98),
            ad("C", lat - 15.0 / M_PER_DEG, -2.98),
        ];
        let mut descs = HashMap::new();
        descs.insert("A".to_string(), base.clone());
        descs.insert("B".to_string(), sharing(&mut rng, &base, 75));
        descs.insert("C".to_string(), sharing(&mut rng, &base, 75));
        let g = build_dedup_graph(&ads, &descs, &DedupConfig::default()).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!((g.edges[0].a.as_str(), g.edges[0].b.as_str()), ("A", "B"));
        assert!(g.edges[0].matches >= 75);
        assert_eq!(g.components, vec![vec!["A".to_string(), "B".into()], vec!["C".into()]]);
    }

    #[test]
    fn single_ad_is_its_own_component() {
        let ads = vec![ad("solo", 53.4, -2.98)];
        let descs = HashMap::from([("solo".to_string(), vec![])]);
        let out = dedup(&ads, &descs, &DedupConfig::default()).unwrap();
        assert_eq!(out.graph.components.len(), 1);
        assert_eq!(out.survivors, ads);
        assert!(out.duplicates.is_empty());
    }

    #[test]
    fn chains_are_transitive() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ab = random_set(&mut rng, 70);
        let bc = random_set(&mut rng, 70);
        let a_d = [ab.clone(), random_set(&mut rng, 30)].concat();
        let b_d = [ab, bc.clone()].concat();
        let c_d = [bc, random_set(&mut rng, 30)].concat();
        let ads = vec![
            ad("A", 53.4, -2.98),
            ad("B", 53.4 + 4.0 / M_PER_DEG, -2.98),
            ad("C", 53.4 + 8.0 / M_PER_DEG, -2.98),
        ];
        let descs = HashMap::from([("A".into(), a_d), ("B".into(), b_d), ("C".into(), c_d)]);
        let cfg = DedupConfig::default();
        assert!(match_count(&descs["A"], &descs["C"], cfg.ratio) < 60);
        let out = dedup(&ads, &descs, &cfg).unwrap();
        assert_eq!(out.graph.edges.len(), 2);
        assert_eq!(out.graph.components.len(), 1);
        assert_eq!(out.survivors.len(), 1);
        assert_eq!(out.survivors[0].ad_id, "B");
        assert_eq!(out.duplicates.get("A").map(String::as_str), Some("B"));
    }

    #[test]
    fn missing_descriptor_names_ad() {
        let ads = vec![ad("A", 0.0, 0.0), ad("B", 0.0, 0.0)];
        let descs = HashMap::from([("A".to_string(), vec![])]);
        let err = build_dedup_graph(&ads, &descs, &DedupConfig::default()).unwrap_err();
        assert_eq!(err.to_string(), "missing descriptor entry for ad B");
    }

    #[test]
    fn middle_of_three_is_kept() {
        let ads = vec![ad("x1", 53.4000, -2.98), ad("x2", 53.4001, -2.98), ad("x3", 53.4002, -2.98)];
        let g = DedupGraph {
            nodes: vec!["x1".into(), "x2".into(), "x3".into()],
            edges: vec![],
            components: vec![vec!["x1".into(), "x2".into(), "x3".into()]],
        };
        let kept = select_representatives(&g, &ads).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].ad_id, "x2");
    }

    #[test]
    fn equidistant_pair_keeps_smaller_id() {
        let ads = vec![ad("b", 53.4002, -2.98), ad("a", 53.4000, -2.98)];
        let g = DedupGraph {
            nodes: vec!["a".into(), "b".into()],
            edges: vec![],
            components: vec![vec!["a".into(), "b".into()]],
        };
        assert_eq!(select_representatives(&g, &ads).unwrap()[0].ad_id, "a");
    }

    #[test]
    fn strict_edge_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let shared = random_set(&mut rng, 60);
        let ads = vec![ad("A", 0.0, 0.0), ad("B", 0.0, 0.0)];
        let descs = HashMap::from([("A".to_string(), shared.clone()), ("B".to_string(), shared)]);
        let inclusive = DedupConfig::default();
        assert_eq!(build_dedup_graph(&ads, &descs, &inclusive).unwrap().edges.len(), 1);
        let strict = DedupConfig { strict: true, ..inclusive };
        assert!(build_dedup_graph(&ads, &descs, &strict).unwrap().edges.is_empty());
    }
}
