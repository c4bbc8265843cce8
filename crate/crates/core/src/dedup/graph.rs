use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use super::descriptor::Descriptor;
use super::geo::{haversine, pairs_within};
use super::matching::match_count;
use crate::error::{Error, Result};
use crate::model::{AdInstance, DedupConfig};

/// Distances closer than this count as ties when picking representatives.
pub const TIE_EPSILON_M: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub a: String,
    pub b: String,
    pub matches: usize,
}

/// Ads as nodes, feature-match edges, and the resulting connected
/// sub-graphs. Nodes, edges and components are all sorted by ad id so the
/// graph does not depend on input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DedupGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub components: Vec<Vec<String>>,
}

impl DedupGraph {
    /// Number of components of each size.
    pub fn size_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for c in &self.components {
            *h.entry(c.len()).or_default() += 1;
        }
        h
    }
}

fn components_of(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    // Roots are the smallest member, so BTreeMap order is first-member order.
    groups.into_values().collect()
}

/// Builds the duplicate graph.
///
/// Every pair of ads within `cfg.distance_m` of each other is matched; an
/// edge is added when the match count passes `cfg.tau`.
pub fn build_dedup_graph(
    ads: &[AdInstance],
    descs: &HashMap<String, Vec<Descriptor>>,
    cfg: &DedupConfig,
) -> Result<DedupGraph> {
    cfg.validate()?;
    let mut order: Vec<&AdInstance> = ads.iter().collect();
    order.sort_by(|a, b| a.ad_id.cmp(&b.ad_id));
    if let Some(w) = order.windows(2).find(|w| w[0].ad_id == w[1].ad_id) {
        return Err(Error::Invalid(format!("duplicate ad_id {}", w[0].ad_id)));
    }
    let node_descs: Vec<&[Descriptor]> = order
        .iter()
        .map(|a| {
            descs
                .get(&a.ad_id)
                .map(Vec::as_slice)
                .ok_or_else(|| Error::MissingDescriptor(a.ad_id.clone()))
        })
        .collect::<Result<_>>()?;

    let points: Vec<(f64, f64)> = order.iter().map(|a| (a.lat, a.lon)).collect();
    let candidates = pairs_within(&points, cfg.distance_m);
    let scored: Vec<(usize, usize, usize)> = candidates
        .par_iter()
        .map(|&(i, j)| (i, j, match_count(node_descs[i], node_descs[j], cfg.ratio)))
        .collect();
    let kept: Vec<(usize, usize, usize)> = scored
        .into_iter()
        .filter(|&(_, _, m)| cfg.admits(m))
        .collect();

    let pairs: Vec<(usize, usize)> = kept.iter().map(|&(i, j, _)| (i, j)).collect();
    let components = components_of(order.len(), &pairs)
        .into_iter()
        .map(|c| c.into_iter().map(|i| order[i].ad_id.clone()).collect())
        .collect();
    Ok(DedupGraph {
        nodes: order.iter().map(|a| a.ad_id.clone()).collect(),
        edges: kept
            .into_iter()
            .map(|(i, j, matches)| Edge {
                a: order[i].ad_id.clone(),
                b: order[j].ad_id.clone(),
                matches,
            })
            .collect(),
        components,
    })
}

/// Maps every ad id to the id of its component's representative: the
/// member nearest (haversine) to the component's mean lat/lon, ties to the
/// smallest id.
pub fn representative_map(graph: &DedupGraph, ads: &[AdInstance]) -> Result<BTreeMap<String, String>> {
    let by_id: HashMap<&str, &AdInstance> = ads.iter().map(|a| (a.ad_id.as_str(), a)).collect();
    let mut out = BTreeMap::new();
    for comp in &graph.components {
        let members: Vec<&AdInstance> = comp
            .iter()
            .map(|id| {
                by_id
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::Invalid(format!("graph node {id} has no ad")))
            })
            .collect::<Result<_>>()?;
        let n = members.len() as f64;
        let centroid = (
            members.iter().map(|a| a.lat).sum::<f64>() / n,
            members.iter().map(|a| a.lon).sum::<f64>() / n,
        );
        let mut best: Option<(f64, &str)> = None;
        for a in &members {
            let d = haversine((a.lat, a.lon), centroid);
            best = match best {
                None => Some((d, &a.ad_id)),
                Some((bd, bid)) => {
                    if d < bd - TIE_EPSILON_M || ((d - bd).abs() <= TIE_EPSILON_M && a.ad_id.as_str() < bid) {
                        Some((d, &a.ad_id))
                    } else {
                        Some((bd, bid))
                    }
                }
            };
        }
        let rep = best.expect("components are non-empty").1.to_string();
        for a in members {
            out.insert(a.ad_id.clone(), rep.clone());
        }
    }
    Ok(out)
}

/// One ad per component, sorted by ad id.
pub fn select_representatives(graph: &DedupGraph, ads: &[AdInstance]) -> Result<Vec<AdInstance>> {
    let reps = representative_map(graph, ads)?;
    let mut out: Vec<AdInstance> = ads
        .iter()
        .filter(|a| reps.get(&a.ad_id) == Some(&a.ad_id))
        .cloned()
        .collect();
    out.sort_by(|a, b| a.ad_id.cmp(&b.ad_id));
    Ok(out)
}
