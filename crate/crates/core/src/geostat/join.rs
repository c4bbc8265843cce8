use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pip::{point_in_polygon, polygon_bounds};
use crate::model::{AdInstance, AreaUnit, GeoImage};

/// Uniform lon/lat grid over area bounding boxes.
///
/// Each cell lists, in file order, the areas whose bounding box touches it.
#[derive(Debug, Clone)]
pub struct AreaIndex<'a> {
    areas: &'a [AreaUnit],
    bounds: Vec<[f64; 4]>,
    origin: [f64; 2],
    cell: [f64; 2],
    dims: [usize; 2],
    cells: Vec<Vec<usize>>,
}

impl<'a> AreaIndex<'a> {
    pub fn new(areas: &'a [AreaUnit]) -> Self {
        let bounds: Vec<[f64; 4]> = areas
            .iter()
            .map(|a| {
                a.polygons.iter().map(polygon_bounds).fold(
                    [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
                    |b, p| [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[2]), b[3].max(p[3])],
                )
            })
            .collect();
        let ext = bounds.iter().fold(
            [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
            |b, p| [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[2]), b[3].max(p[3])],
        );
        let side = ((areas.len() as f64).sqrt().ceil() as usize).clamp(1, 256);
        let mut index = Self {
            areas,
            origin: [0.0, 0.0],
            cell: [1.0, 1.0],
            dims: [1, 1],
            cells: vec![Vec::new()],
            bounds,
        };
        if areas.is_empty() {
            return index;
        }
        index.origin = [ext[0], ext[1]];
        index.cell = [
            ((ext[2] - ext[0]) / side as f64).max(1e-12),
            ((ext[3] - ext[1]) / side as f64).max(1e-12),
        ];
        index.dims = [side, side];
        index.cells = vec![Vec::new(); side * side];
        for (i, b) in index.bounds.iter().enumerate() {
            let (x0, y0) = index.cell_of([b[0], b[1]]);
            let (x1, y1) = index.cell_of([b[2], b[3]]);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    index.cells[y * side + x].push(i);
                }
            }
        }
        index
    }

    fn cell_of(&self, p: [f64; 2]) -> (usize, usize) {
        let f = |v: f64, o: f64, c: f64, n: usize| (((v - o) / c).floor().max(0.0) as usize).min(n - 1);
        (
            f(p[0], self.origin[0], self.cell[0], self.dims[0]),
            f(p[1], self.origin[1], self.cell[1], self.dims[1]),
        )
    }

    /// Indices, in file order, of every area containing `[lon, lat]`.
    pub fn containing(&self, p: [f64; 2]) -> Vec<usize> {
        if self.areas.is_empty() {
            return Vec::new();
        }
        let (x, y) = self.cell_of(p);
        self.cells[y * self.dims[0] + x]
            .iter()
            .copied()
            .filter(|&i| {
                let b = self.bounds[i];
                p[0] >= b[0] && p[0] <= b[2] && p[1] >= b[1] && p[1] <= b[3]
            })
            .filter(|&i| self.areas[i].polygons.iter().any(|poly| point_in_polygon(p, poly)))
            .collect()
    }

    pub fn areas(&self) -> &'a [AreaUnit] {
        self.areas
    }
}

/// A point claimed by more than one area.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overlap {
    pub id: String,
    pub codes: Vec<String>,
}

/// Area code per point id (`None` when unassigned).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Assignments {
    pub codes: BTreeMap<String, Option<String>>,
    pub overlaps: Vec<Overlap>,
}

impl Assignments {
    pub fn get(&self, id: &str) -> Option<&str> {
        self.codes.get(id).and_then(|c| c.as_deref())
    }

    pub fn unassigned(&self) -> impl Iterator<Item = &str> {
        self.codes
            .iter()
            .filter(|(_, c)| c.is_none())
            .map(|(id, _)| id.as_str())
    }
}

/// Assigns each `(id, [lon, lat])` to the first containing area in file order.
pub fn join_points<'p>(
    points: impl IntoParallelIterator<Item = (&'p str, [f64; 2])>,
    index: &AreaIndex<'_>,
    what: &str,
) -> Assignments {
    let hits: Vec<(String, Vec<usize>)> = points
        .into_par_iter()
        .map(|(id, p)| (id.to_string(), index.containing(p)))
        .collect();
    let mut out = Assignments::default();
    for (id, found) in hits {
        let codes: Vec<String> = found.iter().map(|&i| index.areas()[i].code.clone()).collect();
        match codes.len() {
            0 => warn!("{what} {id} lies in no area"),
            1 => {}
            _ => {
                warn!("{what} {id} lies in overlapping areas {}", codes.join(", "));
                out.overlaps.push(Overlap {
                    id: id.clone(),
                    codes: codes.clone(),
                });
            }
        }
        out.codes.insert(id, codes.into_iter().next());
    }
    out
}

pub fn join_ads_to_areas(ads: &[AdInstance], areas: &[AreaUnit]) -> Assignments {
    let index = AreaIndex::new(areas);
    let pts: Vec<(&str, [f64; 2])> = ads.iter().map(|a| (a.ad_id.as_str(), [a.lon, a.lat])).collect();
    join_points(pts, &index, "ad")
}

pub fn join_images_to_areas(images: &[GeoImage], areas: &[AreaUnit]) -> Assignments {
    let index = AreaIndex::new(areas);
    let pts: Vec<(&str, [f64; 2])> = images.iter().map(|i| (i.id.as_str(), [i.lon, i.lat])).collect();
    join_points(pts, &index, "image")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BBox, Polygon};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square(code: &str, x0: f64, y0: f64, side: f64) -> AreaUnit {
        let ring = vec![[x0, y0], [x0 + side, y0], [x0 + side, y0 + side], [x0, y0 + side], [x0, y0]];
        AreaUnit::new(code, vec![Polygon::new(ring, vec![]).unwrap()], 1, 1, "1a").unwrap()
    }

    fn ad(id: &str, lon: f64, lat: f64) -> AdInstance {
        AdInstance {
            ad_id: id.into(),
            source_image: id.into(),
            hull: vec![],
            component_pixels: 1,
            filled_pixels: 1,
            bbox: BBox::from([0, 0, 0, 0]),
            lat,
            lon,
            category: None,
            crop_ref: None,
        }
    }

    #[test]
    fn single_containing_area() {
        let areas = [square("A", 0.0, 0.0, 1.0), square("B", 1.0, 0.0, 1.0)];
        let j = join_ads_to_areas(&[ad("x", 1.5, 0.5)], &areas);
        assert_eq!(j.get("x"), Some("B"));
        assert!(j.overlaps.is_empty());
    }

    #[test]
    fn sea_point_is_unassigned() {
        let areas = [square("A", 0.0, 0.0, 1.0)];
        let j = join_ads_to_areas(&[ad("x", 5.0, 5.0)], &areas);
        assert_eq!(j.get("x"), None);
        assert_eq!(j.unassigned().collect::<Vec<_>>(), ["x"]);
    }

    #[test]
    fn overlap_takes_first_and_reports() {
        let areas = [square("A", 0.0, 0.0, 2.0), square("B", 1.0, 1.0, 2.0)];
        let j = join_ads_to_areas(&[ad("x", 1.5, 1.5)], &areas);
        assert_eq!(j.get("x"), Some("A"));
        assert_eq!(j.overlaps, vec![Overlap { id: "x".into(), codes: vec!["A".into(), "B".into()] }]);
    }

    #[test]
    fn no_areas() {
        let j = join_ads_to_areas(&[ad("x", 0.0, 0.0)], &[]);
        assert_eq!(j.get("x"), None);
    }

    #[test]
    fn index_matches_linear_scan() {
        let mut areas = Vec::new();
        for i in 0..7 {
            for k in 0..5 {
                areas.push(square(&format!("{i}-{k}"), i as f64 * 0.3, k as f64 * 0.25, 0.3));
            }
        }
        let index = AreaIndex::new(&areas);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let p = [rng.gen_range(-0.5..2.6), rng.gen_range(-0.5..1.6)];
            let linear: Vec<usize> = (0..areas.len())
                .filter(|&i| areas[i].polygons.iter().any(|poly| point_in_polygon(p, poly)))
                .collect();
            assert_eq!(index.containing(p), linear);
        }
    }
}
