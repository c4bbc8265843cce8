use crate::model::{Polygon, Ring};

fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    cross == 0.0
        && p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

fn on_boundary(p: [f64; 2], ring: &Ring) -> bool {
    ring.windows(2).any(|e| on_segment(p, e[0], e[1]))
}

/// Number of ring edges crossed by a ray from `p` towards +x.
fn crossings(p: [f64; 2], ring: &Ring) -> usize {
    ring.windows(2)
        .filter(|e| {
            let ([xi, yi], [xj, yj]) = (e[0], e[1]);
            (yi > p[1]) != (yj > p[1]) && p[0] < (xj - xi) * (p[1] - yi) / (yj - yi) + xi
        })
        .count()
}

/// Even-odd containment of `pt` (`[lon, lat]`) in a polygon with holes.
///
/// Points lying exactly on any ring edge count as inside.
pub fn point_in_polygon(pt: [f64; 2], poly: &Polygon) -> bool {
    if poly.rings().any(|r| on_boundary(pt, r)) {
        return true;
    }
    poly.rings().map(|r| crossings(pt, r)).sum::<usize>() % 2 == 1
}

/// Bounding box `[min_lon, min_lat, max_lon, max_lat]` of a polygon's exterior.
pub fn polygon_bounds(poly: &Polygon) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for &[x, y] in poly.exterior() {
        b[0] = b[0].min(x);
        b[1] = b[1].min(y);
        b[2] = b[2].max(x);
        b[3] = b[3].max(y);
    }
    b
}
