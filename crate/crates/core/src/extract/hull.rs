use crate::model::PixelPoint;

#[inline]
fn cross(o: PixelPoint, a: PixelPoint, b: PixelPoint) -> i64 {
    (a.x as i64 - o.x as i64) * (b.y as i64 - o.y as i64)
        - (a.y as i64 - o.y as i64) * (b.x as i64 - o.x as i64)
}

/// Returned when the input has fewer than three distinct points or all of
/// them are collinear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("degenerate hull: fewer than 3 non-collinear points")]
pub struct DegenerateHull;

/// Convex hull by Andrew's monotone chain.
///
/// Vertices are counter-clockwise in the sense of a positive shoelace area,
/// start at the smallest `(x, y)` and contain no collinear triples.
pub fn convex_hull(points: &[PixelPoint]) -> Result<Vec<PixelPoint>, DegenerateHull> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return Err(DegenerateHull);
    }
    let mut hull: Vec<PixelPoint> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() < 3 {
        return Err(DegenerateHull);
    }
    Ok(hull)
}

/// Twice the signed shoelace area.
pub fn doubled_area(poly: &[PixelPoint]) -> i64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.x as i64 * b.y as i64 - b.x as i64 * a.y as i64
        })
        .sum()
}

/// True when `poly` has at least three vertices, every turn is strictly to
/// the left and every vertex lies on the inner side of every edge.
pub fn is_strictly_convex_ccw(poly: &[PixelPoint]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if cross(a, b, poly[(i + 2) % n]) <= 0 {
            return false;
        }
        if poly.iter().any(|&p| cross(a, b, p) < 0) {
            return false;
        }
    }
    true
}
