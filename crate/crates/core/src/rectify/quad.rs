use crate::error::{Error, Result};
use crate::model::PixelPoint;

/// Largest hull for which every 4-subset of vertices is tried.
pub const EXHAUSTIVE_LIMIT: usize = 24;

/// Four vertices, counter-clockwise (positive shoelace area in image
/// coordinates, i.e. top-left, top-right, bottom-right, bottom-left on
/// screen), starting from the top-left-most one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    vertices: [[f64; 2]; 4],
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

impl Quad {
    /// Builds a quad from vertices in cyclic order (either orientation).
    ///
    /// Rejects zero-area, non-convex and self-intersecting input. Collinear
    /// consecutive vertices are allowed.
    pub fn new(vertices: [[f64; 2]; 4]) -> Result<Self> {
        let mut v = vertices;
        let area = polygon_area(&v);
        if !(area.abs() > 1e-12) || !area.is_finite() {
            return Err(Error::Degenerate("quad has zero area".into()));
        }
        if area < 0.0 {
            v.reverse();
        }
        for i in 0..4 {
            if cross(v[i], v[(i + 1) % 4], v[(i + 2) % 4]) < 0.0 {
                return Err(Error::Degenerate("quad is not convex".into()));
            }
        }
        let start = (0..4)
            .min_by(|&a, &b| {
                let ka = (v[a][0] + v[a][1], v[a][1]);
                let kb = (v[b][0] + v[b][1], v[b][1]);
                ka.partial_cmp(&kb).expect("finite coordinates")
            })
            .expect("four vertices");
        v.rotate_left(start);
        Ok(Self { vertices: v })
    }

    pub fn vertices(&self) -> &[[f64; 2]; 4] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }
}

fn to_f(p: PixelPoint) -> [f64; 2] {
    [p.x as f64, p.y as f64]
}

/// Best quadrilateral approximation of a convex hull.
///
/// Triangles get the midpoint of their longest edge as a fourth vertex.
/// Hulls of up to [`EXHAUSTIVE_LIMIT`] vertices yield the maximum-area
/// vertex 4-subset (first one in index order on ties). Larger hulls use the
/// vertices extreme along the two diagonals, falling back to the exhaustive
/// search if those coincide.
pub fn fit_quad(hull: &[PixelPoint]) -> Result<Quad> {
    let pts: Vec<[f64; 2]> = hull.iter().copied().map(to_f).collect();
    match pts.len() {
        0..=2 => Err(Error::Degenerate(format!(
            "hull with {} vertices cannot be fitted",
            pts.len()
        ))),
        3 => {
            let longest = (0..3)
                .max_by(|&a, &b| {
                    let len = |i: usize| {
                        let (p, q) = (pts[i], pts[(i + 1) % 3]);
                        (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
                    };
                    len(a).partial_cmp(&len(b)).expect("finite")
                })
                .expect("three edges");
            let (p, q) = (pts[longest], pts[(longest + 1) % 3]);
            let mid = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
            let mut v = pts.clone();
            v.insert(longest + 1, mid);
            Quad::new([v[0], v[1], v[2], v[3]])
        }
        n if n <= EXHAUSTIVE_LIMIT => exhaustive(&pts),
        _ => diagonal_extremes(&pts).map_or_else(|| exhaustive(&pts), Ok),
    }
}

fn exhaustive(pts: &[[f64; 2]]) -> Result<Quad> {
    let n = pts.len();
    let mut best: Option<(f64, [usize; 4])> = None;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let area = polygon_area(&[pts[a], pts[b], pts[c], pts[d]]).abs();
                    if best.map_or(true, |(ba, _)| area > ba) {
                        best = Some((area, [a, b, c, d]));
                    }
                }
            }
        }
    }
    let (_, [a, b, c, d]) = best.expect("at least four vertices");
    Quad::new([pts[a], pts[b], pts[c], pts[d]])
}

fn diagonal_extremes(pts: &[[f64; 2]]) -> Option<Quad> {
    let arg = |f: &dyn Fn(&[f64; 2]) -> f64, max: bool| -> usize {
        let mut best = 0;
        for i in 1..pts.len() {
            let (vi, vb) = (f(&pts[i]), f(&pts[best]));
            if (max && vi > vb) || (!max && vi < vb) {
                best = i;
            }
        }
        best
    };
    let tl = arg(&|p| p[0] + p[1], false);
    let tr = arg(&|p| p[0] - p[1], true);
    let br = arg(&|p| p[0] + p[1], true);
    let bl = arg(&|p| p[0] - p[1], false);
    let mut idx = [tl, tr, br, bl];
    idx.sort_unstable();
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    // Indices in hull order keep the quad's vertices cyclic.
    Quad::new(idx.map(|i| pts[i])).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i32, i32)]) -> Vec<PixelPoint> {
        v.iter().map(|&(x, y)| PixelPoint::new(x, y)).collect()
    }

    #[test]
    fn quadrilateral_is_itself() {
        let q = fit_quad(&pts(&[(0, 0), (10, 0), (12, 8), (1, 9)])).unwrap();
        assert_eq!(
            q.vertices(),
            &[[0.0, 0.0], [10.0, 0.0], [12.0, 8.0], [1.0, 9.0]]
        );
    }

    #[test]
    fn triangle_gains_midpoint() {
        let q = fit_quad(&pts(&[(0, 0), (4, 0), (0, 4)])).unwrap();
        assert_eq!(q.vertices(), &[[0.0, 0.0], [4.0, 0.0], [2.0, 2.0], [0.0, 4.0]]);
        assert_eq!(q.area(), 8.0);
    }

    #[test]
    fn regular_hexagon_best_quad_matches_enumeration() {
        // Float hexagon, checked through the exhaustive search directly.
        let hex: Vec<[f64; 2]> = (0..6)
            .map(|k| {
                let t = std::f64::consts::PI / 3.0 * k as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        let mut oracle: f64 = 0.0;
        let mut subsets = 0;
        for a in 0..6 {
            for b in a + 1..6 {
                for c in b + 1..6 {
                    for d in c + 1..6 {
                        subsets += 1;
                        oracle =
                            oracle.max(polygon_area(&[hex[a], hex[b], hex[c], hex[d]]).abs());
                    }
                }
            }
        }
        assert_eq!(subsets, 15);
        let q = exhaustive(&hex).unwrap();
        assert!((q.area() - oracle).abs() < 1e-12);
        // Best subsets are the rectangles spanning two opposite edges: sqrt(3).
        // A square (area 2) would need vertices the hexagon does not have.
        assert!((q.area() - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn orders_from_top_left() {
        let q = Quad::new([[10.0, 10.0], [0.0, 10.0], [0.0, 0.0], [10.0, 0.0]]).unwrap();
        assert_eq!(q.vertices()[0], [0.0, 0.0]);
        assert_eq!(q.vertices()[1], [10.0, 0.0]);
        assert!(q.area() > 0.0);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(Quad::new([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).is_err());
        assert!(Quad::new([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]]).is_err());
        assert!(fit_quad(&pts(&[(0, 0), (1, 0)])).is_err());
    }

    #[test]
    fn large_hull_uses_diagonal_extremes() {
        // 32-gon approximating a circle of radius 100 centred at (150, 150).
        let poly: Vec<PixelPoint> = (0..32)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 32.0 + 0.05;
                PixelPoint::new(
                    (150.0 + 100.0 * t.cos()).round() as i32,
                    (150.0 + 100.0 * t.sin()).round() as i32,
                )
            })
            .collect();
        let hull = crate::extract::convex_hull(&poly).unwrap();
        assert!(hull.len() > EXHAUSTIVE_LIMIT);
        let q = fit_quad(&hull).unwrap();
        // A square inscribed in the circle has area 2r^2.
        assert!(q.area() > 0.9 * 20_000.0, "area {}", q.area());
    }
}
