use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use super::quad::Quad;
use crate::error::{Error, Result};

/// Smallest |det| accepted after normalizing `h[2][2] = 1`.
pub const MIN_DET: f64 = 1e-12;

/// Projective map of the plane, stored with element (3, 3) equal to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: Matrix3<f64>,
}

impl Homography {
    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
        }
    }

    /// Wraps a row-major matrix, scaling it so the last element is 1.
    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::normalized(Matrix3::from_fn(|r, c| rows[r][c]))
    }

    fn normalized(m: Matrix3<f64>) -> Result<Self> {
        let s = m[(2, 2)];
        if !(s.abs() > f64::EPSILON) || !s.is_finite() {
            return Err(Error::Degenerate(
                "homography has a vanishing (3,3) element".into(),
            ));
        }
        let m = m / s;
        let det = m.determinant();
        if !(det.abs() > MIN_DET) || !det.is_finite() {
            return Err(Error::Degenerate(format!("singular homography (det {det:e})")));
        }
        Ok(Self { m })
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|r| std::array::from_fn(|c| self.m[(r, c)]))
    }

    pub fn apply(&self, x: f64, y: f64) -> [f64; 2] {
        let v = self.m * Vector3::new(x, y, 1.0);
        [v[0] / v[2], v[1] / v[2]]
    }

    pub fn inverse(&self) -> Self {
        let inv = self
            .m
            .try_inverse()
            .expect("determinant checked at construction");
        Self::normalized(inv).expect("inverse of an invertible homography")
    }

    /// `self` after `first`: maps `p` to `self(first(p))`.
    pub fn compose(&self, first: &Homography) -> Result<Self> {
        Self::normalized(self.m * first.m)
    }

    /// Exact four-point correspondence.
    ///
    /// Both point sets are conditioned (centroid to origin, mean distance
    /// sqrt 2) before the 8x8 system is solved, then the conditioning is
    /// undone.
    pub fn from_correspondences(src: &[[f64; 2]; 4], dst: &[[f64; 2]; 4]) -> Result<Self> {
        let ts = conditioning(src)?;
        let td = conditioning(dst)?;
        let s = src.map(|p| apply_affine(&ts, p));
        let d = dst.map(|p| apply_affine(&td, p));

        let mut a = SMatrix::<f64, 8, 8>::zeros();
        let mut b = SVector::<f64, 8>::zeros();
        for i in 0..4 {
            let ([x, y], [u, v]) = (s[i], d[i]);
            let r = 2 * i;
            a.row_mut(r)
                .copy_from_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]);
            a.row_mut(r + 1)
                .copy_from_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]);
            b[r] = u;
            b[r + 1] = v;
        }
        let h = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Degenerate("singular correspondence system".into()))?;
        let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0);
        let td_inv = td
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("degenerate target points".into()))?;
        Self::normalized(td_inv * hn * ts)
    }
}

fn apply_affine(t: &Matrix3<f64>, p: [f64; 2]) -> [f64; 2] {
    let v = t * Vector3::new(p[0], p[1], 1.0);
    [v[0], v[1]]
}

fn conditioning(pts: &[[f64; 2]; 4]) -> Result<Matrix3<f64>> {
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / 4.0;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / 4.0;
    let mean = pts
        .iter()
        .map(|p| ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt())
        .sum::<f64>()
        / 4.0;
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::Degenerate("coincident correspondence points".into()));
    }
    let s = std::f64::consts::SQRT_2 / mean;
    Ok(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

/// Maps the quad's vertices onto `(0,0), (w,0), (w,h), (0,h)`.
pub fn homography_from_quad(src: &Quad, dst_w: u32, dst_h: u32) -> Result<Homography> {
    if dst_w == 0 || dst_h == 0 {
        return Err(Error::Invalid("target size must be at least 1x1".into()));
    }
    let (w, h) = (dst_w as f64, dst_h as f64);
    Homography::from_correspondences(src.vertices(), &[[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_rows_close(h: &Homography, expected: [[f64; 3]; 3], tol: f64) {
        let rows = h.rows();
        for r in 0..3 {
            for c in 0..3 {
                assert!(
                    (rows[r][c] - expected[r][c]).abs() < tol,
                    "element ({r},{c}): {} vs {}",
                    rows[r][c],
                    expected[r][c]
                );
            }
        }
    }

    fn quad(v: [[f64; 2]; 4]) -> Quad {
        Quad::new(v).unwrap()
    }

    #[test]
    fn unit_square_is_identity() {
        let h = homography_from_quad(&quad([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]), 1, 1)
            .unwrap();
        assert_rows_close(&h, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], 1e-9);
    }

    #[test]
    fn translated_square_is_translation() {
        // Solving by hand: u = x - 5, v = y - 7 satisfies all four pairs.
        let h = homography_from_quad(&quad([[5.0, 7.0], [6.0, 7.0], [6.0, 8.0], [5.0, 8.0]]), 1, 1)
            .unwrap();
        assert_rows_close(&h, [[1.0, 0.0, -5.0], [0.0, 1.0, -7.0], [0.0, 0.0, 1.0]], 1e-9);
    }

    #[test]
    fn wide_rectangle_is_scale() {
        let h = homography_from_quad(&quad([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]]), 1, 1)
            .unwrap();
        assert_rows_close(&h, [[0.5, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], 1e-9);
    }

    #[test]
    fn perspective_corners_map_exactly() {
        let q = quad([[10.0, 20.0], [300.0, 5.0], [280.0, 260.0], [30.0, 200.0]]);
        let h = homography_from_quad(&q, 224, 224).unwrap();
        let dst = [[0.0, 0.0], [224.0, 0.0], [224.0, 224.0], [0.0, 224.0]];
        for (s, d) in q.vertices().iter().zip(dst) {
            let p = h.apply(s[0], s[1]);
            assert!((p[0] - d[0]).abs() < 1e-9 && (p[1] - d[1]).abs() < 1e-9);
        }
        let back = h.inverse();
        let p = back.apply(224.0, 224.0);
        assert!((p[0] - 280.0).abs() < 1e-9 && (p[1] - 260.0).abs() < 1e-9);
    }

    #[test]
    fn collinear_source_is_singular() {
        let src = [[0.0, 0.0], [4.0, 0.0], [2.0, 2.0], [0.0, 4.0]];
        let dst = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(Homography::from_correspondences(&src, &dst).is_err());
    }

    #[test]
    fn rejects_zero_target() {
        let q = quad([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert!(homography_from_quad(&q, 0, 5).is_err());
    }
}
