use std::collections::HashMap;

/// Mean earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Great-circle distance between two `(lat, lon)` points in degrees.
pub fn haversine(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lon1) = (a.0.to_radians(), a.1.to_radians());
    let (lat2, lon2) = (b.0.to_radians(), b.1.to_radians());
    let dlat = lat2 - lat1;
    let dlon = lon2 - lon1;
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Index pairs `(i, j)`, `i < j`, whose points lie within `radius_m`.
///
/// Points are bucketed on a lat/lon grid whose cells are at least
/// `radius_m` across everywhere in the data set, so only the 3x3 block of
/// cells around each point needs checking. Longitude cells wrap at the
/// antimeridian. The result is sorted and equals the exhaustive pairing.
pub fn pairs_within(points: &[(f64, f64)], radius_m: f64) -> Vec<(usize, usize)> {
    if points.len() < 2 {
        return Vec::new();
    }
    let deg_per_m = 180.0 / (std::f64::consts::PI * EARTH_RADIUS_M);
    // Safety margin covers the gap between great-circle and grid distances.
    let lat_cell = 1.5 * radius_m * deg_per_m;
    let max_abs_lat = points.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let cos_min = max_abs_lat.to_radians().cos();
    let lon_cell = if cos_min > 1e-6 {
        (lat_cell / cos_min).min(360.0)
    } else {
        360.0
    };
    let lon_cols = (360.0 / lon_cell).floor().max(1.0) as i64;
    let lat_rows = (180.0 / lat_cell).floor().max(1.0) as i64;
    let cell = |p: &(f64, f64)| -> (i64, i64) {
        let r = (((p.0 + 90.0) / lat_cell).floor() as i64).clamp(0, lat_rows - 1);
        let c = (((p.1 + 180.0) / lon_cell).floor() as i64).rem_euclid(lon_cols);
        (r, c)
    };

    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry(cell(p)).or_default().push(i);
    }
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let (r, c) = cell(p);
        let mut seen_cols = Vec::with_capacity(3);
        for dc in -1..=1 {
            let col = (c + dc).rem_euclid(lon_cols);
            if seen_cols.contains(&col) {
                continue;
            }
            seen_cols.push(col);
            for dr in -1..=1 {
                let Some(bucket) = grid.get(&(r + dr, col)) else {
                    continue;
                };
                for &j in bucket {
                    if j > i && haversine(*p, points[j]) <= radius_m {
                        out.push((i, j));
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn same_point_is_zero() {
        assert_eq!(haversine((53.4, -2.98), (53.4, -2.98)), 0.0);
    }

    #[test]
    fn one_degree_of_latitude() {
        let expected = std::f64::consts::PI * EARTH_RADIUS_M / 180.0;
        assert!((expected - 111_194.93).abs() < 0.01);
        assert!((haversine((0.0, 0.0), (1.0, 0.0)) - expected).abs() < 0.01);
    }

    #[test]
    fn ten_meters_north() {
        let expected = std::f64::consts::PI * EARTH_RADIUS_M / 180.0 * 9e-5;
        let d = haversine((53.4, -2.98), (53.40009, -2.98));
        assert!((d - expected).abs() < 1e-6);
        assert!((d - 10.01).abs() < 0.005);
    }

    #[test]
    fn antimeridian_neighbours() {
        let pts = [(10.0, 179.99995), (10.0, -179.99995)];
        assert!(haversine(pts[0], pts[1]) < 11.0);
        assert_eq!(pairs_within(&pts, 20.0), [(0, 1)]);
    }

    fn exhaustive(points: &[(f64, f64)], r: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if haversine(points[i], points[j]) <= r {
                    out.push((i, j));
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn bucketing_matches_exhaustive(
            base_lat in -70.0f64..70.0,
            base_lon in -179.0f64..179.0,
            offs in prop::collection::vec((0.0f64..4e-4, 0.0f64..4e-4), 2..60),
            r in 1.0f64..40.0,
        ) {
            let pts: Vec<_> = offs.iter().map(|(a, b)| (base_lat + a, base_lon + b)).collect();
            prop_assert_eq!(pairs_within(&pts, r), exhaustive(&pts, r));
        }
    }
}
