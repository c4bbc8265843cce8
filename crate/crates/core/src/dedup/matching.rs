use super::descriptor::Descriptor;

fn dist2(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// For each row of `from`, the nearest index in `to` and whether it passes
/// the ratio test against the second-nearest.
fn nearest(from: &[Descriptor], to: &[Descriptor], ratio: f64) -> Vec<Option<usize>> {
    let r2 = (ratio * ratio) as f32;
    from.iter()
        .map(|a| {
            let (mut best, mut d1, mut d2) = (usize::MAX, f32::INFINITY, f32::INFINITY);
            for (j, b) in to.iter().enumerate() {
                let d = dist2(a.vector(), b.vector());
                if d < d1 {
                    d2 = d1;
                    d1 = d;
                    best = j;
                } else if d < d2 {
                    d2 = d;
                }
            }
            // d1 < ratio * d2, compared on squared distances.
            (best != usize::MAX && (d2.is_infinite() || d1 < r2 * d2)).then_some(best)
        })
        .collect()
}

/// Number of mutual nearest-neighbour pairs that pass the ratio test in
/// both directions.
pub fn match_count(a: &[Descriptor], b: &[Descriptor], ratio: f64) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let ab = nearest(a, b, ratio);
    let ba = nearest(b, a, ratio);
    ab.iter()
        .enumerate()
        .filter(|&(i, m)| matches!(m, Some(j) if ba[*j] == Some(i)))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dedup::descriptor::DESCRIPTOR_LEN;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng) -> Descriptor {
        // Normal-ish components via sum of uniforms; direction is what matters.
        let v: Vec<f64> = (0..DESCRIPTOR_LEN)
            .map(|_| (0..6).map(|_| rng.gen::<f64>()).sum::<f64>() - 3.0)
            .collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        Descriptor::new([0.0, 0.0], v.iter().map(|x| (x / n) as f32).collect()).unwrap()
    }

    #[test]
    fn empty_side_matches_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = vec![random_unit(&mut rng)];
        assert_eq!(match_count(&[], &b, 0.75), 0);
        assert_eq!(match_count(&b, &[], 0.75), 0);
    }

    #[test]
    fn self_matching_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a: Vec<_> = (0..50).map(|_| random_unit(&mut rng)).collect();
        assert_eq!(match_count(&a, &a, 0.75), 50);
    }

    #[test]
    fn single_descriptors_match_when_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = vec![random_unit(&mut rng)];
        assert_eq!(match_count(&a, &a.clone(), 0.75), 1);
    }

    #[test]
    fn random_sets_rarely_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a: Vec<_> = (0..100).map(|_| random_unit(&mut rng)).collect();
        let b: Vec<_> = (0..100).map(|_| random_unit(&mut rng)).collect();
        assert!(match_count(&a, &b, 0.75) < 5);
    }

    #[test]
    fn duplicate_vectors_fail_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = random_unit(&mut rng);
        // Two identical candidates: nearest == second nearest.
        assert_eq!(match_count(&[d.clone()], &[d.clone(), d], 0.75), 0);
    }
}
