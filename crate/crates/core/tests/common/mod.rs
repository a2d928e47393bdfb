#![allow(dead_code)]

use kmedo_core::{MetricSpace, PointId};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `n` points in the plane. Roughly one in six lands far from the rest so
/// that truncation and doubling actually happen.
pub fn scattered_plane(rng: &mut ChaCha8Rng, n: usize) -> MetricSpace {
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let spread = if rng.random_range(0..6) == 0 { 1000.0 } else { 100.0 };
            [rng.random::<f64>() * spread, rng.random::<f64>() * spread]
        })
        .collect();
    MetricSpace::euclidean(&pts).unwrap()
}

/// Like [`scattered_plane`] but on an integer grid, so equal distances
/// and exact ties are common.
pub fn gridded_plane(rng: &mut ChaCha8Rng, n: usize) -> MetricSpace {
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(0..6) as f64, rng.random_range(0..6) as f64])
        .collect();
    MetricSpace::euclidean(&pts).unwrap()
}

pub fn ids(r: std::ops::Range<usize>) -> Vec<PointId> {
    r.map(PointId).collect()
}

/// Medians added since the previous snapshot.
pub fn additions(prev: &[PointId], next: &[PointId]) -> usize {
    next.iter().filter(|m| !prev.contains(m)).count()
}
