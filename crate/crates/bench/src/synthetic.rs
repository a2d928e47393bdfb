//! Deterministic stand-in for a ten-feature terrain dataset: a Gaussian
//! mixture on integer features with very different ranges, plus a thin
//! layer of uniform noise.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{BenchError, Result};

/// Column names and inclusive value ranges.
pub const FEATURES: [(&str, f64, f64); 10] = [
    ("elevation", 1859.0, 3858.0),
    ("aspect", 0.0, 360.0),
    ("slope", 0.0, 66.0),
    ("horizontal_distance_to_hydrology", 0.0, 1397.0),
    ("vertical_distance_to_hydrology", -173.0, 601.0),
    ("horizontal_distance_to_roadways", 0.0, 7117.0),
    ("hillshade_9am", 0.0, 254.0),
    ("hillshade_noon", 0.0, 254.0),
    ("hillshade_3pm", 0.0, 254.0),
    ("horizontal_distance_to_fire_points", 0.0, 7173.0),
];

const CLUSTERS: usize = 7;
const NOISE_RATE: f64 = 0.015;

pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_ROWS: usize = 10_000;

/// `n` points; the same `(n, seed)` always gives the same points.
pub fn synthetic_points(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..CLUSTERS)
        .map(|_| FEATURES.iter().map(|&(_, lo, hi)| rng.random_range(lo..=hi)).collect())
        .collect();
    let spreads: Vec<Vec<Normal<f64>>> = (0..CLUSTERS)
        .map(|_| {
            FEATURES
                .iter()
                .map(|&(_, lo, hi)| Normal::new(0.0, (hi - lo) * rng.random_range(0.02..0.08)).expect("positive sd"))
                .collect()
        })
        .collect();
    let weights: Vec<f64> = (0..CLUSTERS).map(|_| rng.random_range(0.5..2.0)).collect();
    let total: f64 = weights.iter().sum();

    (0..n)
        .map(|_| {
            if rng.random_bool(NOISE_RATE) {
                return FEATURES.iter().map(|&(_, lo, hi)| rng.random_range(lo..=hi).round()).collect();
            }
            let mut pick = rng.random_range(0.0..total);
            let mut c = 0;
            while c + 1 < CLUSTERS && pick >= weights[c] {
                pick -= weights[c];
                c += 1;
            }
            FEATURES
                .iter()
                .enumerate()
                .map(|(f, &(_, lo, hi))| (centers[c][f] + spreads[c][f].sample(&mut rng)).clamp(lo, hi).round())
                .collect()
        })
        .collect()
}

/// Writes points as CSV with the feature names as header.
pub fn write_points_csv(path: &Path, points: &[Vec<f64>]) -> Result<()> {
    let io = |source| BenchError::Io { path: path.to_path_buf(), source };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    let header: Vec<&str> = FEATURES.iter().map(|f| f.0).collect();
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    for p in points {
        let fields: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", fields.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}
