//! Regenerates the bundled dataset: `cargo run -p kmedo-bench --example gen_synthetic [path]`.

use kmedo_bench::synthetic::{synthetic_points, write_points_csv, DEFAULT_ROWS, DEFAULT_SEED};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "crates/bench/data/synthetic10d.csv".into());
    let points = synthetic_points(DEFAULT_ROWS, DEFAULT_SEED);
    if let Err(e) = write_points_csv(path.as_ref(), &points) {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}
