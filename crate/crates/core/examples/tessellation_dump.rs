//! Builds the tessellation of one small window and writes it as CSV
//! (points, triangles, cells) for external plotting.
//!
//! `cargo run --example tessellation_dump -- out_dir`

use voronoi_extremes::extremes::window_tessellation;
use voronoi_extremes::files::{OutputDir, tessellation_csv};
use voronoi_extremes::rng_ppp::SimConfig2D;

fn main() -> voronoi_extremes::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "tessellation_out".into());
    let config = SimConfig2D {
        lambda: 1.0,
        area: 400.0,
        windows: 1,
        seed: 5,
        shards: 1,
    };
    let (tri, cells) = window_tessellation(&config, 0)?;
    let interior = cells.iter().filter(|c| c.interior).count();
    println!(
        "{} points, {} triangles, {} cells ({} interior)",
        tri.points.len(),
        tri.triangles.len(),
        cells.len(),
        interior
    );

    let mut out = OutputDir::create(&dir)?;
    for (name, text) in tessellation_csv(&tri, &cells) {
        let path = out.write(&name, &text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
