//! Planar run: sample windows, keep interior cells, and compare the
//! generator-to-vertex distances with their closed-form CDF.
//!
//! `cargo run --release --example simulate_2d -- [windows] [area]`

use voronoi_extremes::distributions::TheoryCdf;
use voronoi_extremes::empirics::ks_one_sample;
use voronoi_extremes::extremes::run_2d_experiment;
use voronoi_extremes::rng_ppp::SimConfig2D;

fn main() -> voronoi_extremes::Result<()> {
    let mut args = std::env::args().skip(1);
    let windows = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let area = args.next().and_then(|s| s.parse().ok()).unwrap_or(1e5);
    let shards = std::thread::available_parallelism().map_or(1, |n| n.get());
    let config = SimConfig2D {
        lambda: 1.0,
        area,
        windows,
        seed: 7,
        shards,
    };

    let run = run_2d_experiment(&config)?;
    let rep = &run.report;
    println!(
        "interior cells      {} of {} ({:.4})",
        rep.interior_cells, rep.total_cells, rep.interior_fraction
    );
    println!("mean vertex count   {:.4}", rep.mean_vertex_count);
    for (name, acc) in [
        ("r_min", &run.r_min),
        ("r_max", &run.r_max),
        ("r_bar", &run.r_bar),
    ] {
        let (m1, m2) = acc.moments()?;
        println!("{name:<6} E[X] = {m1:.6}  E[X^2] = {m2:.6}");
    }
    let gap = ks_one_sample(&run.r_bar, |r| {
        TheoryCdf::Vertex2d.eval(r).unwrap_or(f64::NAN)
    })?;
    println!("sup |ECDF - F| for vertex distances: {gap:.5}");
    println!("wall time {:.2?}", run.wall_time);
    Ok(())
}
