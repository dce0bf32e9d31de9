//! One-dimensional cells: the half-gaps to both neighbours have exact laws,
//! so the ECDFs can be checked directly.

use voronoi_extremes::distributions::TheoryCdf;
use voronoi_extremes::extremes::run_1d_experiment;
use voronoi_extremes::rng_ppp::SimConfig1D;

fn main() -> voronoi_extremes::Result<()> {
    let config = SimConfig1D {
        lambda: 2.0,
        length: 5e5,
        windows: 1,
        seed: 11,
        shards: 1,
    };
    let run = run_1d_experiment(&config)?;
    println!("interior points {}", run.report.interior_points);
    println!("sup gap, min side {:.5}", run.report.sup_distance_min);
    println!("sup gap, max side {:.5}", run.report.sup_distance_max);

    println!("\n   d    ecdf_min  F_min    ecdf_max  F_max");
    for d in [0.05, 0.1, 0.25, 0.5, 1.0, 2.0] {
        println!(
            "{d:5.2}  {:.5}  {:.5}  {:.5}  {:.5}",
            run.d_min.eval(d)?,
            TheoryCdf::Min1d.eval(d)?,
            run.d_max.eval(d)?,
            TheoryCdf::Max1d.eval(d)?
        );
    }
    Ok(())
}
