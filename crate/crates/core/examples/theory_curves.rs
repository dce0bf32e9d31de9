//! Tabulates the closed-form CDFs, in normalized units and for λ = 4.

use voronoi_extremes::distributions::{GGParams, TheoryCdf, gg_cdf, rescale_cdf};

fn main() -> voronoi_extremes::Result<()> {
    let vertex = rescale_cdf(|r| TheoryCdf::Vertex2d.eval(r).unwrap_or(f64::NAN), 4.0)?;
    println!("  x     edge1d    min1d     max1d     vertex2d  vertex2d(λ=4)  GG(2,π,4)");
    for i in 0..=12 {
        let x = 0.125 * i as f64;
        println!(
            "{x:5.3}  {:.6}  {:.6}  {:.6}  {:.6}  {:.6}       {:.6}",
            TheoryCdf::Edge1d.eval(x)?,
            TheoryCdf::Min1d.eval(x)?,
            TheoryCdf::Max1d.eval(x)?,
            TheoryCdf::Vertex2d.eval(x)?,
            vertex(x),
            gg_cdf(x, GGParams::vertex_distance())?
        );
    }
    Ok(())
}
