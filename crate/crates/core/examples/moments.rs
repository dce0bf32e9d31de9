use voronoi_extremes::distributions::{GGParams, gg_moment};

fn main() -> voronoi_extremes::Result<()> {
    let fits = [
        ("r_min", GGParams::new(2.176, 8.446, 4.005)?),
        ("r_max", GGParams::new(1.719, 5.528, 9.482)?),
        ("vertex", GGParams::vertex_distance()),
    ];
    for (name, p) in fits {
        let m1 = gg_moment(1.0, p)?;
        let m2 = gg_moment(2.0, p)?;
        println!(
            "{name:<7} a={:.3} b={:.3} c={:.3}  E[X]={m1:.6}  E[X^2]={m2:.6}  sd={:.6}",
            p.a,
            p.b,
            p.c,
            (m2 - m1 * m1).sqrt()
        );
    }
    Ok(())
}
