use voronoi_extremes::special::{
    digamma, erfc, ln_gamma, norm_quantile, reg_lower_gamma, reg_upper_gamma,
};

fn main() -> voronoi_extremes::Result<()> {
    for x in [0.001, 0.5, 1.0, 5.0, 171.5] {
        println!(
            "lnΓ({x}) = {:.15}   ψ({x}) = {:.12}",
            ln_gamma(x)?,
            digamma(x)?
        );
    }
    for (s, x) in [(4.36, 1.7), (0.5, 2.0), (100.0, 90.0), (1.8405, 30.0)] {
        println!(
            "P({s}, {x}) = {:.15e}   Q = {:.15e}",
            reg_lower_gamma(s, x)?,
            reg_upper_gamma(s, x)?
        );
    }
    println!("erfc(3) = {:.15e}", erfc(3.0));
    println!("z(0.975) = {:.12}", norm_quantile(0.975)?);
    Ok(())
}
