//! Fit every family to a simulated r_min stream and print the ranking,
//! with confidence intervals for the winner.

use voronoi_extremes::distributions::FamilyParams;
use voronoi_extremes::distributions::gg_moment;
use voronoi_extremes::extremes::run_2d_experiment;
use voronoi_extremes::fitting::rank_families;
use voronoi_extremes::rng_ppp::SimConfig2D;

fn main() -> voronoi_extremes::Result<()> {
    let shards = std::thread::available_parallelism().map_or(1, |n| n.get());
    let config = SimConfig2D {
        lambda: 1.0,
        area: 1e5,
        windows: 2,
        seed: 3,
        shards,
    };
    let run = run_2d_experiment(&config)?;
    println!("{} interior cells\n", run.r_min.n);

    let ranked = rank_families(&run.r_min)?;
    for (i, r) in ranked.iter().enumerate() {
        match &r.fit {
            Some(fit) => println!(
                "{}. {:<18} rmse {:.2e}  {:?}",
                i + 1,
                r.family.display_name(),
                fit.rmse,
                fit.params.values()
            ),
            None => println!(
                "{}. {:<18} failed: {}",
                i + 1,
                r.family.display_name(),
                r.error.as_deref().unwrap_or("")
            ),
        }
    }

    let Some(best) = ranked[0].fit.as_ref() else {
        return Ok(());
    };
    if let Some(ci) = &best.ci {
        println!(
            "\n{:.0}% intervals for {}:",
            best.ci_level * 100.0,
            best.family.display_name()
        );
        for iv in ci {
            println!(
                "  {:<6} {:.4}  ({:.4}, {:.4})",
                iv.name, iv.estimate, iv.lower, iv.upper
            );
        }
    }
    if let FamilyParams::GeneralizedGamma(p) = best.params {
        let (m1, m2) = run.r_min.moments()?;
        println!("\nmean: sample {m1:.6}, fitted {:.6}", gg_moment(1.0, p)?);
        println!("E[X^2]: sample {m2:.6}, fitted {:.6}", gg_moment(2.0, p)?);
    }
    Ok(())
}
