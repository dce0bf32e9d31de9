//! Binned ECDF accumulators merge exactly: splitting a stream across
//! workers and merging gives the same bits as one pass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voronoi_extremes::empirics::{EcdfAccumulator, Grid, ks_two_sample};

fn main() -> voronoi_extremes::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let values: Vec<f64> = (0..200_000).map(|_| -rng.random::<f64>().ln()).collect();
    let grid = Grid::new(8.0, 4096)?;

    let mut whole = EcdfAccumulator::new(grid);
    whole.extend(values.iter().copied())?;

    let mut merged = EcdfAccumulator::new(grid);
    for chunk in values.chunks(30_000).rev() {
        let mut part = EcdfAccumulator::new(grid);
        part.extend(chunk.iter().copied())?;
        merged.merge(&part)?;
    }

    println!("identical after merge: {}", whole == merged);
    let (m1, m2) = whole.moments()?;
    println!(
        "n = {}, mean {m1:.5}, second moment {m2:.5}, overflow {:.2e}",
        whole.n,
        whole.overflow_fraction()
    );
    println!(
        "ECDF at 1: {:.5} (exact {:.5})",
        whole.eval(1.0)?,
        1.0 - (-1f64).exp()
    );
    println!("KS(whole, merged) = {}", ks_two_sample(&whole, &merged)?);
    Ok(())
}
