//! Shell sums of capacities for a sparse set and a sampled plane (α = 2, n = 3).
//!
//! One small ball per dyadic shell (fixed cell radius) gives geometrically
//! decaying terms, so the sums saturate: the set is thin at infinity. A
//! plane's terms do not decay.
//! Only a few shells are sampled, so the trend is a heuristic.

use riesz_green::balayage::thinness_partial_sums;
use riesz_green::geometry::generators;
use riesz_green::kernel::assemble_riesz;
use riesz_green::{IndexSet, PointSet, Result};

fn main() -> Result<()> {
    let sparse: Vec<Vec<f64>> = (0..6).map(|k| vec![0.0, 0.0, 1.5 * 2f64.powi(k)]).collect();
    let plane = generators::plane_grid(3, 0.0, 16.0, 1.0)?;
    let sparse = PointSet::with_radii(3, &sparse, &[0.25; 6])?;
    let plane = PointSet::new(3, &plane)?;
    for (name, ps) in [("sparse", sparse), ("plane", plane)] {
        let k = assemble_riesz(&ps, 2.0, 1.0)?;
        let rep = thinness_partial_sums(&k, &ps, &IndexSet::range(0..ps.len()), 2.0, 4)?;
        let sums: Vec<String> = rep.partial_sums().iter().map(|s| format!("{s:.3}")).collect();
        println!("{name:<7} partial sums [{}] -> {:?}", sums.join(", "), rep.trend);
    }
    Ok(())
}
