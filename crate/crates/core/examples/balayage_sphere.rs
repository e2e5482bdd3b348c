//! Sweeping a unit charge onto a sphere (α = 2).
//!
//! Outside a sphere of radius r, the swept mass of a unit charge at distance d
//! is r/d; inside it is 1.

use riesz_green::balayage::sweep;
use riesz_green::geometry::generators;
use riesz_green::kernel::assemble_riesz;
use riesz_green::{DiscreteMeasure, IndexSet, PointSet, Result};

fn main() -> Result<()> {
    let count = 800;
    for d in [0.3, 1.5, 2.0, 4.0] {
        let (ps, ranges) = PointSet::concat(3, &[generators::sphere_shell(&[0.0; 3], 1.0, count)?, vec![vec![0.0, 0.0, d]]])?;
        let k = assemble_riesz(&ps, 2.0, 1.0)?;
        let charge = DiscreteMeasure::dirac(ps.len(), ranges[1].start, 1.0)?;
        let res = sweep(&k, &charge, &IndexSet::new(ranges[0].clone()))?;
        let exact = if d < 1.0 { 1.0 } else { 1.0 / d };
        println!(
            "d={d:<4} swept mass {:.4} (continuum {exact:.4}), KKT ({:.1e}, {:.1e}), path {:?}",
            res.mass_out, res.kkt.equality_on_support, res.kkt.inequality_on_target, res.path
        );
    }
    Ok(())
}
