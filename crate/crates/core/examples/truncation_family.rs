//! Monotone convergence along nested truncations of a cone.

use riesz_green::domain::DomainConfig;
use riesz_green::gauss::{truncation_sweep, ExternalField};
use riesz_green::geometry::generators;
use riesz_green::green::build_green;
use riesz_green::{DiscreteMeasure, IndexSet, PointSet, Result};

fn main() -> Result<()> {
    let cone = generators::truncated_cone(&[0.0; 3], &[0.0, 0.0, 1.0], 0.6, 4.5, 0.5)?;
    let (ps, r) = PointSet::concat(3, &[cone, vec![vec![0.0, 0.0, -0.5]]])?;
    let f = IndexSet::new(r[0].clone());
    let gs = build_green(&DomainConfig::without_complement(ps.clone(), f.clone(), 2.0)?)?;
    let fld = ExternalField::new(&gs, DiscreteMeasure::dirac(ps.len(), r[1].start, 0.8)?, &f)?;
    let family: Vec<IndexSet> = [1.5, 2.5, 3.5, 4.5].iter().map(|&t| f.filter(|i| ps.norm(i) <= t)).collect();
    let rep = truncation_sweep(&gs, &fld, &family)?;
    println!("{:>5} {:>5} {:>12} {:>12} {:>12}", "stage", "size", "w", "c", "dist_to_full");
    for s in &rep.stages {
        println!("{:>5} {:>5} {:>12.6} {:>12.6} {:>12.3e}", s.stage, s.size, s.w, s.c, s.distance_to_full);
    }
    println!(
        "w violation {:.1e}, c violation {:.1e}, parallelogram excess {:.2e}",
        rep.w_monotonicity_violation, rep.c_monotonicity_violation, rep.parallelogram_excess
    );
    Ok(())
}
