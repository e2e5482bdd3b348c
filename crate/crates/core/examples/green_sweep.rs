//! Green balayage onto a spherical cap inside a ball-shaped domain, computed
//! by cone projection and by restricting a Riesz sweep onto `F ∪ Y`.

use riesz_green::domain::DomainConfig;
use riesz_green::geometry::generators;
use riesz_green::green::{build_green, green_equilibrium, green_sweep, mass_equality_probe};
use riesz_green::{DiscreteMeasure, IndexSet, PointSet, Result};

fn main() -> Result<()> {
    let cap: Vec<Vec<f64>> = generators::sphere_shell(&[0.0; 3], 1.0, 300)?.into_iter().filter(|p| p[2] > -0.2).collect();
    let (ps, r) = PointSet::concat(3, &[cap, vec![vec![0.0, 0.3, 1.8]], generators::sphere_shell(&[0.0; 3], 4.0, 240)?])?;
    let f = IndexSet::new(r[0].clone());
    let d = IndexSet::new(r[0].start..r[1].end);
    let cfg = DomainConfig::new(ps.clone(), d, IndexSet::new(r[2].clone()), f.clone(), 2.0)?;
    let gs = build_green(&cfg)?;
    let mu = DiscreteMeasure::dirac(ps.len(), r[1].start, 1.0)?;
    let sw = green_sweep(&gs, &mu, &f)?;
    println!("swept mass {:.6}, path discrepancy {:.2e}, warning {}", sw.mass_out(), sw.discrepancy, sw.warning);
    let eq = green_equilibrium(&gs, &f)?;
    println!("Green capacity of the cap {:.6}, max equilibrium potential {:.6}", eq.capacity, eq.max_potential);
    let probe = mass_equality_probe(&gs, &mu)?;
    println!("mass lost {:.4}, harmonic-measure deficiency {:.4}", probe.delta_mass, probe.max_deficiency);
    Ok(())
}
