//! Equilibrium measure of a cube for α = 1 and α = 2.
//!
//! For α = 2 the measure lives on the boundary layer of the grid; for α = 1
//! it charges the interior as well.

use riesz_green::geometry::generators;
use riesz_green::kernel::{assemble_riesz, complementarity_residuals, equilibrium_measure};
use riesz_green::{IndexSet, PointSet, Result};

fn main() -> Result<()> {
    let pts = generators::grid_box(&[-1.0; 3], &[1.0; 3], 0.25)?;
    let ps = PointSet::new(3, &pts)?;
    let all = IndexSet::range(0..ps.len());
    let face = ps.len() - all.filter(|i| ps.point(i).iter().all(|x| x.abs() < 0.99)).len();
    for alpha in [2.0, 1.0] {
        let k = assemble_riesz(&ps, alpha, 1.0)?;
        let gamma = equilibrium_measure(&k, &all)?;
        let (eq, ineq) = complementarity_residuals(&k, &gamma, &all, 1.0)?;
        let outer = all.filter(|i| ps.point(i).iter().any(|x| x.abs() > 0.99));
        println!(
            "alpha={alpha}: mass {:.5}, support {}/{} points, mass on the {face} outer points {:.3}, residuals ({eq:.1e}, {ineq:.1e})",
            gamma.total_mass(),
            gamma.support().len(),
            ps.len(),
            gamma.mass_on(&outer) / gamma.total_mass()
        );
    }
    Ok(())
}
