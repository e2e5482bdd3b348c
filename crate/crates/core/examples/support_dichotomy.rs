//! Where the solution lives on a solid ball: boundary for α = 2, spread for α < 2.

use riesz_green::domain::DomainConfig;
use riesz_green::gauss::{solve_gauss, support_descriptor, ExternalField, ADJACENCY_FACTOR};
use riesz_green::geometry::generators;
use riesz_green::green::build_green;
use riesz_green::{DiscreteMeasure, IndexSet, PointSet, Result};

fn main() -> Result<()> {
    let h = 0.2;
    let ball = generators::ball(&[0.0; 3], 1.0, h)?;
    let shell: Vec<Vec<f64>> = generators::annulus(&[0.0; 3], 1.0, 1.0 + 2.0 * h, h)?
        .into_iter()
        .filter(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt() > 1.0 + 1e-9)
        .collect();
    let (ps, r) = PointSet::concat(3, &[ball, shell, vec![vec![0.0, 0.0, 3.0]]])?;
    let f = IndexSet::new(r[0].clone());
    for alpha in [2.0, 1.5, 1.0] {
        let gs = build_green(&DomainConfig::without_complement(ps.clone(), f.clone(), alpha)?)?;
        let fld = ExternalField::new(&gs, DiscreteMeasure::dirac(ps.len(), r[2].start, 1.0)?, &f)?;
        let sol = solve_gauss(&gs, &fld)?;
        let s = support_descriptor(&sol, &gs, ADJACENCY_FACTOR)?;
        println!(
            "alpha={alpha}: {} boundary / {} interior points, boundary mass {:.3}, interior mass {:.3}",
            s.boundary_points, s.interior_points, s.boundary_mass_fraction, s.interior_mass_fraction
        );
    }
    Ok(())
}
