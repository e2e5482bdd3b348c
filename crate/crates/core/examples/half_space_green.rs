//! Green kernel of the upper half-space against the reflection formula
//! `1/|x − y| − 1/|x − y*|`, with the complement sampled by a plane grid.

use riesz_green::domain::DomainConfig;
use riesz_green::geometry::generators;
use riesz_green::green::build_green;
use riesz_green::verify::panel_sigma;
use riesz_green::{IndexSet, PointSet, Result};

fn main() -> Result<()> {
    let box_pts = generators::grid_box(&[-1.0, -1.0, 1.0], &[1.0, 1.0, 2.0], 0.5)?;
    for spacing in [0.5, 0.35] {
        let (ps, r) = PointSet::concat(3, &[box_pts.clone(), generators::plane_grid(3, 0.0, 8.0, spacing)?])?;
        let d = IndexSet::new(r[0].clone());
        let f = IndexSet::new([r[0].start]);
        let cfg = DomainConfig::new(ps.clone(), d.clone(), IndexSet::new(r[1].clone()), f, 2.0)?.with_sigma(panel_sigma())?;
        let gs = build_green(&cfg)?;
        let mut worst: f64 = 0.0;
        for i in d.iter() {
            for j in d.iter().filter(|&j| j > i) {
                let (x, y) = (ps.point(i), ps.point(j));
                let dist = ps.distance(i, j);
                let refl = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] + y[2]).powi(2)).sqrt();
                let exact = 1.0 / dist - 1.0 / refl;
                worst = worst.max((gs.green().entry(i, j)? - exact).abs() / exact);
            }
        }
        println!(
            "Y spacing {spacing}: {} wall points, max relative error {worst:.4}, asymmetry {:.1e}",
            r[1].len(),
            gs.asymmetry_residual()
        );
    }
    Ok(())
}
