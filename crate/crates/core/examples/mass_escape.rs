//! Exhaustion of a wide cone with charges of mass 0.5, 1 and 2 below its apex.
//!
//! Light charges lose window mass as the truncation grows; heavy ones settle.

use riesz_green::gauss::exhaustion_mass_probe;
use riesz_green::verify::{cone_system, CONE_WINDOW};
use riesz_green::{DiscreteMeasure, Result};

fn main() -> Result<()> {
    let (gs, family, charge) = cone_system()?;
    let n = gs.cfg().points().len();
    for mass in [0.5, 1.0, 2.0] {
        let rep = exhaustion_mass_probe(&gs, &DiscreteMeasure::dirac(n, charge, mass)?, &family, CONE_WINDOW)?;
        println!("charge mass {mass}");
        for r in &rep.rows {
            println!(
                "  R={:<4} |F|={:<5} window mass {:.4}  support radius {:.3}  swept mass {:.4}  c {:+.4}",
                r.radius, r.size, r.window_mass, r.support_radius, r.theta_swept_mass, r.c
            );
        }
    }
    Ok(())
}
