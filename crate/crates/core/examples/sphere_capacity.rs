//! Newtonian capacity of the unit sphere from Fibonacci samples of growing size.
//! The exact value is the radius, 1.

use riesz_green::kernel::{assemble_riesz, capacity};
use riesz_green::geometry::generators;
use riesz_green::{IndexSet, PointSet, Result};

fn main() -> Result<()> {
    println!("{:>6}  {:>10}  {:>9}", "points", "capacity", "rel. err");
    for count in [250, 500, 1000, 2000] {
        let ps = PointSet::new(3, &generators::sphere_shell(&[0.0; 3], 1.0, count)?)?;
        let k = assemble_riesz(&ps, 2.0, 1.0)?;
        let c = capacity(&k, &IndexSet::range(0..count))?.value;
        println!("{count:>6}  {c:>10.6}  {:>9.4}", (c - 1.0).abs());
    }
    Ok(())
}
