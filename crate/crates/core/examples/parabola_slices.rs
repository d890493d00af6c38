//! Slices of the dyadic-parabola measure along lines in every direction:
//! almost every slab holds a single atom up to a tiny fraction of mass.

use projlab::constructions::parabola_lift_measure;
use projlab::slicing::direction_sweep;

fn main() -> projlab::Result<()> {
    let pm = parabola_lift_measure(0.25, 12)?;
    let m = &pm.measure;
    let res = m.support().resolution_floor().unwrap();
    println!("{} atoms, exact total mass: {}", m.len(), pm.total_mass_is_exactly_one());
    for d in direction_sweep(m, 16, 200, 2.0, 0.3, res, 9)? {
        println!(
            "angle {:.3}: dirac {:.3}, median rho* {:.2e}, max rho* {:.2e}",
            d.angle, d.dirac_fraction, d.median_rho, d.max_rho
        );
    }
    Ok(())
}
