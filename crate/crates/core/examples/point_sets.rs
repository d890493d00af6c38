//! Point sets and atomic measures round-trip through CSV.

use projlab::constructions::{sphere_net, SphereNetSpec};
use projlab::constructions::dyadic::parabola_lift_sample;
use projlab::constructions::{SeparationLaw, ShellLaws};
use projlab::{AtomicMeasure, PointSet};

fn main() -> projlab::Result<()> {
    let spec = SphereNetSpec {
        laws: ShellLaws::new(3, 2, SeparationLaw::Pow2T { t: 2.0 }, 4),
        j: vec![1, 2, 3],
    };
    let net = sphere_net(&spec, 0)?;
    for s in &net.shells {
        println!("shell {}: r {:.4}, ell {:.5}, {} points", s.i, s.r, s.ell, s.count);
    }
    let text = net.points.to_csv();
    let back = PointSet::from_csv(&text)?;
    println!("{} points, provenance {} / {}", back.len(), &net.points.provenance_hash()[..12], &back.provenance_hash()[..12]);

    let m = parabola_lift_sample(0.25, 8, 500, 3)?;
    let m2 = AtomicMeasure::from_csv(&m.to_csv())?;
    println!("measure with {} atoms, weights equal after round trip: {}", m2.len(), m.weights() == m2.weights());
    Ok(())
}
