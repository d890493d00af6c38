//! Localized covering counts max_x N(B(x, r) ∩ X, ρ) on a sphere-net union.
//!
//! The probed exponent sits above the box dimension: near the origin the
//! shells look two-dimensional at every scale.

use projlab::constructions::{sphere_net_union, SeparationLaw, ShellLaws};
use projlab::dimension::assouad_probe_grid;

fn main() -> projlab::Result<()> {
    let laws = ShellLaws::new(3, 2, SeparationLaw::Pow2T { t: 2.0 }, 6);
    let net = sphere_net_union(&laws, 0)?;
    let pairs: Vec<(f64, f64)> = (1..=5).map(|j| (0.25, 0.25 * (2f64).powi(-j))).collect();
    let (probes, fit) = assouad_probe_grid(&net.points, 64, &pairs)?;
    for p in &probes {
        println!("r {:.3} rho {:.5}  max count {:5}  (center {})", p.r, p.rho, p.max_count, p.argmax_center);
    }
    println!("slope {:.3}, box dimension 1", fit.slope);
    Ok(())
}
