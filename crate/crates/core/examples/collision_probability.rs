//! Fraction of random maps that bring some point at distance >= δ within ε
//! of the base point's image, on a sphere-net union with the origin as base.

use projlab::constructions::{sphere_net_union, SeparationLaw, ShellLaws};
use projlab::embedding::collision_probability;

fn main() -> projlab::Result<()> {
    let net = sphere_net_union(&ShellLaws::new(3, 2, SeparationLaw::Pow2T { t: 2.0 }, 8), 1)?;
    let eps: Vec<f64> = (3..=10).map(|j| (2f64).powi(-j)).collect();
    let p = collision_probability(&net.points, 0, 2, &eps, 0.25, 2000, 1)?;
    for (e, f) in p.epsilons.iter().zip(&p.fractions) {
        println!("eps {e:.6}  fraction {f:.4}");
    }
    // the largest ε saturate: the kernel line passes within the covering
    // radius of the two outer shells for every map
    if let Some(fit) = &p.fit {
        println!("slope over all nonzero values {:.3}", fit.slope);
    }
    for w in &p.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
