//! Inverse continuity modulus ε(δ) of a random functional on dense atoms in
//! the unit ball: atoms on both sides of the kernel plane collide in the image
//! while far apart, so ε(δ)/δ collapses.

use projlab::constructions::dense_ball_atoms;
use projlab::embedding::inverse_continuity_modulus;
use projlab::linalg::{sample_e, AffinePerturbation};

fn main() -> projlab::Result<()> {
    let atoms = dense_ball_atoms(3, 2000, 0.999, 4)?;
    let deltas = [0.125, 0.25, 0.5, 1.0, 1.5];
    for seed in 0..3 {
        let phi = AffinePerturbation::linear(sample_e(3, 1, seed)?);
        let rows = inverse_continuity_modulus(atoms.support(), &phi, &deltas)?;
        for r in rows {
            match r.epsilon {
                Some(e) => println!("map {seed}: delta {:.3}  eps {e:.3e}  ratio {:.3e}", r.delta, e / r.delta),
                None => println!("map {seed}: delta {:.3}  no pair that far apart", r.delta),
            }
        }
    }
    Ok(())
}
