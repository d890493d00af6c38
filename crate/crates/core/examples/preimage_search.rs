//! Finding a nonzero preimage of φ(0) on a coordinate sphere for a Lipschitz
//! perturbation φ = L + f, starting from a lattice mesh.

use projlab::embedding::{perturbed_preimage_search, sphere_mesh};
use projlab::linalg::{sample_e, AffinePerturbation};

fn main() -> projlab::Result<()> {
    let l = sample_e(3, 2, 8)?;
    let mesh = sphere_mesh(3, &[1, 2, 3], 0.5, 0.01)?;
    for amp in [0.0, 0.01, 0.05] {
        let phi = AffinePerturbation::tabulate(l.clone(), &mesh, amp, |p| vec![amp * p[0].sin(), amp * p[1] * p[2]])?;
        let s = perturbed_preimage_search(&phi, &mesh, &[1, 2, 3], 0.5)?;
        match &s.y {
            Some(y) => println!("amp {amp}: preimage {y:.4?}, residual {:.2e} after {} steps", s.residual, s.steps),
            None => println!("amp {amp}: none found (best residual {:.2e})", s.residual),
        }
    }
    Ok(())
}
