//! Nearest-point decoding of noisy measurements of 2-sparse atoms: k = 4
//! rows decode almost everything, k = 2 does not.

use projlab::constructions::sparse_atoms;
use projlab::embedding::{image_rms, recovery_fraction};
use projlab::linalg::sample_e;

fn main() -> projlab::Result<()> {
    let atoms = sparse_atoms(10, 2, 1000, 11)?;
    for k in [2, 3, 4, 6] {
        let l = sample_e(10, k, 11)?;
        for rel in [0.0, 0.02, 0.1] {
            let r = recovery_fraction(&atoms, &l, rel * image_rms(&atoms, &l), 5)?;
            println!("k = {k}, noise {rel:4} x rms: recovered {:.4}", r.weighted);
        }
    }
    Ok(())
}
