//! Pointwise Hölder exponents and log-Lipschitz constants of the inverse of a
//! random map on sparse vectors (s = 2, N = 8, k = 4).

use projlab::constructions::sparse_atoms;
use projlab::embedding::holder::{holder_sweep, log_lipschitz_from_images};
use projlab::embedding::Normalization;
use projlab::linalg::sample_e;

fn main() -> projlab::Result<()> {
    let atoms = sparse_atoms(8, 2, 1000, 3)?;
    let ps = atoms.support();
    let diam = ps.diameter();
    let l = sample_e(8, 4, 3)?;
    let images: Vec<Vec<f64>> = ps.points().iter().map(|p| l.apply(p)).collect();
    let mut alphas = Vec::new();
    let mut c = Vec::new();
    for x in 0..ps.len() {
        alphas.push(holder_sweep(ps, &images, x, &[16.0], Normalization::Raw)?[0].alpha_or_inf());
        c.push(log_lipschitz_from_images(ps, &images, diam, x, diam, 2.0, 1.0)?.c_hat);
    }
    let good = alphas.iter().filter(|a| **a >= 0.9).count();
    println!("{good} of {} atoms with alpha_hat >= 0.9 at M = 16", ps.len());
    println!("smallest alpha_hat {:.3}", alphas.iter().cloned().fold(f64::INFINITY, f64::min));
    println!("smallest log-Lipschitz C_hat {:.3e}", c.iter().cloned().fold(f64::INFINITY, f64::min));
    Ok(())
}
