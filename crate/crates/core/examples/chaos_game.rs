//! Chaos-game samples of the middle-thirds Cantor set and their box-counting
//! slope, against ln 2 / ln 3.

use projlab::constructions::{ifs_atoms, ifs_chaos_sample, IfsSpec};
use projlab::dimension::box_dimension_fit;

fn main() -> projlab::Result<()> {
    let spec = IfsSpec::cantor();
    let cloud = ifs_chaos_sample(&spec, 200_000, 100, 1)?;
    let fit = box_dimension_fit(&cloud, 1.0 / 9.0, 1.0 / 2187.0, 7)?;
    println!("chaos game: slope {:.4} (r² {:.4})", fit.slope, fit.r_squared);
    let atoms = ifs_atoms(&spec, 12)?;
    let fit = box_dimension_fit(atoms.support(), 1.0 / 9.0, 1.0 / 2187.0, 7)?;
    println!("depth-12 atoms: slope {:.4}; ln2/ln3 = {:.4}", fit.slope, 2f64.ln() / 3f64.ln());
    Ok(())
}
