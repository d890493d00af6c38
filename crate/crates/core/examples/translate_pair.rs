//! Two planar similarities differing by a translation t: slices orthogonal
//! to t split their mass between x and x + t.

use projlab::constructions::IfsSpec;
use projlab::linalg::Plane;
use projlab::slicing::{translate_pair_test, SlabWidth};

fn main() -> projlab::Result<()> {
    let spec = IfsSpec::translate_pair(0.6, 1.0, [1.0, 0.0], 0.5)?;
    let v = Plane::line_at_angle(std::f64::consts::FRAC_PI_2);
    for (label, width) in [("single pair", SlabWidth::Spacing(0.5)), ("2x spacing", SlabWidth::Spacing(2.0))] {
        let r = translate_pair_test(&spec, 10, &v, width, 200, 0.3, 0.05, 2)?;
        let mut rho: Vec<f64> = r.records.iter().map(|s| s.rho_star).collect();
        rho.sort_by(f64::total_cmp);
        println!(
            "{label}: {} shift matches, {} mixed, {} with rho* ~ |t|; rho* from {:.3} to {:.3}",
            r.shift_matches,
            r.mixed,
            r.mixed_wide,
            rho[0],
            rho[rho.len() - 1]
        );
    }
    Ok(())
}
