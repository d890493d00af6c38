//! Box-counting dimension of a sphere-net union, compared with k(t-1)/t.
//!
//! cargo run --release --example box_dimension

use projlab::constructions::{sphere_net_union, SeparationLaw, ShellLaws};
use projlab::dimension::box_dimension_fit;

fn main() -> projlab::Result<()> {
    for (t, i_max, cap) in [(2.0, 8, None), (3.0, 10, Some((2f64).powi(-10)))] {
        let law = SeparationLaw::Pow2T { t };
        let mut laws = ShellLaws::new(3, 2, law, i_max);
        if let Some(c) = cap {
            laws = laws.with_resolution_cap(c);
        }
        let net = sphere_net_union(&laws, 0)?;
        let fit = box_dimension_fit(&net.points, 0.125, (2f64).powi(-8), 6)?;
        println!(
            "t = {t}: {} points, slope {:.3} (r² {:.4}), formula {:.3}",
            net.points.len(),
            fit.slope,
            fit.r_squared,
            law.box_dimension(2)
        );
        for row in &fit.table {
            println!("  delta {:.5}  N {}", row.delta, row.count);
        }
    }
    Ok(())
}
