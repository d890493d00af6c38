//! Hölder exponent of the inverse at the origin of a sphere-net union.
//!
//! The lattice construction lets the origin's exponent be computed shell by
//! shell at depths far beyond what fits in memory; compare the
//! materialized greedy net at depth 8.

use projlab::constructions::{sphere_net_union, NetMethod, SeparationLaw, ShellLaws};
use projlab::embedding::holder::holder_sweep;
use projlab::embedding::{origin_holder_lattice, Normalization};
use projlab::linalg::sample_e;

fn main() -> projlab::Result<()> {
    let ms = [1.0, 4.0, 16.0];
    let l = sample_e(3, 2, 5)?;
    for i_max in [8, 12, 16, 20] {
        let laws = ShellLaws::new(3, 2, SeparationLaw::Pow2T { t: 2.0 }, i_max).with_method(NetMethod::Lattice);
        let h = origin_holder_lattice(&laws, &l, &ms, 4_000_000)?;
        let a: Vec<String> = h.estimates.iter().map(|e| format!("{:.3}", e.alpha_or_inf())).collect();
        println!("lattice i_max {i_max:2}: alpha_hat at M = 1, 4, 16: {}", a.join(", "));
    }
    let sq = ShellLaws::new(3, 2, SeparationLaw::Pow2Sq, 6).with_method(NetMethod::Lattice);
    let h = origin_holder_lattice(&sq, &l, &ms, 4_000_000)?;
    println!(
        "square law i_max 6: {:?}",
        h.estimates.iter().map(|e| e.alpha_or_inf()).collect::<Vec<_>>()
    );

    let net = sphere_net_union(&ShellLaws::new(3, 2, SeparationLaw::Pow2T { t: 2.0 }, 8), 0)?;
    let images: Vec<Vec<f64>> = net.points.points().iter().map(|p| l.apply(p)).collect();
    for e in holder_sweep(&net.points, &images, 0, &ms, Normalization::Raw)? {
        let w = e.witness.map(|i| net.points.label(i).unwrap_or("?").to_string());
        println!("greedy i_max 8, M = {}: alpha_hat {:.3} ({:?}, witness {:?})", e.m, e.alpha_or_inf(), e.binding, w);
    }
    Ok(())
}
