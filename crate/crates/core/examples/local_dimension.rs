//! Typical local dimension of the dyadic measure: one free bit per two-bit
//! block, a one with probability p. Expected H(p)/ln 4.

use projlab::constructions::dyadic_measure;
use projlab::dimension::{dyadic_scales, typical_local_dimension};

fn main() -> projlab::Result<()> {
    for p in [0.1, 0.25, 0.4] {
        let m = dyadic_measure(p, 10)?;
        let t = typical_local_dimension(&m, &dyadic_scales(4, 14), 256, 7)?;
        let h = -p * p.ln() - (1.0 - p) * (1.0 - p).ln();
        println!(
            "p = {p}: mean {:.4}, median {:.4}, sd {:.4}; expected {:.4}",
            t.mean,
            t.median,
            t.std_dev,
            h / 4f64.ln()
        );
    }
    Ok(())
}
