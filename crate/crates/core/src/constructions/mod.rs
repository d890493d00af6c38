//! Generators for the model sets and measures.

pub mod dyadic;
pub mod ifs;
pub mod lattice;
pub mod sparse;
pub mod sphere_net;

pub use dyadic::{
    block_constraints, dyadic_measure, dyadic_word_sample, exceptional_set_membership,
    parabola_lift_measure, pi_encode, verify_digit_lemma, BitWord, BlockTag, DyadicRational,
};
pub use ifs::{ifs_atoms, ifs_chaos_sample, IfsSpec, SimilarityMap};
pub use lattice::LatticeSphere;
pub use sparse::{ball_covering_radius, dense_ball_atoms, sparse_atoms};
pub use sphere_net::{
    sphere_net, sphere_net_union, NetMethod, SeparationLaw, ShellLaws, SphereNet, SphereNetSpec,
};
