//! Numerical laboratory for linear projections and embeddings of fractal
//! sets: covering-number dimension estimates, explicit constructions with
//! known dimensions, embedding diagnostics (collisions, Hölder exponents,
//! decoders) and slicing of atomic measures.

pub mod constructions;
pub mod dimension;
pub mod embedding;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod linalg;
pub mod points;
pub mod random;
pub mod slicing;

pub use error::{Error, Result};
pub use linalg::{LinearOperator, Plane};
pub use points::{AtomicMeasure, PointSet};
