//! Exact toric combinatorics and numerical certification for special
//! Lagrangian torus fibrations on toric Calabi-Yau manifolds.
//!
//! The exact side (lattices, cones, moment polytopes, discriminant graphs,
//! Minkowski decompositions, tropical curves) uses arbitrary-precision
//! rationals throughout. The numerical side (amoeba sampling, special
//! Lagrangian residuals, Hessian potentials) uses `f64`.

pub mod amoeba;
pub mod cones;
pub mod deformations;
pub mod error;
pub mod fibration;
pub mod hessian;
pub mod lattice;
pub mod moment;
pub mod par;
pub mod polyhedral;
pub mod slag;
pub mod tropical;

pub use error::{Error, Result};
pub use par::Execution;
