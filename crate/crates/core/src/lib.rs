//! Arctangent Gauss–Jacobi (ATGJ) velocity-space quadrature and a compact
//! two-dimensional discrete-velocity solver for the reduced Shakhov model.
//!
//! The crate is organised bottom-up:
//!
//! * [`quadrature`] builds the velocity sets: the parameterised weight
//!   function, the Gauss–Jacobi radial rule (Golub–Welsch on a symmetric
//!   tridiagonal matrix), the periodic angular rule and the composite-Simpson
//!   Newton–Cotes comparison rule.
//! * [`kinetic`] holds the gas physics: equilibria, Shakhov correction,
//!   moments and relaxation time, written against any [`VelocitySet`].
//! * [`solver`] advances the reduced distributions on a structured mesh
//!   with the DUGKS update, diffuse walls, freestream and outflow faces.
//! * [`cases`] carries the benchmark presets, the Laplace oracle and
//!   centerline extraction.
//! * [`validate`] bundles the invariant suites used by `atgj validate`.

pub mod cases;
pub mod kinetic;
pub mod quadrature;
pub mod solver;
pub mod validate;

pub use kinetic::{DistPair, GasModel, Macroscopics};
pub use quadrature::{VelocitySet, WeightParams};
