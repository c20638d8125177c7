//! Velocity-space quadrature.
//!
//! The ATGJ rule integrates against the bell-shaped weight
//! `ω(ξ) = [1 − (2/π)·atan χ]^α / (1 + χ²)`, `χ = |ξ|²/(λT₀)`. Under the polar
//! map `ξ = R(r)(cos θ, sin θ)` with `R(r) = sqrt(λT₀ tan(πr/2))` the plane
//! integral becomes `(π/4)λT₀ ∫₀¹ (1−r)^α ∫₀^{2π} f dθ dr`, which is
//! discretised by a Gauss–Jacobi rule in `r` and a periodic trapezoid in `θ`.

mod angular;
mod jacobi;
mod newton_cotes;
mod radial;
pub mod tridiag;
mod velocity_set;
mod weight;

pub use angular::{angular_rule, AngularRule};
pub use jacobi::{jacobi_recurrence, RecurrenceCoeffs};
pub use newton_cotes::newton_cotes_set;
pub use radial::{golub_welsch, radial_map, radial_rule, RadialRule};
pub use velocity_set::{build_velocity_set, RuleKind, VelocitySet};
pub use weight::{weight_function, WeightParams};

use thiserror::Error;

/// Largest radial coordinate accepted by the radial map before `tan(πr/2)`
/// is considered to have left the representable range.
pub const RADIAL_NODE_LIMIT: f64 = 1.0 - 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("radial coordinate r = {0} outside (0, 1)")]
    Domain(f64),
    #[error("radial node r = {0} too close to 1, tan(pi r / 2) would overflow")]
    NodeAtBoundary(f64),
    #[error("tridiagonal eigensolver did not converge (order {order}, alpha = {alpha})")]
    Eigensolver { order: usize, alpha: f64 },
    #[error("integrand is not finite at node {node} (xi = ({xi_x}, {xi_y})): {value}")]
    NonFinite {
        node: usize,
        xi_x: f64,
        xi_y: f64,
        value: f64,
    },
}

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> QuadratureError {
    QuadratureError::InvalidParameter {
        name,
        value,
        reason,
    }
}
