//! Finite-volume discrete-velocity solver for the reduced Shakhov system on
//! a structured Cartesian mesh.
//!
//! The default update is DUGKS: cells carry the auxiliary distribution
//! `f̃ = f − (Δt/2)Ω`, faces are reconstructed at `t + Δt/2` along the
//! characteristic with van Leer limited slopes, and the face collision is
//! treated implicitly. A first-order upwind scheme with implicit collision is
//! kept behind [`Scheme::Upwind`].
//!
//! Conserved moments `(ρ, ρu, ρE)` are advanced alongside the distributions
//! by the moment fluxes of the same face distributions, so the macroscopic
//! state obeys a discrete conservation law exactly up to roundoff.

mod boundary;
mod checkpoint;
mod engine;
mod field;
mod mesh;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use boundary::{apply_boundary, BoundaryCondition, PreparedBoundary};
pub use checkpoint::Checkpoint;
pub use engine::{RunSummary, Solver, StepReport};
pub use field::{initialize, DistributionField};
pub use mesh::{BoundarySpec, CellKind, Mesh2D, Side};

use crate::quadrature::VelocitySet;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("solver diverged at step {step}: {reason}")]
    Divergence { step: u64, reason: String },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Dugks,
    Upwind,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Dugks => "dugks",
            Scheme::Upwind => "upwind",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub cfl: f64,
    pub steady_tol: f64,
    pub max_steps: u64,
    pub report_every: u64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "one")]
    pub threads: usize,
}

fn one() -> usize {
    1
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl: 0.8,
            steady_tol: 1e-6,
            max_steps: 100_000,
            report_every: 100,
            scheme: Scheme::Dugks,
            threads: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let fail = |msg: String| Err(SolverError::Configuration(msg));
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return fail(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.steady_tol > 0.0 && self.steady_tol.is_finite()) {
            return fail(format!(
                "steady_tol must be positive, got {}",
                self.steady_tol
            ));
        }
        if self.report_every == 0 {
            return fail("report_every must be positive".into());
        }
        if self.threads == 0 {
            return fail("threads must be positive".into());
        }
        Ok(())
    }
}

/// `Δt = cfl · min(dx, dy) / max_k(|ξ_x| + |ξ_y|)`.
pub fn time_step_size(mesh: &Mesh2D, vs: &VelocitySet, cfl: f64) -> f64 {
    cfl * mesh.dx().min(mesh.dy()) / vs.max_speed_l1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::newton_cotes_set;

    #[test]
    fn step_size_formula() {
        let mesh = Mesh2D::uniform(60, 60, 1.0, 1.0, [0.0; 2]).unwrap();
        // Max |ξx| + |ξy| on the [−2, 2]² grid is 4.
        let vs = newton_cotes_set(5, 2.0).unwrap();
        assert!((time_step_size(&mesh, &vs, 0.5) - 1.0 / 480.0).abs() < 1e-18);
        let fast = newton_cotes_set(5, 4.0).unwrap();
        assert!((time_step_size(&mesh, &fast, 0.5) - 0.5 / 480.0).abs() < 1e-18);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            cfl: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            steady_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
