use std::f64::consts::TAU;

use super::{invalid, QuadratureError};

/// Periodic trapezoid rule in the polar angle:
/// `θ_j = θ₀ + 2πj/N_θ`, `j = 1..N_θ`, uniform weight `2π/N_θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularRule {
    pub theta0: f64,
    pub nodes: Vec<f64>,
    pub weight: f64,
}

impl AngularRule {
    pub fn count(&self) -> usize {
        self.nodes.len()
    }
}

pub fn angular_rule(count: usize, theta0: f64) -> Result<AngularRule, QuadratureError> {
    if count < 3 {
        return Err(invalid(
            "N_theta",
            count as f64,
            "at least 3 directions are needed",
        ));
    }
    if !theta0.is_finite() {
        return Err(invalid("theta0", theta0, "must be finite"));
    }
    let step = TAU / count as f64;
    Ok(AngularRule {
        theta0,
        nodes: (1..=count).map(|j| theta0 + step * j as f64).collect(),
        weight: step,
    })
}
