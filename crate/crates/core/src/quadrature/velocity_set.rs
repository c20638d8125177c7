use std::f64::consts::FRAC_PI_4;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::angular::angular_rule;
use super::radial::radial_rule;
use super::weight::WeightParams;
use super::QuadratureError;

/// How a [`VelocitySet`] was built. Enough to rebuild it bit-identically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RuleKind {
    Atgj {
        n_radial: usize,
        n_theta: usize,
        theta0: f64,
        params: WeightParams,
    },
    NewtonCotes {
        points_per_axis: usize,
        half_width: f64,
    },
}

impl RuleKind {
    pub fn build(&self) -> Result<VelocitySet, QuadratureError> {
        match *self {
            RuleKind::Atgj {
                n_radial,
                n_theta,
                theta0,
                params,
            } => build_velocity_set(n_radial, n_theta, theta0, &params),
            RuleKind::NewtonCotes {
                points_per_axis,
                half_width,
            } => super::newton_cotes_set(points_per_axis, half_width),
        }
    }
}

/// Discrete velocity nodes with raw and effective weights.
///
/// Raw weights integrate against the rule's weight function,
/// `Σ w_k f(ξ_k) ≈ ∫ ω f dξ`. Effective weights `W_k = w_k / ω(ξ_k)`
/// integrate plain functions, `Σ W_k F(ξ_k) ≈ ∫ F dξ`; the solver only uses
/// these. For Newton–Cotes the weight function is 1 and both coincide.
///
/// ATGJ node order is radial-major: `k = i·N_θ + j` for radial index `i` and
/// angular index `j`. Distribution arrays in the solver follow this order.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocitySet {
    kind: RuleKind,
    xi_x: Vec<f64>,
    xi_y: Vec<f64>,
    raw: Vec<f64>,
    eff: Vec<f64>,
}

pub fn build_velocity_set(
    n_radial: usize,
    n_theta: usize,
    theta0: f64,
    p: &WeightParams,
) -> Result<VelocitySet, QuadratureError> {
    let radial = radial_rule(n_radial, p)?;
    let angular = angular_rule(n_theta, theta0)?;
    let prefactor = FRAC_PI_4 * p.scale();

    let k = n_radial * n_theta;
    let mut set = VelocitySet {
        kind: RuleKind::Atgj {
            n_radial,
            n_theta,
            theta0,
            params: *p,
        },
        xi_x: Vec::with_capacity(k),
        xi_y: Vec::with_capacity(k),
        raw: Vec::with_capacity(k),
        eff: Vec::with_capacity(k),
    };
    let directions: Vec<(f64, f64)> = if theta0 == 0.0 {
        (1..=n_theta)
            .map(|j| folded_direction(j, n_theta))
            .collect()
    } else {
        angular
            .nodes
            .iter()
            .map(|theta| {
                let (s, c) = theta.sin_cos();
                (snap(c), snap(s))
            })
            .collect()
    };

    for (&radius, &w_r) in radial.radii.iter().zip(&radial.weights) {
        let omega = p.weight_at_speed_sq(radius * radius);
        let w = prefactor * w_r * angular.weight;
        for &(c, s) in &directions {
            set.xi_x.push(radius * c);
            set.xi_y.push(radius * s);
            set.raw.push(w);
            set.eff.push(w / omega);
        }
    }
    Ok(set)
}

/// `(cos, sin)` of `2πj/n`, evaluated at the equivalent angle in
/// `[0, π/2]` and reflected, so directions that mirror each other across
/// either axis are exact negations of each other.
fn folded_direction(j: usize, n: usize) -> (f64, f64) {
    let mut m = j % n;
    let mut sy = 1.0;
    if 2 * m > n {
        m = n - m;
        sy = -1.0;
    }
    // Angle 2πm/n = πa/n in the first quadrant, reflected into the second.
    let (a, sx) = if 4 * m > n {
        (n - 2 * m, -1.0)
    } else {
        (2 * m, 1.0)
    };
    let (s, c) = (std::f64::consts::PI * a as f64 / n as f64).sin_cos();
    // Axis-aligned directions must be exactly tangential to grid faces.
    (sx * snap(c), sy * snap(s))
}

fn snap(v: f64) -> f64 {
    if v.abs() < 1e-14 {
        0.0
    } else {
        v
    }
}

impl VelocitySet {
    pub(super) fn from_parts(
        kind: RuleKind,
        xi_x: Vec<f64>,
        xi_y: Vec<f64>,
        raw: Vec<f64>,
        eff: Vec<f64>,
    ) -> Self {
        Self {
            kind,
            xi_x,
            xi_y,
            raw,
            eff,
        }
    }

    pub fn kind(&self) -> &RuleKind {
        &self.kind
    }

    /// Weight-function parameters, `None` for Newton–Cotes.
    pub fn params(&self) -> Option<&WeightParams> {
        match &self.kind {
            RuleKind::Atgj { params, .. } => Some(params),
            RuleKind::NewtonCotes { .. } => None,
        }
    }

    pub fn len(&self) -> usize {
        self.xi_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_x.is_empty()
    }

    pub fn xi_x(&self) -> &[f64] {
        &self.xi_x
    }

    pub fn xi_y(&self) -> &[f64] {
        &self.xi_y
    }

    pub fn raw_weights(&self) -> &[f64] {
        &self.raw
    }

    pub fn effective_weights(&self) -> &[f64] {
        &self.eff
    }

    pub fn node(&self, k: usize) -> (f64, f64) {
        (self.xi_x[k], self.xi_y[k])
    }

    pub fn total_raw_weight(&self) -> f64 {
        self.raw.iter().sum()
    }

    /// Analytic total weight of the rule: `π²λT₀/(2(α+1))` for ATGJ,
    /// `(2U)²` for Newton–Cotes.
    pub fn analytic_total_weight(&self) -> f64 {
        match &self.kind {
            RuleKind::Atgj { params, .. } => params.total_mass(),
            RuleKind::NewtonCotes { half_width, .. } => (2.0 * half_width).powi(2),
        }
    }

    /// Largest node speed `max_k |ξ_k|`.
    pub fn max_radius(&self) -> f64 {
        self.xi_x
            .iter()
            .zip(&self.xi_y)
            .map(|(x, y)| x.hypot(*y))
            .fold(0.0, f64::max)
    }

    /// `max_k (|ξ_x,k| + |ξ_y,k|)`, the advection bound used for the time step.
    pub fn max_speed_l1(&self) -> f64 {
        self.xi_x
            .iter()
            .zip(&self.xi_y)
            .map(|(x, y)| x.abs() + y.abs())
            .fold(0.0, f64::max)
    }

    /// `Σ_k w_k f(ξ_k)` ≈ `∫ ω f dξ`.
    pub fn integrate_weighted(&self, f: impl Fn(f64, f64) -> f64) -> Result<f64, QuadratureError> {
        self.sum_with(&self.raw, f)
    }

    /// `Σ_k W_k F(ξ_k)` ≈ `∫ F dξ`.
    pub fn integrate_plain(&self, f: impl Fn(f64, f64) -> f64) -> Result<f64, QuadratureError> {
        self.sum_with(&self.eff, f)
    }

    fn sum_with(
        &self,
        weights: &[f64],
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<f64, QuadratureError> {
        let mut acc = 0.0;
        for (k, &w) in weights.iter().enumerate() {
            let (x, y) = self.node(k);
            let value = f(x, y);
            if !value.is_finite() {
                return Err(QuadratureError::NonFinite {
                    node: k,
                    xi_x: x,
                    xi_y: y,
                    value,
                });
            }
            acc += w * value;
        }
        Ok(acc)
    }

    /// Index map `k → k'` with `ξ_k' = (−ξ_x,k, ξ_y,k)` (mirror across the
    /// vertical axis), when the node set has that symmetry.
    pub fn mirror_x(&self) -> Option<Vec<usize>> {
        self.match_nodes(|x, y| (-x, y))
    }

    /// Index map for `ξ → (ξ_x, −ξ_y)`.
    pub fn mirror_y(&self) -> Option<Vec<usize>> {
        self.match_nodes(|x, y| (x, -y))
    }

    fn match_nodes(&self, map: impl Fn(f64, f64) -> (f64, f64)) -> Option<Vec<usize>> {
        let scale = self.max_radius().max(1.0);
        let tol = 1e-12 * scale;
        let mut out = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            let (tx, ty) = map(self.xi_x[k], self.xi_y[k]);
            let hit = (0..self.len()).find(|&m| {
                (self.xi_x[m] - tx).abs() <= tol
                    && (self.xi_y[m] - ty).abs() <= tol
                    && (self.eff[m] - self.eff[k]).abs() <= 1e-12 * self.eff[k].abs()
            })?;
            out.push(hit);
        }
        Some(out)
    }

    /// Writes `k,xi_x,xi_y,w_raw,w_eff` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "k,xi_x,xi_y,w_raw,w_eff")?;
        for k in 0..self.len() {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                k, self.xi_x[k], self.xi_y[k], self.raw[k], self.eff[k]
            )?;
        }
        Ok(())
    }
}
