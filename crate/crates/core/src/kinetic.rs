//! Reduced BGK–Shakhov gas physics on a discrete velocity set.
//!
//! Units: the gas constant is 1/2, so the 2D equilibrium is
//! `g^eq = ρ/(πT) exp(−|c|²/T)` and `p = ρT`. The reduced `h` carries the
//! out-of-plane translational energy plus `N` internal degrees of freedom,
//! giving `ρE = ½ρ|u|² + ((3+N)/4)ρT`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::VelocitySet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticError {
    #[error("invalid gas parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("non-positive density {0}")]
    NonPositiveDensity(f64),
    #[error("non-positive temperature {0}")]
    NonPositiveTemperature(f64),
    #[error("non-finite moment")]
    NonFinite,
}

/// Gas properties and reference scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    pub prandtl: f64,
    pub internal_dof: u32,
    pub knudsen: f64,
    /// Power-law viscosity exponent, `μ ∝ T^ω`.
    pub viscosity_exponent: f64,
    pub t_ref: f64,
    pub rho_ref: f64,
    pub l_ref: f64,
}

impl GasModel {
    /// Monatomic gas (`Pr = 2/3`, `N = 0`, `ω = 0.81`) with unit references.
    pub fn monatomic(knudsen: f64) -> Result<Self, KineticError> {
        let gm = Self {
            prandtl: 2.0 / 3.0,
            internal_dof: 0,
            knudsen,
            viscosity_exponent: 0.81,
            t_ref: 1.0,
            rho_ref: 1.0,
            l_ref: 1.0,
        };
        gm.validate()?;
        Ok(gm)
    }

    pub fn validate(&self) -> Result<(), KineticError> {
        let checks = [
            ("prandtl", self.prandtl, self.prandtl > 0.0),
            ("knudsen", self.knudsen, self.knudsen > 0.0),
            (
                "viscosity_exponent",
                self.viscosity_exponent,
                (0.5..=1.0).contains(&self.viscosity_exponent),
            ),
            ("t_ref", self.t_ref, self.t_ref > 0.0),
            ("rho_ref", self.rho_ref, self.rho_ref > 0.0),
            ("l_ref", self.l_ref, self.l_ref > 0.0),
        ];
        for (name, value, ok) in checks {
            if !(ok && value.is_finite()) {
                return Err(KineticError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// `(3 + N)/4`, the factor in `ρE = ½ρ|u|² + c_v ρT`.
    pub fn energy_coefficient(&self) -> f64 {
        (3.0 + self.internal_dof as f64) / 4.0
    }

    /// `μ_ref = Kn · L_ref · p_ref / sqrt(π R T_ref / 2)` with `R = 1/2`
    /// (hard-sphere mean free path).
    pub fn reference_viscosity(&self) -> f64 {
        let p_ref = self.rho_ref * self.t_ref;
        self.knudsen * self.l_ref * p_ref / (PI * 0.5 * self.t_ref / 2.0).sqrt()
    }

    pub fn viscosity(&self, temperature: f64) -> f64 {
        self.reference_viscosity() * (temperature / self.t_ref).powf(self.viscosity_exponent)
    }

    /// Fraction of the heat flux removed by one collision time: `q(f^S) = (1 − d)q`
    /// for the reduced Shakhov pair, with `d = (1 + Pr)/2` because the
    /// correction factor uses `p = ρT`. Independent of `N`.
    pub fn heat_flux_decay_factor(&self) -> f64 {
        0.5 * (1.0 + self.prandtl)
    }

    /// `τ = μ(T)/p`.
    pub fn relaxation_time_of(&self, rho: f64, temperature: f64) -> f64 {
        self.viscosity(temperature) / (rho * temperature)
    }
}

/// `ρE = ½ρ|u|² + ((3+N)/4)ρT`.
pub fn energy_density(rho: f64, u: [f64; 2], temperature: f64, internal_dof: u32) -> f64 {
    0.5 * rho * (u[0] * u[0] + u[1] * u[1]) + (3.0 + internal_dof as f64) / 4.0 * rho * temperature
}

/// Inverse of [`energy_density`] for the temperature.
pub fn temperature_from_energy(rho: f64, u: [f64; 2], energy: f64, internal_dof: u32) -> f64 {
    (energy - 0.5 * rho * (u[0] * u[0] + u[1] * u[1])) * 4.0 / ((3.0 + internal_dof as f64) * rho)
}

/// Cell or face macroscopic state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Macroscopics {
    pub rho: f64,
    pub u: [f64; 2],
    /// Total energy density `ρE`.
    pub energy: f64,
    pub q: [f64; 2],
    pub temperature: f64,
    pub pressure: f64,
}

impl Macroscopics {
    pub fn from_primitive(
        rho: f64,
        u: [f64; 2],
        temperature: f64,
        q: [f64; 2],
        gm: &GasModel,
    ) -> Result<Self, KineticError> {
        check_state(rho, temperature)?;
        Ok(Self {
            rho,
            u,
            energy: energy_density(rho, u, temperature, gm.internal_dof),
            q,
            temperature,
            pressure: rho * temperature,
        })
    }

    pub fn at_rest(rho: f64, temperature: f64, gm: &GasModel) -> Result<Self, KineticError> {
        Self::from_primitive(rho, [0.0, 0.0], temperature, [0.0, 0.0], gm)
    }

    /// From `(ρ, ρu, ρE)` and a heat flux.
    pub fn from_conserved(
        rho: f64,
        momentum: [f64; 2],
        energy: f64,
        q: [f64; 2],
        gm: &GasModel,
    ) -> Result<Self, KineticError> {
        if !(rho.is_finite() && momentum.iter().all(|m| m.is_finite()) && energy.is_finite()) {
            return Err(KineticError::NonFinite);
        }
        if rho <= 0.0 {
            return Err(KineticError::NonPositiveDensity(rho));
        }
        let u = [momentum[0] / rho, momentum[1] / rho];
        let temperature = temperature_from_energy(rho, u, energy, gm.internal_dof);
        check_state(rho, temperature)?;
        Ok(Self {
            rho,
            u,
            energy,
            q,
            temperature,
            pressure: rho * temperature,
        })
    }

    pub fn conserved(&self) -> [f64; 4] {
        [
            self.rho,
            self.rho * self.u[0],
            self.rho * self.u[1],
            self.energy,
        ]
    }
}

fn check_state(rho: f64, temperature: f64) -> Result<(), KineticError> {
    if !(rho.is_finite() && temperature.is_finite()) {
        return Err(KineticError::NonFinite);
    }
    if rho <= 0.0 {
        return Err(KineticError::NonPositiveDensity(rho));
    }
    if temperature <= 0.0 {
        return Err(KineticError::NonPositiveTemperature(temperature));
    }
    Ok(())
}

/// Reduced distribution pair over the nodes of a velocity set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DistPair {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

/// Pointwise evaluator of the Shakhov pair `(g^S, h^S)` for one state.
#[derive(Debug, Clone, Copy)]
pub struct ShakhovKernel {
    ux: f64,
    uy: f64,
    qx: f64,
    qy: f64,
    inv_t: f64,
    norm: f64,
    g_coef: f64,
    h_coef: f64,
    h_prefactor: f64,
    h_shift: f64,
}

impl ShakhovKernel {
    pub fn new(m: &Macroscopics, gm: &GasModel) -> Self {
        let t = m.temperature;
        let p = m.rho * t;
        let n = gm.internal_dof as f64;
        let one_minus_pr = 1.0 - gm.prandtl;
        Self {
            ux: m.u[0],
            uy: m.u[1],
            qx: m.q[0],
            qy: m.q[1],
            inv_t: 1.0 / t,
            norm: m.rho / (PI * t),
            g_coef: one_minus_pr * 4.0 / (5.0 * p * t),
            h_coef: one_minus_pr * 2.0 / (5.0 * p * t),
            h_prefactor: (1.0 + n) * t / 2.0,
            h_shift: 2.0 + 2.0 * n / (1.0 + n),
        }
    }

    pub fn heat_flux(&self) -> [f64; 2] {
        [self.qx, self.qy]
    }

    /// `h^eq / g^eq = (1+N)T/2`.
    pub fn h_equilibrium_ratio(&self) -> f64 {
        self.h_prefactor
    }

    #[inline]
    pub fn equilibrium(&self, xi_x: f64, xi_y: f64) -> f64 {
        let cx = xi_x - self.ux;
        let cy = xi_y - self.uy;
        self.norm * (-(cx * cx + cy * cy) * self.inv_t).exp()
    }

    /// `(g^S, h^S)` at one node.
    #[inline]
    pub fn eval(&self, xi_x: f64, xi_y: f64) -> (f64, f64) {
        self.eval_with(xi_x, xi_y, self.equilibrium(xi_x, xi_y))
    }

    /// As [`eval`](Self::eval), reusing an already computed `g^eq` at the node.
    #[inline]
    pub fn eval_with(&self, xi_x: f64, xi_y: f64, geq: f64) -> (f64, f64) {
        let cx = xi_x - self.ux;
        let cy = xi_y - self.uy;
        let c2 = cx * cx + cy * cy;
        let cq = cx * self.qx + cy * self.qy;
        let c2t = c2 * self.inv_t;
        let g = geq * (1.0 + self.g_coef * cq * (c2t - 2.0));
        let h = self.h_prefactor * geq * (1.0 + self.h_coef * cq * (2.0 * c2t - self.h_shift));
        (g, h)
    }
}

/// Effective weights premultiplied by the conserved-moment basis.
#[derive(Debug, Clone)]
pub struct MomentKernel {
    xi_x: Vec<f64>,
    xi_y: Vec<f64>,
    w: Vec<f64>,
    w_xi_x: Vec<f64>,
    w_xi_y: Vec<f64>,
    w_half_sq: Vec<f64>,
}

impl MomentKernel {
    pub fn new(vs: &VelocitySet) -> Self {
        let w = vs.effective_weights().to_vec();
        let xi_x = vs.xi_x().to_vec();
        let xi_y = vs.xi_y().to_vec();
        Self {
            w_xi_x: w.iter().zip(&xi_x).map(|(w, x)| w * x).collect(),
            w_xi_y: w.iter().zip(&xi_y).map(|(w, y)| w * y).collect(),
            w_half_sq: w
                .iter()
                .zip(xi_x.iter().zip(&xi_y))
                .map(|(w, (x, y))| 0.5 * w * (x * x + y * y))
                .collect(),
            w,
            xi_x,
            xi_y,
        }
    }

    /// `(ρ, ρu_x, ρu_y, ρE)`.
    #[inline]
    pub fn conserved(&self, g: &[f64], h: &[f64]) -> [f64; 4] {
        let n = g.len();
        let (g, h) = (&g[..n], &h[..n]);
        let (w, wx, wy, ws) = (
            &self.w[..n],
            &self.w_xi_x[..n],
            &self.w_xi_y[..n],
            &self.w_half_sq[..n],
        );
        let mut m = [0.0; 4];
        for k in 0..n {
            let gk = g[k];
            m[0] += w[k] * gk;
            m[1] += wx[k] * gk;
            m[2] += wy[k] * gk;
            m[3] += ws[k] * gk + 0.5 * w[k] * h[k];
        }
        m
    }

    /// Heat flux of `(g − g^eq, h − κ g^eq)` about `u`, where `κ = (1+N)T/2`
    /// is the ratio `h^eq / g^eq`. Vanishes exactly on a discrete
    /// equilibrium, whatever the quadrature error of its moments.
    #[inline]
    pub fn excess_heat_flux(
        &self,
        g: &[f64],
        h: &[f64],
        geq: &[f64],
        kappa: f64,
        u: [f64; 2],
    ) -> [f64; 2] {
        let n = g.len();
        let (g, h, geq) = (&g[..n], &h[..n], &geq[..n]);
        let (w, xs, ys) = (&self.w[..n], &self.xi_x[..n], &self.xi_y[..n]);
        let mut q = [0.0; 2];
        for k in 0..n {
            let cx = xs[k] - u[0];
            let cy = ys[k] - u[1];
            let s = 0.5 * w[k] * ((cx * cx + cy * cy) * (g[k] - geq[k]) + (h[k] - kappa * geq[k]));
            q[0] += cx * s;
            q[1] += cy * s;
        }
        q
    }

    /// `q = Σ W (½ c|c|² g + ½ c h)` about the velocity `u`.
    #[inline]
    pub fn heat_flux(&self, g: &[f64], h: &[f64], u: [f64; 2]) -> [f64; 2] {
        let mut q = [0.0; 2];
        for k in 0..g.len() {
            let cx = self.xi_x[k] - u[0];
            let cy = self.xi_y[k] - u[1];
            let s = 0.5 * self.w[k] * ((cx * cx + cy * cy) * g[k] + h[k]);
            q[0] += cx * s;
            q[1] += cy * s;
        }
        q
    }
}

/// `g^eq(ξ_k)` at every node.
pub fn equilibrium_g(m: &Macroscopics, vs: &VelocitySet) -> Vec<f64> {
    let norm = m.rho / (PI * m.temperature);
    vs.xi_x()
        .iter()
        .zip(vs.xi_y())
        .map(|(x, y)| {
            let cx = x - m.u[0];
            let cy = y - m.u[1];
            norm * (-(cx * cx + cy * cy) / m.temperature).exp()
        })
        .collect()
}

/// `(g^S, h^S)` at every node.
pub fn shakhov_pair(m: &Macroscopics, gm: &GasModel, vs: &VelocitySet) -> DistPair {
    let kernel = ShakhovKernel::new(m, gm);
    let (g, h) = vs
        .xi_x()
        .iter()
        .zip(vs.xi_y())
        .map(|(&x, &y)| kernel.eval(x, y))
        .unzip();
    DistPair { g, h }
}

/// Macroscopic state of a distribution pair by plain quadrature.
pub fn moments(
    d: &DistPair,
    vs: &VelocitySet,
    gm: &GasModel,
) -> Result<Macroscopics, KineticError> {
    let kernel = MomentKernel::new(vs);
    let c = kernel.conserved(&d.g, &d.h);
    if c.iter().any(|v| !v.is_finite()) {
        return Err(KineticError::NonFinite);
    }
    if c[0] <= 0.0 {
        return Err(KineticError::NonPositiveDensity(c[0]));
    }
    let u = [c[1] / c[0], c[2] / c[0]];
    let q = kernel.heat_flux(&d.g, &d.h, u);
    Macroscopics::from_conserved(c[0], [c[1], c[2]], c[3], q, gm)
}

pub fn relaxation_time(m: &Macroscopics, gm: &GasModel) -> f64 {
    gm.relaxation_time_of(m.rho, m.temperature)
}

/// `Ω = −(f − f^S)/τ` for both distributions, with `f^S` built from `m`.
pub fn collision(d: &DistPair, m: &Macroscopics, gm: &GasModel, vs: &VelocitySet) -> DistPair {
    let tau = relaxation_time(m, gm);
    let target = shakhov_pair(m, gm, vs);
    DistPair {
        g: d.g
            .iter()
            .zip(&target.g)
            .map(|(f, s)| -(f - s) / tau)
            .collect(),
        h: d.h
            .iter()
            .zip(&target.h)
            .map(|(f, s)| -(f - s) / tau)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{build_velocity_set, newton_cotes_set, WeightParams};
    use approx::assert_relative_eq;

    fn gas() -> GasModel {
        GasModel::monatomic(0.1).unwrap()
    }

    fn dense() -> VelocitySet {
        newton_cotes_set(241, 9.0).unwrap()
    }

    fn kn0001_set() -> VelocitySet {
        build_velocity_set(
            8,
            16,
            0.0,
            &WeightParams::maxwellian_matched(500.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn equilibrium_peak() {
        let vs = newton_cotes_set(3, 1.0).unwrap();
        let m = Macroscopics::at_rest(1.0, 1.0, &gas()).unwrap();
        let g = equilibrium_g(&m, &vs);
        assert_relative_eq!(g[4], 0.3183098862, max_relative = 1e-10);
    }

    #[test]
    fn equilibrium_linear_in_density() {
        let vs = kn0001_set();
        let m1 = Macroscopics::from_primitive(1.0, [0.1, -0.2], 0.8, [0.0; 2], &gas()).unwrap();
        let m2 = Macroscopics::from_primitive(2.0, [0.1, -0.2], 0.8, [0.0; 2], &gas()).unwrap();
        for (a, b) in equilibrium_g(&m1, &vs).iter().zip(equilibrium_g(&m2, &vs)) {
            assert_relative_eq!(2.0 * a, b, max_relative = 1e-15);
        }
    }

    #[test]
    fn equilibrium_mass_dense_and_atgj() {
        let m = Macroscopics::from_primitive(1.0, [0.1, 0.0], 1.0, [0.0; 2], &gas()).unwrap();
        for vs in [dense(), kn0001_set()] {
            let g = equilibrium_g(&m, &vs);
            let mass: f64 = g
                .iter()
                .zip(vs.effective_weights())
                .map(|(g, w)| g * w)
                .sum();
            assert!((mass - 1.0).abs() < 1e-6, "{mass}");
        }
    }

    #[test]
    fn shakhov_without_heat_flux_is_equilibrium() {
        let vs = kn0001_set();
        let gm = gas();
        let m = Macroscopics::from_primitive(1.3, [0.2, 0.1], 0.9, [0.0; 2], &gm).unwrap();
        let geq = equilibrium_g(&m, &vs);
        let pair = shakhov_pair(&m, &gm, &vs);
        for k in 0..vs.len() {
            assert_relative_eq!(pair.g[k], geq[k], max_relative = 1e-15);
            assert_relative_eq!(pair.h[k], 0.9 / 2.0 * geq[k], max_relative = 1e-15);
        }
        // Pr = 1 removes the correction even with a heat flux.
        let mut gm1 = gm;
        gm1.prandtl = 1.0;
        let mq = Macroscopics::from_primitive(1.3, [0.2, 0.1], 0.9, [0.05, -0.02], &gm1).unwrap();
        let pair = shakhov_pair(&mq, &gm1, &vs);
        for k in 0..vs.len() {
            assert_relative_eq!(pair.g[k], geq[k], max_relative = 1e-15);
        }
    }

    #[test]
    fn shakhov_point_value() {
        let gm = gas();
        let m = Macroscopics::from_primitive(1.0, [0.0; 2], 1.0, [0.01, 0.0], &gm).unwrap();
        let (g, _) = ShakhovKernel::new(&m, &gm).eval(1.0, 0.0);
        let geq = (-1.0f64).exp() / PI;
        assert_relative_eq!(
            g,
            geq * (1.0 + (1.0 / 3.0) * (4.0 * 0.01 / 5.0) * (1.0 - 2.0)),
            max_relative = 1e-14
        );
    }

    #[test]
    fn equilibrium_moments() {
        let gm = gas();
        let m = Macroscopics::at_rest(1.0, 1.0, &gm).unwrap();
        for vs in [dense(), kn0001_set()] {
            let got = moments(&shakhov_pair(&m, &gm, &vs), &vs, &gm).unwrap();
            assert!((got.rho - 1.0).abs() < 1e-6);
            assert!((got.energy - 0.75).abs() < 1e-5);
            assert!(got.u[0].abs() < 1e-10 && got.u[1].abs() < 1e-10);
            assert!(got.q[0].abs() < 1e-10 && got.q[1].abs() < 1e-10);
        }
    }

    #[test]
    fn shakhov_round_trip_is_moment_neutral() {
        let gm = gas();
        let vs = dense();
        let m = Macroscopics::from_primitive(1.2, [0.3, -0.1], 1.1, [0.02, 0.01], &gm).unwrap();
        let geq_pair = shakhov_pair(&Macroscopics { q: [0.0; 2], ..m }, &gm, &vs);
        let s_pair = shakhov_pair(&m, &gm, &vs);
        let a = moments(&geq_pair, &vs, &gm).unwrap();
        let b = moments(&s_pair, &vs, &gm).unwrap();
        assert!((a.rho - b.rho).abs() < 1e-10);
        assert!((a.energy - b.energy).abs() < 1e-10);
        assert!((a.u[0] - b.u[0]).abs() < 1e-10);
        assert!((b.rho - m.rho).abs() < 1e-8);
        assert!((b.u[0] - m.u[0]).abs() < 1e-8);
        assert!((b.energy - m.energy).abs() < 1e-8);
        // With p = ρT in the correction factor the pair carries ½(1 − Pr)q.
        assert!((b.q[0] - (1.0 - gm.heat_flux_decay_factor()) * m.q[0]).abs() < 1e-8);
        assert!((b.q[1] - (1.0 - gm.heat_flux_decay_factor()) * m.q[1]).abs() < 1e-8);
    }

    #[test]
    fn temperature_energy_inverse() {
        for &(rho, u, t) in &[
            (1.0, [0.0, 0.0], 1.0),
            (0.3, [4.56, 0.1], 0.7),
            (2.5, [-0.2, 0.3], 12.0),
        ] {
            for n in [0u32, 2] {
                let e = energy_density(rho, u, t, n);
                let back = temperature_from_energy(rho, u, e, n);
                assert!(((back - t) / t).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn relaxation_time_scalings() {
        let gm = gas();
        let m = Macroscopics::at_rest(1.0, 1.0, &gm).unwrap();
        assert_relative_eq!(
            relaxation_time(&m, &gm),
            gm.reference_viscosity(),
            max_relative = 1e-15
        );
        let mut gm2 = gm;
        gm2.knudsen *= 2.0;
        assert_relative_eq!(
            relaxation_time(&m, &gm2),
            2.0 * relaxation_time(&m, &gm),
            max_relative = 1e-15
        );
        let mut gm5 = gm;
        gm5.viscosity_exponent = 0.5;
        assert_relative_eq!(
            gm5.viscosity(4.0),
            2.0 * gm5.reference_viscosity(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn collision_fixed_point_and_neutrality() {
        let gm = gas();
        let vs = dense();
        let m = Macroscopics::from_primitive(1.0, [0.1, 0.05], 1.0, [0.01, 0.0], &gm).unwrap();
        let eq = shakhov_pair(&m, &gm, &vs);
        let omega = collision(&eq, &m, &gm, &vs);
        assert!(omega.g.iter().chain(&omega.h).all(|v| *v == 0.0));

        // A perturbed distribution: collision conserves mass, momentum, energy.
        let perturbed = DistPair {
            g: eq
                .g
                .iter()
                .zip(vs.xi_x())
                .map(|(g, x)| g * (1.0 + 0.1 * x))
                .collect(),
            h: eq.h.clone(),
        };
        let mm = moments(&perturbed, &vs, &gm).unwrap();
        let omega = collision(&perturbed, &mm, &gm, &vs);
        let kernel = MomentKernel::new(&vs);
        let c = kernel.conserved(&omega.g, &omega.h);
        for v in c {
            assert!(v.abs() < 1e-9, "{c:?}");
        }
    }

    #[test]
    fn collision_is_affine() {
        let gm = gas();
        let vs = kn0001_set();
        let m = Macroscopics::at_rest(1.0, 1.0, &gm).unwrap();
        let tau = relaxation_time(&m, &gm);
        let s = shakhov_pair(&m, &gm, &vs);
        let g1: Vec<f64> = s.g.iter().map(|g| 1.1 * g).collect();
        let g2: Vec<f64> =
            s.g.iter()
                .enumerate()
                .map(|(k, g)| g * (1.0 + 0.01 * k as f64))
                .collect();
        let (a, b) = (0.3, 1.4);
        let mix: Vec<f64> = g1.iter().zip(&g2).map(|(x, y)| a * x + b * y).collect();
        let om = |g: &Vec<f64>| {
            collision(
                &DistPair {
                    g: g.clone(),
                    h: s.h.clone(),
                },
                &m,
                &gm,
                &vs,
            )
            .g
        };
        let (o1, o2, omix) = (om(&g1), om(&g2), om(&mix));
        for k in 0..vs.len() {
            let expected = a * o1[k] + b * o2[k] - (a + b - 1.0) * s.g[k] / tau;
            assert!((omix[k] - expected).abs() < 1e-12 * s.g[k].abs().max(1e-3) / tau);
        }
    }

    #[test]
    fn invalid_states_rejected() {
        let gm = gas();
        assert!(Macroscopics::at_rest(1.0, 0.0, &gm).is_err());
        assert!(Macroscopics::at_rest(-1.0, 1.0, &gm).is_err());
        assert!(GasModel::monatomic(0.0).is_err());
        assert!(matches!(
            Macroscopics::from_conserved(1.0, [2.0, 0.0], 1.0, [0.0; 2], &gm),
            Err(KineticError::NonPositiveTemperature(_))
        ));
    }
}
