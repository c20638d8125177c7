//! Invariant suites behind `atgj validate`.
//!
//! Every check reduces to one non-negative error figure compared against a
//! fixed tolerance; a check passes when the error is finite and strictly
//! below it. Build failures surface as a NaN error.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::cases::TABLE1_SETTINGS;
use crate::kinetic::{moments, shakhov_pair, GasModel, Macroscopics};
use crate::quadrature::{
    build_velocity_set, newton_cotes_set, radial_rule, VelocitySet, WeightParams,
};
use crate::solver::{BoundaryCondition, BoundarySpec, Mesh2D, Scheme, Solver, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Quadrature,
    Kinetic,
    Solver,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Quadrature, Suite::Kinetic, Suite::Solver];

    pub fn label(self) -> &'static str {
        match self {
            Suite::Quadrature => "quadrature",
            Suite::Kinetic => "kinetic",
            Suite::Solver => "solver",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.label() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub name: &'static str,
    pub error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error.is_finite() && self.error < self.tolerance
    }
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    /// Restrict to one suite.
    pub only: Option<Suite>,
    /// Added to every measured error; a test hook that must turn checks red.
    pub inject: f64,
}

pub fn run(opts: &Options) -> Vec<Check> {
    let mut out = Vec::new();
    for suite in Suite::ALL {
        if opts.only.is_some_and(|s| s != suite) {
            continue;
        }
        let checks: Vec<(&'static str, f64, f64)> = match suite {
            Suite::Quadrature => quadrature_checks(),
            Suite::Kinetic => kinetic_checks(),
            Suite::Solver => solver_checks(),
        };
        out.extend(checks.into_iter().map(|(name, error, tolerance)| Check {
            suite,
            name,
            error: error + opts.inject,
            tolerance,
        }));
    }
    out
}

/// `∫₀¹ r^m (1−r)^α dr = m! / ((α+1)(α+2)…(α+m+1))`.
pub fn beta_moment(m: u32, alpha: f64) -> f64 {
    (1..=m).fold(1.0 / (alpha + 1.0), |acc, j| {
        acc * j as f64 / (alpha + 1.0 + j as f64)
    })
}

pub const EXACTNESS_ALPHAS: [f64; 3] = [0.5, FRAC_PI_2 * 5.0, FRAC_PI_2 * 500.0];

fn or_nan(r: Result<f64, impl std::fmt::Debug>) -> f64 {
    r.unwrap_or(f64::NAN)
}

/// Largest relative error of the radial rule on `r^m`, `m ≤ 2n − 1`, over
/// `n = 1..=10` and the exactness α values.
pub fn radial_exactness_error() -> f64 {
    let mut worst: f64 = 0.0;
    for alpha in EXACTNESS_ALPHAS {
        let p = match WeightParams::new(alpha, 1.0, 1.0) {
            Ok(p) => p,
            Err(_) => return f64::NAN,
        };
        for n in 1..=10usize {
            let Ok(rule) = radial_rule(n, &p) else {
                return f64::NAN;
            };
            for m in 0..2 * n as u32 {
                let exact = beta_moment(m, alpha);
                let got = rule.integrate(|r| r.powi(m as i32));
                worst = worst.max(((got - exact) / exact).abs());
            }
        }
    }
    worst
}

/// Largest `|Σ w_r,i − 1/(α+1)|` over the same rules.
pub fn radial_normalization_error() -> f64 {
    let mut worst: f64 = 0.0;
    for alpha in EXACTNESS_ALPHAS {
        for n in 1..=10usize {
            let rule = WeightParams::new(alpha, 1.0, 1.0).and_then(|p| radial_rule(n, &p));
            let Ok(rule) = rule else { return f64::NAN };
            let sum: f64 = rule.weights.iter().sum();
            worst = worst.max((sum - 1.0 / (alpha + 1.0)).abs());
        }
    }
    worst
}

/// Largest relative gap between `Σ w_k` and `π²λT₀/(2(α+1))` over the
/// tabulated cavity sets and the cylinder set.
pub fn total_weight_error() -> f64 {
    let mut sets: Vec<(usize, usize, f64, f64)> = TABLE1_SETTINGS
        .iter()
        .map(|&(_, n, nt, lambda)| (n, nt, FRAC_PI_2 * lambda, lambda))
        .collect();
    sets.push((20, 60, 20.0, 40.0 / PI + 20.0));
    let mut worst: f64 = 0.0;
    for (n, nt, alpha, lambda) in sets {
        let vs =
            WeightParams::new(alpha, lambda, 1.0).and_then(|p| build_velocity_set(n, nt, 0.0, &p));
        let Ok(vs) = vs else { return f64::NAN };
        let exact = PI * PI * lambda / (2.0 * (alpha + 1.0));
        worst = worst.max(((vs.total_raw_weight() - exact) / exact).abs());
    }
    worst
}

/// Sup-norm gap between the matched weight and `exp(−|ξ|²)` on `|ξ| ≤ 4`,
/// sampled on a fine radial grid (the weight is isotropic).
pub fn maxwellian_gap(lambda: f64) -> f64 {
    let Ok(p) = WeightParams::maxwellian_matched(lambda, 1.0) else {
        return f64::NAN;
    };
    (0..=4000)
        .map(|i| {
            let s = 4.0 * i as f64 / 4000.0;
            (p.weight_at_speed_sq(s * s) - (-s * s).exp()).abs()
        })
        .fold(0.0, f64::max)
}

pub const LADDER: [f64; 4] = [5.0, 50.0, 500.0, 5000.0];

fn quadrature_checks() -> Vec<(&'static str, f64, f64)> {
    let gaps: Vec<f64> = LADDER.iter().map(|&l| maxwellian_gap(l)).collect();
    let worst_ratio = gaps.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let nc = newton_cotes_set(201, 4.0).map(|vs| ((vs.total_raw_weight() - 64.0) / 64.0).abs());
    vec![
        (
            "radial rule exact to degree 2n-1",
            radial_exactness_error(),
            1e-11,
        ),
        (
            "radial weights sum to 1/(alpha+1)",
            radial_normalization_error(),
            1e-13,
        ),
        ("total weight identity", total_weight_error(), 1e-12),
        ("Maxwellian ladder decreasing (max ratio)", worst_ratio, 1.0),
        ("Maxwellian gap at lambda = 5000", gaps[3], 1e-3),
        ("Newton-Cotes total weight", or_nan(nc), 1e-13),
    ]
}

fn kn_set(lambda: f64, n_theta: usize) -> Option<VelocitySet> {
    WeightParams::maxwellian_matched(lambda, 1.0)
        .and_then(|p| build_velocity_set(8, n_theta, 0.0, &p))
        .ok()
}

/// `(ρ error, |u|, ρE error)` of the discrete equilibrium at rest on the
/// 8×16, λ = 500 set.
pub fn rest_moment_errors() -> [f64; 3] {
    let gm = GasModel::monatomic(0.001).expect("positive Kn");
    let (Some(vs), Ok(m)) = (kn_set(500.0, 16), Macroscopics::at_rest(1.0, 1.0, &gm)) else {
        return [f64::NAN; 3];
    };
    match moments(&shakhov_pair(&m, &gm, &vs), &vs, &gm) {
        Ok(r) => [
            (r.rho - 1.0).abs(),
            r.u[0].hypot(r.u[1]),
            (r.energy - 0.75).abs(),
        ],
        Err(_) => [f64::NAN; 3],
    }
}

/// Largest relative deviation of `(ρ, u, T, q)` after a Shakhov pair built
/// from a moving, heat-conducting state is integrated back. The pair carries
/// the relaxed heat flux `(1 − d) q`, `d` the heat-flux decay factor.
pub fn round_trip_error(vs: &VelocitySet) -> f64 {
    let gm = GasModel::monatomic(0.1).expect("positive Kn");
    let Ok(m) = Macroscopics::from_primitive(1.3, [0.4, -0.2], 1.1, [0.05, -0.03], &gm) else {
        return f64::NAN;
    };
    let Ok(r) = moments(&shakhov_pair(&m, &gm, vs), vs, &gm) else {
        return f64::NAN;
    };
    let scale_u = m.temperature.sqrt();
    let scale_q = m.rho * m.temperature.powf(1.5);
    let kept = 1.0 - gm.heat_flux_decay_factor();
    [
        (r.rho - m.rho).abs() / m.rho,
        (r.u[0] - m.u[0]).abs() / scale_u,
        (r.u[1] - m.u[1]).abs() / scale_u,
        (r.temperature - m.temperature).abs() / m.temperature,
        (r.q[0] - kept * m.q[0]).abs() / scale_q,
        (r.q[1] - kept * m.q[1]).abs() / scale_q,
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn kinetic_checks() -> Vec<(&'static str, f64, f64)> {
    let [rho, u, e] = rest_moment_errors();
    let rt = |lambda, nt| kn_set(lambda, nt).map_or(f64::NAN, |vs| round_trip_error(&vs));
    vec![
        ("rest equilibrium density (8x16, lambda 500)", rho, 1e-6),
        ("rest equilibrium velocity (8x16, lambda 500)", u, 1e-10),
        ("rest equilibrium energy (8x16, lambda 500)", e, 1e-5),
        (
            "Shakhov moment round trip (8x16, lambda 500)",
            rt(500.0, 16),
            1e-5,
        ),
        (
            "Shakhov moment round trip (8x90, lambda 5)",
            rt(5.0, 90),
            1e-4,
        ),
    ]
}

/// Largest per-step change of any conserved variable for a uniform stream
/// on an 8 × 8 mesh with freestream faces, over 20 steps.
pub fn freestream_drift(scheme: Scheme) -> f64 {
    let gm = GasModel::monatomic(0.1).expect("positive Kn");
    let Some(vs) = kn_set(500.0, 16) else {
        return f64::NAN;
    };
    let Ok(state) = Macroscopics::from_primitive(1.0, [0.3, 0.1], 1.0, [0.0; 2], &gm) else {
        return f64::NAN;
    };
    let Ok(mesh) = Mesh2D::uniform(8, 8, 1.0, 1.0, [0.0; 2]) else {
        return f64::NAN;
    };
    let config = SolverConfig {
        scheme,
        ..SolverConfig::default()
    };
    let spec = BoundarySpec::uniform(BoundaryCondition::freestream(&state));
    let Ok(mut solver) = Solver::new(mesh, vs, gm, spec, config, &state) else {
        return f64::NAN;
    };
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let before = solver.conserved().to_vec();
        if solver.advance().is_err() {
            return f64::NAN;
        }
        for (a, b) in before.iter().zip(solver.conserved()) {
            for v in 0..4 {
                worst = worst.max((a[v] - b[v]).abs());
            }
        }
    }
    worst
}

/// Relative change of total mass in a closed, heated 8 × 8 box over 200
/// steps.
pub fn closed_box_mass_drift() -> f64 {
    let gm = GasModel::monatomic(0.1).expect("positive Kn");
    let Some(vs) = kn_set(5.0, 16) else {
        return f64::NAN;
    };
    let Ok(mesh) = Mesh2D::uniform(8, 8, 1.0, 1.0, [0.0; 2]) else {
        return f64::NAN;
    };
    let spec = BoundarySpec {
        north: BoundaryCondition::wall(1.5),
        ..BoundarySpec::uniform(BoundaryCondition::wall(1.0))
    };
    let Ok(init) = Macroscopics::at_rest(1.0, 1.0, &gm) else {
        return f64::NAN;
    };
    let Ok(mut solver) = Solver::new(mesh, vs, gm, spec, SolverConfig::default(), &init) else {
        return f64::NAN;
    };
    let m0 = solver.total_mass();
    for _ in 0..200 {
        if solver.advance().is_err() {
            return f64::NAN;
        }
    }
    ((solver.total_mass() - m0) / m0).abs()
}

fn solver_checks() -> Vec<(&'static str, f64, f64)> {
    vec![
        (
            "freestream preserved per step (DUGKS)",
            freestream_drift(Scheme::Dugks),
            1e-13,
        ),
        (
            "freestream preserved per step (upwind)",
            freestream_drift(Scheme::Upwind),
            1e-13,
        ),
        (
            "closed box mass drift over 200 steps",
            closed_box_mass_drift(),
            1e-12,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_moments() {
        assert_eq!(beta_moment(0, 1.0), 0.5);
        // ∫ r (1−r) dr = 1/6
        assert!((beta_moment(1, 1.0) - 1.0 / 6.0).abs() < 1e-16);
        assert!((beta_moment(2, 0.0) - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn only_filter_and_injection() {
        let q = run(&Options {
            only: Some(Suite::Quadrature),
            inject: 0.0,
        });
        assert!(q.iter().all(|c| c.suite == Suite::Quadrature));
        assert!(q.iter().all(Check::passed), "{q:?}");
        let bad = run(&Options {
            only: Some(Suite::Quadrature),
            inject: 1.0,
        });
        assert!(bad.iter().all(|c| !c.passed()));
    }
}
