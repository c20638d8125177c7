//! Benchmark configurations, the continuum-limit temperature oracle and
//! line extraction for post-processing.
//!
//! All temperatures are in units of the 300 K reference, so `T₀ = 1`.

mod oracle;
mod profile;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use oracle::{laplace_oracle, oracle_report, OracleReport};
pub use profile::{extract_centerline, CenterlineProfile, LineKind, MacroField, PointMacro};

use crate::kinetic::{GasModel, Macroscopics};
use crate::quadrature::{QuadratureError, RuleKind, VelocitySet, WeightParams};
use crate::solver::{BoundaryCondition, BoundarySpec, Mesh2D, Solver, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("unknown preset {name:?}; available: {}", available.join(", "))]
    UnknownPreset {
        name: String,
        available: Vec<&'static str>,
    },
    #[error("invalid case parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("field dump: {0}")]
    Parse(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const PRESETS: [&str; 7] = [
    "cavity-kn0.001",
    "cavity-kn0.1",
    "cavity-kn1",
    "cavity-kn10",
    "cavity-kn0.001-analytic",
    "cavity-kn0.0001-analytic",
    "cylinder-ma5",
];

/// Spatial resolution of a preset. Velocity-space settings never change
/// with scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Desk,
    Paper,
}

impl Scale {
    pub fn label(self) -> &'static str {
        match self {
            Scale::Desk => "desk",
            Scale::Paper => "paper",
        }
    }
}

/// Square cavity with a hot lid; all walls diffuse and at rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityCase {
    pub length: f64,
    pub t_hot: f64,
    pub t_cold: f64,
    /// Cells per side.
    pub cells: usize,
}

/// Square cylinder of side `diameter` centred at the origin in a uniform
/// stream along `+x`. Extents are in diameters from the cylinder centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderCase {
    pub mach: f64,
    pub u_inf: f64,
    pub rho_inf: f64,
    pub t_inf: f64,
    pub t_wall: f64,
    pub diameter: f64,
    pub upstream: f64,
    pub downstream: f64,
    pub lateral: f64,
    pub cells_per_diameter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Flow {
    Cavity(CavityCase),
    Cylinder(CylinderCase),
}

/// A fully specified run: flow geometry and mesh, velocity set and gas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub flow: Flow,
    pub quadrature: RuleKind,
    pub gas: GasModel,
}

fn atgj_rule(
    n_radial: usize,
    n_theta: usize,
    alpha: f64,
    lambda: f64,
) -> Result<RuleKind, CaseError> {
    Ok(RuleKind::Atgj {
        n_radial,
        n_theta,
        theta0: 0.0,
        params: WeightParams::new(alpha, lambda, 1.0)?,
    })
}

fn cavity_gas(kn: f64) -> Result<GasModel, CaseError> {
    GasModel::monatomic(kn).map_err(|_| CaseError::InvalidParameter {
        name: "kn",
        value: kn,
        reason: "must be positive",
    })
}

const PAPER_CAVITY_CELLS: usize = 60;
const DESK_CAVITY_CELLS: usize = 30;

/// ATGJ velocity settings of the cavity benchmark: `(n, N_θ, λ)` per Kn.
pub const TABLE1_SETTINGS: [(f64, usize, usize, f64); 4] = [
    (0.001, 8, 16, 500.0),
    (0.1, 8, 45, 5.0),
    (1.0, 8, 60, 5.0),
    (10.0, 8, 90, 5.0),
];

/// Velocity-node count of the reference solutions the ATGJ settings are
/// compared with: half-range Gauss–Hermite 12², 28², Newton–Cotes 161², 201².
const REFERENCE_NODES: [(f64, usize); 4] = [
    (0.001, 144),
    (0.1, 784),
    (1.0, 161 * 161),
    (10.0, 201 * 201),
];

fn same_kn(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b
}

fn cavity_presets() -> Vec<&'static str> {
    PRESETS
        .iter()
        .copied()
        .filter(|p| p.starts_with("cavity"))
        .collect()
}

/// Cavity case with the tabulated velocity settings for `kn`, `α = (π/2)λ`,
/// walls at 400 K and 200 K, on the 60² mesh.
pub fn table1_case(kn: f64) -> Result<Case, CaseError> {
    let &(_, n, n_theta, lambda) = TABLE1_SETTINGS
        .iter()
        .find(|row| same_kn(kn, row.0))
        .ok_or_else(|| CaseError::UnknownPreset {
            name: format!("cavity-kn{kn}"),
            available: cavity_presets(),
        })?;
    Ok(Case {
        flow: Flow::Cavity(CavityCase {
            length: 1.0,
            t_hot: 400.0 / 300.0,
            t_cold: 200.0 / 300.0,
            cells: PAPER_CAVITY_CELLS,
        }),
        quadrature: atgj_rule(n, n_theta, FRAC_PI_2 * lambda, lambda)?,
        gas: cavity_gas(kn)?,
    })
}

/// Near-continuum cavity with walls at 301 K and 300 K, where the steady
/// temperature obeys the Laplace equation. Uses the `λ = 500` settings.
pub fn analytic_cavity_case(kn: f64) -> Result<Case, CaseError> {
    let mut case = table1_case(0.001)?;
    case.gas = cavity_gas(kn)?;
    if let Flow::Cavity(c) = &mut case.flow {
        c.t_hot = 301.0 / 300.0;
        c.t_cold = 1.0;
    }
    Ok(case)
}

/// Ma = 5, Kn = 0.1 flow past a square cylinder with the 20×60 ATGJ set,
/// `α = 20`, `λ = 2α/π + 20`. Domain: 7.5 D upstream, 15 D downstream,
/// ±10 D laterally, 8 cells per diameter (180 × 160 cells).
pub fn cylinder_case() -> Result<Case, CaseError> {
    let alpha = 20.0;
    Ok(Case {
        flow: Flow::Cylinder(CylinderCase {
            mach: 5.0,
            u_inf: 4.56,
            rho_inf: 1.0,
            t_inf: 1.0,
            t_wall: 1.0,
            diameter: 1.0,
            upstream: 7.5,
            downstream: 15.0,
            lateral: 10.0,
            cells_per_diameter: 8,
        }),
        quadrature: atgj_rule(20, 60, alpha, 2.0 * alpha / std::f64::consts::PI + 20.0)?,
        gas: cavity_gas(0.1)?,
    })
}

/// Resolves a preset name at the given scale.
pub fn preset(name: &str, scale: Scale) -> Result<Case, CaseError> {
    let mut case = match name {
        "cavity-kn0.001" => table1_case(0.001)?,
        "cavity-kn0.1" => table1_case(0.1)?,
        "cavity-kn1" => table1_case(1.0)?,
        "cavity-kn10" => table1_case(10.0)?,
        "cavity-kn0.001-analytic" => analytic_cavity_case(0.001)?,
        "cavity-kn0.0001-analytic" => analytic_cavity_case(0.0001)?,
        "cylinder-ma5" => cylinder_case()?,
        _ => {
            return Err(CaseError::UnknownPreset {
                name: name.to_string(),
                available: PRESETS.to_vec(),
            })
        }
    };
    if scale == Scale::Desk {
        match &mut case.flow {
            Flow::Cavity(c) => c.cells = DESK_CAVITY_CELLS,
            Flow::Cylinder(c) => c.cells_per_diameter /= 4,
        }
    }
    Ok(case)
}

/// Solver settings that come with a preset. Only the step budget differs
/// from [`SolverConfig::default`]: cavities get enough steps to reach the
/// steady tolerance, the cylinder a fixed budget that desk scale shrinks.
pub fn preset_solver_config(name: &str, scale: Scale) -> Result<SolverConfig, CaseError> {
    let case = preset(name, scale)?;
    let (max_steps, report_every) = match (case.flow, scale) {
        (Flow::Cavity(_), _) => (200_000, 1000),
        (Flow::Cylinder(_), Scale::Paper) => (20_000, 100),
        (Flow::Cylinder(_), Scale::Desk) => (5_000, 100),
    };
    Ok(SolverConfig {
        max_steps,
        report_every,
        ..SolverConfig::default()
    })
}

/// Velocity-node count of the reference solution for a tabulated Kn.
pub fn reference_node_count(kn: f64) -> Option<usize> {
    REFERENCE_NODES
        .iter()
        .find(|r| same_kn(kn, r.0))
        .map(|r| r.1)
}

/// Reference node count over the ATGJ node count for a tabulated Kn.
pub fn node_budget_ratio(kn: f64) -> Result<f64, CaseError> {
    let case = table1_case(kn)?;
    let ours = match case.quadrature {
        RuleKind::Atgj {
            n_radial, n_theta, ..
        } => n_radial * n_theta,
        RuleKind::NewtonCotes {
            points_per_axis, ..
        } => points_per_axis * points_per_axis,
    };
    let theirs = reference_node_count(kn).expect("every tabulated Kn has a reference");
    Ok(theirs as f64 / ours as f64)
}

impl CylinderCase {
    /// `u∞ / sqrt(γ R T∞)` for a monatomic gas, `γ = 5/3`, `R = 1/2`.
    pub fn mach_from_speed(&self) -> f64 {
        self.u_inf / (5.0 / 6.0 * self.t_inf).sqrt()
    }

    /// `[x_min, x_max, y_min, y_max]`.
    pub fn domain(&self) -> [f64; 4] {
        let d = self.diameter;
        [
            -self.upstream * d,
            self.downstream * d,
            -self.lateral * d,
            self.lateral * d,
        ]
    }
}

impl Case {
    pub fn velocity_set(&self) -> Result<VelocitySet, CaseError> {
        Ok(self.quadrature.build()?)
    }

    pub fn mesh(&self) -> Result<Mesh2D, CaseError> {
        match &self.flow {
            Flow::Cavity(c) => {
                if !(c.length > 0.0) {
                    return Err(CaseError::InvalidParameter {
                        name: "length",
                        value: c.length,
                        reason: "must be positive",
                    });
                }
                Ok(Mesh2D::uniform(
                    c.cells,
                    c.cells,
                    c.length,
                    c.length,
                    [0.0, 0.0],
                )?)
            }
            Flow::Cylinder(c) => {
                if c.cells_per_diameter == 0 || !(c.diameter > 0.0) {
                    return Err(CaseError::Geometry(
                        "cylinder needs a positive size and resolution".into(),
                    ));
                }
                let [x0, x1, y0, y1] = c.domain();
                let h = c.diameter / c.cells_per_diameter as f64;
                let nx = ((x1 - x0) / h).round() as usize;
                let ny = ((y1 - y0) / h).round() as usize;
                let r = 0.5 * c.diameter;
                let mesh = Mesh2D::uniform(nx, ny, x1 - x0, y1 - y0, [x0, y0])?
                    .with_solid_block(-r, r, -r, r)?;
                if mesh.fluid_count() == mesh.cell_count() {
                    return Err(CaseError::Geometry(
                        "the cylinder covers no cell centre; raise cells_per_diameter".into(),
                    ));
                }
                Ok(mesh)
            }
        }
    }

    pub fn boundaries(&self) -> BoundarySpec {
        match &self.flow {
            Flow::Cavity(c) => BoundarySpec {
                north: BoundaryCondition::wall(c.t_hot),
                ..BoundarySpec::uniform(BoundaryCondition::wall(c.t_cold))
            },
            Flow::Cylinder(c) => {
                let stream = BoundaryCondition::Freestream {
                    rho: c.rho_inf,
                    velocity: [c.u_inf, 0.0],
                    temperature: c.t_inf,
                };
                BoundarySpec {
                    west: stream.clone(),
                    east: BoundaryCondition::Outflow,
                    south: stream.clone(),
                    north: stream,
                    obstacle: Some(BoundaryCondition::wall(c.t_wall)),
                }
            }
        }
    }

    /// Gas at rest at the reference state in the cavity, the freestream
    /// everywhere around the cylinder.
    pub fn initial_state(&self) -> Result<Macroscopics, CaseError> {
        let m = match &self.flow {
            Flow::Cavity(_) => Macroscopics::at_rest(1.0, 1.0, &self.gas),
            Flow::Cylinder(c) => Macroscopics::from_primitive(
                c.rho_inf,
                [c.u_inf, 0.0],
                c.t_inf,
                [0.0; 2],
                &self.gas,
            ),
        };
        m.map_err(|e| CaseError::Geometry(format!("initial state: {e}")))
    }

    pub fn build_solver(&self, config: SolverConfig) -> Result<Solver, CaseError> {
        Ok(Solver::new(
            self.mesh()?,
            self.velocity_set()?,
            self.gas,
            self.boundaries(),
            config,
            &self.initial_state()?,
        )?)
    }

    /// Lines exported for this flow.
    pub fn profile_lines(&self) -> &'static [LineKind] {
        match self.flow {
            Flow::Cavity(_) => &[LineKind::Horizontal, LineKind::Vertical],
            Flow::Cylinder(_) => &[LineKind::Upstream],
        }
    }
}
