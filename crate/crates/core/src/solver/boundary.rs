use serde::{Deserialize, Serialize};

use super::mesh::Side;
use super::SolverError;
use crate::kinetic::{shakhov_pair, GasModel, Macroscopics};
use crate::quadrature::VelocitySet;

/// Condition on an exterior face or an exposed solid face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundaryCondition {
    /// Fully diffuse reflection at the wall temperature, with the emitted
    /// density set by zero net mass flux.
    DiffuseWall {
        temperature: f64,
        #[serde(default)]
        velocity: [f64; 2],
    },
    /// Incoming nodes carry the freestream equilibrium.
    Freestream {
        rho: f64,
        velocity: [f64; 2],
        temperature: f64,
    },
    /// Zero-gradient extrapolation of every node.
    Outflow,
    /// Specular reflection.
    Symmetry,
}

impl BoundaryCondition {
    pub fn wall(temperature: f64) -> Self {
        Self::DiffuseWall {
            temperature,
            velocity: [0.0, 0.0],
        }
    }

    pub fn freestream(state: &Macroscopics) -> Self {
        Self::Freestream {
            rho: state.rho,
            velocity: state.u,
            temperature: state.temperature,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::DiffuseWall { .. } => "diffuse-wall",
            Self::Freestream { .. } => "freestream",
            Self::Outflow => "outflow",
            Self::Symmetry => "symmetry",
        }
    }
}

/// Node data a boundary condition needs at every face, built once per run.
#[derive(Debug, Clone)]
pub enum PreparedBoundary {
    Wall {
        /// Unit-density wall equilibrium.
        g: Vec<f64>,
        h: Vec<f64>,
        /// `Σ_{ξ·n<0} W |ξ·n| g` per outward normal, indexed by [`Side`] order.
        emitted_flux: [f64; 4],
    },
    Freestream {
        g: Vec<f64>,
        h: Vec<f64>,
    },
    Outflow,
    /// Mirror maps exist only when the node set is symmetric about the
    /// corresponding axis.
    Symmetry {
        mirror_x: Option<Vec<usize>>,
        mirror_y: Option<Vec<usize>>,
    },
}

fn side_slot(side: Side) -> usize {
    match side {
        Side::West => 0,
        Side::East => 1,
        Side::South => 2,
        Side::North => 3,
    }
}

#[inline]
pub(crate) fn normal_speed(side: Side, xi_x: f64, xi_y: f64) -> f64 {
    match side {
        Side::West => -xi_x,
        Side::East => xi_x,
        Side::South => -xi_y,
        Side::North => xi_y,
    }
}

impl PreparedBoundary {
    pub fn new(
        bc: &BoundaryCondition,
        vs: &VelocitySet,
        gm: &GasModel,
    ) -> Result<Self, SolverError> {
        let bad =
            |what: &str| SolverError::Configuration(format!("{} boundary: {what}", bc.label()));
        match bc {
            BoundaryCondition::DiffuseWall {
                temperature,
                velocity,
            } => {
                let state =
                    Macroscopics::from_primitive(1.0, *velocity, *temperature, [0.0; 2], gm)
                        .map_err(|e| bad(&e.to_string()))?;
                let pair = shakhov_pair(&state, gm, vs);
                let w = vs.effective_weights();
                let mut emitted_flux = [0.0; 4];
                for side in Side::ALL {
                    let mut incoming = 0.0;
                    let mut outgoing = 0usize;
                    for k in 0..vs.len() {
                        let vn = normal_speed(side, vs.xi_x()[k], vs.xi_y()[k]);
                        if vn < 0.0 {
                            incoming -= w[k] * vn * pair.g[k];
                        } else if vn > 0.0 {
                            outgoing += 1;
                        }
                    }
                    if !(incoming > 0.0) || outgoing == 0 {
                        return Err(bad(&format!(
                            "no node crosses a {side:?}-facing wall; increase N_theta"
                        )));
                    }
                    emitted_flux[side_slot(side)] = incoming;
                }
                Ok(Self::Wall {
                    g: pair.g,
                    h: pair.h,
                    emitted_flux,
                })
            }
            BoundaryCondition::Freestream {
                rho,
                velocity,
                temperature,
            } => {
                let state =
                    Macroscopics::from_primitive(*rho, *velocity, *temperature, [0.0; 2], gm)
                        .map_err(|e| bad(&e.to_string()))?;
                let pair = shakhov_pair(&state, gm, vs);
                Ok(Self::Freestream {
                    g: pair.g,
                    h: pair.h,
                })
            }
            BoundaryCondition::Outflow => Ok(Self::Outflow),
            BoundaryCondition::Symmetry => {
                let (mirror_x, mirror_y) = (vs.mirror_x(), vs.mirror_y());
                if mirror_x.is_none() && mirror_y.is_none() {
                    return Err(bad("velocity set has no mirror symmetry"));
                }
                Ok(Self::Symmetry { mirror_x, mirror_y })
            }
        }
    }

    /// Fails if this condition cannot be imposed on a face with the given
    /// outward normal.
    pub fn check_side(&self, side: Side) -> Result<(), SolverError> {
        if let Self::Symmetry { mirror_x, mirror_y } = self {
            let (mirror, axis) = match side {
                Side::West | Side::East => (mirror_x, "x"),
                Side::South | Side::North => (mirror_y, "y"),
            };
            if mirror.is_none() {
                return Err(SolverError::Configuration(format!(
                    "symmetry boundary: {side:?} side needs a velocity set symmetric in {axis}; use an even N_theta"
                )));
            }
        }
        Ok(())
    }

    pub fn is_wall(&self) -> bool {
        matches!(self, Self::Wall { .. })
    }
}

/// Completes the distribution at a boundary face whose fluid side has
/// outward normal `side`.
///
/// `interior` holds, for every node, the value supplied by the fluid side:
/// the reconstructed face value for nodes leaving the fluid and the cell
/// value for the others. On return `out` holds the full face distribution.
/// For a diffuse wall the returned value is the emitted density.
pub fn apply_boundary(
    bc: &PreparedBoundary,
    side: Side,
    vs: &VelocitySet,
    interior: (&[f64], &[f64]),
    out: (&mut [f64], &mut [f64]),
) -> f64 {
    let (ig, ih) = interior;
    let (og, oh) = out;
    let (xs, ys) = (vs.xi_x(), vs.xi_y());
    match bc {
        PreparedBoundary::Wall { g, h, emitted_flux } => {
            let w = vs.effective_weights();
            let mut incident = 0.0;
            for k in 0..vs.len() {
                let vn = normal_speed(side, xs[k], ys[k]);
                if vn > 0.0 {
                    incident += w[k] * vn * ig[k];
                }
            }
            let rho_w = incident / emitted_flux[side_slot(side)];
            for k in 0..vs.len() {
                if normal_speed(side, xs[k], ys[k]) > 0.0 {
                    og[k] = ig[k];
                    oh[k] = ih[k];
                } else {
                    og[k] = rho_w * g[k];
                    oh[k] = rho_w * h[k];
                }
            }
            rho_w
        }
        PreparedBoundary::Freestream { g, h } => {
            for k in 0..vs.len() {
                if normal_speed(side, xs[k], ys[k]) > 0.0 {
                    og[k] = ig[k];
                    oh[k] = ih[k];
                } else {
                    og[k] = g[k];
                    oh[k] = h[k];
                }
            }
            0.0
        }
        PreparedBoundary::Outflow => {
            og.copy_from_slice(ig);
            oh.copy_from_slice(ih);
            0.0
        }
        PreparedBoundary::Symmetry { mirror_x, mirror_y } => {
            let mirror = match side {
                Side::West | Side::East => mirror_x,
                Side::South | Side::North => mirror_y,
            }
            .as_ref()
            .expect("mirror checked when the boundary was assembled");
            for k in 0..vs.len() {
                let src = if normal_speed(side, xs[k], ys[k]) > 0.0 {
                    k
                } else {
                    mirror[k]
                };
                og[k] = ig[src];
                oh[k] = ih[src];
            }
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{build_velocity_set, WeightParams};

    fn setup() -> (VelocitySet, GasModel) {
        let vs = build_velocity_set(
            8,
            45,
            0.0,
            &WeightParams::maxwellian_matched(5.0, 1.0).unwrap(),
        )
        .unwrap();
        (vs, GasModel::monatomic(0.1).unwrap())
    }

    fn mass_flux(vs: &VelocitySet, side: Side, g: &[f64]) -> (f64, f64) {
        let w = vs.effective_weights();
        let (mut net, mut scale) = (0.0, 0.0);
        for k in 0..vs.len() {
            let vn = normal_speed(side, vs.xi_x()[k], vs.xi_y()[k]);
            net += w[k] * vn * g[k];
            if vn > 0.0 {
                scale += w[k] * vn * g[k];
            }
        }
        (net, scale)
    }

    #[test]
    fn diffuse_wall_zero_mass_flux() {
        let (vs, gm) = setup();
        let bc = PreparedBoundary::new(&BoundaryCondition::wall(2.0 / 3.0), &vs, &gm).unwrap();
        let hot = Macroscopics::from_primitive(1.3, [0.2, -0.1], 1.2, [0.05, 0.02], &gm).unwrap();
        let inc = shakhov_pair(&hot, &gm, &vs);
        let mut g = vec![0.0; vs.len()];
        let mut h = vec![0.0; vs.len()];
        for side in Side::ALL {
            apply_boundary(&bc, side, &vs, (&inc.g, &inc.h), (&mut g, &mut h));
            let (net, scale) = mass_flux(&vs, side, &g);
            assert!(net.abs() <= 1e-12 * scale, "{side:?}: {net} vs {scale}");
        }
    }

    #[test]
    fn wall_in_equilibrium_has_no_heat_flux() {
        let (vs, gm) = setup();
        let t_w = 1.1;
        let bc = PreparedBoundary::new(&BoundaryCondition::wall(t_w), &vs, &gm).unwrap();
        let rest = Macroscopics::at_rest(0.8, t_w, &gm).unwrap();
        let inc = shakhov_pair(&rest, &gm, &vs);
        let mut g = vec![0.0; vs.len()];
        let mut h = vec![0.0; vs.len()];
        let rho_w = apply_boundary(&bc, Side::North, &vs, (&inc.g, &inc.h), (&mut g, &mut h));
        assert!((rho_w - 0.8).abs() < 1e-12);
        let w = vs.effective_weights();
        let energy_flux: f64 = (0..vs.len())
            .map(|k| {
                let (x, y) = vs.node(k);
                w[k] * y * (0.5 * (x * x + y * y) * g[k] + 0.5 * h[k])
            })
            .sum();
        assert!(energy_flux.abs() < 1e-12, "{energy_flux}");
    }

    #[test]
    fn freestream_face_with_matching_interior_is_unchanged() {
        let (vs, gm) = setup();
        let state = Macroscopics::from_primitive(1.0, [0.5, 0.0], 1.0, [0.0; 2], &gm).unwrap();
        let bc = PreparedBoundary::new(&BoundaryCondition::freestream(&state), &vs, &gm).unwrap();
        let inc = shakhov_pair(&state, &gm, &vs);
        let mut g = vec![0.0; vs.len()];
        let mut h = vec![0.0; vs.len()];
        apply_boundary(&bc, Side::West, &vs, (&inc.g, &inc.h), (&mut g, &mut h));
        assert_eq!(g, inc.g);
        assert_eq!(h, inc.h);
    }

    #[test]
    fn symmetry_reflects() {
        let (vs, gm) = setup();
        let bc = PreparedBoundary::new(&BoundaryCondition::Symmetry, &vs, &gm).unwrap();
        let state = Macroscopics::from_primitive(1.0, [0.0, 0.3], 1.0, [0.0; 2], &gm).unwrap();
        let inc = shakhov_pair(&state, &gm, &vs);
        let mut g = vec![0.0; vs.len()];
        let mut h = vec![0.0; vs.len()];
        apply_boundary(&bc, Side::North, &vs, (&inc.g, &inc.h), (&mut g, &mut h));
        let (net, scale) = mass_flux(&vs, Side::North, &g);
        assert!(net.abs() < 1e-13 * scale);
    }

    #[test]
    fn symmetry_needs_symmetric_nodes() {
        let vs = build_velocity_set(
            4,
            15,
            0.0,
            &WeightParams::maxwellian_matched(5.0, 1.0).unwrap(),
        )
        .unwrap();
        let gm = GasModel::monatomic(0.1).unwrap();
        let bc = PreparedBoundary::new(&BoundaryCondition::Symmetry, &vs, &gm).unwrap();
        assert!(bc.check_side(Side::North).is_ok());
        assert!(bc.check_side(Side::West).is_err());
        let tilted = build_velocity_set(
            4,
            15,
            0.1,
            &WeightParams::maxwellian_matched(5.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!(PreparedBoundary::new(&BoundaryCondition::Symmetry, &tilted, &gm).is_err());
    }
}
