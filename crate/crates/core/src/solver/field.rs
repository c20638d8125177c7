use super::{Mesh2D, SolverError};
use crate::kinetic::{shakhov_pair, GasModel, Macroscopics};
use crate::quadrature::VelocitySet;

/// Per-cell distribution pair, stored cell-major and then in the node order
/// of the velocity set: `g[c · K + k]`. Solid cells hold zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField {
    cells: usize,
    nodes: usize,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

impl DistributionField {
    pub fn zeros(cells: usize, nodes: usize) -> Self {
        Self {
            cells,
            nodes,
            g: vec![0.0; cells * nodes],
            h: vec![0.0; cells * nodes],
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn cell(&self, c: usize) -> (&[f64], &[f64]) {
        let r = c * self.nodes..(c + 1) * self.nodes;
        (&self.g[r.clone()], &self.h[r])
    }

    pub fn cell_mut(&mut self, c: usize) -> (&mut [f64], &mut [f64]) {
        let r = c * self.nodes..(c + 1) * self.nodes;
        (&mut self.g[r.clone()], &mut self.h[r])
    }

    pub fn is_finite(&self) -> bool {
        self.g.iter().chain(&self.h).all(|v| v.is_finite())
    }
}

/// Every fluid cell set to the equilibrium pair of `state` (heat flux
/// dropped).
pub fn initialize(
    mesh: &Mesh2D,
    vs: &VelocitySet,
    gm: &GasModel,
    state: &Macroscopics,
) -> Result<DistributionField, SolverError> {
    let eq = Macroscopics::from_primitive(state.rho, state.u, state.temperature, [0.0; 2], gm)
        .map_err(|e| SolverError::Configuration(format!("initial state: {e}")))?;
    let pair = shakhov_pair(&eq, gm, vs);
    let mut field = DistributionField::zeros(mesh.cell_count(), vs.len());
    for c in (0..mesh.cell_count()).filter(|&c| mesh.is_fluid(c)) {
        let (g, h) = field.cell_mut(c);
        g.copy_from_slice(&pair.g);
        h.copy_from_slice(&pair.h);
    }
    Ok(field)
}
