use serde::{Deserialize, Serialize};

use super::boundary::BoundaryCondition;
use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellKind {
    Fluid,
    Solid,
}

/// Uniform Cartesian mesh on `[x₀, x₀ + nx·dx] × [y₀, y₀ + ny·dy]`.
/// Cells are numbered row by row, `c = j·nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    origin: [f64; 2],
    mask: Vec<CellKind>,
}

impl Mesh2D {
    pub fn uniform(
        nx: usize,
        ny: usize,
        lx: f64,
        ly: f64,
        origin: [f64; 2],
    ) -> Result<Self, SolverError> {
        if nx == 0 || ny == 0 {
            return Err(SolverError::Configuration(format!(
                "mesh needs at least one cell, got {nx}x{ny}"
            )));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(SolverError::Configuration(format!(
                "domain extents must be positive, got {lx}x{ly}"
            )));
        }
        Ok(Self {
            nx,
            ny,
            dx: lx / nx as f64,
            dy: ly / ny as f64,
            origin,
            mask: vec![CellKind::Fluid; nx * ny],
        })
    }

    /// Marks every cell whose center lies inside `[x0, x1] × [y0, y1]` as solid.
    pub fn with_solid_block(
        mut self,
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
    ) -> Result<Self, SolverError> {
        for c in 0..self.cell_count() {
            let [x, y] = self.cell_center(c);
            if x > x0 && x < x1 && y > y0 && y < y1 {
                self.mask[c] = CellKind::Solid;
            }
        }
        if self.fluid_count() == 0 {
            return Err(SolverError::Configuration(
                "obstacle covers every cell".into(),
            ));
        }
        Ok(self)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn extent(&self) -> [f64; 2] {
        [self.nx as f64 * self.dx, self.ny as f64 * self.dy]
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn fluid_count(&self) -> usize {
        self.mask.iter().filter(|k| **k == CellKind::Fluid).count()
    }

    pub fn has_solid(&self) -> bool {
        self.mask.contains(&CellKind::Solid)
    }

    pub fn mask(&self) -> &[CellKind] {
        &self.mask
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dy
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, c: usize) -> (usize, usize) {
        (c % self.nx, c / self.nx)
    }

    #[inline]
    pub fn is_fluid(&self, c: usize) -> bool {
        self.mask[c] == CellKind::Fluid
    }

    pub fn cell_center(&self, c: usize) -> [f64; 2] {
        let (i, j) = self.ij(c);
        [
            self.origin[0] + (i as f64 + 0.5) * self.dx,
            self.origin[1] + (j as f64 + 0.5) * self.dy,
        ]
    }

    /// Fluid neighbour in direction `side`, `None` across the domain edge or
    /// into a solid cell.
    pub fn neighbour(&self, c: usize, side: Side) -> Option<usize> {
        let (i, j) = self.ij(c);
        let n = match side {
            Side::West => (i > 0).then(|| self.index(i - 1, j)),
            Side::East => (i + 1 < self.nx).then(|| self.index(i + 1, j)),
            Side::South => (j > 0).then(|| self.index(i, j - 1)),
            Side::North => (j + 1 < self.ny).then(|| self.index(i, j + 1)),
        }?;
        self.is_fluid(n).then_some(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    West,
    East,
    South,
    North,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::West, Side::East, Side::South, Side::North];

    /// Outward unit normal of the domain edge on this side.
    pub fn outward_normal(self) -> [f64; 2] {
        match self {
            Side::West => [-1.0, 0.0],
            Side::East => [1.0, 0.0],
            Side::South => [0.0, -1.0],
            Side::North => [0.0, 1.0],
        }
    }
}

/// Boundary conditions for the four domain edges and, when the mesh has
/// solid cells, for every exposed solid face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub west: BoundaryCondition,
    pub east: BoundaryCondition,
    pub south: BoundaryCondition,
    pub north: BoundaryCondition,
    pub obstacle: Option<BoundaryCondition>,
}

impl BoundarySpec {
    pub fn uniform(bc: BoundaryCondition) -> Self {
        Self {
            west: bc.clone(),
            east: bc.clone(),
            south: bc.clone(),
            north: bc,
            obstacle: None,
        }
    }

    pub fn side(&self, side: Side) -> &BoundaryCondition {
        match side {
            Side::West => &self.west,
            Side::East => &self.east,
            Side::South => &self.south,
            Side::North => &self.north,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Axis {
    X,
    Y,
}

/// Where the boundary condition of a face comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FaceBoundary {
    Edge(Side),
    Obstacle,
}

/// A face with normal `+x` or `+y`; `low` is the cell on the negative side.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Face {
    pub axis: Axis,
    pub low: Option<usize>,
    pub high: Option<usize>,
    pub boundary: Option<FaceBoundary>,
}

/// Faces of all fluid cells and, per cell, its `[west, east, south, north]`
/// face indices (`usize::MAX` for solid cells).
#[derive(Debug, Clone)]
pub(crate) struct Topology {
    pub faces: Vec<Face>,
    pub cell_faces: Vec<[usize; 4]>,
}

impl Topology {
    pub fn build(mesh: &Mesh2D) -> Self {
        let (nx, ny) = (mesh.nx(), mesh.ny());
        let mut faces = Vec::new();
        let mut cell_faces = vec![[usize::MAX; 4]; mesh.cell_count()];
        let fluid = |c: usize| mesh.is_fluid(c).then_some(c);

        for j in 0..ny {
            for i in 0..=nx {
                let low = if i > 0 {
                    fluid(mesh.index(i - 1, j))
                } else {
                    None
                };
                let high = if i < nx {
                    fluid(mesh.index(i, j))
                } else {
                    None
                };
                let boundary = match (low, high) {
                    (None, None) => continue,
                    (Some(_), Some(_)) => None,
                    _ if i == 0 => Some(FaceBoundary::Edge(Side::West)),
                    _ if i == nx => Some(FaceBoundary::Edge(Side::East)),
                    _ => Some(FaceBoundary::Obstacle),
                };
                let f = faces.len();
                faces.push(Face {
                    axis: Axis::X,
                    low,
                    high,
                    boundary,
                });
                if let Some(c) = low {
                    cell_faces[c][1] = f;
                }
                if let Some(c) = high {
                    cell_faces[c][0] = f;
                }
            }
        }
        for j in 0..=ny {
            for i in 0..nx {
                let low = if j > 0 {
                    fluid(mesh.index(i, j - 1))
                } else {
                    None
                };
                let high = if j < ny {
                    fluid(mesh.index(i, j))
                } else {
                    None
                };
                let boundary = match (low, high) {
                    (None, None) => continue,
                    (Some(_), Some(_)) => None,
                    _ if j == 0 => Some(FaceBoundary::Edge(Side::South)),
                    _ if j == ny => Some(FaceBoundary::Edge(Side::North)),
                    _ => Some(FaceBoundary::Obstacle),
                };
                let f = faces.len();
                faces.push(Face {
                    axis: Axis::Y,
                    low,
                    high,
                    boundary,
                });
                if let Some(c) = low {
                    cell_faces[c][3] = f;
                }
                if let Some(c) = high {
                    cell_faces[c][2] = f;
                }
            }
        }
        Self { faces, cell_faces }
    }
}
