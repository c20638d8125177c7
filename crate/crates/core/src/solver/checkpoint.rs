//! Binary checkpoint, all numbers little-endian:
//!
//! ```text
//! magic    8 bytes  "ATGJCKPT"
//! version  u32      1
//! nx, ny   u64, u64
//! dx, dy   f64, f64
//! origin   f64, f64
//! rule     u32 tag, then
//!            0 (ATGJ):         u64 n_radial, u64 n_theta, f64 theta0, f64 alpha, f64 lambda, f64 t0
//!            1 (Newton–Cotes): u64 points_per_axis, f64 half_width
//! scheme   u32      0 dugks, 1 upwind
//! step     u64
//! time, dt f64, f64
//! res_ref  f64      first-step residual, NaN if no step was taken
//! nodes    u64      K
//! mask     nx·ny bytes, 1 fluid, 0 solid
//! W        nx·ny·4 f64, (ρ, ρu_x, ρu_y, ρE) per cell
//! g, h     nx·ny·K f64 each, cell-major then node order
//! ```

use std::io::{Read, Write};

use super::engine::Solver;
use super::field::DistributionField;
use super::mesh::CellKind;
use super::{Scheme, SolverError};
use crate::quadrature::{RuleKind, WeightParams};

const MAGIC: &[u8; 8] = b"ATGJCKPT";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub origin: [f64; 2],
    pub rule: RuleKind,
    pub scheme: Scheme,
    pub step: u64,
    pub time: f64,
    pub dt: f64,
    pub residual_ref: Option<f64>,
    pub mask: Vec<CellKind>,
    pub conserved: Vec<[f64; 4]>,
    pub field: DistributionField,
}

fn bad(msg: impl Into<String>) -> SolverError {
    SolverError::Checkpoint(msg.into())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], SolverError> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| bad(format!("truncated checkpoint: {e}")))?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32, SolverError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64, SolverError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn usize(&mut self) -> Result<usize, SolverError> {
        usize::try_from(self.u64()?).map_err(|_| bad("size overflows usize"))
    }

    fn f64(&mut self) -> Result<f64, SolverError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, SolverError> {
        let mut raw = vec![0u8; n.checked_mul(8).ok_or_else(|| bad("array too large"))?];
        self.inner
            .read_exact(&mut raw)
            .map_err(|e| bad(format!("truncated checkpoint: {e}")))?;
        Ok(raw
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
            .collect())
    }
}

impl Checkpoint {
    pub fn capture(solver: &Solver) -> Self {
        let mesh = solver.mesh();
        Self {
            nx: mesh.nx(),
            ny: mesh.ny(),
            dx: mesh.dx(),
            dy: mesh.dy(),
            origin: mesh.origin(),
            rule: *solver.velocity_set().kind(),
            scheme: solver.config().scheme,
            step: solver.step_count(),
            time: solver.time(),
            dt: solver.dt(),
            residual_ref: solver.residual_ref(),
            mask: mesh.mask().to_vec(),
            conserved: solver.conserved().to_vec(),
            field: solver.field().clone(),
        }
    }

    /// Loads this state into a solver built for the same mesh, velocity set
    /// and scheme.
    pub fn restore_into(self, solver: &mut Solver) -> Result<(), SolverError> {
        let mesh = solver.mesh();
        if (self.nx, self.ny) != (mesh.nx(), mesh.ny())
            || self.dx != mesh.dx()
            || self.dy != mesh.dy()
            || self.origin != mesh.origin()
            || self.mask != mesh.mask()
        {
            return Err(bad("mesh does not match the checkpoint"));
        }
        if self.rule != *solver.velocity_set().kind() {
            return Err(bad("velocity set does not match the checkpoint"));
        }
        if self.scheme != solver.config().scheme {
            return Err(bad("scheme does not match the checkpoint"));
        }
        solver.restore_state(
            self.step,
            self.time,
            self.dt,
            self.residual_ref,
            self.conserved,
            self.field,
        );
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), SolverError> {
        let mut buf =
            Vec::with_capacity(128 + 8 * (self.field.g.len() * 2 + self.conserved.len() * 4));
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        for v in [self.nx as u64, self.ny as u64] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for v in [self.dx, self.dy, self.origin[0], self.origin[1]] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        match self.rule {
            RuleKind::Atgj {
                n_radial,
                n_theta,
                theta0,
                params,
            } => {
                buf.extend_from_slice(&0u32.to_le_bytes());
                buf.extend_from_slice(&(n_radial as u64).to_le_bytes());
                buf.extend_from_slice(&(n_theta as u64).to_le_bytes());
                for v in [theta0, params.alpha(), params.lambda(), params.t0()] {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
            RuleKind::NewtonCotes {
                points_per_axis,
                half_width,
            } => {
                buf.extend_from_slice(&1u32.to_le_bytes());
                buf.extend_from_slice(&(points_per_axis as u64).to_le_bytes());
                buf.extend_from_slice(&half_width.to_le_bytes());
            }
        }
        let scheme: u32 = match self.scheme {
            Scheme::Dugks => 0,
            Scheme::Upwind => 1,
        };
        buf.extend_from_slice(&scheme.to_le_bytes());
        buf.extend_from_slice(&self.step.to_le_bytes());
        for v in [self.time, self.dt, self.residual_ref.unwrap_or(f64::NAN)] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&(self.field.node_count() as u64).to_le_bytes());
        buf.extend(self.mask.iter().map(|k| u8::from(*k == CellKind::Fluid)));
        for w in &self.conserved {
            for v in w {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        for v in self.field.g.iter().chain(&self.field.h) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self, SolverError> {
        let mut r = Reader { inner: input };
        if &r.bytes::<8>()? != MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(bad(format!("unsupported checkpoint version {version}")));
        }
        let nx = r.usize()?;
        let ny = r.usize()?;
        let (dx, dy) = (r.f64()?, r.f64()?);
        let origin = [r.f64()?, r.f64()?];
        let rule = match r.u32()? {
            0 => {
                let n_radial = r.usize()?;
                let n_theta = r.usize()?;
                let theta0 = r.f64()?;
                let (alpha, lambda, t0) = (r.f64()?, r.f64()?, r.f64()?);
                let params =
                    WeightParams::new(alpha, lambda, t0).map_err(|e| bad(e.to_string()))?;
                RuleKind::Atgj {
                    n_radial,
                    n_theta,
                    theta0,
                    params,
                }
            }
            1 => RuleKind::NewtonCotes {
                points_per_axis: r.usize()?,
                half_width: r.f64()?,
            },
            t => return Err(bad(format!("unknown rule tag {t}"))),
        };
        let scheme = match r.u32()? {
            0 => Scheme::Dugks,
            1 => Scheme::Upwind,
            t => return Err(bad(format!("unknown scheme tag {t}"))),
        };
        let step = r.u64()?;
        let (time, dt) = (r.f64()?, r.f64()?);
        let residual_ref = Some(r.f64()?).filter(|v| !v.is_nan());
        let nodes = r.usize()?;
        let cells = nx.checked_mul(ny).ok_or_else(|| bad("mesh too large"))?;
        let len = cells
            .checked_mul(nodes)
            .ok_or_else(|| bad("field too large"))?;
        let mut mask = Vec::with_capacity(cells);
        for _ in 0..cells {
            mask.push(match r.bytes::<1>()?[0] {
                1 => CellKind::Fluid,
                0 => CellKind::Solid,
                b => return Err(bad(format!("bad mask byte {b}"))),
            });
        }
        let conserved = r
            .f64s(cells * 4)?
            .chunks_exact(4)
            .map(|w| [w[0], w[1], w[2], w[3]])
            .collect();
        let mut field = DistributionField::zeros(cells, nodes);
        field.g = r.f64s(len)?;
        field.h = r.f64s(len)?;
        Ok(Self {
            nx,
            ny,
            dx,
            dy,
            origin,
            rule,
            scheme,
            step,
            time,
            dt,
            residual_ref,
            mask,
            conserved,
            field,
        })
    }
}
