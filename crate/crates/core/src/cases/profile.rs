use std::io::{self, BufRead, Write};

use super::CaseError;
use crate::solver::Solver;

/// Cell-centred macroscopic values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMacro {
    pub rho: f64,
    pub ux: f64,
    pub uy: f64,
    pub t: f64,
    pub qx: f64,
    pub qy: f64,
}

impl PointMacro {
    fn lerp(a: &Self, b: &Self, w: f64) -> Self {
        let m = |x: f64, y: f64| x + w * (y - x);
        Self {
            rho: m(a.rho, b.rho),
            ux: m(a.ux, b.ux),
            uy: m(a.uy, b.uy),
            t: m(a.t, b.t),
            qx: m(a.qx, b.qx),
            qy: m(a.qy, b.qy),
        }
    }
}

/// Macroscopic snapshot on a uniform mesh; `None` marks solid cells.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroField {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub origin: [f64; 2],
    pub cells: Vec<Option<PointMacro>>,
}

const HEADER: &str = "x,y,rho,ux,uy,T,qx,qy";

fn parse_err(line: usize, msg: impl std::fmt::Display) -> CaseError {
    CaseError::Parse(format!("line {line}: {msg}"))
}

impl MacroField {
    pub fn from_solver(solver: &Solver) -> Self {
        let mesh = solver.mesh();
        let cells = solver
            .macroscopics()
            .into_iter()
            .map(|m| {
                m.map(|m| PointMacro {
                    rho: m.rho,
                    ux: m.u[0],
                    uy: m.u[1],
                    t: m.temperature,
                    qx: m.q[0],
                    qy: m.q[1],
                })
            })
            .collect();
        Self {
            nx: mesh.nx(),
            ny: mesh.ny(),
            dx: mesh.dx(),
            dy: mesh.dy(),
            origin: mesh.origin(),
            cells,
        }
    }

    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.dx,
            self.origin[1] + (j as f64 + 0.5) * self.dy,
        ]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&PointMacro> {
        self.cells[j * self.nx + i].as_ref()
    }

    /// One row per cell, `j` outer; solid cells carry NaN.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{HEADER}")?;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let [x, y] = self.center(i, j);
                let v = self
                    .get(i, j)
                    .map_or([f64::NAN; 6], |p| [p.rho, p.ux, p.uy, p.t, p.qx, p.qy]);
                write!(out, "{x:.16e},{y:.16e}")?;
                for x in v {
                    write!(out, ",{x:.16e}")?;
                }
                writeln!(out)?;
            }
        }
        Ok(())
    }

    /// Reads a dump written by [`MacroField::write_csv`]. The mesh is
    /// recovered from the cell centres, so it needs at least two cells in
    /// each direction.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, CaseError> {
        let mut rows = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            if n == 0 {
                if line.trim() != HEADER {
                    return Err(parse_err(1, format!("expected header {HEADER:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| parse_err(n + 1, e))?;
            if v.len() != 8 {
                return Err(parse_err(
                    n + 1,
                    format!("expected 8 columns, found {}", v.len()),
                ));
            }
            rows.push(v);
        }
        let axis = |k: usize| -> Result<(usize, f64, f64), CaseError> {
            let mut xs: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            if xs.len() < 2 {
                return Err(CaseError::Parse(
                    "need at least two cells per direction".into(),
                ));
            }
            let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
            Ok((xs.len(), h, xs[0] - 0.5 * h))
        };
        let (nx, dx, x0) = axis(0)?;
        let (ny, dy, y0) = axis(1)?;
        if rows.len() != nx * ny {
            return Err(CaseError::Parse(format!(
                "{} rows for a {nx} x {ny} mesh",
                rows.len()
            )));
        }
        let mut cells = vec![None; nx * ny];
        let mut seen = vec![false; nx * ny];
        for r in &rows {
            let i = ((r[0] - x0) / dx - 0.5).round() as usize;
            let j = ((r[1] - y0) / dy - 0.5).round() as usize;
            let c = j * nx + i;
            if i >= nx || j >= ny || seen[c] {
                return Err(CaseError::Parse(format!(
                    "cell centres at ({}, {}) are not a uniform mesh",
                    r[0], r[1]
                )));
            }
            seen[c] = true;
            if !r[2].is_nan() {
                cells[c] = Some(PointMacro {
                    rho: r[2],
                    ux: r[3],
                    uy: r[4],
                    t: r[5],
                    qx: r[6],
                    qy: r[7],
                });
            }
        }
        Ok(Self {
            nx,
            ny,
            dx,
            dy,
            origin: [x0, y0],
            cells,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    /// `y` = mid-height, all `x`.
    Horizontal,
    /// `x` = mid-width, all `y`.
    Vertical,
    /// `y` = mid-height from the inlet up to the first solid cell.
    Upstream,
}

impl LineKind {
    pub fn label(self) -> &'static str {
        match self {
            LineKind::Horizontal => "horizontal",
            LineKind::Vertical => "vertical",
            LineKind::Upstream => "upstream",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Horizontal, Self::Vertical, Self::Upstream]
            .into_iter()
            .find(|k| k.label() == s)
    }
}

/// Samples along a line, parametrised by the coordinate that varies.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterlineProfile {
    pub kind: LineKind,
    pub s: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub temperature: Vec<f64>,
    pub velocity: Vec<[f64; 2]>,
    pub rho: Vec<f64>,
}

impl CenterlineProfile {
    /// Cavity lines as `s,T,ux,uy`; the upstream line as `s,T,u,rho_flux`
    /// with `rho_flux = ρ u_x`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let upstream = self.kind == LineKind::Upstream;
        writeln!(
            out,
            "{}",
            if upstream {
                "s,T,u,rho_flux"
            } else {
                "s,T,ux,uy"
            }
        )?;
        for k in 0..self.s.len() {
            let [ux, uy] = self.velocity[k];
            let last = if upstream { self.rho[k] * ux } else { uy };
            writeln!(
                out,
                "{:.16e},{:.16e},{ux:.16e},{last:.16e}",
                self.s[k], self.temperature[k]
            )?;
        }
        Ok(())
    }
}

/// Index pair and weight for linear interpolation at `pos` between the
/// cell centres of an axis with `n` cells.
fn straddle(pos: f64, origin: f64, h: f64, n: usize) -> Option<(usize, usize, f64)> {
    let t = (pos - origin) / h - 0.5;
    if !(t >= -0.5 && t <= n as f64 - 0.5) {
        return None;
    }
    let i0 = (t.floor().max(0.0) as usize).min(n - 1);
    let i1 = (i0 + 1).min(n - 1);
    let w = if i1 == i0 {
        0.0
    } else {
        (t - i0 as f64).clamp(0.0, 1.0)
    };
    Some((i0, i1, w))
}

fn blend(a: Option<&PointMacro>, b: Option<&PointMacro>, w: f64) -> Option<PointMacro> {
    match (a, b) {
        (Some(a), Some(b)) => Some(PointMacro::lerp(a, b, w)),
        (Some(a), None) if w == 0.0 => Some(*a),
        (None, Some(b)) if w == 1.0 => Some(*b),
        _ => None,
    }
}

/// Interpolates linearly between the two rows or columns that straddle
/// the mid-line. Solid samples are skipped on cavity lines; the upstream
/// line ends at the first one.
pub fn extract_centerline(
    field: &MacroField,
    kind: LineKind,
) -> Result<CenterlineProfile, CaseError> {
    let mut p = CenterlineProfile {
        kind,
        s: Vec::new(),
        points: Vec::new(),
        temperature: Vec::new(),
        velocity: Vec::new(),
        rho: Vec::new(),
    };
    let mut push = |x: f64, y: f64, s: f64, m: PointMacro| {
        p.s.push(s);
        p.points.push([x, y]);
        p.temperature.push(m.t);
        p.velocity.push([m.ux, m.uy]);
        p.rho.push(m.rho);
    };
    let geometry = |what: &str| CaseError::Geometry(format!("{} line: {what}", kind.label()));
    match kind {
        LineKind::Vertical => {
            let x = field.origin[0] + 0.5 * field.nx as f64 * field.dx;
            let (i0, i1, w) = straddle(x, field.origin[0], field.dx, field.nx)
                .ok_or_else(|| geometry("outside the mesh"))?;
            for j in 0..field.ny {
                let y = field.center(0, j)[1];
                if let Some(m) = blend(field.get(i0, j), field.get(i1, j), w) {
                    push(x, y, y, m);
                }
            }
        }
        LineKind::Horizontal | LineKind::Upstream => {
            let y = field.origin[1] + 0.5 * field.ny as f64 * field.dy;
            let (j0, j1, w) = straddle(y, field.origin[1], field.dy, field.ny)
                .ok_or_else(|| geometry("outside the mesh"))?;
            let mut reached_body = false;
            for i in 0..field.nx {
                let x = field.center(i, 0)[0];
                match blend(field.get(i, j0), field.get(i, j1), w) {
                    Some(m) => push(x, y, x, m),
                    None if kind == LineKind::Upstream => {
                        reached_body = true;
                        break;
                    }
                    None => {}
                }
            }
            if kind == LineKind::Upstream && !reached_body {
                return Err(geometry("no body on the symmetry axis"));
            }
        }
    }
    if p.s.is_empty() {
        return Err(geometry("no fluid samples"));
    }
    Ok(p)
}
