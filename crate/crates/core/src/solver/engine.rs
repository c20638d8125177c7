use rayon::prelude::*;

use super::boundary::{apply_boundary, normal_speed, PreparedBoundary};
use super::field::{initialize, DistributionField};
use super::mesh::{Axis, BoundarySpec, FaceBoundary, Mesh2D, Side, Topology};
use super::{time_step_size, Scheme, SolverConfig, SolverError};
use crate::kinetic::{GasModel, Macroscopics, MomentKernel, ShakhovKernel};
use crate::quadrature::VelocitySet;

/// Floor on the first-step residual used for normalization, so that a state
/// that is already steady does not divide by roundoff.
const RESIDUAL_FLOOR: f64 = 1e-8;
const MAX_RETRIES: u32 = 4;
/// Largest relative error in `ρ` or `ρE` with which the velocity set may
/// reproduce the initial equilibrium.
const REPRESENTATION_TOL: f64 = 1e-2;

/// Rejects velocity sets that cannot carry `state`, e.g. a stream faster
/// than the largest node.
fn check_representable(
    vs: &VelocitySet,
    gm: &GasModel,
    state: &Macroscopics,
) -> Result<(), SolverError> {
    let at = Macroscopics::from_primitive(state.rho, state.u, state.temperature, [0.0; 2], gm)
        .map_err(|e| SolverError::Configuration(e.to_string()))?;
    let kernel = ShakhovKernel::new(&at, gm);
    let (g, h): (Vec<f64>, Vec<f64>) = vs
        .xi_x()
        .iter()
        .zip(vs.xi_y())
        .map(|(&x, &y)| kernel.eval(x, y))
        .unzip();
    let got = MomentKernel::new(vs).conserved(&g, &h);
    let want = at.conserved();
    for (i, name) in [(0, "density"), (3, "energy")] {
        let err = (got[i] - want[i]).abs() / want[i].abs();
        if !(err < REPRESENTATION_TOL) {
            return Err(SolverError::Configuration(format!(
                "the velocity set reproduces the initial {name} with relative error {err:.2e}; \
                 widen it (larger lambda or more radial nodes) or lower the flow speed"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub step: u64,
    pub time: f64,
    pub dt: f64,
    /// Residual normalized by the first step's value.
    pub residual: f64,
    /// RMS over fluid cells of `|ΔW|/Δt`.
    pub raw_residual: f64,
    /// Number of Δt halvings this step needed.
    pub retries: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    pub final_residual: f64,
    pub converged: bool,
    pub history: Vec<StepReport>,
}

struct Work {
    /// DUGKS: `f̄⁺`; upwind: a copy of `f`.
    fbar: DistributionField,
    sx: DistributionField,
    sy: DistributionField,
    /// Face-major node fluxes `(ξ·e_axis) A f`.
    flux: DistributionField,
    face_moment: Vec<[f64; 4]>,
    /// Face-major `g^eq` scratch.
    face_eq: Vec<f64>,
    next: DistributionField,
    next_conserved: Vec<[f64; 4]>,
    change: Vec<f64>,
}

/// Owns the mesh, velocity set and state of one run.
///
/// For [`Scheme::Dugks`] the stored distributions are the auxiliary
/// `f̃ = f − (Δt/2)Ω`; [`Solver::physical_field`] converts back. The
/// conserved moments are stored separately and advanced by flux moments.
pub struct Solver {
    mesh: Mesh2D,
    vs: VelocitySet,
    gm: GasModel,
    spec: BoundarySpec,
    config: SolverConfig,
    topo: Topology,
    boundaries: Vec<Option<PreparedBoundary>>,
    moments: MomentKernel,
    field: DistributionField,
    conserved: Vec<[f64; 4]>,
    dt: f64,
    step: u64,
    time: f64,
    residual_ref: Option<f64>,
    pool: rayon::ThreadPool,
    work: Work,
}

fn state_error(reason: impl ToString) -> String {
    reason.to_string()
}

fn cell_state(w: &[f64; 4], gm: &GasModel) -> Result<Macroscopics, String> {
    Macroscopics::from_conserved(w[0], [w[1], w[2]], w[3], [0.0; 2], gm).map_err(state_error)
}

/// Writes `g^eq` of state `m` into `geq` and returns the Shakhov kernel
/// whose heat flux is `scale` times the excess heat flux of `(g, h)` over
/// that equilibrium. `m.q` is ignored.
#[allow(clippy::too_many_arguments)]
fn relaxation_kernel(
    mut m: Macroscopics,
    g: &[f64],
    h: &[f64],
    scale: f64,
    gm: &GasModel,
    moments: &MomentKernel,
    vs: &VelocitySet,
    geq: &mut [f64],
) -> ShakhovKernel {
    m.q = [0.0; 2];
    let base = ShakhovKernel::new(&m, gm);
    for (k, e) in geq.iter_mut().enumerate() {
        let (x, y) = vs.node(k);
        *e = base.equilibrium(x, y);
    }
    let q = moments.excess_heat_flux(g, h, geq, base.h_equilibrium_ratio(), m.u);
    m.q = [scale * q[0], scale * q[1]];
    ShakhovKernel::new(&m, gm)
}

/// `2ab/(a+b)` when `a` and `b` share a sign, else 0. Written without a
/// data-dependent branch; the denominator guard only matters when `ab ≤ 0`.
#[inline]
fn van_leer(a: f64, b: f64) -> f64 {
    let p = (a * b).max(0.0);
    let d = a + b;
    let d = if d == 0.0 { 1.0 } else { d };
    2.0 * p / d
}

/// Largest `θ ≤ 1` keeping `center − θ·(|sx|·mx + |sy|·my) ≥ 0`, where
/// `mx`, `my` bound the offsets a node is evaluated at. Summing magnitudes
/// rather than signed terms keeps the factor well conditioned, so
/// mirror-image data gets mirror-image slopes.
#[inline]
fn positivity_factor(center: f64, sx: f64, sy: f64, mx: f64, my: f64) -> f64 {
    let reach = sx.abs() * mx + sy.abs() * my;
    if reach > center {
        (center / reach).max(0.0)
    } else {
        1.0
    }
}

/// One cell's `f̄⁺` and slopes, each of length `nn`.
struct CellView<'a> {
    g: &'a [f64],
    h: &'a [f64],
    sxg: &'a [f64],
    sxh: &'a [f64],
    syg: &'a [f64],
    syh: &'a [f64],
}

impl<'a> CellView<'a> {
    fn new(
        f: &'a DistributionField,
        sx: &'a DistributionField,
        sy: &'a DistributionField,
        c: usize,
        nn: usize,
    ) -> Self {
        let r = c * nn..(c + 1) * nn;
        Self {
            g: &f.g[r.clone()],
            h: &f.h[r.clone()],
            sxg: &sx.g[r.clone()],
            sxh: &sx.h[r.clone()],
            syg: &sy.g[r.clone()],
            syh: &sy.h[r],
        }
    }

    /// Linear reconstruction of node `k` at offset `(ox, oy)`.
    #[inline(always)]
    fn at(&self, k: usize, ox: f64, oy: f64) -> (f64, f64) {
        (
            self.g[k] + ox * self.sxg[k] + oy * self.syg[k],
            self.h[k] + ox * self.sxh[k] + oy * self.syh[k],
        )
    }
}

/// Van Leer slopes of `center` along one axis into `out`; one-sided next to
/// a boundary or solid, zero with no neighbour at all.
fn axis_slopes(
    center: &[f64],
    lo: Option<&[f64]>,
    hi: Option<&[f64]>,
    spacing: f64,
    out: &mut [f64],
) {
    let inv = 1.0 / spacing;
    match (lo, hi) {
        (Some(l), Some(h)) => {
            for (((o, &c), &l), &h) in out.iter_mut().zip(center).zip(l).zip(h) {
                *o = van_leer(c - l, h - c) * inv;
            }
        }
        (Some(l), None) => {
            for ((o, &c), &l) in out.iter_mut().zip(center).zip(l) {
                *o = (c - l) * inv;
            }
        }
        (None, Some(h)) => {
            for ((o, &c), &h) in out.iter_mut().zip(center).zip(h) {
                *o = (h - c) * inv;
            }
        }
        (None, None) => out.fill(0.0),
    }
}

impl Solver {
    /// Starts from the equilibrium of `init` in every fluid cell.
    pub fn new(
        mesh: Mesh2D,
        vs: VelocitySet,
        gm: GasModel,
        spec: BoundarySpec,
        config: SolverConfig,
        init: &Macroscopics,
    ) -> Result<Self, SolverError> {
        check_representable(&vs, &gm, init)?;
        let field = initialize(&mesh, &vs, &gm, init)?;
        let w = Macroscopics::from_primitive(init.rho, init.u, init.temperature, [0.0; 2], &gm)
            .map_err(|e| SolverError::Configuration(e.to_string()))?
            .conserved();
        let conserved = (0..mesh.cell_count())
            .map(|c| if mesh.is_fluid(c) { w } else { [0.0; 4] })
            .collect();
        Self::assemble(mesh, vs, gm, spec, config, field, conserved)
    }

    /// Starts from a physical distribution `f`; the conserved moments are
    /// its quadrature moments.
    pub fn from_distribution(
        mesh: Mesh2D,
        vs: VelocitySet,
        gm: GasModel,
        spec: BoundarySpec,
        config: SolverConfig,
        physical: DistributionField,
    ) -> Result<Self, SolverError> {
        if physical.cell_count() != mesh.cell_count() || physical.node_count() != vs.len() {
            return Err(SolverError::Configuration(
                "distribution does not match mesh and velocity set".into(),
            ));
        }
        let moments = MomentKernel::new(&vs);
        let conserved = (0..mesh.cell_count())
            .map(|c| {
                if mesh.is_fluid(c) {
                    let (g, h) = physical.cell(c);
                    moments.conserved(g, h)
                } else {
                    [0.0; 4]
                }
            })
            .collect();
        let mut solver = Self::assemble(mesh, vs, gm, spec, config, physical, conserved)?;
        if solver.config.scheme == Scheme::Dugks {
            solver.rescale(0.0, solver.dt).map_err(|reason| {
                SolverError::Configuration(format!("initial distribution: {reason}"))
            })?;
        }
        Ok(solver)
    }

    fn assemble(
        mesh: Mesh2D,
        vs: VelocitySet,
        gm: GasModel,
        spec: BoundarySpec,
        config: SolverConfig,
        field: DistributionField,
        conserved: Vec<[f64; 4]>,
    ) -> Result<Self, SolverError> {
        config.validate()?;
        gm.validate()
            .map_err(|e| SolverError::Configuration(e.to_string()))?;
        let topo = Topology::build(&mesh);
        let mut boundaries = Vec::with_capacity(5);
        for side in Side::ALL {
            let used = topo
                .faces
                .iter()
                .any(|f| f.boundary == Some(FaceBoundary::Edge(side)));
            boundaries.push(if used {
                let bc = PreparedBoundary::new(spec.side(side), &vs, &gm)?;
                bc.check_side(side)?;
                Some(bc)
            } else {
                None
            });
        }
        let has_obstacle = topo
            .faces
            .iter()
            .any(|f| f.boundary == Some(FaceBoundary::Obstacle));
        boundaries.push(match (&spec.obstacle, has_obstacle) {
            (Some(bc), true) => {
                let bc = PreparedBoundary::new(bc, &vs, &gm)?;
                for side in Side::ALL {
                    bc.check_side(side)?;
                }
                Some(bc)
            }
            (None, true) => {
                return Err(SolverError::Configuration(
                    "mesh has solid cells but no obstacle boundary condition".into(),
                ))
            }
            _ => None,
        });
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| SolverError::Configuration(format!("thread pool: {e}")))?;
        let (cells, nodes, faces) = (mesh.cell_count(), vs.len(), topo.faces.len());
        let dt = time_step_size(&mesh, &vs, config.cfl);
        let work = Work {
            fbar: DistributionField::zeros(cells, nodes),
            sx: DistributionField::zeros(cells, nodes),
            sy: DistributionField::zeros(cells, nodes),
            flux: DistributionField::zeros(faces, nodes),
            face_moment: vec![[0.0; 4]; faces],
            face_eq: vec![0.0; faces * nodes],
            next: DistributionField::zeros(cells, nodes),
            next_conserved: vec![[0.0; 4]; cells],
            change: vec![0.0; cells],
        };
        Ok(Self {
            moments: MomentKernel::new(&vs),
            mesh,
            vs,
            gm,
            spec,
            config,
            topo,
            boundaries,
            field,
            conserved,
            dt,
            step: 0,
            time: 0.0,
            residual_ref: None,
            pool,
            work,
        })
    }

    pub fn mesh(&self) -> &Mesh2D {
        &self.mesh
    }

    pub fn velocity_set(&self) -> &VelocitySet {
        &self.vs
    }

    pub fn gas(&self) -> &GasModel {
        &self.gm
    }

    pub fn boundaries(&self) -> &BoundarySpec {
        &self.spec
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Stored distributions (`f̃` under DUGKS).
    pub fn field(&self) -> &DistributionField {
        &self.field
    }

    pub fn conserved(&self) -> &[[f64; 4]] {
        &self.conserved
    }

    pub fn total_mass(&self) -> f64 {
        let v = self.mesh.cell_volume();
        (0..self.mesh.cell_count())
            .filter(|&c| self.mesh.is_fluid(c))
            .map(|c| self.conserved[c][0] * v)
            .sum()
    }

    fn heat_flux_scale(&self, tau: f64, dt: f64) -> f64 {
        match self.config.scheme {
            Scheme::Dugks => 2.0 * tau / (2.0 * tau + dt * self.gm.heat_flux_decay_factor()),
            Scheme::Upwind => 1.0,
        }
    }

    /// Cell state with its relaxation kernel; `geq` receives `g^eq`.
    fn cell_kernel(
        &self,
        c: usize,
        geq: &mut [f64],
    ) -> Result<(Macroscopics, f64, ShakhovKernel), String> {
        let m = cell_state(&self.conserved[c], &self.gm)?;
        let tau = self.gm.relaxation_time_of(m.rho, m.temperature);
        let (g, h) = self.field.cell(c);
        let s = self.heat_flux_scale(tau, self.dt);
        let kernel = relaxation_kernel(m, g, h, s, &self.gm, &self.moments, &self.vs, geq);
        Ok((m, tau, kernel))
    }

    fn cell_macroscopics(&self, c: usize) -> Result<Macroscopics, String> {
        let mut geq = vec![0.0; self.vs.len()];
        let (mut m, _, kernel) = self.cell_kernel(c, &mut geq)?;
        m.q = kernel.heat_flux();
        Ok(m)
    }

    /// Macroscopic state of every cell, `None` for solid cells.
    pub fn macroscopics(&self) -> Vec<Option<Macroscopics>> {
        (0..self.mesh.cell_count())
            .map(|c| {
                if self.mesh.is_fluid(c) {
                    self.cell_macroscopics(c).ok()
                } else {
                    None
                }
            })
            .collect()
    }

    /// The physical distribution `f`.
    pub fn physical_field(&self) -> DistributionField {
        let mut out = self.field.clone();
        if self.config.scheme == Scheme::Upwind {
            return out;
        }
        let mut geq = vec![0.0; self.vs.len()];
        for c in (0..self.mesh.cell_count()).filter(|&c| self.mesh.is_fluid(c)) {
            let Ok((_, tau, kernel)) = self.cell_kernel(c, &mut geq) else {
                continue;
            };
            let (a, b) = (
                2.0 * tau / (2.0 * tau + self.dt),
                self.dt / (2.0 * tau + self.dt),
            );
            let (g, h) = out.cell_mut(c);
            for k in 0..self.vs.len() {
                let (x, y) = self.vs.node(k);
                let (gs, hs) = kernel.eval_with(x, y, geq[k]);
                g[k] = a * g[k] + b * gs;
                h[k] = a * h[k] + b * hs;
            }
        }
        out
    }

    /// Re-expresses the stored `f̃` for a new time step:
    /// `f̃' − f^S = (f̃ − f^S)(2τ + Δt')/(2τ + Δt)`.
    fn rescale(&mut self, from: f64, to: f64) -> Result<(), String> {
        let nodes = self.vs.len();
        let mut geq = vec![0.0; nodes];
        for c in (0..self.mesh.cell_count()).filter(|&c| self.mesh.is_fluid(c)) {
            let m = cell_state(&self.conserved[c], &self.gm)?;
            let tau = self.gm.relaxation_time_of(m.rho, m.temperature);
            let (g, h) = self.field.cell(c);
            let s = 2.0 * tau / (2.0 * tau + from * self.gm.heat_flux_decay_factor());
            let kernel = relaxation_kernel(m, g, h, s, &self.gm, &self.moments, &self.vs, &mut geq);
            let ratio = (2.0 * tau + to) / (2.0 * tau + from);
            let (g, h) = self.field.cell_mut(c);
            for k in 0..nodes {
                let (x, y) = self.vs.node(k);
                let (gs, hs) = kernel.eval_with(x, y, geq[k]);
                g[k] = gs + (g[k] - gs) * ratio;
                h[k] = hs + (h[k] - hs) * ratio;
            }
        }
        Ok(())
    }

    /// One time step. On a non-physical intermediate state the step is
    /// retried with Δt halved, up to four times.
    pub fn advance(&mut self) -> Result<StepReport, SolverError> {
        let nominal = self.dt;
        let mut dt = nominal;
        let mut retries = 0;
        let raw = loop {
            match self.try_step(dt) {
                Ok(raw) => break raw,
                Err(reason) => {
                    let step = self.step + 1;
                    let diverged = |reason: String| SolverError::Divergence { step, reason };
                    if retries == MAX_RETRIES {
                        if self.config.scheme == Scheme::Dugks && dt != nominal {
                            self.rescale(dt, nominal).map_err(diverged)?;
                        }
                        return Err(diverged(format!(
                            "{reason} (after {retries} step halvings)"
                        )));
                    }
                    retries += 1;
                    log::warn!("step {}: {reason}; retrying with dt/2", self.step + 1);
                    if self.config.scheme == Scheme::Dugks {
                        self.rescale(dt, 0.5 * dt).map_err(diverged)?;
                    }
                    dt *= 0.5;
                }
            }
        };
        std::mem::swap(&mut self.field, &mut self.work.next);
        std::mem::swap(&mut self.conserved, &mut self.work.next_conserved);
        if self.config.scheme == Scheme::Dugks && dt != nominal {
            self.rescale(dt, nominal)
                .map_err(|reason| SolverError::Divergence {
                    step: self.step + 1,
                    reason,
                })?;
        }
        self.step += 1;
        self.time += dt;
        let reference = *self.residual_ref.get_or_insert(raw.max(RESIDUAL_FLOOR));
        Ok(StepReport {
            step: self.step,
            time: self.time,
            dt,
            residual: raw / reference,
            raw_residual: raw,
            retries,
        })
    }

    /// Advances until the normalized residual drops below `steady_tol` or
    /// `max_steps` is spent. `observer` sees every `report_every`-th step and
    /// the last one.
    pub fn run_to_steady(
        &mut self,
        mut observer: impl FnMut(&StepReport),
    ) -> Result<RunSummary, SolverError> {
        let mut history = Vec::new();
        let mut converged = false;
        let mut final_residual = f64::INFINITY;
        for n in 0..self.config.max_steps {
            let report = self.advance()?;
            final_residual = report.residual;
            converged = report.residual < self.config.steady_tol;
            history.push(report);
            let last = converged || n + 1 == self.config.max_steps;
            if report.step % self.config.report_every == 0 || last {
                observer(&report);
            }
            if converged {
                break;
            }
        }
        Ok(RunSummary {
            steps: history.len() as u64,
            final_residual,
            converged,
            history,
        })
    }

    /// Restores a saved state. Mesh, velocity set and scheme must match.
    pub(crate) fn restore_state(
        &mut self,
        step: u64,
        time: f64,
        dt: f64,
        residual_ref: Option<f64>,
        conserved: Vec<[f64; 4]>,
        field: DistributionField,
    ) {
        self.step = step;
        self.time = time;
        self.dt = dt;
        self.residual_ref = residual_ref;
        self.conserved = conserved;
        self.field = field;
    }

    pub(crate) fn residual_ref(&self) -> Option<f64> {
        self.residual_ref
    }

    fn try_step(&mut self, dt: f64) -> Result<f64, String> {
        let Self {
            mesh,
            vs,
            gm,
            config,
            topo,
            boundaries,
            moments,
            field,
            conserved,
            pool,
            work,
            ..
        } = self;
        let dugks = config.scheme == Scheme::Dugks;
        let half = if dugks { 0.5 * dt } else { 0.0 };
        let decay = gm.heat_flux_decay_factor();
        let nn = vs.len();
        let (xs, ys) = (vs.xi_x(), vs.xi_y());
        let (dx, dy) = (mesh.dx(), mesh.dy());
        let Work {
            fbar,
            sx,
            sy,
            flux,
            face_moment,
            face_eq,
            next,
            next_conserved,
            change,
        } = work;

        pool.install(|| -> Result<(), String> {
            // Cells: macroscopic state, relaxation time, f̄⁺.
            fbar.g
                .par_chunks_mut(nn)
                .zip(fbar.h.par_chunks_mut(nn))
                .enumerate()
                .try_for_each(|(c, (fg, fh))| -> Result<(), String> {
                    if !mesh.is_fluid(c) {
                        return Ok(());
                    }
                    let (g, h) = field.cell(c);
                    let m = cell_state(&conserved[c], gm)?;
                    let tau = gm.relaxation_time_of(m.rho, m.temperature);
                    let s = if dugks {
                        2.0 * tau / (2.0 * tau + dt * decay)
                    } else {
                        1.0
                    };
                    // fg holds g^eq until overwritten node by node below.
                    let kernel = relaxation_kernel(m, g, h, s, gm, moments, vs, fg);
                    if dugks {
                        let a = (2.0 * tau - half) / (2.0 * tau + dt);
                        let b = 3.0 * half / (2.0 * tau + dt);
                        for k in 0..nn {
                            let (gs, hs) = kernel.eval_with(xs[k], ys[k], fg[k]);
                            fg[k] = a * g[k] + b * gs;
                            fh[k] = a * h[k] + b * hs;
                        }
                    } else {
                        fg.copy_from_slice(g);
                        fh.copy_from_slice(h);
                    }
                    Ok(())
                })?;

            // Limited slopes of f̄⁺. Each node's pair of slopes is then scaled
            // so that no face point it is evaluated at goes negative; one-sided
            // slopes at boundaries and the sum of two limited slopes can
            // otherwise undershoot into a near-vacuum wake.
            if dugks {
                let fbar = &*fbar;
                sx.g.par_chunks_mut(nn)
                    .zip(sx.h.par_chunks_mut(nn))
                    .zip(sy.g.par_chunks_mut(nn).zip(sy.h.par_chunks_mut(nn)))
                    .enumerate()
                    .for_each(|(c, ((sxg, sxh), (syg, syh)))| {
                        if !mesh.is_fluid(c) {
                            return;
                        }
                        let nb = Side::ALL.map(|s| mesh.neighbour(c, s));
                        let (g, h) = fbar.cell(c);
                        fn block(arr: &[f64], n: Option<usize>, nn: usize) -> Option<&[f64]> {
                            n.map(|n| &arr[n * nn..(n + 1) * nn])
                        }
                        let side = |arr, n| block(arr, n, nn);
                        axis_slopes(g, side(&fbar.g, nb[0]), side(&fbar.g, nb[1]), dx, sxg);
                        axis_slopes(g, side(&fbar.g, nb[2]), side(&fbar.g, nb[3]), dy, syg);
                        axis_slopes(h, side(&fbar.h, nb[0]), side(&fbar.h, nb[1]), dx, sxh);
                        axis_slopes(h, side(&fbar.h, nb[2]), side(&fbar.h, nb[3]), dy, syh);
                        let (hx, hy) = (0.5 * dx, 0.5 * dy);
                        for k in 0..nn {
                            // Offsets are ±(half cell − |ξ|Δt/2) along the face
                            // normal, with both faces used when ξ is tangential,
                            // and −ξΔt/2 across it.
                            let reach = |v: f64, half_cell: f64| {
                                let shift = v.abs() * half;
                                if v == 0.0 {
                                    half_cell
                                } else {
                                    (half_cell - shift).max(shift)
                                }
                            };
                            let (mx, my) = (reach(xs[k], hx), reach(ys[k], hy));
                            let tg = positivity_factor(g[k], sxg[k], syg[k], mx, my);
                            let th = positivity_factor(h[k], sxh[k], syh[k], mx, my);
                            sxg[k] *= tg;
                            syg[k] *= tg;
                            sxh[k] *= th;
                            syh[k] *= th;
                        }
                    });
            }

            // Faces: reconstruct, close with boundary data, collide, flux.
            let (fbar, sx, sy) = (&*fbar, &*sx, &*sy);
            let view = |c: usize| CellView::new(fbar, sx, sy, c, nn);
            // With the upwind scheme `half` is zero and the slopes are never
            // read.
            let recon = |v: &CellView, k: usize, off: [f64; 2]| -> (f64, f64) {
                if !dugks {
                    return (v.g[k], v.h[k]);
                }
                v.at(k, off[0] - xs[k] * half, off[1] - ys[k] * half)
            };
            flux.g
                .par_chunks_mut(nn)
                .zip(flux.h.par_chunks_mut(nn))
                .zip(face_moment.par_iter_mut().zip(face_eq.par_chunks_mut(nn)))
                .enumerate()
                .try_for_each(|(f, ((fg, fh), (fm, geq)))| -> Result<(), String> {
                    let face = &topo.faces[f];
                    let (axis_speed, area, off): (&[f64], f64, [f64; 2]) = match face.axis {
                        Axis::X => (xs, dy, [0.5 * dx, 0.0]),
                        Axis::Y => (ys, dx, [0.0, 0.5 * dy]),
                    };
                    let neg = [-off[0], -off[1]];
                    match (face.low, face.high) {
                        (Some(l), Some(r)) => {
                            let (l, r) = (view(l), view(r));
                            for k in 0..nn {
                                let vn = axis_speed[k];
                                let (g, h) = if vn > 0.0 {
                                    recon(&l, k, off)
                                } else if vn < 0.0 {
                                    recon(&r, k, neg)
                                } else {
                                    let (gl, hl) = recon(&l, k, off);
                                    let (gr, hr) = recon(&r, k, neg);
                                    (0.5 * (gl + gr), 0.5 * (hl + hr))
                                };
                                fg[k] = g;
                                fh[k] = h;
                            }
                        }
                        (low, high) => {
                            let (c, side, to_face) = match (low, high, face.axis) {
                                (Some(c), None, Axis::X) => (c, Side::East, off),
                                (Some(c), None, Axis::Y) => (c, Side::North, off),
                                (None, Some(c), Axis::X) => (c, Side::West, neg),
                                (None, Some(c), Axis::Y) => (c, Side::South, neg),
                                _ => unreachable!("faces always touch a fluid cell"),
                            };
                            let slot = match face.boundary {
                                Some(FaceBoundary::Edge(s)) => s as usize,
                                _ => 4,
                            };
                            let bc = boundaries[slot]
                                .as_ref()
                                .expect("boundary prepared for every used slot");
                            let mut ig = vec![0.0; nn];
                            let mut ih = vec![0.0; nn];
                            let v = view(c);
                            for k in 0..nn {
                                let (g, h) = if normal_speed(side, xs[k], ys[k]) >= 0.0 {
                                    recon(&v, k, to_face)
                                } else {
                                    (v.g[k], v.h[k])
                                };
                                ig[k] = g;
                                ih[k] = h;
                            }
                            if bc.is_wall() {
                                // Incident f̄ to f with the collision of the face
                                // state: incident f̄ plus the wall's emission. The
                                // cell-centre state would put the wall half a cell
                                // inside the gas once Δt ≫ τ. A face in vacuum
                                // (roundoff density in a hypersonic wake) has
                                // τ → ∞ and keeps f̄ as it is.
                                if dugks {
                                    apply_boundary(bc, side, vs, (&ig, &ih), (&mut *fg, &mut *fh));
                                    let w = moments.conserved(fg, fh);
                                    if let Ok(m) = cell_state(&w, gm) {
                                        let tau = gm.relaxation_time_of(m.rho, m.temperature);
                                        let s = 2.0 * tau / (2.0 * tau + half * decay);
                                        let kernel =
                                            relaxation_kernel(m, fg, fh, s, gm, moments, vs, geq);
                                        let (a, b) = (
                                            2.0 * tau / (2.0 * tau + half),
                                            half / (2.0 * tau + half),
                                        );
                                        for k in 0..nn {
                                            if normal_speed(side, xs[k], ys[k]) > 0.0 {
                                                let (gs, hs) =
                                                    kernel.eval_with(xs[k], ys[k], geq[k]);
                                                ig[k] = a * ig[k] + b * gs;
                                                ih[k] = a * ih[k] + b * hs;
                                            }
                                        }
                                    }
                                }
                                apply_boundary(bc, side, vs, (&ig, &ih), (&mut *fg, &mut *fh));
                                for k in 0..nn {
                                    let s = axis_speed[k] * area;
                                    fg[k] *= s;
                                    fh[k] *= s;
                                }
                                *fm = moments.conserved(fg, fh);
                                fm[0] = 0.0;
                                return Ok(());
                            }
                            apply_boundary(bc, side, vs, (&ig, &ih), (&mut *fg, &mut *fh));
                        }
                    }
                    if dugks {
                        let w = moments.conserved(fg, fh);
                        let m = cell_state(&w, gm).map_err(|e| format!("face state: {e}"))?;
                        let tau = gm.relaxation_time_of(m.rho, m.temperature);
                        let s = 2.0 * tau / (2.0 * tau + half * decay);
                        let kernel = relaxation_kernel(m, fg, fh, s, gm, moments, vs, geq);
                        let (a, b) = (2.0 * tau / (2.0 * tau + half), half / (2.0 * tau + half));
                        for k in 0..nn {
                            let (gs, hs) = kernel.eval_with(xs[k], ys[k], geq[k]);
                            let s = axis_speed[k] * area;
                            fg[k] = s * (a * fg[k] + b * gs);
                            fh[k] = s * (a * fh[k] + b * hs);
                        }
                    } else {
                        for k in 0..nn {
                            let s = axis_speed[k] * area;
                            fg[k] *= s;
                            fh[k] *= s;
                        }
                    }
                    *fm = moments.conserved(fg, fh);
                    Ok(())
                })?;

            // Cells: gather fluxes, update W and the distributions.
            let (flux, face_moment) = (&*flux, &*face_moment);
            let coef = dt / mesh.cell_volume();
            next.g
                .par_chunks_mut(nn)
                .zip(next.h.par_chunks_mut(nn))
                .zip(next_conserved.par_iter_mut().zip(change.par_iter_mut()))
                .enumerate()
                .try_for_each(|(c, ((ng, nh), (nw, dw)))| -> Result<(), String> {
                    if !mesh.is_fluid(c) {
                        return Ok(());
                    }
                    let [fw, fe, fs, fnn] = topo.cell_faces[c];
                    let w = conserved[c];
                    let mut wn = [0.0; 4];
                    for i in 0..4 {
                        let net = face_moment[fw][i] - face_moment[fe][i] + face_moment[fs][i]
                            - face_moment[fnn][i];
                        wn[i] = w[i] + coef * net;
                    }
                    let m = cell_state(&wn, gm).map_err(|e| format!("cell {c}: {e}"))?;
                    let (g, h) = field.cell(c);
                    let (bg, bh) = fbar.cell(c);
                    let (w_, e_, s_, n_) = (fw * nn, fe * nn, fs * nn, fnn * nn);
                    for k in 0..nn {
                        let net_g =
                            flux.g[w_ + k] - flux.g[e_ + k] + flux.g[s_ + k] - flux.g[n_ + k];
                        let net_h =
                            flux.h[w_ + k] - flux.h[e_ + k] + flux.h[s_ + k] - flux.h[n_ + k];
                        if dugks {
                            ng[k] = (4.0 * bg[k] - g[k]) / 3.0 + coef * net_g;
                            nh[k] = (4.0 * bh[k] - h[k]) / 3.0 + coef * net_h;
                        } else {
                            ng[k] = g[k] + coef * net_g;
                            nh[k] = h[k] + coef * net_h;
                        }
                    }
                    if !dugks {
                        // Implicit collision with the updated moments; the
                        // heat flux relaxes as q* / (1 + Δt d/τ).
                        let tau = gm.relaxation_time_of(m.rho, m.temperature);
                        let s = 1.0 / (1.0 + dt * decay / tau);
                        let mut geq = vec![0.0; nn];
                        let kernel = relaxation_kernel(m, ng, nh, s, gm, moments, vs, &mut geq);
                        let r = dt / tau;
                        for k in 0..nn {
                            let (gs, hs) = kernel.eval_with(xs[k], ys[k], geq[k]);
                            ng[k] = (ng[k] + r * gs) / (1.0 + r);
                            nh[k] = (nh[k] + r * hs) / (1.0 + r);
                        }
                    }
                    if !ng.iter().chain(nh.iter()).all(|v| v.is_finite()) {
                        return Err(format!("cell {c}: non-finite distribution"));
                    }
                    *nw = wn;
                    *dw = (0..4).map(|i| ((wn[i] - w[i]) / dt).powi(2)).sum();
                    Ok(())
                })?;
            Ok(())
        })?;

        let fluid = mesh.fluid_count() as f64;
        let sum: f64 = (0..mesh.cell_count())
            .filter(|&c| mesh.is_fluid(c))
            .map(|c| change[c])
            .sum();
        Ok((sum / fluid).sqrt())
    }
}
