//! Run configuration: a sectioned TOML file, layered as
//! preset defaults < config file < command line.
//!
//! Every key is optional in a layer. A resolved run is written back in the
//! same format as `manifest.toml` with every key that affects results
//! filled in, so `atgj run --config manifest.toml` repeats the run.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use atgj::cases::{self, Case, Flow, Scale};
use atgj::quadrature::{RuleKind, WeightParams};
use atgj::solver::{Scheme, SolverConfig};
use atgj::GasModel;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseLayer {
    pub preset: Option<String>,
    pub scale: Option<Scale>,
    /// Compare cavity centerline temperatures with the Laplace solution.
    pub oracle: Option<bool>,
    // cavity
    pub length: Option<f64>,
    pub t_hot: Option<f64>,
    pub t_cold: Option<f64>,
    // cylinder
    pub mach: Option<f64>,
    pub u_inf: Option<f64>,
    pub rho_inf: Option<f64>,
    pub t_inf: Option<f64>,
    pub t_wall: Option<f64>,
    pub diameter: Option<f64>,
    pub upstream: Option<f64>,
    pub downstream: Option<f64>,
    pub lateral: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshLayer {
    pub cells: Option<usize>,
    pub cells_per_diameter: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    Atgj,
    NewtonCotes,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureLayer {
    pub rule: Option<RuleName>,
    pub n: Option<usize>,
    pub ntheta: Option<usize>,
    pub alpha: Option<f64>,
    /// Ties `alpha` to `(π/2)·lambda`.
    pub alpha_matched: Option<bool>,
    pub lambda: Option<f64>,
    pub t0: Option<f64>,
    pub theta0: Option<f64>,
    /// Newton–Cotes points per axis and half-width.
    pub m: Option<usize>,
    pub u: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasLayer {
    pub kn: Option<f64>,
    pub prandtl: Option<f64>,
    pub internal_dof: Option<u32>,
    pub viscosity_exponent: Option<f64>,
    pub t_ref: Option<f64>,
    pub rho_ref: Option<f64>,
    pub l_ref: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverLayer {
    pub cfl: Option<f64>,
    pub steady_tol: Option<f64>,
    pub max_steps: Option<u64>,
    pub report_every: Option<u64>,
    pub scheme: Option<Scheme>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputLayer {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    #[serde(default)]
    pub case: CaseLayer,
    #[serde(default)]
    pub mesh: MeshLayer,
    #[serde(default)]
    pub quadrature: QuadratureLayer,
    #[serde(default)]
    pub gas: GasLayer,
    #[serde(default)]
    pub solver: SolverLayer,
    #[serde(default)]
    pub output: OutputLayer,
    /// Run record in manifests; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<toml::Table>,
}

macro_rules! overlay {
    ($base:expr, $top:expr; $($f:ident),+) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )+
    };
}

impl ConfigLayer {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Keys set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &ConfigLayer) -> Self {
        let (b, t) = (&mut self.case, &top.case);
        overlay!(b, t; preset, scale, oracle, length, t_hot, t_cold, mach, u_inf, rho_inf, t_inf, t_wall,
            diameter, upstream, downstream, lateral);
        let (b, t) = (&mut self.mesh, &top.mesh);
        overlay!(b, t; cells, cells_per_diameter);
        let (b, t) = (&mut self.quadrature, &top.quadrature);
        overlay!(b, t; rule, n, ntheta, alpha, alpha_matched, lambda, t0, theta0, m, u);
        let (b, t) = (&mut self.gas, &top.gas);
        overlay!(b, t; kn, prandtl, internal_dof, viscosity_exponent, t_ref, rho_ref, l_ref);
        let (b, t) = (&mut self.solver, &top.solver);
        overlay!(b, t; cfl, steady_tol, max_steps, report_every, scheme, threads);
        overlay!(self.output, top.output; dir);
        self
    }
}

/// A configuration ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub preset: String,
    pub scale: Scale,
    pub oracle: bool,
    pub case: Case,
    pub solver: SolverConfig,
    pub out_dir: PathBuf,
}

fn set<T: Copy>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn reject_foreign(keys: &[(&str, bool)], flow: &str) -> Result<(), String> {
    match keys.iter().find(|(_, present)| *present) {
        Some((k, _)) => Err(format!("{k} does not apply to a {flow} case")),
        None => Ok(()),
    }
}

/// Applies a merged layer to the preset it names. Nothing is allocated
/// beyond the small case description, and every value is range-checked.
pub fn resolve(layer: &ConfigLayer) -> Result<Resolved, String> {
    let c = &layer.case;
    let name = c.preset.clone().ok_or_else(|| {
        format!(
            "no case given: use --preset or set [case] preset (one of {})",
            cases::PRESETS.join(", ")
        )
    })?;
    let scale = c.scale.unwrap_or_default();
    let mut case = cases::preset(&name, scale).map_err(|e| e.to_string())?;
    let mut solver = cases::preset_solver_config(&name, scale).map_err(|e| e.to_string())?;

    match &mut case.flow {
        Flow::Cavity(cav) => {
            reject_foreign(
                &[
                    ("case.mach", c.mach.is_some()),
                    ("case.u_inf", c.u_inf.is_some()),
                    ("case.rho_inf", c.rho_inf.is_some()),
                    ("case.t_inf", c.t_inf.is_some()),
                    ("case.t_wall", c.t_wall.is_some()),
                    ("case.diameter", c.diameter.is_some()),
                    ("case.upstream", c.upstream.is_some()),
                    ("case.downstream", c.downstream.is_some()),
                    ("case.lateral", c.lateral.is_some()),
                    (
                        "mesh.cells_per_diameter",
                        layer.mesh.cells_per_diameter.is_some(),
                    ),
                ],
                "cavity",
            )?;
            set(&mut cav.length, c.length);
            set(&mut cav.t_hot, c.t_hot);
            set(&mut cav.t_cold, c.t_cold);
            set(&mut cav.cells, layer.mesh.cells);
            positive("case.length", cav.length)?;
            positive("case.t_hot", cav.t_hot)?;
            positive("case.t_cold", cav.t_cold)?;
            if cav.cells == 0 {
                return Err("mesh.cells must be positive".into());
            }
        }
        Flow::Cylinder(cyl) => {
            reject_foreign(
                &[
                    ("case.length", c.length.is_some()),
                    ("case.t_hot", c.t_hot.is_some()),
                    ("case.t_cold", c.t_cold.is_some()),
                    ("mesh.cells", layer.mesh.cells.is_some()),
                ],
                "cylinder",
            )?;
            set(&mut cyl.u_inf, c.u_inf);
            set(&mut cyl.rho_inf, c.rho_inf);
            set(&mut cyl.t_inf, c.t_inf);
            set(&mut cyl.t_wall, c.t_wall);
            set(&mut cyl.diameter, c.diameter);
            set(&mut cyl.upstream, c.upstream);
            set(&mut cyl.downstream, c.downstream);
            set(&mut cyl.lateral, c.lateral);
            set(&mut cyl.cells_per_diameter, layer.mesh.cells_per_diameter);
            for (k, v) in [
                ("case.rho_inf", cyl.rho_inf),
                ("case.t_inf", cyl.t_inf),
                ("case.t_wall", cyl.t_wall),
                ("case.diameter", cyl.diameter),
                ("case.upstream", cyl.upstream),
                ("case.downstream", cyl.downstream),
                ("case.lateral", cyl.lateral),
            ] {
                positive(k, v)?;
            }
            // Mach is derived from the speed; a given value must agree.
            if let Some(m) = c.mach {
                if c.u_inf.is_none() {
                    cyl.u_inf = m * (5.0 / 6.0 * cyl.t_inf).sqrt();
                }
            }
            cyl.mach = cyl.mach_from_speed();
            if let Some(m) = c.mach {
                if (m - cyl.mach).abs() > 1e-9 * m.abs().max(1.0) {
                    return Err(format!(
                        "case.mach = {m} contradicts case.u_inf (Mach {})",
                        cyl.mach
                    ));
                }
            }
            if cyl.cells_per_diameter == 0 {
                return Err("mesh.cells_per_diameter must be positive".into());
            }
        }
    }

    case.quadrature = resolve_rule(case.quadrature, &layer.quadrature)?;
    case.gas = resolve_gas(case.gas, &layer.gas)?;

    let s = &layer.solver;
    set(&mut solver.cfl, s.cfl);
    set(&mut solver.steady_tol, s.steady_tol);
    set(&mut solver.max_steps, s.max_steps);
    set(&mut solver.report_every, s.report_every);
    set(&mut solver.scheme, s.scheme);
    set(&mut solver.threads, s.threads);
    solver.validate().map_err(|e| e.to_string())?;

    let oracle = c.oracle.unwrap_or(name.ends_with("-analytic"));
    let out_dir = layer
        .output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("atgj-out").join(format!("{name}-{}", scale.label())));
    Ok(Resolved {
        preset: name,
        scale,
        oracle,
        case,
        solver,
        out_dir,
    })
}

fn positive(name: &str, v: f64) -> Result<(), String> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(format!("{name} must be finite and positive, got {v}"))
    }
}

/// Overrides on an ATGJ base keep the matched line `α = (π/2)λ` when the
/// base was on it and no explicit `alpha` is given.
fn resolve_rule(base: RuleKind, q: &QuadratureLayer) -> Result<RuleKind, String> {
    let want_nc = match (q.rule, base) {
        (Some(r), _) => r == RuleName::NewtonCotes,
        (None, RuleKind::NewtonCotes { .. }) => true,
        (None, RuleKind::Atgj { .. }) => false,
    };
    if want_nc {
        for (k, present) in [
            ("n", q.n.is_some()),
            ("ntheta", q.ntheta.is_some()),
            ("alpha", q.alpha.is_some()),
            ("alpha_matched", q.alpha_matched.is_some()),
            ("lambda", q.lambda.is_some()),
            ("t0", q.t0.is_some()),
            ("theta0", q.theta0.is_some()),
        ] {
            if present {
                return Err(format!(
                    "quadrature.{k} does not apply to the newton-cotes rule"
                ));
            }
        }
        let (mut m, mut u) = match base {
            RuleKind::NewtonCotes {
                points_per_axis,
                half_width,
            } => (Some(points_per_axis), Some(half_width)),
            RuleKind::Atgj { .. } => (None, None),
        };
        m = q.m.or(m);
        u = q.u.or(u);
        let (Some(points_per_axis), Some(half_width)) = (m, u) else {
            return Err("the newton-cotes rule needs quadrature.m and quadrature.u".into());
        };
        let rule = RuleKind::NewtonCotes {
            points_per_axis,
            half_width,
        };
        rule.build().map_err(|e| e.to_string())?;
        return Ok(rule);
    }
    if q.m.is_some() || q.u.is_some() {
        return Err("quadrature.m and quadrature.u only apply to the newton-cotes rule".into());
    }
    let RuleKind::Atgj {
        n_radial,
        n_theta,
        theta0,
        params,
    } = base
    else {
        return Err("switching a newton-cotes case to atgj is not supported; set all atgj keys on an atgj preset".into());
    };
    let lambda = q.lambda.unwrap_or(params.lambda());
    let matched = q
        .alpha_matched
        .unwrap_or(q.alpha.is_none() && params.is_maxwellian_matched());
    let alpha = match (q.alpha, matched) {
        (Some(_), true) if q.alpha_matched == Some(true) => {
            return Err(
                "give either quadrature.alpha or quadrature.alpha_matched = true, not both".into(),
            )
        }
        (Some(a), _) => a,
        (None, true) => FRAC_PI_2 * lambda,
        (None, false) => params.alpha(),
    };
    let params =
        WeightParams::new(alpha, lambda, q.t0.unwrap_or(params.t0())).map_err(|e| e.to_string())?;
    let n_radial = q.n.unwrap_or(n_radial);
    let n_theta = q.ntheta.unwrap_or(n_theta);
    if n_radial == 0 || n_theta == 0 {
        return Err("quadrature.n and quadrature.ntheta must be positive".into());
    }
    Ok(RuleKind::Atgj {
        n_radial,
        n_theta,
        theta0: q.theta0.unwrap_or(theta0),
        params,
    })
}

fn resolve_gas(mut gm: GasModel, g: &GasLayer) -> Result<GasModel, String> {
    set(&mut gm.knudsen, g.kn);
    set(&mut gm.prandtl, g.prandtl);
    set(&mut gm.internal_dof, g.internal_dof);
    set(&mut gm.viscosity_exponent, g.viscosity_exponent);
    set(&mut gm.t_ref, g.t_ref);
    set(&mut gm.rho_ref, g.rho_ref);
    set(&mut gm.l_ref, g.l_ref);
    gm.validate().map_err(|e| e.to_string())?;
    Ok(gm)
}

/// The fully specified layer for a resolved run.
pub fn manifest_layer(r: &Resolved) -> ConfigLayer {
    let mut layer = ConfigLayer::default();
    let c = &mut layer.case;
    c.preset = Some(r.preset.clone());
    c.scale = Some(r.scale);
    c.oracle = Some(r.oracle);
    match r.case.flow {
        Flow::Cavity(cav) => {
            c.length = Some(cav.length);
            c.t_hot = Some(cav.t_hot);
            c.t_cold = Some(cav.t_cold);
            layer.mesh.cells = Some(cav.cells);
        }
        Flow::Cylinder(cyl) => {
            c.u_inf = Some(cyl.u_inf);
            c.rho_inf = Some(cyl.rho_inf);
            c.t_inf = Some(cyl.t_inf);
            c.t_wall = Some(cyl.t_wall);
            c.diameter = Some(cyl.diameter);
            c.upstream = Some(cyl.upstream);
            c.downstream = Some(cyl.downstream);
            c.lateral = Some(cyl.lateral);
            layer.mesh.cells_per_diameter = Some(cyl.cells_per_diameter);
        }
    }
    let q = &mut layer.quadrature;
    match r.case.quadrature {
        RuleKind::Atgj {
            n_radial,
            n_theta,
            theta0,
            params,
        } => {
            q.rule = Some(RuleName::Atgj);
            q.n = Some(n_radial);
            q.ntheta = Some(n_theta);
            q.alpha = Some(params.alpha());
            q.alpha_matched = Some(false);
            q.lambda = Some(params.lambda());
            q.t0 = Some(params.t0());
            q.theta0 = Some(theta0);
        }
        RuleKind::NewtonCotes {
            points_per_axis,
            half_width,
        } => {
            q.rule = Some(RuleName::NewtonCotes);
            q.m = Some(points_per_axis);
            q.u = Some(half_width);
        }
    }
    let gm = r.case.gas;
    layer.gas = GasLayer {
        kn: Some(gm.knudsen),
        prandtl: Some(gm.prandtl),
        internal_dof: Some(gm.internal_dof),
        viscosity_exponent: Some(gm.viscosity_exponent),
        t_ref: Some(gm.t_ref),
        rho_ref: Some(gm.rho_ref),
        l_ref: Some(gm.l_ref),
    };
    let s = &r.solver;
    layer.solver = SolverLayer {
        cfl: Some(s.cfl),
        steady_tol: Some(s.steady_tol),
        max_steps: Some(s.max_steps),
        report_every: Some(s.report_every),
        scheme: Some(s.scheme),
        threads: Some(s.threads),
    };
    layer
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_preset(name: &str) -> ConfigLayer {
        let mut l = ConfigLayer::default();
        l.case.preset = Some(name.into());
        l
    }

    #[test]
    fn parses_sections() {
        let layer: ConfigLayer = toml::from_str(
            "[case]\npreset = \"cavity-kn10\"\nscale = \"paper\"\n[solver]\ncfl = 0.5\nscheme = \"upwind\"\n",
        )
        .unwrap();
        let r = resolve(&layer).unwrap();
        assert_eq!(r.scale, Scale::Paper);
        assert_eq!(r.solver.cfl, 0.5);
        assert_eq!(r.solver.scheme, Scheme::Upwind);
        assert!(toml::from_str::<ConfigLayer>("[solver]\ncfll = 1.0\n").is_err());
    }

    #[test]
    fn lambda_override_stays_matched() {
        let mut l = with_preset("cavity-kn0.001-analytic");
        l.quadrature.lambda = Some(5.0);
        let r = resolve(&l).unwrap();
        let RuleKind::Atgj { params, .. } = r.case.quadrature else {
            panic!()
        };
        assert_eq!(params.alpha(), FRAC_PI_2 * 5.0);
        assert!(r.oracle);
    }

    #[test]
    fn rejects_keys_of_the_other_flow() {
        let mut l = with_preset("cavity-kn1");
        l.case.u_inf = Some(3.0);
        assert!(resolve(&l).unwrap_err().contains("case.u_inf"));
        let mut l = with_preset("cylinder-ma5");
        l.mesh.cells = Some(10);
        assert!(resolve(&l).is_err());
    }

    #[test]
    fn manifest_resolves_to_itself() {
        for name in cases::PRESETS {
            let r = resolve(&with_preset(name)).unwrap();
            let text = toml::to_string(&manifest_layer(&r)).unwrap();
            let back: ConfigLayer = toml::from_str(&text).unwrap();
            let again = resolve(&back).unwrap();
            assert_eq!(again.case, r.case, "{name}");
            assert_eq!(again.solver, r.solver, "{name}");
        }
    }

    #[test]
    fn needs_a_case() {
        assert!(resolve(&ConfigLayer::default())
            .unwrap_err()
            .contains("--preset"));
    }
}
