use atgj::kinetic::{moments, shakhov_pair, DistPair, GasModel, Macroscopics};
use atgj::quadrature::{build_velocity_set, VelocitySet, WeightParams};
use atgj::solver::{
    BoundaryCondition, BoundarySpec, Checkpoint, DistributionField, Mesh2D, Scheme, Solver,
    SolverConfig,
};

fn atgj(n: usize, n_theta: usize, lambda: f64) -> VelocitySet {
    build_velocity_set(
        n,
        n_theta,
        0.0,
        &WeightParams::maxwellian_matched(lambda, 1.0).unwrap(),
    )
    .unwrap()
}

fn unit_box(n: usize) -> Mesh2D {
    Mesh2D::uniform(n, n, 1.0, 1.0, [0.0, 0.0]).unwrap()
}

fn cavity_spec(t_hot: f64, t_cold: f64) -> BoundarySpec {
    BoundarySpec {
        north: BoundaryCondition::wall(t_hot),
        ..BoundarySpec::uniform(BoundaryCondition::wall(t_cold))
    }
}

fn config(max_steps: u64) -> SolverConfig {
    SolverConfig {
        max_steps,
        ..Default::default()
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

#[test]
fn uniform_freestream_is_a_fixed_point() {
    let gm = GasModel::monatomic(0.1).unwrap();
    let state = Macroscopics::from_primitive(1.0, [0.4, -0.2], 1.0, [0.0; 2], &gm).unwrap();
    let spec = BoundarySpec::uniform(BoundaryCondition::freestream(&state));
    for scheme in [Scheme::Dugks, Scheme::Upwind] {
        let cfg = SolverConfig {
            scheme,
            ..config(10)
        };
        let mut solver =
            Solver::new(unit_box(6), atgj(8, 16, 5.0), gm, spec.clone(), cfg, &state).unwrap();
        for _ in 0..5 {
            let before = solver.field().clone();
            let w0 = solver.conserved().to_vec();
            solver.advance().unwrap();
            let scale = max_abs(&before.g);
            assert!(
                max_abs_diff(&before.g, &solver.field().g) <= 1e-13 * scale,
                "{scheme:?}"
            );
            assert!(max_abs_diff(&before.h, &solver.field().h) <= 1e-13 * max_abs(&before.h));
            for (a, b) in w0.iter().zip(solver.conserved()) {
                for i in 0..4 {
                    assert!((a[i] - b[i]).abs() <= 1e-13 * a[0].abs().max(a[3].abs()));
                }
            }
        }
    }
}

#[test]
fn trivially_steady_state_converges_at_once() {
    let gm = GasModel::monatomic(0.1).unwrap();
    let state = Macroscopics::at_rest(1.0, 1.0, &gm).unwrap();
    let spec = BoundarySpec::uniform(BoundaryCondition::freestream(&state));
    let mut solver =
        Solver::new(unit_box(5), atgj(8, 16, 5.0), gm, spec, config(100), &state).unwrap();
    let summary = solver.run_to_steady(|_| {}).unwrap();
    assert!(summary.converged);
    assert!(summary.steps <= 2, "{} steps", summary.steps);
}

#[test]
fn zero_step_budget_returns_immediately() {
    let gm = GasModel::monatomic(0.1).unwrap();
    let state = Macroscopics::at_rest(1.0, 1.0, &gm).unwrap();
    let mut solver = Solver::new(
        unit_box(4),
        atgj(4, 16, 5.0),
        gm,
        cavity_spec(1.2, 1.0),
        config(0),
        &state,
    )
    .unwrap();
    let mut seen = 0;
    let summary = solver.run_to_steady(|_| seen += 1).unwrap();
    assert_eq!(summary.steps, 0);
    assert!(!summary.converged);
    assert_eq!(seen, 0);
    assert_eq!(solver.step_count(), 0);
}

#[test]
fn reports_follow_report_every() {
    let gm = GasModel::monatomic(0.1).unwrap();
    let state = Macroscopics::at_rest(1.0, 1.0, &gm).unwrap();
    let cfg = SolverConfig {
        report_every: 3,
        ..config(10)
    };
    let mut solver = Solver::new(
        unit_box(4),
        atgj(4, 16, 5.0),
        gm,
        cavity_spec(1.2, 1.0),
        cfg,
        &state,
    )
    .unwrap();
    let mut steps = Vec::new();
    let summary = solver.run_to_steady(|r| steps.push(r.step)).unwrap();
    assert_eq!(summary.steps, 10);
    assert_eq!(steps, vec![3, 6, 9, 10]);
    assert_eq!(summary.history.len(), 10);
}

#[test]
fn closed_box_conserves_mass() {
    let gm = GasModel::monatomic(0.1).unwrap();
    let state = Macroscopics::at_rest(1.0, 1.0, &gm).unwrap();
    for scheme in [Scheme::Dugks, Scheme::Upwind] {
        let cfg = SolverConfig {
            scheme,
            ..config(300)
        };
        let mut solver = Solver::new(
            unit_box(8),
            atgj(8, 16, 5.0),
            gm,
            cavity_spec(4.0 / 3.0, 2.0 / 3.0),
            cfg,
            &state,
        )
        .unwrap();
        let m0 = solver.total_mass();
        let mut worst: f64 = 0.0;
        for _ in 0..300 {
            let before = solver.total_mass();
            solver.advance().unwrap();
            worst = worst.max((solver.total_mass() - before).abs() / before);
        }
        assert!(worst < 1e-12, "{scheme:?}: per-step drift {worst:e}");
        assert!((solver.total_mass() - m0).abs() / m0 < 1e-11);
    }
}

/// Spatially uniform data relaxes as `f(t) = f^S + (f₀ − f^S) e^{−t/τ}`.
fn homogeneous_error(cfl: f64, t_end_over_tau: f64) -> (f64, bool) {
    let vs = atgj(8, 16, 5.0);
    let mesh = Mesh2D::uniform(1, 1, 1.0, 1.0, [0.0; 2]).unwrap();
    let dt_ref = 0.8 / vs.max_speed_l1();
    // τ = 10 Δt at cfl 0.8, so Δt/τ = 0.1 and 0.05.
    let tau = 10.0 * dt_ref;
    let mut gm = GasModel::monatomic(1.0).unwrap();
    gm.knudsen = tau / gm.reference_viscosity();
    let rest = Macroscopics::at_rest(1.0, 1.0, &gm).unwrap();
    let eq = shakhov_pair(&rest, &gm, &vs);
    // Even perturbation with no mass, momentum, energy or heat-flux moment.
    let mut f0 = DistributionField::zeros(1, vs.len());
    for k in 0..vs.len() {
        let (x, y) = vs.node(k);
        f0.g[k] = eq.g[k] * (1.0 + 0.2 * (x * x - y * y));
        f0.h[k] = eq.h[k];
    }
    // The relaxation target is the equilibrium of f₀'s discrete moments.
    let pair = DistPair {
        g: f0.g.clone(),
        h: f0.h.clone(),
    };
    let target = Macroscopics {
        q: [0.0; 2],
        ..moments(&pair, &vs, &gm).unwrap()
    };
    let eq = shakhov_pair(&target, &gm, &vs);
    let spec = BoundarySpec::uniform(BoundaryCondition::Outflow);
    let cfg = SolverConfig { cfl, ..config(0) };
    let mut solver =
        Solver::from_distribution(mesh, vs.clone(), gm, spec, cfg, f0.clone()).unwrap();
    let steps = (t_end_over_tau * tau / solver.dt()).round() as usize;
    let mut monotone = true;
    let mut last = f64::INFINITY;
    for _ in 0..steps {
        solver.advance().unwrap();
        let f = solver.physical_field();
        let dist = max_abs_diff(&f.g, &eq.g) + max_abs_diff(&f.h, &eq.h);
        monotone &= dist < last;
        last = dist;
    }
    let decay = (-solver.time() / tau).exp();
    let f = solver.physical_field();
    let err = (0..vs.len())
        .map(|k| {
            let eg = (f.g[k] - (eq.g[k] + (f0.g[k] - eq.g[k]) * decay)).abs();
            let eh = (f.h[k] - (eq.h[k] + (f0.h[k] - eq.h[k]) * decay)).abs();
            eg.max(eh)
        })
        .fold(0.0, f64::max);
    (err, monotone)
}

#[test]
fn homogeneous_relaxation_is_second_order() {
    let (coarse, mono_c) = homogeneous_error(0.8, 2.0);
    let (fine, mono_f) = homogeneous_error(0.4, 2.0);
    assert!(
        mono_c && mono_f,
        "distance to the target must shrink every step"
    );
    let ratio = coarse / fine;
    assert!(
        (ratio - 4.0).abs() < 0.5,
        "error ratio {ratio} ({coarse:e} / {fine:e})"
    );
}

#[test]
fn checkpoint_round_trip_and_resume() {
    let gm = GasModel::monatomic(1.0).unwrap();
    let state = Macroscopics::at_rest(1.0, 1.0, &gm).unwrap();
    let build = || {
        Solver::new(
            unit_box(6),
            atgj(4, 16, 5.0),
            gm,
            cavity_spec(1.3, 1.0),
            config(50),
            &state,
        )
        .unwrap()
    };
    let mut a = build();
    for _ in 0..7 {
        a.advance().unwrap();
    }
    let ckpt = Checkpoint::capture(&a);
    let mut bytes = Vec::new();
    ckpt.write_to(&mut bytes).unwrap();
    let back = Checkpoint::read_from(bytes.as_slice()).unwrap();
    assert_eq!(back, ckpt);

    let mut b = build();
    back.restore_into(&mut b).unwrap();
    for _ in 0..5 {
        let ra = a.advance().unwrap();
        let rb = b.advance().unwrap();
        assert_eq!(ra, rb);
    }
    assert_eq!(a.field(), b.field());

    assert!(Checkpoint::read_from(&bytes[..bytes.len() - 1]).is_err());
    assert!(Checkpoint::read_from(&b"NOTACKPT"[..]).is_err());
    let mut other = Solver::new(
        unit_box(5),
        atgj(4, 16, 5.0),
        gm,
        cavity_spec(1.3, 1.0),
        config(1),
        &state,
    )
    .unwrap();
    assert!(ckpt.restore_into(&mut other).is_err());
}

#[test]
fn thread_count_does_not_change_results() {
    let gm = GasModel::monatomic(0.1).unwrap();
    let state = Macroscopics::at_rest(1.0, 1.0, &gm).unwrap();
    let run = |threads| {
        let cfg = SolverConfig {
            threads,
            ..config(20)
        };
        let mut s = Solver::new(
            unit_box(8),
            atgj(4, 16, 5.0),
            gm,
            cavity_spec(4.0 / 3.0, 2.0 / 3.0),
            cfg,
            &state,
        )
        .unwrap();
        s.run_to_steady(|_| {}).unwrap();
        (s.field().clone(), s.conserved().to_vec())
    };
    let (f1, w1) = run(1);
    let (f3, w3) = run(3);
    assert_eq!(f1, f3);
    assert_eq!(w1, w3);
}

#[test]
fn heated_lid_cavity_is_mirror_symmetric() {
    let gm = GasModel::monatomic(1.0).unwrap();
    let state = Macroscopics::at_rest(1.0, 1.0, &gm).unwrap();
    let n = 10;
    let mesh = unit_box(n);
    let mut solver = Solver::new(
        mesh.clone(),
        atgj(6, 24, 5.0),
        gm,
        cavity_spec(4.0 / 3.0, 2.0 / 3.0),
        config(200),
        &state,
    )
    .unwrap();
    solver.run_to_steady(|_| {}).unwrap();
    let macros = solver.macroscopics();
    for j in 0..n {
        for i in 0..n / 2 {
            let a = macros[mesh.index(i, j)].unwrap();
            let b = macros[mesh.index(n - 1 - i, j)].unwrap();
            assert!(
                (a.temperature - b.temperature).abs() < 1e-12,
                "{i} {j} {:e}",
                a.temperature - b.temperature
            );
            assert!((a.u[0] + b.u[0]).abs() < 1e-12);
            assert!((a.u[1] - b.u[1]).abs() < 1e-12);
        }
    }
}

#[test]
fn obstacle_needs_a_boundary_condition() {
    let gm = GasModel::monatomic(0.1).unwrap();
    let state = Macroscopics::at_rest(1.0, 1.0, &gm).unwrap();
    let mesh = Mesh2D::uniform(6, 6, 6.0, 6.0, [-3.0, -3.0])
        .unwrap()
        .with_solid_block(-1.0, 1.0, -1.0, 1.0)
        .unwrap();
    let spec = BoundarySpec::uniform(BoundaryCondition::freestream(&state));
    assert!(Solver::new(
        mesh.clone(),
        atgj(4, 16, 5.0),
        gm,
        spec.clone(),
        config(1),
        &state
    )
    .is_err());
    let spec = BoundarySpec {
        obstacle: Some(BoundaryCondition::wall(1.0)),
        ..spec
    };
    let mut solver =
        Solver::new(mesh.clone(), atgj(4, 16, 5.0), gm, spec, config(1), &state).unwrap();
    solver.advance().unwrap();
    let macros = solver.macroscopics();
    assert!(macros[mesh.index(2, 2)].is_none());
    assert!(macros[mesh.index(0, 0)].is_some());
}

#[test]
fn stream_outside_the_velocity_set_is_rejected() {
    let gm = GasModel::monatomic(0.1).unwrap();
    let fast = Macroscopics::from_primitive(1.0, [30.0, 0.0], 1.0, [0.0; 2], &gm).unwrap();
    let spec = BoundarySpec::uniform(BoundaryCondition::freestream(&fast));
    let Err(err) = Solver::new(unit_box(4), atgj(8, 16, 5.0), gm, spec, config(1), &fast) else {
        panic!("a stream at twice the largest node speed must be rejected");
    };
    assert!(err.to_string().contains("velocity set"), "{err}");
}
