use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use atgj::cases::{extract_centerline, oracle_report, Flow, MacroField};
use atgj::solver::{Checkpoint, Solver, SolverError, StepReport};

use crate::config::{self, ConfigLayer, Resolved};
use crate::{Failure, RunArgs, EXIT_DIVERGENCE};

const ORACLE_TERMS: usize = 200;

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_checkpoint(solver: &Solver, path: &Path) -> Result<(), Failure> {
    let mut out = create(path)?;
    Checkpoint::capture(solver)
        .write_to(&mut out)
        .map_err(|e| Failure::usage(e.to_string()))?;
    out.flush()?;
    Ok(())
}

struct Outcome {
    status: &'static str,
    steps: u64,
    final_residual: f64,
    seconds: f64,
    oracle_error: Option<f64>,
}

fn write_manifest(r: &Resolved, solver: &Solver, o: &Outcome) -> Result<(), Failure> {
    let mut layer = config::manifest_layer(r);
    let mut run = toml::Table::new();
    run.insert("status".into(), o.status.into());
    run.insert("steps".into(), (o.steps as i64).into());
    run.insert("total_steps".into(), (solver.step_count() as i64).into());
    run.insert("time".into(), solver.time().into());
    run.insert("dt".into(), solver.dt().into());
    if o.final_residual.is_finite() {
        run.insert("final_residual".into(), o.final_residual.into());
    }
    run.insert("wall_clock_seconds".into(), o.seconds.into());
    run.insert(
        "velocity_nodes".into(),
        (solver.velocity_set().len() as i64).into(),
    );
    run.insert("cells".into(), (solver.mesh().cell_count() as i64).into());
    if let Some(e) = o.oracle_error {
        run.insert("oracle_max_relative_error".into(), e.into());
    }
    run.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    layer.run = Some(run);
    let text = toml::to_string(&layer).map_err(|e| Failure::usage(format!("manifest: {e}")))?;
    fs::write(r.out_dir.join("manifest.toml"), text)?;
    Ok(())
}

fn write_outputs(r: &Resolved, solver: &Solver) -> Result<Option<f64>, Failure> {
    let field = MacroField::from_solver(solver);
    let mut out = create(&r.out_dir.join("field.csv"))?;
    field.write_csv(&mut out)?;
    out.flush()?;
    for &line in r.case.profile_lines() {
        let profile =
            extract_centerline(&field, line).map_err(|e| Failure::usage(e.to_string()))?;
        let mut out = create(&r.out_dir.join(format!("profile_{}.csv", line.label())))?;
        profile.write_csv(&mut out)?;
        out.flush()?;
    }
    match (&r.case.flow, r.oracle) {
        (Flow::Cavity(cavity), true) => {
            let report = oracle_report(&field, cavity, ORACLE_TERMS)
                .map_err(|e| Failure::usage(e.to_string()))?;
            let mut out = create(&r.out_dir.join("oracle.csv"))?;
            report.write_csv(&mut out)?;
            out.flush()?;
            println!(
                "oracle: max centerline temperature error {:.3e} = {:.3}% of (T_h - T_c)",
                report.max_abs_error,
                100.0 * report.max_relative_error
            );
            Ok(Some(report.max_relative_error))
        }
        _ => Ok(None),
    }
}

pub fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let file = match &args.config {
        Some(p) => ConfigLayer::load(p).map_err(Failure::usage)?,
        None => ConfigLayer::default(),
    };
    let resolved = config::resolve(&file.overlay(&args.layer())).map_err(Failure::usage)?;
    let r = &resolved;

    let mut solver = r
        .case
        .build_solver(r.solver)
        .map_err(|e| Failure::usage(e.to_string()))?;
    if let Some(path) = &args.resume {
        let file =
            File::open(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        Checkpoint::read_from(BufReader::new(file))
            .and_then(|c| c.restore_into(&mut solver))
            .map_err(|e| Failure::usage(e.to_string()))?;
        log::info!(
            "resumed from {} at step {}",
            path.display(),
            solver.step_count()
        );
    }
    fs::create_dir_all(&r.out_dir)
        .map_err(|e| Failure::usage(format!("{}: {e}", r.out_dir.display())))?;
    log::info!(
        "{} ({}): {} cells x {} velocity nodes, dt = {:.4e}, {} thread(s), output in {}",
        r.preset,
        r.scale.label(),
        solver.mesh().cell_count(),
        solver.velocity_set().len(),
        solver.dt(),
        r.solver.threads,
        r.out_dir.display()
    );

    let mut residuals = create(&r.out_dir.join("residuals.csv"))?;
    writeln!(residuals, "step,time,dt,residual,raw_residual,retries")?;
    let started = Instant::now();
    let mut io_error = None;
    let result = solver.run_to_steady(|s: &StepReport| {
        if let Err(e) = writeln!(
            residuals,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            s.step, s.time, s.dt, s.residual, s.raw_residual, s.retries
        ) {
            io_error.get_or_insert(e);
        }
        log::info!(
            "step {:>7}  t = {:.4}  residual = {:.3e}",
            s.step,
            s.time,
            s.residual
        );
    });
    residuals.flush()?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    let seconds = started.elapsed().as_secs_f64();

    match result {
        Ok(summary) => {
            let status = if summary.converged {
                "converged"
            } else {
                "step budget exhausted"
            };
            println!(
                "{status} after {} steps, residual {:.3e}, {:.1} s",
                summary.steps, summary.final_residual, seconds
            );
            let oracle_error = write_outputs(r, &solver)?;
            if args.checkpoint {
                write_checkpoint(&solver, &r.out_dir.join("final.ckpt"))?;
            }
            write_manifest(
                r,
                &solver,
                &Outcome {
                    status: if summary.converged {
                        "converged"
                    } else {
                        "budget"
                    },
                    steps: summary.steps,
                    final_residual: summary.final_residual,
                    seconds,
                    oracle_error,
                },
            )?;
            Ok(())
        }
        Err(SolverError::Divergence { step, reason }) => {
            // The solver keeps the last accepted state on failure.
            let path = r.out_dir.join("last_good.ckpt");
            write_checkpoint(&solver, &path)?;
            write_manifest(
                r,
                &solver,
                &Outcome {
                    status: "diverged",
                    steps: solver.step_count(),
                    final_residual: f64::NAN,
                    seconds,
                    oracle_error: None,
                },
            )?;
            Err(Failure {
                code: EXIT_DIVERGENCE,
                message: format!(
                    "solver diverged at step {step}: {reason}\nlast good state (step {}) saved to {}",
                    solver.step_count(),
                    path.display()
                ),
            })
        }
        Err(e) => Err(Failure::usage(e.to_string())),
    }
}
