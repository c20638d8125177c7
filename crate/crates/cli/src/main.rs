mod config;
mod run;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use atgj::cases::{extract_centerline, LineKind, MacroField, Scale};
use atgj::quadrature::{RuleKind, WeightParams};
use atgj::solver::Scheme;
use atgj::validate::{self, Suite};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use config::ConfigLayer;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_DIVERGENCE: u8 = 3;

/// A failed command: message for stderr and the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::usage(format!("i/o error: {e}"))
    }
}

#[derive(Parser)]
#[command(
    name = "atgj",
    version,
    about = "ATGJ velocity quadrature and discrete-velocity kinetic solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a velocity set and write its nodes and weights as CSV.
    Quad(QuadArgs),
    /// Run the invariant suites and print a pass/fail table.
    Validate(ValidateArgs),
    /// Run a benchmark case to steady state or the step budget.
    Run(RunArgs),
    /// Re-extract centerline profiles from a field dump.
    Profiles(ProfileArgs),
}

#[derive(Args)]
struct QuadArgs {
    /// Radial nodes.
    #[arg(long)]
    n: Option<usize>,
    /// Angular nodes.
    #[arg(long)]
    ntheta: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, conflicts_with = "alpha_matched")]
    alpha: Option<f64>,
    /// Set alpha = (pi/2) lambda.
    #[arg(long)]
    alpha_matched: bool,
    #[arg(long, default_value_t = 1.0)]
    t0: f64,
    #[arg(long, default_value_t = 0.0)]
    theta0: f64,
    /// Composite-Simpson Newton-Cotes grid instead of ATGJ.
    #[arg(long, requires_all = ["m", "u"], conflicts_with_all = ["n", "ntheta", "lambda", "alpha", "alpha_matched"])]
    nc: bool,
    /// Newton-Cotes points per axis.
    #[arg(long, requires = "nc")]
    m: Option<usize>,
    /// Newton-Cotes half-width.
    #[arg(long, requires = "nc")]
    u: Option<f64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_parser = ["quadrature", "kinetic", "solver"])]
    only: Option<String>,
    /// Adds this amount to every measured error (harness self-test).
    #[arg(long, hide = true, default_value_t = 0.0)]
    inject: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Dugks,
    Upwind,
}

#[derive(Args)]
pub struct RunArgs {
    #[arg(long)]
    preset: Option<String>,
    /// TOML configuration, layered between the preset and these flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
    /// Output directory.
    #[arg(long, env = "ATGJ_OUT_DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    steady_tol: Option<f64>,
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long)]
    report_every: Option<u64>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long)]
    kn: Option<f64>,
    /// Cavity cells per side.
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    cells_per_diameter: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    ntheta: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    theta0: Option<f64>,
    /// Continue from a checkpoint written by an earlier run.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Also write a checkpoint of the final state.
    #[arg(long)]
    checkpoint: bool,
}

impl RunArgs {
    /// The command-line layer of the configuration.
    fn layer(&self) -> ConfigLayer {
        let mut l = ConfigLayer::default();
        l.case.preset = self.preset.clone();
        l.case.scale = self.scale.map(|s| match s {
            ScaleArg::Desk => Scale::Desk,
            ScaleArg::Paper => Scale::Paper,
        });
        l.output.dir = self.out.clone();
        l.solver.threads = self.threads;
        l.solver.cfl = self.cfl;
        l.solver.steady_tol = self.steady_tol;
        l.solver.max_steps = self.max_steps;
        l.solver.report_every = self.report_every;
        l.solver.scheme = self.scheme.map(|s| match s {
            SchemeArg::Dugks => Scheme::Dugks,
            SchemeArg::Upwind => Scheme::Upwind,
        });
        l.gas.kn = self.kn;
        l.mesh.cells = self.cells;
        l.mesh.cells_per_diameter = self.cells_per_diameter;
        l.quadrature.n = self.n;
        l.quadrature.ntheta = self.ntheta;
        l.quadrature.lambda = self.lambda;
        l.quadrature.alpha = self.alpha;
        l.quadrature.theta0 = self.theta0;
        l
    }
}

#[derive(Args)]
struct ProfileArgs {
    /// Field dump written by `atgj run`.
    #[arg(long)]
    field: PathBuf,
    #[arg(long, value_parser = ["horizontal", "vertical", "upstream"])]
    line: String,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A clap-formatted error with the usage line of `subcommand`.
fn usage_error(subcommand: &str, kind: ErrorKind, msg: &str) -> Failure {
    let mut cmd = Cli::command();
    cmd.build();
    let sub = cmd
        .find_subcommand_mut(subcommand)
        .expect("known subcommand");
    let text = sub.error(kind, msg).render().to_string();
    Failure::usage(text.strip_prefix("error: ").unwrap_or(&text))
}

fn writer(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_quad(a: &QuadArgs) -> Result<(), Failure> {
    let kind = if a.nc {
        RuleKind::NewtonCotes {
            points_per_axis: a.m.expect("clap enforces --m"),
            half_width: a.u.expect("clap enforces --u"),
        }
    } else {
        let (Some(n), Some(ntheta), Some(lambda)) = (a.n, a.ntheta, a.lambda) else {
            return Err(usage_error(
                "quad",
                ErrorKind::MissingRequiredArgument,
                "ATGJ rules need --n, --ntheta and --lambda (or use --nc --m M --u U)",
            ));
        };
        let alpha = match (a.alpha, a.alpha_matched) {
            (Some(alpha), _) => alpha,
            (None, true) => std::f64::consts::FRAC_PI_2 * lambda,
            (None, false) => {
                return Err(usage_error(
                    "quad",
                    ErrorKind::MissingRequiredArgument,
                    "give --alpha A or --alpha-matched",
                ))
            }
        };
        let params =
            WeightParams::new(alpha, lambda, a.t0).map_err(|e| Failure::usage(e.to_string()))?;
        RuleKind::Atgj {
            n_radial: n,
            n_theta: ntheta,
            theta0: a.theta0,
            params,
        }
    };
    let vs = kind.build().map_err(|e| Failure::usage(e.to_string()))?;
    let mut out = writer(a.out.as_ref())?;
    vs.write_csv(&mut out)?;
    out.flush()?;
    let summary = format!(
        "K = {}\nsum w_k = {:.16e}\nanalytic sum w_k = {:.16e}\nmax R = {:.6}",
        vs.len(),
        vs.total_raw_weight(),
        vs.analytic_total_weight(),
        vs.max_radius()
    );
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn cmd_validate(a: &ValidateArgs) -> Result<(), Failure> {
    let only = a
        .only
        .as_deref()
        .map(|s| Suite::parse(s).expect("clap restricts the value"));
    let checks = validate::run(&validate::Options {
        only,
        inject: a.inject,
    });
    println!(
        "{:<11} {:<48} {:>11} {:>9}  result",
        "suite", "check", "error", "tolerance"
    );
    for c in &checks {
        println!(
            "{:<11} {:<48} {:>11.3e} {:>9.0e}  {}",
            c.suite.label(),
            c.name,
            c.error,
            c.tolerance,
            if c.passed() { "PASS" } else { "FAIL" }
        );
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.name)
        .collect();
    if failed.is_empty() {
        println!("all {} checks passed", checks.len());
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VALIDATION,
            message: format!("{} check(s) failed: {}", failed.len(), failed.join("; ")),
        })
    }
}

fn cmd_profiles(a: &ProfileArgs) -> Result<(), Failure> {
    let line = LineKind::parse(&a.line).expect("clap restricts the value");
    let file =
        File::open(&a.field).map_err(|e| Failure::usage(format!("{}: {e}", a.field.display())))?;
    let field =
        MacroField::read_csv(BufReader::new(file)).map_err(|e| Failure::usage(e.to_string()))?;
    let profile = extract_centerline(&field, line).map_err(|e| Failure::usage(e.to_string()))?;
    let mut out = writer(a.out.as_ref())?;
    profile.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Quad(a) => cmd_quad(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Run(a) => run::cmd_run(a),
        Command::Profiles(a) => cmd_profiles(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message.trim_end());
            ExitCode::from(f.code)
        }
    }
}
