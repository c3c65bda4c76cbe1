//! `mhbddc`: generate meshes, solve with BDDC-preconditioned substructuring
//! and run the benchmark suites.

mod config;
mod suites;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mhbddc::assembly::assemble;
use mhbddc::driver::{report_csv, solution_to_text, solve, SolveReport, CSV_HEADER};
use mhbddc::mesh::write_mesh_string;
use mhbddc::Error;

use config::{Generator, MeshSource, RunConfig, ScalingArg, Switch};
use suites::Suite;

const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_SINGULAR: u8 = 4;

#[derive(Parser)]
#[command(
    name = "mhbddc",
    version,
    about = "BDDC substructuring solver for mixed-hybrid Darcy flow"
)]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and print a report.
    Run(RunArgs),
    /// Run a named benchmark suite and emit one CSV row per run.
    Bench(BenchArgs),
    /// Write a generated mesh in the text mesh format.
    Gen(GenArgs),
}

#[derive(Args)]
struct MeshArgs {
    /// Mesh file in the text mesh format.
    #[arg(long, conflicts_with = "gen")]
    mesh: Option<PathBuf>,
    /// Structured benchmark mesh.
    #[arg(long, value_enum, default_value = "square")]
    gen: Generator,
    /// Cells per axis of the generated mesh.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Fracture cube with highly permeable fractures.
    #[arg(long)]
    high_contrast: bool,
}

impl MeshArgs {
    fn source(&self) -> MeshSource {
        match &self.mesh {
            Some(path) => MeshSource::File { path: path.clone() },
            None => MeshSource::Generated {
                generator: self.gen,
                n: self.n,
                high_contrast: self.high_contrast,
            },
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    mesh: MeshArgs,
    /// Number of substructures.
    #[arg(long, default_value_t = 4)]
    nsub: usize,
    /// Breaks ties between equally long axes in the bisection.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "diag")]
    scaling: ScalingArg,
    #[arg(long, value_enum, default_value = "on")]
    corners: Switch,
    #[arg(long, value_enum, default_value = "on")]
    edge_averages: Switch,
    /// Relative residual at which PCG stops.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    /// Compare against the monolithic direct solve (up to 50,000 unknowns).
    #[arg(long)]
    oracle: bool,
    /// Append the report as a CSV row to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write element pressures and face fluxes here.
    #[arg(long)]
    solution: Option<PathBuf>,
    /// Write the PCG residual history (`iter,relres`) here.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    mesh: MeshArgs,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
            Error::Singular { .. }
            | Error::InsufficientConstraints { .. }
            | Error::Indefinite { .. } => EXIT_SINGULAR,
            Error::Config(_)
            | Error::Mesh(_)
            | Error::Parse { .. }
            | Error::DegenerateElement { .. }
            | Error::Io { .. } => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| config_failure(format!("cannot write {}: {e}", path.display())))
}

/// Solves one configuration; non-convergence is left to the caller.
fn execute(
    cfg: &RunConfig,
) -> Result<
    (
        mhbddc::mesh::Mesh,
        mhbddc::assembly::BlockSystem,
        mhbddc::driver::SolveOutcome,
    ),
    Failure,
> {
    cfg.validate().map_err(config_failure)?;
    let mesh = cfg.mesh.load()?;
    let system = assemble(&mesh)?;
    let outcome = solve(&mesh, &system, &cfg.solver(), cfg.oracle)?;
    Ok((mesh, system, outcome))
}

fn print_report(cfg: &RunConfig, mesh_elements: usize, r: &SolveReport) {
    println!(
        "mesh: {} ({mesh_elements} elements, {} unknowns)",
        cfg.mesh.describe(),
        r.n_dofs
    );
    println!(
        "config: {}",
        serde_json::to_string(cfg).expect("configuration serializes")
    );
    println!(
        "substructures {}, interface {}, faces {}, corners {}, coarse {}",
        r.n_sub, r.n_interface, r.n_faces, r.n_corners, r.n_coarse
    );
    let status = if r.converged {
        "converged"
    } else {
        "NOT converged"
    };
    println!(
        "PCG: {status} in {} iterations, relative residual {:.3e}, condition estimate {:.4}",
        r.iterations, r.final_residual, r.condition
    );
    println!(
        "timings: set-up {:.3} s, PCG {:.3} s, solve {:.3} s",
        r.setup_seconds, r.pcg_seconds, r.solve_seconds
    );
    if let Some(d) = r.oracle_discrepancy {
        println!("oracle: max relative discrepancy {d:.3e}");
    } else if cfg.oracle {
        println!("oracle: skipped (problem too large)");
    }
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let cfg = RunConfig {
        label: "run".into(),
        mesh: args.mesh.source(),
        n_sub: args.nsub,
        seed: args.seed,
        scaling: args.scaling,
        corners: args.corners,
        edge_averages: args.edge_averages,
        rel_tol: args.tol,
        max_iter: args.max_iter,
        oracle: args.oracle,
    };
    let (mesh, system, outcome) = execute(&cfg)?;
    let r = &outcome.report;
    print_report(&cfg, mesh.elements().len(), r);
    if let Some(path) = &args.csv {
        let mut text = String::new();
        let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
        if fresh {
            text.push_str(CSV_HEADER);
            text.push('\n');
        }
        text.push_str(&r.csv_row());
        text.push('\n');
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| config_failure(format!("cannot open {}: {e}", path.display())))?;
        f.write_all(text.as_bytes())
            .map_err(|e| config_failure(format!("cannot write {}: {e}", path.display())))?;
    }
    if let Some(path) = &args.solution {
        write_file(path, &solution_to_text(&mesh, &system, &outcome.solution))?;
    }
    if let Some(path) = &args.history {
        let mut s = String::from("iter,relres\n");
        for (k, v) in r.residuals.iter().enumerate() {
            s.push_str(&format!("{k},{v:e}\n"));
        }
        write_file(path, &s)?;
    }
    if !r.converged {
        return Err(Failure {
            code: EXIT_NOT_CONVERGED,
            message: format!(
                "PCG did not reach the tolerance in {} iterations",
                r.iterations
            ),
        });
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let mut reports = Vec::new();
    for cfg in suites::runs(args.suite) {
        let (_, _, outcome) = execute(&cfg)?;
        let r = outcome.report;
        let oracle = r
            .oracle_discrepancy
            .map_or("-".to_string(), |d| format!("{d:.1e}"));
        let flag = if r.converged { "" } else { "  (not converged)" };
        eprintln!(
            "{:<24} its {:>5}  cond {:>10.3}  oracle {oracle}{flag}",
            cfg.label, r.iterations, r.condition
        );
        reports.push(r);
    }
    let csv = report_csv(&reports);
    match &args.csv {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), Failure> {
    let source = args.mesh.source();
    if let MeshSource::File { .. } = source {
        return Err(config_failure("gen needs a generator, not --mesh"));
    }
    let probe = RunConfig {
        mesh: source.clone(),
        ..RunConfig::generated("gen", Generator::Square, 1, 1)
    };
    probe.validate().map_err(config_failure)?;
    let text = write_mesh_string(&source.load()?);
    match &args.out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Bench(a) => bench(a),
        Command::Gen(a) => gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
