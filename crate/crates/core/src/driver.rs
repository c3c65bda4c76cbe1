//! End-to-end solve: partition, substructure, BDDC set-up, PCG, recovery.

use crate::assembly::{full_solve_direct, BlockSystem, SolutionTriple};
use crate::bddc::{Bddc, BddcOptions};
use crate::error::Result;
use crate::krylov::{pcg, PcgConfig};
use crate::mesh::Mesh;
use crate::partition::{
    classify_interface, compute_weights, partition_elements, GlobKind, Partition, Scaling,
};
use crate::subsolve::InterfaceProblem;
use std::fmt::Write as _;

/// Wall clock; reads zero on wasm32, which has no monotonic clock in std.
#[derive(Clone, Copy)]
struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.start.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}

/// Direct-solve oracle limit on the total number of unknowns.
pub const ORACLE_MAX_DOFS: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub n_sub: usize,
    pub seed: u64,
    pub scaling: Scaling,
    pub bddc: BddcOptions,
    pub pcg: PcgConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_sub: 4,
            seed: 0,
            scaling: Scaling::Diagonal,
            bddc: BddcOptions::default(),
            pcg: PcgConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    /// Number of substructures `N`.
    pub n_sub: usize,
    /// Total number of unknowns `n`.
    pub n_dofs: usize,
    pub n_interface: usize,
    /// Face globs `n_f`.
    pub n_faces: usize,
    /// Corners `n_c`.
    pub n_corners: usize,
    pub n_coarse: usize,
    pub iterations: usize,
    pub converged: bool,
    pub condition: f64,
    pub final_residual: f64,
    pub residuals: Vec<f64>,
    pub setup_seconds: f64,
    pub pcg_seconds: f64,
    pub solve_seconds: f64,
    /// Largest relative max-norm difference to the direct solve over the
    /// u, p and λ blocks, when it was computed.
    pub oracle_discrepancy: Option<f64>,
}

pub const CSV_HEADER: &str = "N,n,n/N,n_Gamma,n_f,n_c,its,cond,setup,pcg,solve";

impl SolveReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.1},{},{},{},{},{:.4},{:.3},{:.3},{:.3}",
            self.n_sub,
            self.n_dofs,
            self.n_dofs as f64 / self.n_sub as f64,
            self.n_interface,
            self.n_faces,
            self.n_corners,
            self.iterations,
            self.condition,
            self.setup_seconds,
            self.pcg_seconds,
            self.solve_seconds
        )
    }
}

/// Header plus one row per report.
pub fn report_csv(reports: &[SolveReport]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in reports {
        let _ = writeln!(s, "{}", r.csv_row());
    }
    s
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub solution: SolutionTriple,
    pub partition: Partition,
    pub report: SolveReport,
}

/// Relative max-norm discrepancy, the worst of the three blocks.
pub fn discrepancy(a: &SolutionTriple, b: &SolutionTriple) -> f64 {
    let block = |x: &[f64], y: &[f64]| {
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = x
            .iter()
            .zip(y)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    };
    block(&a.u, &b.u)
        .max(block(&a.p, &b.p))
        .max(block(&a.lambda, &b.lambda))
}

/// Runs the substructuring solver. With one substructure the interface is
/// empty and the direct factorization is used instead. Non-convergence is
/// reported through `report.converged`, not as an error.
pub fn solve(
    mesh: &Mesh,
    system: &BlockSystem,
    config: &SolverConfig,
    oracle: bool,
) -> Result<SolveOutcome> {
    config.pcg.validate()?;
    let start = Stopwatch::start();
    let partition = partition_elements(mesh, config.n_sub, config.seed)?;
    let layout = classify_interface(mesh, &system.dofs, &partition);
    let mut report = SolveReport {
        n_sub: config.n_sub,
        n_dofs: system.n_total(),
        n_interface: layout.n_interface(),
        n_faces: layout.count(GlobKind::Face),
        ..Default::default()
    };

    let solution = if layout.n_interface() == 0 {
        let sol = full_solve_direct(system)?;
        report.setup_seconds = start.seconds();
        report.converged = true;
        report.condition = 1.0;
        sol
    } else {
        let problem = InterfaceProblem::new(system, &partition, &layout)?;
        let weights = compute_weights(mesh, system, &partition, &layout, config.scaling)?;
        let pre = Bddc::new(&problem, &layout, &weights, config.bddc)?;
        report.n_corners = pre.constraints().count_corners();
        report.n_coarse = pre.constraints().n_coarse();
        let b = problem.reduced_rhs();
        report.setup_seconds = start.seconds();

        let t = Stopwatch::start();
        let out = pcg(|x| problem.apply(x), |r| pre.apply(r), &b, &config.pcg)?;
        report.pcg_seconds = t.seconds();
        report.iterations = out.iterations;
        report.converged = out.converged;
        report.condition = out.condition;
        report.final_residual = out.final_residual();
        report.residuals = out.residuals.clone();
        if !out.converged {
            log::warn!(
                "PCG stopped after {} iterations at relative residual {:e}",
                out.iterations,
                report.final_residual
            );
        }
        problem.recover(&out.x)
    };
    report.solve_seconds = start.seconds();

    if oracle {
        if system.n_total() <= ORACLE_MAX_DOFS {
            let direct = full_solve_direct(system)?;
            report.oracle_discrepancy = Some(discrepancy(&solution, &direct));
        } else {
            log::info!(
                "skipping the direct oracle: {} unknowns exceed {ORACLE_MAX_DOFS}",
                system.n_total()
            );
        }
    }
    Ok(SolveOutcome {
        solution,
        partition,
        report,
    })
}

/// Element pressures and face fluxes in the section layout of the mesh
/// format.
pub fn solution_to_text(mesh: &Mesh, system: &BlockSystem, sol: &SolutionTriple) -> String {
    let mut s = String::from("$pressure\n");
    for (e, p) in sol.p.iter().enumerate() {
        let _ = writeln!(s, "{e} {p:.17e}");
    }
    s.push_str("$end\n$flux\n");
    for (e, el) in mesh.elements().iter().enumerate() {
        for j in 0..=el.dim {
            let _ = writeln!(s, "{e} {j} {:.17e}", sol.flux(&system.dofs, e, j));
        }
    }
    s.push_str("$end\n");
    s
}
