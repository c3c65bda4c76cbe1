//! Browser front end for the substructuring solver. Each export takes plain
//! numbers and strings and returns a JSON document; the logic lives in
//! ordinary functions so it can be tested natively.

use mhbddc::assembly::assemble;
use mhbddc::bddc::BddcOptions;
use mhbddc::driver::{solve, SolveReport, SolverConfig};
use mhbddc::mesh::{generate_cross_fracture_cube, generate_unit_square, BcSpec, FractureParams};
use mhbddc::partition::{CornerMode, Scaling};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest square resolution the page accepts.
pub const MAX_SQUARE_N: usize = 48;
pub const MAX_SUBSTRUCTURES: usize = 32;

/// Fracture-cube resolution used by the two studies.
const STUDY_N: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub n_sub: usize,
    pub n_dofs: usize,
    pub n_interface: usize,
    pub n_corners: usize,
    pub n_coarse: usize,
    pub iterations: usize,
    pub converged: bool,
    pub condition: f64,
    pub residuals: Vec<f64>,
    pub oracle_discrepancy: Option<f64>,
}

impl From<SolveReport> for Summary {
    fn from(r: SolveReport) -> Self {
        Self {
            n_sub: r.n_sub,
            n_dofs: r.n_dofs,
            n_interface: r.n_interface,
            n_corners: r.n_corners,
            n_coarse: r.n_coarse,
            iterations: r.iterations,
            converged: r.converged,
            condition: r.condition,
            residuals: r.residuals,
            oracle_discrepancy: r.oracle_discrepancy,
        }
    }
}

/// Solved square, ready to paint: one entry per triangle.
#[derive(Clone, Debug, Serialize)]
pub struct SquareSolution {
    /// `[x0, y0, x1, y1, x2, y2]` per triangle.
    pub triangles: Vec<[f64; 6]>,
    pub pressure: Vec<f64>,
    pub owner: Vec<usize>,
    pub summary: Summary,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyRow {
    pub label: String,
    pub summary: Summary,
}

pub fn parse_scaling(name: &str) -> Result<Scaling, String> {
    match name {
        "arithmetic" => Ok(Scaling::Arithmetic),
        "rho" => Ok(Scaling::Rho),
        "diag" => Ok(Scaling::Diagonal),
        other => Err(format!("unknown scaling '{other}'")),
    }
}

fn check_n_sub(n_sub: usize) -> Result<(), String> {
    if (1..=MAX_SUBSTRUCTURES).contains(&n_sub) {
        Ok(())
    } else {
        Err(format!("substructures must be in 1..={MAX_SUBSTRUCTURES}"))
    }
}

fn config(n_sub: usize, scaling: Scaling, corners: bool) -> SolverConfig {
    SolverConfig {
        n_sub,
        scaling,
        bddc: BddcOptions {
            corners: if corners {
                CornerMode::On
            } else {
                CornerMode::Off
            },
            ..Default::default()
        },
        ..Default::default()
    }
}

/// Unit square with pressure 1 on the left and 0 on the right.
pub fn square(
    n: usize,
    n_sub: usize,
    scaling: &str,
    corners: bool,
) -> Result<SquareSolution, String> {
    if !(1..=MAX_SQUARE_N).contains(&n) {
        return Err(format!("n must be in 1..={MAX_SQUARE_N}"));
    }
    check_n_sub(n_sub)?;
    let scaling = parse_scaling(scaling)?;
    let bc = BcSpec {
        axis: 0,
        low: Some(1.0),
        high: Some(0.0),
    };
    let mesh = generate_unit_square(n, &bc).map_err(|e| e.to_string())?;
    let system = assemble(&mesh).map_err(|e| e.to_string())?;
    let out =
        solve(&mesh, &system, &config(n_sub, scaling, corners), true).map_err(|e| e.to_string())?;
    let triangles = (0..mesh.elements().len())
        .map(|e| {
            let p = mesh.element_points(e);
            [p[0][0], p[0][1], p[1][0], p[1][1], p[2][0], p[2][1]]
        })
        .collect();
    Ok(SquareSolution {
        triangles,
        pressure: out.solution.p,
        owner: out.partition.owners().to_vec(),
        summary: out.report.into(),
    })
}

fn fracture_study(
    n_sub: usize,
    variants: &[(&str, Scaling, bool)],
) -> Result<Vec<StudyRow>, String> {
    check_n_sub(n_sub)?;
    let mesh = generate_cross_fracture_cube(
        STUDY_N,
        &FractureParams::high_contrast(),
        &BcSpec::default(),
    )
    .map_err(|e| e.to_string())?;
    let system = assemble(&mesh).map_err(|e| e.to_string())?;
    variants
        .iter()
        .map(|&(label, scaling, corners)| {
            let mut cfg = config(n_sub, scaling, corners);
            cfg.pcg.max_iter = 500;
            let out = solve(&mesh, &system, &cfg, false).map_err(|e| e.to_string())?;
            Ok(StudyRow {
                label: label.to_string(),
                summary: out.report.into(),
            })
        })
        .collect()
}

/// The three interface weightings on the high-contrast fracture cube.
pub fn scaling_rows(n_sub: usize) -> Result<Vec<StudyRow>, String> {
    fracture_study(
        n_sub,
        &[
            ("arithmetic", Scaling::Arithmetic, true),
            ("rho", Scaling::Rho, true),
            ("diag", Scaling::Diagonal, true),
        ],
    )
}

/// Corner constraints on and off on the high-contrast fracture cube.
pub fn corner_rows(n_sub: usize) -> Result<Vec<StudyRow>, String> {
    fracture_study(
        n_sub,
        &[
            ("corners on", Scaling::Diagonal, true),
            ("corners off", Scaling::Diagonal, false),
        ],
    )
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    let v = r.map_err(|e| JsValue::from_str(&e))?;
    serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn solve_square(
    n: usize,
    n_sub: usize,
    scaling: &str,
    corners: bool,
) -> Result<String, JsValue> {
    to_js(square(n, n_sub, scaling, corners))
}

#[wasm_bindgen]
pub fn scaling_study(n_sub: usize) -> Result<String, JsValue> {
    to_js(scaling_rows(n_sub))
}

#[wasm_bindgen]
pub fn corner_study(n_sub: usize) -> Result<String, JsValue> {
    to_js(corner_rows(n_sub))
}
