use std::path::PathBuf;

use clap::ValueEnum;
use mhbddc::bddc::BddcOptions;
use mhbddc::driver::SolverConfig;
use mhbddc::krylov::PcgConfig;
use mhbddc::mesh::{
    generate_cross_fracture_cube, generate_unit_cube, generate_unit_square, read_mesh, BcSpec,
    FractureParams, Mesh,
};
use mhbddc::partition::{CornerMode, Scaling};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Square,
    Cube,
    FractureCube,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingArg {
    Arithmetic,
    Rho,
    Diag,
}

impl From<ScalingArg> for Scaling {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::Arithmetic => Scaling::Arithmetic,
            ScalingArg::Rho => Scaling::Rho,
            ScalingArg::Diag => Scaling::Diagonal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    pub fn is_on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum MeshSource {
    Generated {
        generator: Generator,
        n: usize,
        high_contrast: bool,
    },
    File {
        path: PathBuf,
    },
}

impl MeshSource {
    pub fn load(&self) -> mhbddc::Result<Mesh> {
        match self {
            MeshSource::Generated {
                generator,
                n,
                high_contrast,
            } => {
                let bc = BcSpec::default();
                match generator {
                    Generator::Square => generate_unit_square(*n, &bc),
                    Generator::Cube => generate_unit_cube(*n, &bc),
                    Generator::FractureCube => {
                        let params = if *high_contrast {
                            FractureParams::high_contrast()
                        } else {
                            FractureParams::default()
                        };
                        generate_cross_fracture_cube(*n, &params, &bc)
                    }
                }
            }
            MeshSource::File { path } => read_mesh(path),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            MeshSource::Generated {
                generator,
                n,
                high_contrast,
            } => {
                let name = generator.to_possible_value().expect("no skipped variants");
                let contrast = if *high_contrast {
                    ", high contrast"
                } else {
                    ""
                };
                format!("{} n={n}{contrast}", name.get_name())
            }
            MeshSource::File { path } => path.display().to_string(),
        }
    }
}

/// Everything that determines a run, echoed into the report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub label: String,
    pub mesh: MeshSource,
    pub n_sub: usize,
    pub seed: u64,
    pub scaling: ScalingArg,
    pub corners: Switch,
    pub edge_averages: Switch,
    pub rel_tol: f64,
    pub max_iter: usize,
    pub oracle: bool,
}

impl RunConfig {
    pub fn generated(
        label: impl Into<String>,
        generator: Generator,
        n: usize,
        n_sub: usize,
    ) -> Self {
        Self {
            label: label.into(),
            mesh: MeshSource::Generated {
                generator,
                n,
                high_contrast: false,
            },
            n_sub,
            seed: 0,
            scaling: ScalingArg::Diag,
            corners: Switch::On,
            edge_averages: Switch::On,
            rel_tol: 1e-7,
            max_iter: 5000,
            oracle: true,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n_sub == 0 {
            return Err("--nsub must be at least 1".into());
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(format!("--tol must lie in (0, 1), got {}", self.rel_tol));
        }
        if self.max_iter == 0 {
            return Err("--max-iter must be at least 1".into());
        }
        if let MeshSource::Generated { generator, n, .. } = &self.mesh {
            if *n == 0 {
                return Err("--n must be at least 1".into());
            }
            if *generator == Generator::FractureCube && n % 2 != 0 {
                return Err(format!("fracture-cube needs an even --n, got {n}"));
            }
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            n_sub: self.n_sub,
            seed: self.seed,
            scaling: self.scaling.into(),
            bddc: BddcOptions {
                corners: if self.corners.is_on() {
                    CornerMode::On
                } else {
                    CornerMode::Off
                },
                edge_averages: self.edge_averages.is_on(),
            },
            pcg: PcgConfig {
                rel_tol: self.rel_tol,
                max_iter: self.max_iter,
                record_lanczos: true,
            },
        }
    }
}
