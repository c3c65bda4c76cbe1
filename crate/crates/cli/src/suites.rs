//! Fixed benchmark suites. Every run enables the direct-solve oracle; it is
//! skipped automatically above the size limit.

use clap::ValueEnum;

use crate::config::{Generator, MeshSource, RunConfig, ScalingArg, Switch};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// 2D square, geometrically similar substructures of ~700-800 unknowns.
    SquareWeak,
    /// 3D cube, ~1,100-1,300 unknowns per substructure.
    CubeWeak,
    /// Fracture cube of fixed size on a growing number of substructures.
    FractureStrong,
    /// High-contrast fracture cube with and without corners.
    CornerStudy,
    /// High-contrast fracture cube under the three interface weightings.
    ScalingStudy,
}

fn high_contrast(label: String, n: usize, n_sub: usize) -> RunConfig {
    let mut c = RunConfig::generated(label, Generator::FractureCube, n, n_sub);
    c.mesh = MeshSource::Generated {
        generator: Generator::FractureCube,
        n,
        high_contrast: true,
    };
    c.max_iter = 1000;
    c
}

pub fn runs(suite: Suite) -> Vec<RunConfig> {
    match suite {
        Suite::SquareWeak => [(12, 2), (16, 4), (24, 8), (32, 16), (48, 32)]
            .into_iter()
            .map(|(n, s)| {
                RunConfig::generated(format!("square-weak N={s}"), Generator::Square, n, s)
            })
            .collect(),
        Suite::CubeWeak => [(4, 2), (5, 4), (6, 8), (8, 16)]
            .into_iter()
            .map(|(n, s)| RunConfig::generated(format!("cube-weak N={s}"), Generator::Cube, n, s))
            .collect(),
        Suite::FractureStrong => [2, 4, 8, 16, 32]
            .into_iter()
            .map(|s| {
                RunConfig::generated(
                    format!("fracture-strong N={s}"),
                    Generator::FractureCube,
                    8,
                    s,
                )
            })
            .collect(),
        Suite::CornerStudy => {
            let mut v = Vec::new();
            for s in [8, 16, 32] {
                for corners in [Switch::On, Switch::Off] {
                    let name = if corners.is_on() { "on" } else { "off" };
                    let mut c = high_contrast(format!("corners={name} N={s}"), 8, s);
                    c.corners = corners;
                    v.push(c);
                }
            }
            v
        }
        Suite::ScalingStudy => {
            let mut v = Vec::new();
            for s in [8, 16, 32] {
                for scaling in [ScalingArg::Arithmetic, ScalingArg::Rho, ScalingArg::Diag] {
                    let name = scaling.to_possible_value().expect("no skipped variants");
                    let mut c = high_contrast(format!("scaling={} N={s}", name.get_name()), 8, s);
                    c.scaling = scaling;
                    v.push(c);
                }
            }
            v
        }
    }
}
