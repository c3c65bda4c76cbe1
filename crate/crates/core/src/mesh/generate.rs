//! Structured benchmark meshes on the unit square and unit cube.

use std::collections::{BTreeMap, BTreeSet};

use super::{BoundaryKind, Conductivity, Element, Mesh, Point};
use crate::error::{Error, Result};

/// Pressure heads prescribed on the two boundary planes orthogonal to one
/// coordinate axis. `None` leaves that plane with zero normal flux.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BcSpec {
    pub axis: usize,
    pub low: Option<f64>,
    pub high: Option<f64>,
}

impl Default for BcSpec {
    fn default() -> Self {
        Self {
            axis: 0,
            low: Some(1.0),
            high: Some(0.0),
        }
    }
}

/// Material data of the cross-fracture cube.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractureParams {
    /// Isotropic conductivities of the 1D, 2D and 3D elements.
    pub k: [f64; 3],
    /// Transition coefficient shared by all links.
    pub sigma: f64,
    /// Channel cross-section area.
    pub delta1: f64,
    /// Fracture thickness.
    pub delta2: f64,
}

impl Default for FractureParams {
    fn default() -> Self {
        Self {
            k: [10.0, 1.0, 0.1],
            sigma: 1.0,
            delta1: 1.0,
            delta2: 1.0,
        }
    }
}

impl FractureParams {
    /// Fractures and channels far more permeable than the rock: conductivities
    /// 1e4, 1e3 and 1, apertures 0.01 and 0.1, and a transition coefficient
    /// equal to the fracture conductivity over half its thickness.
    pub fn high_contrast() -> Self {
        let (k2, delta2) = (1e3, 0.1);
        Self {
            k: [1e4, k2, 1.0],
            sigma: 2.0 * k2 / delta2,
            delta1: 0.01,
            delta2,
        }
    }
}

/// Structured grid with integer node coordinates `ijk` scaled by `1/n`.
struct Grid {
    n: usize,
    dim: usize,
}

impl Grid {
    fn stride(&self) -> usize {
        self.n + 1
    }

    fn index(&self, ijk: [usize; 3]) -> usize {
        let s = self.stride();
        (ijk[2] * s + ijk[1]) * s + ijk[0]
    }

    fn ijk(&self, idx: usize) -> [usize; 3] {
        let s = self.stride();
        [idx % s, (idx / s) % s, idx / (s * s)]
    }

    fn nodes(&self) -> Vec<Point> {
        let s = self.stride();
        let nz = if self.dim == 3 { s } else { 1 };
        let h = self.n as f64;
        let mut out = Vec::with_capacity(s * s * nz);
        for k in 0..nz {
            for j in 0..s {
                for i in 0..s {
                    out.push([i as f64 / h, j as f64 / h, k as f64 / h]);
                }
            }
        }
        out
    }
}

fn boundary_from_spec(
    grid: &Grid,
    elements: &[Element],
    bc: &BcSpec,
) -> Result<BTreeMap<Vec<usize>, BoundaryKind>> {
    if bc.axis >= grid.dim {
        return Err(Error::Config(format!(
            "boundary axis {} out of range for a {}D mesh",
            bc.axis, grid.dim
        )));
    }
    let mut out = BTreeMap::new();
    for e in elements {
        for j in 0..=e.dim {
            let key = e.face_key(j);
            let coords: Vec<usize> = key.iter().map(|&v| grid.ijk(v)[bc.axis]).collect();
            let plane = |c: usize| coords.iter().all(|&x| x == c);
            let value = if plane(0) {
                bc.low
            } else if plane(grid.n) {
                bc.high
            } else {
                None
            };
            if let Some(p) = value {
                out.insert(key, BoundaryKind::Natural(p));
            }
        }
    }
    Ok(out)
}

/// `n × n` grid on the unit square, each cell cut by its (0,0)–(1,1) diagonal.
pub fn generate_unit_square(n: usize, bc: &BcSpec) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::Config("grid size must be at least 1".into()));
    }
    let grid = Grid { n, dim: 2 };
    let k = Conductivity::isotropic(2, 1.0);
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = grid.index([i, j, 0]);
            let v10 = grid.index([i + 1, j, 0]);
            let v01 = grid.index([i, j + 1, 0]);
            let v11 = grid.index([i + 1, j + 1, 0]);
            elements.push(Element::new(2, vec![v00, v10, v11], k.clone()));
            elements.push(Element::new(2, vec![v00, v11, v01], k.clone()));
        }
    }
    let boundary = boundary_from_spec(&grid, &elements, bc)?;
    Mesh::new(grid.nodes(), elements, boundary, false)
}

const AXIS_ORDERS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn cube_tets(grid: &Grid, k: &Conductivity) -> Vec<Element> {
    let n = grid.n;
    let mut elements = Vec::with_capacity(6 * n * n * n);
    for kk in 0..n {
        for j in 0..n {
            for i in 0..n {
                for order in AXIS_ORDERS {
                    // path from the low corner to the high corner along the axes
                    let mut c = [i, j, kk];
                    let mut nodes = vec![grid.index(c)];
                    for axis in order {
                        c[axis] += 1;
                        nodes.push(grid.index(c));
                    }
                    elements.push(Element::new(3, nodes, k.clone()));
                }
            }
        }
    }
    elements
}

/// `n³` cells on the unit cube, each split into the 6 tetrahedra of the
/// Kuhn subdivision.
pub fn generate_unit_cube(n: usize, bc: &BcSpec) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::Config("grid size must be at least 1".into()));
    }
    let grid = Grid { n, dim: 3 };
    let elements = cube_tets(&grid, &Conductivity::isotropic(3, 1.0));
    let boundary = boundary_from_spec(&grid, &elements, bc)?;
    Mesh::new(grid.nodes(), elements, boundary, false)
}

/// Unit cube with fractures on the planes x = 1/2 and y = 1/2 and a channel
/// along their intersection line. Element order: tetrahedra, then fracture
/// triangles, then channel segments.
pub fn generate_cross_fracture_cube(
    n: usize,
    params: &FractureParams,
    bc: &BcSpec,
) -> Result<Mesh> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::Config(format!(
            "cross-fracture cube needs an even positive grid size, got {n}"
        )));
    }
    if params.k.iter().any(|&k| !(k > 0.0)) || !(params.sigma > 0.0) {
        return Err(Error::Config(
            "conductivities and transition coefficient must be positive".into(),
        ));
    }
    if !(params.delta1 > 0.0) || !(params.delta2 > 0.0) {
        return Err(Error::Config("cross-sections must be positive".into()));
    }
    let grid = Grid { n, dim: 3 };
    let mid = n / 2;
    let mut elements = cube_tets(&grid, &Conductivity::isotropic(3, params.k[2]));

    let k2 = Conductivity::isotropic(2, params.k[1]);
    let mut seen = BTreeSet::new();
    let mut triangles = Vec::new();
    for e in &elements {
        for j in 0..4 {
            let key = e.face_key(j);
            let on = |axis: usize| key.iter().all(|&v| grid.ijk(v)[axis] == mid);
            if (on(0) || on(1)) && seen.insert(key.clone()) {
                let mut t = Element::new(2, key, k2.clone());
                t.cross_section = params.delta2;
                t.sigma = params.sigma;
                triangles.push(t);
            }
        }
    }
    elements.extend(triangles);

    let k1 = Conductivity::isotropic(1, params.k[0]);
    for kk in 0..n {
        let a = grid.index([mid, mid, kk]);
        let b = grid.index([mid, mid, kk + 1]);
        let mut s = Element::new(1, vec![a, b], k1.clone());
        s.cross_section = params.delta1;
        s.sigma = params.sigma;
        elements.push(s);
    }

    let boundary = boundary_from_spec(&grid, &elements, bc)?;
    Mesh::new(grid.nodes(), elements, boundary, false)
}
