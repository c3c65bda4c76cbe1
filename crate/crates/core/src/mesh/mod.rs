//! Combined-dimension simplicial meshes.
//!
//! A mesh holds 3D tetrahedra, 2D triangles (planar fractures) and 1D
//! segments (channels) over a shared node set. A `d−1` dimensional element
//! whose nodes coincide with a face of a `d` dimensional element is coupled
//! to that face; couplings are derived from node tuples and never stored in
//! the mesh file.

mod generate;
mod geometry;
mod io;

use std::collections::{BTreeMap, HashMap};

pub use generate::{
    generate_cross_fracture_cube, generate_unit_cube, generate_unit_square, BcSpec, FractureParams,
};
pub use geometry::{local_frame, simplex_measure};
pub use io::{parse_mesh, read_mesh, write_mesh, write_mesh_string};

use crate::error::{Error, Result};

pub type Point = [f64; 3];

/// Symmetric positive-definite conductivity tensor of an element, stored
/// row-major as a `dim × dim` matrix in the element's local frame (see
/// [`local_frame`]).
#[derive(Clone, Debug, PartialEq)]
pub struct Conductivity {
    dim: usize,
    values: Vec<f64>,
}

impl Conductivity {
    pub fn isotropic(dim: usize, k: f64) -> Self {
        let mut values = vec![0.0; dim * dim];
        for i in 0..dim {
            values[i * dim + i] = k;
        }
        Self { dim, values }
    }

    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) || values.len() != dim * dim {
            return Err(Error::Mesh(format!(
                "conductivity of a {dim}D element needs {} entries, got {}",
                dim * dim,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Mesh("non-finite conductivity entry".into()));
        }
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..dim {
            for j in 0..i {
                if (values[i * dim + j] - values[j * dim + i]).abs() > 1e-12 * scale {
                    return Err(Error::Mesh("conductivity tensor is not symmetric".into()));
                }
            }
        }
        let c = Self { dim, values };
        if c.cholesky().is_none() {
            return Err(Error::Mesh(
                "conductivity tensor is not positive definite".into(),
            ));
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    fn cholesky(&self) -> Option<[[f64; 3]; 3]> {
        let d = self.dim;
        let mut l = [[0.0; 3]; 3];
        for j in 0..d {
            let mut s = self.at(j, j);
            for k in 0..j {
                s -= l[j][k] * l[j][k];
            }
            if !(s > 0.0) {
                return None;
            }
            l[j][j] = s.sqrt();
            for i in j + 1..d {
                let mut s = self.at(i, j);
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = s / l[j][j];
            }
        }
        Some(l)
    }

    /// Inverse tensor, `dim × dim` in the leading block.
    pub fn inverse(&self) -> [[f64; 3]; 3] {
        let d = self.dim;
        let l = self.cholesky().expect("validated SPD");
        let mut inv = [[0.0; 3]; 3];
        for col in 0..d {
            let mut y = [0.0; 3];
            y[col] = 1.0;
            for i in 0..d {
                for k in 0..i {
                    y[i] -= l[i][k] * y[k];
                }
                y[i] /= l[i][i];
            }
            for i in (0..d).rev() {
                for k in i + 1..d {
                    y[i] -= l[k][i] * y[k];
                }
                y[i] /= l[i][i];
            }
            for i in 0..d {
                inv[i][col] = y[i];
            }
        }
        inv
    }

    /// Representative scalar conductivity `d / tr(k⁻¹)`.
    pub fn representative(&self) -> f64 {
        let inv = self.inverse();
        let tr: f64 = (0..self.dim).map(|i| inv[i][i]).sum();
        self.dim as f64 / tr
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub dim: usize,
    pub nodes: Vec<usize>,
    pub conductivity: Conductivity,
    /// Cross-section δ: 1 for 3D, fracture thickness for 2D, channel area for 1D.
    pub cross_section: f64,
    /// External source density f̃.
    pub source: f64,
    /// Transition coefficient σ used by links in which this element is the
    /// lower-dimensional partner. Ignored for 3D elements.
    pub sigma: f64,
}

impl Element {
    pub fn new(dim: usize, nodes: Vec<usize>, conductivity: Conductivity) -> Self {
        Self {
            dim,
            nodes,
            conductivity,
            cross_section: 1.0,
            source: 0.0,
            sigma: 1.0,
        }
    }

    /// Sorted node tuple of local face `j` (the face opposite node `j`).
    pub fn face_key(&self, j: usize) -> Vec<usize> {
        let mut k: Vec<usize> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &n)| n)
            .collect();
        k.sort_unstable();
        k
    }

    pub fn sorted_nodes(&self) -> Vec<usize> {
        let mut k = self.nodes.clone();
        k.sort_unstable();
        k
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryKind {
    /// Prescribed pressure head p_N.
    Natural(f64),
    /// Zero normal flux.
    Essential,
}

/// Local face of an element.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementFace {
    pub element: usize,
    pub local_face: usize,
    pub nodes: Vec<usize>,
    pub measure: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingLink {
    pub lower: usize,
    pub upper: ElementFace,
    pub sigma: f64,
}

/// Result of coupling detection.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Couplings {
    pub links: Vec<CouplingLink>,
    /// Lower-dimensional elements that match no face of a higher-dimensional
    /// element although such elements exist.
    pub unmatched: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    elements: Vec<Element>,
    boundary: BTreeMap<Vec<usize>, BoundaryKind>,
    gravity: bool,
    couplings: Couplings,
}

impl Mesh {
    pub fn new(
        nodes: Vec<Point>,
        elements: Vec<Element>,
        boundary: BTreeMap<Vec<usize>, BoundaryKind>,
        gravity: bool,
    ) -> Result<Self> {
        for (i, p) in nodes.iter().enumerate() {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Mesh(format!("node {i} has non-finite coordinates")));
            }
        }
        for (id, e) in elements.iter().enumerate() {
            validate_element(id, e, &nodes)?;
        }
        for key in boundary.keys() {
            if key.windows(2).any(|w| w[0] >= w[1]) || key.iter().any(|&n| n >= nodes.len()) {
                return Err(Error::Mesh(format!(
                    "boundary tuple {key:?} is not a sorted tuple of valid node ids"
                )));
            }
        }
        let mut mesh = Self {
            nodes,
            elements,
            boundary,
            gravity,
            couplings: Couplings::default(),
        };
        mesh.couplings = detect_couplings(&mesh);
        Ok(mesh)
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn boundary(&self) -> &BTreeMap<Vec<usize>, BoundaryKind> {
        &self.boundary
    }

    pub fn gravity(&self) -> bool {
        self.gravity
    }

    pub fn set_gravity(&mut self, on: bool) {
        self.gravity = on;
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    /// Boundary condition of a face given by its sorted node tuple.
    /// Unlisted faces are essential.
    pub fn boundary_kind(&self, key: &[usize]) -> BoundaryKind {
        self.boundary
            .get(key)
            .copied()
            .unwrap_or(BoundaryKind::Essential)
    }

    pub fn element_points(&self, e: usize) -> Vec<Point> {
        self.elements[e]
            .nodes
            .iter()
            .map(|&n| self.nodes[n])
            .collect()
    }

    pub fn element_measure(&self, e: usize) -> f64 {
        simplex_measure(&self.element_points(e))
    }

    pub fn centroid(&self, nodes: &[usize]) -> Point {
        let mut c = [0.0; 3];
        for &n in nodes {
            for (ci, xi) in c.iter_mut().zip(self.nodes[n]) {
                *ci += xi;
            }
        }
        c.map(|v| v / nodes.len() as f64)
    }

    pub fn element_centroid(&self, e: usize) -> Point {
        self.centroid(&self.elements[e].nodes)
    }

    pub fn face(&self, element: usize, local_face: usize) -> ElementFace {
        let nodes = self.elements[element].face_key(local_face);
        let pts: Vec<Point> = nodes.iter().map(|&n| self.nodes[n]).collect();
        ElementFace {
            element,
            local_face,
            measure: simplex_measure(&pts),
            nodes,
        }
    }

    pub fn count_by_dim(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for e in &self.elements {
            c[e.dim] += 1;
        }
        c
    }

    pub fn has_natural_boundary(&self) -> bool {
        self.boundary
            .values()
            .any(|b| matches!(b, BoundaryKind::Natural(_)))
    }

    /// Map from sorted face tuple to the (element, local face) pairs of
    /// same-dimension elements having that face.
    pub fn face_incidence(&self) -> HashMap<(usize, Vec<usize>), Vec<(usize, usize)>> {
        let mut map: HashMap<(usize, Vec<usize>), Vec<(usize, usize)>> = HashMap::new();
        for (id, e) in self.elements.iter().enumerate() {
            for j in 0..=e.dim {
                map.entry((e.dim, e.face_key(j))).or_default().push((id, j));
            }
        }
        map
    }
}

fn validate_element(id: usize, e: &Element, nodes: &[Point]) -> Result<()> {
    if !(1..=3).contains(&e.dim) || e.nodes.len() != e.dim + 1 {
        return Err(Error::Mesh(format!(
            "element {id}: dimension {} with {} nodes",
            e.dim,
            e.nodes.len()
        )));
    }
    if let Some(&bad) = e.nodes.iter().find(|&&n| n >= nodes.len()) {
        return Err(Error::Mesh(format!(
            "element {id} references node {bad} of {}",
            nodes.len()
        )));
    }
    let sorted = e.sorted_nodes();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Mesh(format!("element {id} repeats a node")));
    }
    if e.conductivity.dim() != e.dim {
        return Err(Error::Mesh(format!(
            "element {id}: conductivity dimension {} differs from element dimension {}",
            e.conductivity.dim(),
            e.dim
        )));
    }
    if !(e.cross_section > 0.0) || (e.dim == 3 && e.cross_section != 1.0) {
        return Err(Error::Mesh(format!(
            "element {id}: invalid cross-section {}",
            e.cross_section
        )));
    }
    if e.dim < 3 && !(e.sigma > 0.0) {
        return Err(Error::Mesh(format!(
            "element {id}: transition coefficient must be positive"
        )));
    }
    if !e.source.is_finite() {
        return Err(Error::Mesh(format!("element {id}: non-finite source")));
    }
    let pts: Vec<Point> = e.nodes.iter().map(|&n| nodes[n]).collect();
    let measure = simplex_measure(&pts);
    if !(measure > 1e-14 * geometry::diameter(&pts).powi(e.dim as i32)) {
        return Err(Error::DegenerateElement {
            element: id,
            measure,
        });
    }
    Ok(())
}

/// Links every `d−1` dimensional element to all faces of `d` dimensional
/// elements with the same node set, ordered by lower element id, then upper
/// element id and local face.
pub fn detect_couplings(mesh: &Mesh) -> Couplings {
    let counts = mesh.count_by_dim();
    let mut faces: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
    for (id, e) in mesh.elements.iter().enumerate() {
        if e.dim >= 2 {
            for j in 0..=e.dim {
                faces.entry(e.face_key(j)).or_default().push((id, j));
            }
        }
    }
    let mut out = Couplings::default();
    for (id, e) in mesh.elements.iter().enumerate() {
        if e.dim == 3 {
            continue;
        }
        let key = e.sorted_nodes();
        let mut matched: Vec<(usize, usize)> = faces
            .get(&key)
            .map(|v| {
                v.iter()
                    .copied()
                    .filter(|&(up, _)| mesh.elements[up].dim == e.dim + 1)
                    .collect()
            })
            .unwrap_or_default();
        matched.sort_unstable();
        if matched.is_empty() {
            if counts[e.dim + 1] > 0 {
                log::warn!(
                    "{}D element {id} matches no face of a {}D element",
                    e.dim,
                    e.dim + 1
                );
                out.unmatched.push(id);
            }
            continue;
        }
        for (up, j) in matched {
            out.links.push(CouplingLink {
                lower: id,
                upper: mesh.face(up, j),
                sigma: e.sigma,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_tet_with_triangle(on_face: bool) -> Mesh {
        let nodes = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [2.0, 2.0, 2.0],
        ];
        let tri = if on_face {
            vec![0, 1, 2]
        } else {
            vec![1, 2, 4]
        };
        let elements = vec![
            Element::new(3, vec![0, 1, 2, 3], Conductivity::isotropic(3, 1.0)),
            Element::new(2, tri, Conductivity::isotropic(2, 1.0)),
        ];
        Mesh::new(nodes, elements, BTreeMap::new(), false).unwrap()
    }

    #[test]
    fn triangle_on_tet_face_links_once() {
        let m = single_tet_with_triangle(true);
        assert_eq!(m.couplings().links.len(), 1);
        let l = &m.couplings().links[0];
        assert_eq!(l.lower, 1);
        assert_eq!(l.upper.element, 0);
        assert_eq!(l.upper.local_face, 3);
        assert_eq!(l.upper.nodes, vec![0, 1, 2]);
        assert!((l.upper.measure - 0.5).abs() < 1e-15);
        assert!(m.couplings().unmatched.is_empty());
    }

    #[test]
    fn isolated_triangle_is_reported() {
        let m = single_tet_with_triangle(false);
        assert!(m.couplings().links.is_empty());
        assert_eq!(m.couplings().unmatched, vec![1]);
    }

    #[test]
    fn rejects_bad_conductivity() {
        assert!(Conductivity::new(2, vec![1.0, 2.0, 2.0, 1.0]).is_err());
        assert!(Conductivity::new(2, vec![1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(Conductivity::new(2, vec![2.0, 0.5, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn representative_conductivity() {
        let c = Conductivity::isotropic(3, 4.0);
        assert!((c.representative() - 4.0).abs() < 1e-14);
        let d = Conductivity::new(2, vec![1.0, 0.0, 0.0, 3.0]).unwrap();
        // 2 / (1 + 1/3)
        assert!((d.representative() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_degenerate_and_dangling() {
        let nodes = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        let flat = Element::new(2, vec![0, 1, 2], Conductivity::isotropic(2, 1.0));
        assert!(matches!(
            Mesh::new(nodes.clone(), vec![flat], BTreeMap::new(), false),
            Err(Error::DegenerateElement { .. })
        ));
        let dangling = Element::new(1, vec![0, 7], Conductivity::isotropic(1, 1.0));
        assert!(Mesh::new(nodes, vec![dangling], BTreeMap::new(), false).is_err());
    }
}
