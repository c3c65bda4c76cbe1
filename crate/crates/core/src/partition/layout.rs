use std::collections::BTreeMap;

use super::Partition;
use crate::assembly::DofMap;
use crate::mesh::{Mesh, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlobKind {
    /// Shared by exactly two substructures.
    Face,
    /// Shared by three or more substructures.
    Edge,
    /// A glob consisting of a single dof.
    Vertex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Glob {
    pub kind: GlobKind,
    pub sharing: Vec<usize>,
    /// Interface indices, ascending.
    pub dofs: Vec<usize>,
}

/// Interface multipliers, their sharing sets and the local interface maps.
///
/// Interface index `g` numbers the shared multipliers in ascending global
/// multiplier order.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceLayout {
    n_sub: usize,
    sharing: Vec<Vec<usize>>,
    interface: Vec<usize>,
    lambda_to_interface: Vec<Option<usize>>,
    sub_interface: Vec<Vec<usize>>,
    globs: Vec<Glob>,
    glob_of: Vec<usize>,
    coords: Vec<Point>,
}

/// Substructures owning the elements that touch multiplier `l`: the elements
/// on whose faces it lives and, for coupled faces, the lower-dimensional
/// element.
pub(crate) fn touching_subs(dofs: &DofMap, partition: &Partition, l: usize) -> Vec<usize> {
    let mut s: Vec<usize> = dofs
        .lambda_faces(l)
        .iter()
        .map(|&(e, _)| partition.owner(e))
        .chain(dofs.lambda_lower(l).map(|e| partition.owner(e)))
        .collect();
    s.sort_unstable();
    s.dedup();
    s
}

pub fn classify_interface(mesh: &Mesh, dofs: &DofMap, partition: &Partition) -> InterfaceLayout {
    let n_sub = partition.n_sub();
    let nl = dofs.n_lambda();
    let sharing: Vec<Vec<usize>> = (0..nl).map(|l| touching_subs(dofs, partition, l)).collect();
    let interface: Vec<usize> = (0..nl).filter(|&l| sharing[l].len() > 1).collect();
    let mut lambda_to_interface = vec![None; nl];
    for (g, &l) in interface.iter().enumerate() {
        lambda_to_interface[l] = Some(g);
    }
    let mut sub_interface = vec![Vec::new(); n_sub];
    for (g, &l) in interface.iter().enumerate() {
        for &s in &sharing[l] {
            sub_interface[s].push(g);
        }
    }

    let mut groups: BTreeMap<&[usize], Vec<usize>> = BTreeMap::new();
    for (g, &l) in interface.iter().enumerate() {
        groups.entry(&sharing[l]).or_default().push(g);
    }
    let mut globs: Vec<Glob> = groups
        .into_iter()
        .map(|(set, dofs)| Glob {
            kind: if dofs.len() == 1 {
                GlobKind::Vertex
            } else if set.len() == 2 {
                GlobKind::Face
            } else {
                GlobKind::Edge
            },
            sharing: set.to_vec(),
            dofs,
        })
        .collect();
    globs.sort_by_key(|g| g.dofs[0]);
    let mut glob_of = vec![0; interface.len()];
    for (gi, glob) in globs.iter().enumerate() {
        for &d in &glob.dofs {
            glob_of[d] = gi;
        }
    }

    let coords = interface
        .iter()
        .map(|&l| {
            let (e, j) = dofs.lambda_faces(l)[0];
            mesh.centroid(&mesh.elements()[e].face_key(j))
        })
        .collect();

    InterfaceLayout {
        n_sub,
        sharing,
        interface,
        lambda_to_interface,
        sub_interface,
        globs,
        glob_of,
        coords,
    }
}

impl InterfaceLayout {
    pub fn n_sub(&self) -> usize {
        self.n_sub
    }

    /// Number of interface dofs `n_Γ`.
    pub fn n_interface(&self) -> usize {
        self.interface.len()
    }

    /// Global multiplier index of interface dof `g`.
    pub fn lambda(&self, g: usize) -> usize {
        self.interface[g]
    }

    pub fn interface_index(&self, lambda: usize) -> Option<usize> {
        self.lambda_to_interface[lambda]
    }

    /// Substructures sharing multiplier `lambda` (a single one for interior
    /// multipliers).
    pub fn sharing(&self, lambda: usize) -> &[usize] {
        &self.sharing[lambda]
    }

    /// The restriction `R^i` as the list of interface indices local to `sub`.
    pub fn local_interface(&self, sub: usize) -> &[usize] {
        &self.sub_interface[sub]
    }

    pub fn globs(&self) -> &[Glob] {
        &self.globs
    }

    pub fn glob_of(&self, g: usize) -> usize {
        self.glob_of[g]
    }

    /// Barycenter of the face carrying interface dof `g`.
    pub fn coord(&self, g: usize) -> Point {
        self.coords[g]
    }

    pub fn count(&self, kind: GlobKind) -> usize {
        self.globs.iter().filter(|g| g.kind == kind).count()
    }

    /// Diagonal of `Σ_i R^iᵀ R^i`: how many substructures share each dof.
    pub fn multiplicity(&self) -> Vec<usize> {
        self.interface
            .iter()
            .map(|&l| self.sharing[l].len())
            .collect()
    }
}
