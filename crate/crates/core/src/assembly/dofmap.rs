use std::collections::HashMap;

use crate::mesh::{BoundaryKind, Mesh};

/// What sits on one local face of an element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FaceDof {
    /// Zero normal flux; the velocity dof is eliminated.
    Essential,
    /// Prescribed pressure head; velocity dof kept, no multiplier.
    Natural(f64),
    /// Interior or coupled face carrying the given multiplier.
    Multiplier(usize),
}

/// Multiplier/pressure pair of one coupling link with its weight `σ |F|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkDofs {
    pub lower: usize,
    pub lambda: usize,
    pub weight: f64,
}

/// Numbering of the velocity, pressure and multiplier unknowns.
///
/// Pressure dof `e` belongs to element `e`. Velocity and multiplier dofs are
/// numbered by first occurrence over (element, local face).
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    face_offset: Vec<usize>,
    faces: Vec<FaceDof>,
    face_velocity: Vec<Option<usize>>,
    velocity_face: Vec<(usize, usize)>,
    lambda_faces: Vec<Vec<(usize, usize)>>,
    lambda_lower: Vec<Option<usize>>,
    links: Vec<LinkDofs>,
    element_dims: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let ne = mesh.elements().len();
        let mut face_offset = Vec::with_capacity(ne + 1);
        face_offset.push(0);
        for e in mesh.elements() {
            face_offset.push(face_offset.last().unwrap() + e.dim + 1);
        }
        let nfaces = *face_offset.last().unwrap();

        // faces coupled to a lower-dimensional element get their own multiplier
        let mut coupled: HashMap<(usize, usize), usize> = HashMap::new();
        for (li, link) in mesh.couplings().links.iter().enumerate() {
            coupled.insert((link.upper.element, link.upper.local_face), li);
        }
        let incidence = mesh.face_incidence();

        let mut faces = vec![FaceDof::Essential; nfaces];
        let mut lambda_faces: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut lambda_lower = Vec::new();
        let mut link_lambda = vec![usize::MAX; mesh.couplings().links.len()];
        for (e, el) in mesh.elements().iter().enumerate() {
            for j in 0..=el.dim {
                let slot = face_offset[e] + j;
                if let Some(&li) = coupled.get(&(e, j)) {
                    let id = lambda_faces.len();
                    lambda_faces.push(vec![(e, j)]);
                    lambda_lower.push(Some(mesh.couplings().links[li].lower));
                    link_lambda[li] = id;
                    faces[slot] = FaceDof::Multiplier(id);
                    continue;
                }
                if faces[slot] != FaceDof::Essential {
                    continue;
                }
                let key = el.face_key(j);
                let sharers: Vec<(usize, usize)> = incidence[&(el.dim, key.clone())]
                    .iter()
                    .copied()
                    .filter(|s| !coupled.contains_key(s))
                    .collect();
                if sharers.len() > 1 {
                    let id = lambda_faces.len();
                    for &(f, k) in &sharers {
                        faces[face_offset[f] + k] = FaceDof::Multiplier(id);
                    }
                    lambda_faces.push(sharers);
                    lambda_lower.push(None);
                } else {
                    faces[slot] = match mesh.boundary_kind(&key) {
                        BoundaryKind::Natural(p) => FaceDof::Natural(p),
                        BoundaryKind::Essential => FaceDof::Essential,
                    };
                }
            }
        }

        let mut face_velocity = vec![None; nfaces];
        let mut velocity_face = Vec::new();
        for (e, el) in mesh.elements().iter().enumerate() {
            for j in 0..=el.dim {
                let slot = face_offset[e] + j;
                if faces[slot] != FaceDof::Essential {
                    face_velocity[slot] = Some(velocity_face.len());
                    velocity_face.push((e, j));
                }
            }
        }

        let links = mesh
            .couplings()
            .links
            .iter()
            .zip(link_lambda)
            .map(|(l, lambda)| LinkDofs {
                lower: l.lower,
                lambda,
                weight: l.sigma * l.upper.measure,
            })
            .collect();

        Self {
            face_offset,
            faces,
            face_velocity,
            velocity_face,
            lambda_faces,
            lambda_lower,
            links,
            element_dims: mesh.elements().iter().map(|e| e.dim).collect(),
        }
    }

    pub fn n_elements(&self) -> usize {
        self.element_dims.len()
    }

    pub fn n_velocity(&self) -> usize {
        self.velocity_face.len()
    }

    pub fn n_pressure(&self) -> usize {
        self.n_elements()
    }

    pub fn n_lambda(&self) -> usize {
        self.lambda_faces.len()
    }

    /// Size of the full system `n_u + n_p + n_λ`.
    pub fn n_total(&self) -> usize {
        self.n_velocity() + self.n_pressure() + self.n_lambda()
    }

    pub fn element_dim(&self, e: usize) -> usize {
        self.element_dims[e]
    }

    pub fn face(&self, e: usize, j: usize) -> FaceDof {
        self.faces[self.face_offset[e] + j]
    }

    pub fn velocity(&self, e: usize, j: usize) -> Option<usize> {
        self.face_velocity[self.face_offset[e] + j]
    }

    pub fn velocity_face(&self, u: usize) -> (usize, usize) {
        self.velocity_face[u]
    }

    /// (element, local face) pairs whose velocity couples to multiplier `l`.
    pub fn lambda_faces(&self, l: usize) -> &[(usize, usize)] {
        &self.lambda_faces[l]
    }

    /// Lower-dimensional element coupled to multiplier `l`, if any.
    pub fn lambda_lower(&self, l: usize) -> Option<usize> {
        self.lambda_lower[l]
    }

    pub fn links(&self) -> &[LinkDofs] {
        &self.links
    }

    /// Connected components of elements, joined through shared multipliers
    /// and, if `through_links`, through coupling links. Returns the component
    /// id of each element, numbered by first element.
    pub fn components(&self, through_links: bool) -> Vec<usize> {
        let n = self.n_elements();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let union = |a: usize, b: usize, p: &mut Vec<usize>| {
            let (ra, rb) = (find(p, a), find(p, b));
            if ra != rb {
                p[ra.max(rb)] = ra.min(rb);
            }
        };
        for faces in &self.lambda_faces {
            for w in faces.windows(2) {
                union(w[0].0, w[1].0, &mut parent);
            }
        }
        if through_links {
            for link in &self.links {
                let upper = self.lambda_faces[link.lambda][0].0;
                union(link.lower, upper, &mut parent);
            }
        }
        let mut ids = vec![usize::MAX; n];
        let mut next = 0;
        let mut out = vec![0; n];
        for e in 0..n {
            let r = find(&mut parent, e);
            if ids[r] == usize::MAX {
                ids[r] = next;
                next += 1;
            }
            out[e] = ids[r];
        }
        out
    }

    /// Components (as in [`components`](Self::components)) containing no
    /// face with a prescribed pressure head.
    pub fn floating_components(&self, through_links: bool) -> Vec<Vec<usize>> {
        let comp = self.components(through_links);
        let ncomp = comp.iter().max().map_or(0, |m| m + 1);
        let mut anchored = vec![false; ncomp];
        for e in 0..self.n_elements() {
            for j in 0..=self.element_dims[e] {
                if matches!(self.face(e, j), FaceDof::Natural(_)) {
                    anchored[comp[e]] = true;
                }
            }
        }
        let mut out = vec![Vec::new(); ncomp];
        for (e, &c) in comp.iter().enumerate() {
            if !anchored[c] {
                out[c].push(e);
            }
        }
        out.retain(|v| !v.is_empty());
        out
    }
}
