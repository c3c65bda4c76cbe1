//! Element partitioning and interface classification.

mod corners;
mod layout;
mod weights;

use std::fmt::Write as _;
use std::path::Path;

pub use corners::{select_corners, CornerMode};
pub use layout::{classify_interface, Glob, GlobKind, InterfaceLayout};
pub use weights::{compute_weights, Scaling, Weights};

use crate::assembly::DofMap;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Assignment of elements to substructures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    owner: Vec<usize>,
    elements: Vec<Vec<usize>>,
}

impl Partition {
    /// Validates an element → substructure map. Every substructure in
    /// `0..n_sub` must own at least one element.
    pub fn from_owner(owner: Vec<usize>, n_sub: usize) -> Result<Self> {
        let mut elements = vec![Vec::new(); n_sub];
        for (e, &s) in owner.iter().enumerate() {
            if s >= n_sub {
                return Err(Error::Config(format!(
                    "element {e} assigned to substructure {s} of {n_sub}"
                )));
            }
            elements[s].push(e);
        }
        if let Some(s) = elements.iter().position(Vec::is_empty) {
            return Err(Error::Config(format!("substructure {s} is empty")));
        }
        Ok(Self { owner, elements })
    }

    pub fn n_sub(&self) -> usize {
        self.elements.len()
    }

    pub fn owner(&self, e: usize) -> usize {
        self.owner[e]
    }

    pub fn owners(&self) -> &[usize] {
        &self.owner
    }

    pub fn elements(&self, sub: usize) -> &[usize] {
        &self.elements[sub]
    }

    /// One `element_id substructure_id` pair per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (e, o) in self.owner.iter().enumerate() {
            let _ = writeln!(s, "{e} {o}");
        }
        s
    }

    pub fn parse(text: &str, n_elements: usize) -> Result<Self> {
        let mut owner = vec![usize::MAX; n_elements];
        let perr = |line: usize, msg: String| Error::Parse {
            path: "partition".into(),
            line,
            msg,
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            let parsed: Option<(usize, usize)> = match tok.as_slice() {
                [a, b] => a.parse().ok().zip(b.parse().ok()),
                _ => None,
            };
            let Some((e, s)) = parsed else {
                return Err(perr(i + 1, "expected `element_id substructure_id`".into()));
            };
            if e >= n_elements {
                return Err(perr(i + 1, format!("element {e} does not exist")));
            }
            if owner[e] != usize::MAX {
                return Err(perr(i + 1, format!("element {e} assigned twice")));
            }
            owner[e] = s;
        }
        if let Some(e) = owner.iter().position(|&s| s == usize::MAX) {
            return Err(Error::Config(format!("element {e} has no substructure")));
        }
        let n_sub = owner.iter().max().map_or(0, |m| m + 1);
        Self::from_owner(owner, n_sub)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path, n_elements: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, n_elements).map_err(|e| match e {
            Error::Parse { line, msg, .. } => Error::Parse {
                path: path.to_path_buf(),
                line,
                msg,
            },
            other => other,
        })
    }
}

/// Element adjacency through shared multipliers and coupling links.
pub(crate) fn dual_graph(dofs: &DofMap) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); dofs.n_elements()];
    for l in 0..dofs.n_lambda() {
        let mut touching: Vec<usize> = dofs.lambda_faces(l).iter().map(|f| f.0).collect();
        touching.extend(dofs.lambda_lower(l));
        for (i, &a) in touching.iter().enumerate() {
            for &b in &touching[i + 1..] {
                if a != b {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    adj
}

/// Recursive coordinate bisection of element centroids followed by a
/// connectivity repair. Ties between axes of equal extent go to
/// `tied[seed % tied.len()]` in x, y, z order, so seed 0 prefers x.
pub fn partition_elements(mesh: &Mesh, n_sub: usize, seed: u64) -> Result<Partition> {
    let ne = mesh.elements().len();
    if n_sub == 0 || n_sub > ne {
        return Err(Error::Config(format!(
            "cannot split {ne} elements into {n_sub} substructures"
        )));
    }
    let centroids: Vec<[f64; 3]> = (0..ne).map(|e| mesh.element_centroid(e)).collect();
    let mut owner = vec![0; ne];
    bisect(&centroids, (0..ne).collect(), 0, n_sub, &mut owner, seed);
    let adj = dual_graph(&DofMap::new(mesh));
    repair_connectivity(&adj, &mut owner, n_sub);
    Partition::from_owner(owner, n_sub)
}

fn bisect(
    centroids: &[[f64; 3]],
    mut elems: Vec<usize>,
    first: usize,
    parts: usize,
    owner: &mut [usize],
    seed: u64,
) {
    if parts == 1 {
        for e in elems {
            owner[e] = first;
        }
        return;
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &e in &elems {
        for k in 0..3 {
            lo[k] = lo[k].min(centroids[e][k]);
            hi[k] = hi[k].max(centroids[e][k]);
        }
    }
    let extent: Vec<f64> = (0..3).map(|k| hi[k] - lo[k]).collect();
    let max = extent.iter().cloned().fold(0.0, f64::max);
    let tied: Vec<usize> = (0..3)
        .filter(|&k| extent[k] >= max * (1.0 - 1e-12))
        .collect();
    let axis = tied[(seed % tied.len() as u64) as usize];
    elems.sort_by(|&a, &b| {
        centroids[a][axis]
            .total_cmp(&centroids[b][axis])
            .then(a.cmp(&b))
    });
    let left_parts = parts / 2;
    let cut = elems.len() * left_parts / parts;
    let right = elems.split_off(cut);
    bisect(centroids, elems, first, left_parts, owner, seed);
    bisect(
        centroids,
        right,
        first + left_parts,
        parts - left_parts,
        owner,
        seed,
    );
}

/// Components of the subgraph induced by the elements of one substructure.
fn sub_components(adj: &[Vec<usize>], owner: &[usize], sub: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; owner.len()];
    let mut comps = Vec::new();
    for start in 0..owner.len() {
        if owner[start] != sub || seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut head = 0;
        while head < comp.len() {
            let e = comp[head];
            head += 1;
            for &n in &adj[e] {
                if owner[n] == sub && !seen[n] {
                    seen[n] = true;
                    comp.push(n);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Moves every component but the largest of each substructure to the
/// neighbouring substructure sharing the most adjacencies with it.
fn repair_connectivity(adj: &[Vec<usize>], owner: &mut [usize], n_sub: usize) {
    for _pass in 0..8 {
        let mut moved = false;
        for sub in 0..n_sub {
            let mut comps = sub_components(adj, owner, sub);
            if comps.len() < 2 {
                continue;
            }
            // keep the largest, ties to the one holding the lowest element id
            comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
            for comp in &comps[1..] {
                let mut votes = vec![0usize; n_sub];
                for &e in comp {
                    for &n in &adj[e] {
                        if owner[n] != sub {
                            votes[owner[n]] += 1;
                        }
                    }
                }
                let best = (0..n_sub).max_by(|&a, &b| votes[a].cmp(&votes[b]).then(b.cmp(&a)));
                if let Some(target) = best.filter(|&t| votes[t] > 0) {
                    log::debug!(
                        "moving {} element(s) from substructure {sub} to {target}",
                        comp.len()
                    );
                    for &e in comp {
                        owner[e] = target;
                    }
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
}
