use crate::partition::{GlobKind, InterfaceLayout};

/// What a coarse degree of freedom constrains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoarseDof {
    /// Value of one interface dof.
    Corner(usize),
    /// Sum over the dofs of a glob.
    Average(usize),
}

/// Rows of `D^i`: every entry is 1, so a row is stored as its column list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalConstraints {
    /// Global coarse index of each row (`R_C^i`).
    pub coarse: Vec<usize>,
    /// Local interface positions with a 1 in each row.
    pub rows: Vec<Vec<usize>>,
}

impl LocalConstraints {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `D^i x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&k| x[k]).sum())
            .collect()
    }

    /// `D^i` as a dense matrix with `n` columns.
    pub fn to_dense(&self, n: usize) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![0.0; n];
                for &k in r {
                    row[k] = 1.0;
                }
                row
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraints {
    pub dofs: Vec<CoarseDof>,
    pub local: Vec<LocalConstraints>,
}

impl Constraints {
    /// Number of coarse dofs `n_c`.
    pub fn n_coarse(&self) -> usize {
        self.dofs.len()
    }

    pub fn count_corners(&self) -> usize {
        self.dofs
            .iter()
            .filter(|d| matches!(d, CoarseDof::Corner(_)))
            .count()
    }
}

/// Corners come first in ascending interface order, then one average per
/// glob in glob order. Face globs always get an average, edge globs when
/// `edge_averages` is set, single-dof globs when they are not corners. An
/// average is skipped when all dofs of its glob are already corners.
pub fn build_constraints(
    layout: &InterfaceLayout,
    corners: &[usize],
    edge_averages: bool,
) -> Constraints {
    let is_corner = |g: usize| corners.binary_search(&g).is_ok();
    let mut dofs: Vec<CoarseDof> = corners.iter().map(|&g| CoarseDof::Corner(g)).collect();
    for (gi, glob) in layout.globs().iter().enumerate() {
        let wanted = match glob.kind {
            GlobKind::Face | GlobKind::Vertex => true,
            GlobKind::Edge => edge_averages,
        };
        if wanted && !glob.dofs.iter().all(|&g| is_corner(g)) {
            dofs.push(CoarseDof::Average(gi));
        }
    }

    let mut local: Vec<LocalConstraints> = (0..layout.n_sub())
        .map(|_| LocalConstraints {
            coarse: Vec::new(),
            rows: Vec::new(),
        })
        .collect();
    for (c, dof) in dofs.iter().enumerate() {
        let (glob, members) = match *dof {
            CoarseDof::Corner(g) => (&layout.globs()[layout.glob_of(g)], vec![g]),
            CoarseDof::Average(gi) => (&layout.globs()[gi], layout.globs()[gi].dofs.clone()),
        };
        for &s in &glob.sharing {
            let iface = layout.local_interface(s);
            let row = members
                .iter()
                .map(|g| {
                    iface
                        .binary_search(g)
                        .expect("glob dof on a sharing substructure")
                })
                .collect();
            local[s].coarse.push(c);
            local[s].rows.push(row);
        }
    }
    Constraints { dofs, local }
}
