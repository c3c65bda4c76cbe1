//! BDDC preconditioner for the interface problem.
//!
//! Each substructure solves the augmented Neumann system
//!
//! ```text
//! [ K^i   D^iᵀ ] [ w ]   [ rhs ]
//! [ D^i   0    ] [ μ ] = [  c  ]
//! ```
//!
//! where `K^i` is the local saddle-point matrix including the interface and
//! `D^i` selects corners and glob averages. Eliminating the interior of
//! `K^i` turns it into `−S^i`, so the coarse basis satisfies `S^i Φ = D^iᵀ M`
//! with `M` the multiplier block, and `S^i_CC = −Φᵀ S^i Φ = −M`.

mod constraints;

pub use constraints::{build_constraints, CoarseDof, Constraints, LocalConstraints};

use crate::error::{Error, Result};
use crate::ldlt::{LdltFactorization, LdltOptions};
use crate::par;
use crate::partition::{select_corners, CornerMode, InterfaceLayout, Weights};
use crate::sparse::{CsrMatrix, Triplets};
use crate::subsolve::{InterfaceProblem, SubstructureOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BddcOptions {
    pub corners: CornerMode,
    pub edge_averages: bool,
}

impl Default for BddcOptions {
    fn default() -> Self {
        Self {
            corners: CornerMode::On,
            edge_averages: true,
        }
    }
}

/// Coarse basis and augmented factorization of one substructure.
#[derive(Clone, Debug)]
pub struct CoarseBasis {
    n_local: usize,
    n_interior: usize,
    /// Columns of `Φ^i_Γ`, one per local coarse dof.
    phi: Vec<Vec<f64>>,
    /// `S^i_CC`, symmetric negative semidefinite.
    s_cc: Vec<Vec<f64>>,
    symmetry_defect: f64,
    augmented: LdltFactorization,
}

impl CoarseBasis {
    pub fn phi(&self) -> &[Vec<f64>] {
        &self.phi
    }

    pub fn s_cc(&self) -> &[Vec<f64>] {
        &self.s_cc
    }

    /// Largest `|S_CC − S_CCᵀ|` before symmetrization, relative to the
    /// largest entry.
    pub fn symmetry_defect(&self) -> f64 {
        self.symmetry_defect
    }

    /// Correction `η` with `S^i η − D^iᵀ ν = r` and `D^i η = 0`, from the
    /// augmented system with right-hand side `(0, −r, 0)`.
    fn neumann(&self, r: &[f64]) -> Vec<f64> {
        let mut rhs = vec![0.0; self.augmented.dim()];
        for (b, v) in rhs[self.n_interior..self.n_local].iter_mut().zip(r) {
            *b = -v;
        }
        let x = self.augmented.solve(&rhs);
        x[self.n_interior..self.n_local].to_vec()
    }
}

fn augmented_matrix(sub: &SubstructureOperator, d: &LocalConstraints) -> (CsrMatrix, Vec<u8>) {
    let n = sub.n_local();
    let m = n + d.len();
    let k = sub.local_matrix();
    let mut t = Triplets::with_capacity(
        m,
        m,
        k.nnz() + 2 * d.rows.iter().map(Vec::len).sum::<usize>(),
    );
    for (i, j, v) in k.iter() {
        t.push(i, j, v);
    }
    for (r, row) in d.rows.iter().enumerate() {
        for &c in row {
            t.push_sym(n + r, sub.n_interior() + c, 1.0);
        }
    }
    let mut classes = sub.local_classes();
    classes.resize(m, 1);
    (t.to_csr(), classes)
}

/// Factors the augmented matrix and solves for `Φ^i` with one right-hand
/// side per local coarse dof.
pub fn build_coarse_basis(sub: &SubstructureOperator, d: &LocalConstraints) -> Result<CoarseBasis> {
    if d.is_empty() && !sub.has_natural_boundary() {
        return Err(Error::InsufficientConstraints {
            substructure: sub.id(),
            detail: "no coarse dofs and no natural boundary face".into(),
        });
    }
    let (aug, classes) = augmented_matrix(sub, d);
    let augmented = LdltFactorization::factor_with(&aug, Some(&classes), LdltOptions::default())
        .map_err(|e| match e {
            Error::Singular { reason, .. } => Error::InsufficientConstraints {
                substructure: sub.id(),
                detail: format!("augmented Neumann matrix is singular: {reason}"),
            },
            other => other,
        })?;
    let (n, ni) = (sub.n_local(), sub.n_interior());
    let nc = d.len();
    let mut phi = Vec::with_capacity(nc);
    let mut mu = Vec::with_capacity(nc);
    for c in 0..nc {
        let mut rhs = vec![0.0; n + nc];
        rhs[n + c] = 1.0;
        let x = augmented.solve(&rhs);
        phi.push(x[ni..n].to_vec());
        mu.push(x[n..].to_vec());
    }
    // column c of M is mu[c]
    let mut s_cc = vec![vec![0.0; nc]; nc];
    let mut scale = 0.0f64;
    for r in 0..nc {
        for c in 0..nc {
            s_cc[r][c] = -mu[c][r];
            scale = scale.max(s_cc[r][c].abs());
        }
    }
    let mut defect = 0.0f64;
    for r in 0..nc {
        for c in r + 1..nc {
            defect = defect.max((s_cc[r][c] - s_cc[c][r]).abs());
            let avg = 0.5 * (s_cc[r][c] + s_cc[c][r]);
            s_cc[r][c] = avg;
            s_cc[c][r] = avg;
        }
    }
    let symmetry_defect = if scale > 0.0 { defect / scale } else { 0.0 };
    if symmetry_defect > 1e-10 {
        log::warn!(
            "substructure {}: coarse matrix asymmetry {symmetry_defect:e} before symmetrization",
            sub.id()
        );
    }
    Ok(CoarseBasis {
        n_local: n,
        n_interior: ni,
        phi,
        s_cc,
        symmetry_defect,
        augmented,
    })
}

/// Assembled coarse matrix, stored and factored as `−S_CC`.
#[derive(Clone, Debug)]
pub struct CoarseProblem {
    neg_s_cc: CsrMatrix,
    factor: LdltFactorization,
}

impl CoarseProblem {
    /// The assembled `S_CC` (negative definite).
    pub fn s_cc(&self) -> CsrMatrix {
        let mut t = Triplets::new(self.neg_s_cc.nrows(), self.neg_s_cc.ncols());
        for (i, j, v) in self.neg_s_cc.iter() {
            t.push(i, j, -v);
        }
        t.to_csr()
    }

    pub fn dim(&self) -> usize {
        self.neg_s_cc.nrows()
    }

    /// `(−S_CC)⁻¹ r`.
    pub fn solve(&self, r: &[f64]) -> Vec<f64> {
        self.factor.solve(r)
    }
}

pub fn assemble_coarse(bases: &[CoarseBasis], constraints: &Constraints) -> Result<CoarseProblem> {
    let n = constraints.n_coarse();
    let mut t = Triplets::new(n, n);
    for (basis, local) in bases.iter().zip(&constraints.local) {
        for (r, &gr) in local.coarse.iter().enumerate() {
            for (c, &gc) in local.coarse.iter().enumerate() {
                let v = basis.s_cc[r][c];
                if v != 0.0 {
                    t.push(gr, gc, -v);
                }
            }
        }
    }
    let neg_s_cc = t.to_csr();
    let not_definite = |detail: String| {
        Error::Config(format!(
            "coarse problem is not negative definite ({detail}); add constraints or a natural \
             boundary face"
        ))
    };
    let factor = match LdltFactorization::factor(&neg_s_cc) {
        Ok(f) => f,
        Err(Error::Singular { reason, .. }) => return Err(not_definite(reason)),
        Err(e) => return Err(e),
    };
    let inertia = factor.inertia();
    if inertia.positive != n {
        return Err(not_definite(format!(
            "{} non-negative eigenvalue(s)",
            n - inertia.positive
        )));
    }
    Ok(CoarseProblem { neg_s_cc, factor })
}

/// Two-level BDDC preconditioner with interface weights `W^i`.
#[derive(Clone, Debug)]
pub struct Bddc {
    n_interface: usize,
    interface: Vec<Vec<usize>>,
    weights: Vec<Vec<f64>>,
    constraints: Constraints,
    bases: Vec<CoarseBasis>,
    coarse: CoarseProblem,
}

impl Bddc {
    pub fn new(
        problem: &InterfaceProblem,
        layout: &InterfaceLayout,
        weights: &Weights,
        opts: BddcOptions,
    ) -> Result<Self> {
        let corners = select_corners(layout, opts.corners);
        let constraints = build_constraints(layout, &corners, opts.edge_averages);
        let subs = problem.substructures();
        let bases = par::map_indexed(subs.len(), |s| {
            build_coarse_basis(&subs[s], &constraints.local[s])
        });
        let bases = bases.into_iter().collect::<Result<Vec<_>>>()?;
        let coarse = assemble_coarse(&bases, &constraints)?;
        Ok(Self {
            n_interface: problem.n_interface(),
            interface: subs.iter().map(|s| s.interface().to_vec()).collect(),
            weights: (0..subs.len()).map(|s| weights.local(s).to_vec()).collect(),
            constraints,
            bases,
            coarse,
        })
    }

    pub fn constraints(&self) -> &Constraints {
        &self.constraints
    }

    pub fn bases(&self) -> &[CoarseBasis] {
        &self.bases
    }

    pub fn coarse(&self) -> &CoarseProblem {
        &self.coarse
    }

    /// `M_BDDC r`.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n_sub = self.bases.len();
        // local residuals, substructure corrections and coarse residuals
        let stage1 = par::map_indexed(n_sub, |s| {
            let ri: Vec<f64> = self.interface[s]
                .iter()
                .zip(&self.weights[s])
                .map(|(&g, &w)| w * r[g])
                .collect();
            let eta = self.bases[s].neumann(&ri);
            let rc: Vec<f64> = self.bases[s]
                .phi
                .iter()
                .map(|col| col.iter().zip(&ri).map(|(a, b)| a * b).sum())
                .collect();
            (eta, rc)
        });
        let mut rc = vec![0.0; self.coarse.dim()];
        for (s, (_, local)) in stage1.iter().enumerate() {
            for (&c, &v) in self.constraints.local[s].coarse.iter().zip(local) {
                rc[c] += v;
            }
        }
        let uc = self.coarse.solve(&rc);
        let corrections = par::map_indexed(n_sub, |s| {
            let mut eta = stage1[s].0.clone();
            for (col, &c) in self.bases[s]
                .phi
                .iter()
                .zip(&self.constraints.local[s].coarse)
            {
                let u = uc[c];
                for (e, p) in eta.iter_mut().zip(col) {
                    *e += p * u;
                }
            }
            for (e, w) in eta.iter_mut().zip(&self.weights[s]) {
                *e *= w;
            }
            eta
        });
        let mut out = vec![0.0; self.n_interface];
        for (s, eta) in corrections.iter().enumerate() {
            for (&g, &v) in self.interface[s].iter().zip(eta) {
                out[g] += v;
            }
        }
        out
    }
}
