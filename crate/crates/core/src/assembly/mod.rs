//! Mixed-hybrid RT0 discretization of the coupled 1D/2D/3D Darcy problem.
//!
//! The global system is
//!
//! ```text
//! [ A    Bᵀ   B_Fᵀ ] [u]   [g]
//! [ B   −C   −C_Fᵀ ] [p] = [f]
//! [ B_F −C_F −C̃    ] [λ]   [0]
//! ```
//!
//! with one velocity unknown per kept (element, face), one pressure per
//! element and one multiplier per interior face class.

mod dofmap;
mod rt0;

pub use dofmap::{DofMap, FaceDof, LinkDofs};
pub use rt0::{rt0_local, LocalRt0};

use crate::error::{Error, Result};
use crate::ldlt::{LdltFactorization, LdltOptions};
use crate::mesh::Mesh;
use crate::par;
use crate::sparse::{CsrMatrix, Triplets};

#[derive(Clone, Debug)]
pub struct BlockSystem {
    pub dofs: DofMap,
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub bf: CsrMatrix,
    pub c: CsrMatrix,
    pub cf: CsrMatrix,
    pub ct: CsrMatrix,
    pub g: Vec<f64>,
    pub f: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionTriple {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl SolutionTriple {
    pub fn from_full(dofs: &DofMap, x: &[f64]) -> Self {
        let (nu, np) = (dofs.n_velocity(), dofs.n_pressure());
        Self {
            u: x[..nu].to_vec(),
            p: x[nu..nu + np].to_vec(),
            lambda: x[nu + np..].to_vec(),
        }
    }

    pub fn to_full(&self) -> Vec<f64> {
        let mut x = self.u.clone();
        x.extend_from_slice(&self.p);
        x.extend_from_slice(&self.lambda);
        x
    }

    /// Outward flux through local face `j` of element `e` (zero on
    /// eliminated faces).
    pub fn flux(&self, dofs: &DofMap, e: usize, j: usize) -> f64 {
        dofs.velocity(e, j).map_or(0.0, |u| self.u[u])
    }
}

/// Assembles the block system. Refuses meshes without any prescribed
/// pressure head.
pub fn assemble(mesh: &Mesh) -> Result<BlockSystem> {
    if !mesh.has_natural_boundary() {
        return Err(Error::Config(
            "the mesh has no natural boundary face; the system would be singular".into(),
        ));
    }
    assemble_unchecked(mesh)
}

/// [`assemble`] without the boundary-condition check.
pub fn assemble_unchecked(mesh: &Mesh) -> Result<BlockSystem> {
    let dofs = DofMap::new(mesh);
    let locals = par::map_indexed(mesh.elements().len(), |e| rt0_local(mesh, e));
    let locals = locals.into_iter().collect::<Result<Vec<_>>>()?;
    let (nu, np, nl) = (dofs.n_velocity(), dofs.n_pressure(), dofs.n_lambda());

    let mut a = Triplets::with_capacity(nu, nu, 16 * nu);
    let mut b = Triplets::with_capacity(np, nu, nu);
    let mut bf = Triplets::with_capacity(nl, nu, nu);
    let mut g = vec![0.0; nu];
    let mut f = vec![0.0; np];
    for (e, (el, loc)) in mesh.elements().iter().zip(&locals).enumerate() {
        let n = el.dim + 1;
        for i in 0..n {
            let Some(ui) = dofs.velocity(e, i) else {
                continue;
            };
            for j in 0..n {
                if let Some(uj) = dofs.velocity(e, j) {
                    a.push(ui, uj, loc.at(i, j));
                }
            }
            b.push(e, ui, -1.0);
            match dofs.face(e, i) {
                FaceDof::Multiplier(l) => bf.push(l, ui, 1.0),
                FaceDof::Natural(p) => g[ui] -= p,
                FaceDof::Essential => unreachable!("eliminated faces have no velocity"),
            }
            if mesh.gravity() {
                g[ui] += loc.gravity[i];
            }
        }
        f[e] = -el.cross_section * el.source * loc.measure;
    }

    let mut c = Triplets::new(np, np);
    let mut cf = Triplets::new(nl, np);
    let mut ct = Triplets::new(nl, nl);
    for link in dofs.links() {
        c.push(link.lower, link.lower, link.weight);
        cf.push(link.lambda, link.lower, -link.weight);
        ct.push(link.lambda, link.lambda, link.weight);
    }

    Ok(BlockSystem {
        a: a.to_csr(),
        b: b.to_csr(),
        bf: bf.to_csr(),
        c: c.to_csr(),
        cf: cf.to_csr(),
        ct: ct.to_csr(),
        g,
        f,
        dofs,
    })
}

impl BlockSystem {
    pub fn n_total(&self) -> usize {
        self.dofs.n_total()
    }

    /// Offsets of the pressure and multiplier blocks in the full ordering.
    pub fn offsets(&self) -> (usize, usize) {
        let nu = self.dofs.n_velocity();
        (nu, nu + self.dofs.n_pressure())
    }

    /// The full symmetric matrix, ordered (u, p, λ).
    pub fn full_matrix(&self) -> CsrMatrix {
        let n = self.n_total();
        let (po, lo) = self.offsets();
        let mut t = Triplets::with_capacity(n, n, self.a.nnz() + 4 * self.b.nnz());
        for (i, j, v) in self.a.iter() {
            t.push(i, j, v);
        }
        for (i, j, v) in self.b.iter() {
            t.push_sym(po + i, j, v);
        }
        for (i, j, v) in self.bf.iter() {
            t.push_sym(lo + i, j, v);
        }
        for (i, j, v) in self.c.iter() {
            t.push(po + i, po + j, -v);
        }
        for (i, j, v) in self.cf.iter() {
            t.push_sym(lo + i, po + j, -v);
        }
        for (i, j, v) in self.ct.iter() {
            t.push(lo + i, lo + j, -v);
        }
        t.to_csr()
    }

    pub fn full_rhs(&self) -> Vec<f64> {
        let mut r = self.g.clone();
        r.extend_from_slice(&self.f);
        r.resize(self.n_total(), 0.0);
        r
    }

    /// Elimination classes for the sparse factorization: velocities first.
    pub fn full_classes(&self) -> Vec<u8> {
        let (po, _) = self.offsets();
        (0..self.n_total()).map(|i| u8::from(i >= po)).collect()
    }

    /// `C̄ = [C C_Fᵀ; C_F C̃]` over (p, λ).
    pub fn c_bar(&self) -> CsrMatrix {
        let np = self.dofs.n_pressure();
        let n = np + self.dofs.n_lambda();
        let mut t = Triplets::new(n, n);
        for (i, j, v) in self.c.iter() {
            t.push(i, j, v);
        }
        for (i, j, v) in self.cf.iter() {
            t.push_sym(np + i, j, v);
        }
        for (i, j, v) in self.ct.iter() {
            t.push(np + i, np + j, v);
        }
        t.to_csr()
    }

    pub fn to_matrix_market(&self) -> String {
        self.full_matrix().to_matrix_market()
    }
}

/// Monolithic sparse direct solve of the full system.
pub fn full_solve_direct(system: &BlockSystem) -> Result<SolutionTriple> {
    let k = system.full_matrix();
    let rhs = system.full_rhs();
    let classes = system.full_classes();
    let fact = match LdltFactorization::factor_with(&k, Some(&classes), LdltOptions::default()) {
        Ok(f) => f,
        Err(Error::Singular {
            reason,
            positive,
            negative,
            remaining,
        }) => {
            let floating = system.dofs.floating_components(true);
            let reason = if floating.is_empty() {
                reason
            } else {
                format!(
                    "{reason}; {} connected component(s) without a natural boundary face \
                     (first contains element {}), each adds a constant-pressure null vector",
                    floating.len(),
                    floating[0][0]
                )
            };
            return Err(Error::Singular {
                reason,
                positive,
                negative,
                remaining,
            });
        }
        Err(e) => return Err(e),
    };
    let x = fact.solve(&rhs);
    let err = fact.backward_error(&x, &rhs);
    if !(err <= 1e-10) {
        return Err(Error::NotConverged {
            iterations: 1,
            residual: err,
        });
    }
    Ok(SolutionTriple::from_full(&system.dofs, &x))
}
