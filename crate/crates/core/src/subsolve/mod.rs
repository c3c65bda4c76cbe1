//! Substructure operators and the reduced interface problem.
//!
//! Each substructure keeps the part of the global matrix it owns. With
//! interior unknowns `I = (u, p, λ_I)` and local interface multipliers `Γ`,
//!
//! ```text
//! K^i = [ K_II  K_IΓ ]      S^i = −(K_ΓΓ − K_ΓI K_II⁻¹ K_IΓ)
//!       [ K_ΓI  K_ΓΓ ]
//! ```
//!
//! The sign is flipped so that `S^i` is positive semidefinite and the
//! assembled `Ŝ = Σ R^iᵀ S^i R^i` is positive definite.

use crate::assembly::{BlockSystem, FaceDof, SolutionTriple};
use crate::error::{Error, Result};
use crate::ldlt::{LdltFactorization, LdltOptions};
use crate::par;
use crate::partition::{InterfaceLayout, Partition};
use crate::sparse::{CsrMatrix, Triplets};

/// Unassembled local problem of one substructure.
#[derive(Clone, Debug)]
pub struct SubstructureOperator {
    id: usize,
    /// Full-system indices of the local unknowns: interior first, then the
    /// interface multipliers in [`InterfaceLayout::local_interface`] order.
    globals: Vec<usize>,
    n_interior: usize,
    n_velocity: usize,
    interface: Vec<usize>,
    has_natural: bool,
    local: CsrMatrix,
    k_ig: CsrMatrix,
    k_gg: CsrMatrix,
    rhs: Vec<f64>,
    interior: LdltFactorization,
}

/// Owner of the full-system entry `(i, j)`. Entries touching a velocity
/// or a pressure go to that element's owner; the remaining multiplier
/// diagonal of a coupled face goes to the owner of the lower element.
fn entry_owner(system: &BlockSystem, partition: &Partition, i: usize, j: usize) -> usize {
    let (po, lo) = system.offsets();
    let dofs = &system.dofs;
    let owner_of = |k: usize| -> Option<usize> {
        if k < po {
            Some(partition.owner(dofs.velocity_face(k).0))
        } else if k < lo {
            Some(partition.owner(k - po))
        } else {
            None
        }
    };
    if let Some(s) = owner_of(i.min(j)) {
        return s;
    }
    let lower = dofs
        .lambda_lower(i - lo)
        .expect("multiplier-only entries come from coupling links");
    partition.owner(lower)
}

/// Splits the global system into substructure operators and factors their
/// interior blocks.
pub fn build_substructures(
    system: &BlockSystem,
    partition: &Partition,
    layout: &InterfaceLayout,
) -> Result<Vec<SubstructureOperator>> {
    let n_sub = partition.n_sub();
    let full = system.full_matrix();
    let rhs = system.full_rhs();
    let (po, lo) = system.offsets();
    let dofs = &system.dofs;

    let mut owned: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n_sub];
    for (i, j, v) in full.iter() {
        owned[entry_owner(system, partition, i, j)].push((i, j, v));
    }
    let mut interior_lambda = vec![Vec::new(); n_sub];
    for l in 0..dofs.n_lambda() {
        if layout.interface_index(l).is_none() {
            if let [s] = layout.sharing(l) {
                interior_lambda[*s].push(l);
            }
        }
    }

    let subs = par::map_indexed(n_sub, |s| {
        let elements = partition.elements(s);
        if elements.is_empty() {
            return Err(Error::Config(format!("substructure {s} is empty")));
        }
        let mut globals = Vec::new();
        for &e in elements {
            let n = dofs.element_dim(e) + 1;
            globals.extend((0..n).filter_map(|j| dofs.velocity(e, j)));
        }
        globals.sort_unstable();
        let n_velocity = globals.len();
        globals.extend(elements.iter().map(|&e| po + e));
        globals.extend(interior_lambda[s].iter().map(|&l| lo + l));
        let n_interior = globals.len();
        let interface = layout.local_interface(s).to_vec();
        globals.extend(interface.iter().map(|&g| lo + layout.lambda(g)));

        let mut position = std::collections::HashMap::with_capacity(globals.len());
        for (k, &g) in globals.iter().enumerate() {
            position.insert(g, k);
        }
        let n = globals.len();
        let mut t = Triplets::with_capacity(n, n, owned[s].len());
        for &(i, j, v) in &owned[s] {
            t.push(position[&i], position[&j], v);
        }
        let local = t.to_csr();
        let interior_idx: Vec<usize> = (0..n_interior).collect();
        let gamma_idx: Vec<usize> = (n_interior..n).collect();
        let k_ii = local.submatrix(&interior_idx, &interior_idx);
        let k_ig = local.submatrix(&interior_idx, &gamma_idx);
        let k_gg = local.submatrix(&gamma_idx, &gamma_idx);
        let local_rhs: Vec<f64> = globals[..n_interior].iter().map(|&g| rhs[g]).collect();
        let classes: Vec<u8> = (0..n_interior).map(|k| u8::from(k >= n_velocity)).collect();
        let interior =
            LdltFactorization::factor_with(&k_ii, Some(&classes), LdltOptions::default()).map_err(
                |e| match e {
                    Error::Singular {
                        reason,
                        positive,
                        negative,
                        remaining,
                    } => Error::Singular {
                        reason: format!("interior problem of substructure {s}: {reason}"),
                        positive,
                        negative,
                        remaining,
                    },
                    other => other,
                },
            )?;
        let has_natural = globals[..n_velocity].iter().any(|&u| {
            let (e, j) = dofs.velocity_face(u);
            matches!(dofs.face(e, j), FaceDof::Natural(_))
        });
        Ok(SubstructureOperator {
            id: s,
            globals,
            n_interior,
            n_velocity,
            interface,
            has_natural,
            local,
            k_ig,
            k_gg,
            rhs: local_rhs,
            interior,
        })
    });
    subs.into_iter().collect()
}

impl SubstructureOperator {
    pub fn id(&self) -> usize {
        self.id
    }

    /// Number of local unknowns (interior plus interface).
    pub fn n_local(&self) -> usize {
        self.globals.len()
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_velocity(&self) -> usize {
        self.n_velocity
    }

    /// Global interface indices of the local interface, i.e. `R^i`.
    pub fn interface(&self) -> &[usize] {
        &self.interface
    }

    /// Full-system indices of all local unknowns.
    pub fn global_dofs(&self) -> &[usize] {
        &self.globals
    }

    /// Whether an owned element face carries a prescribed pressure.
    pub fn has_natural_boundary(&self) -> bool {
        self.has_natural
    }

    /// The owned part `K^i` of the global matrix, ordered interior first.
    pub fn local_matrix(&self) -> &CsrMatrix {
        &self.local
    }

    /// Elimination classes of the local ordering: velocities, then the
    /// remaining unknowns.
    pub fn local_classes(&self) -> Vec<u8> {
        (0..self.n_local())
            .map(|k| u8::from(k >= self.n_velocity))
            .collect()
    }

    pub fn interior_factor(&self) -> &LdltFactorization {
        &self.interior
    }

    /// `S^i x` for a local interface vector.
    pub fn schur_apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.interface.len());
        let t = self.interior.solve(&self.k_ig.mul_vec(x));
        let kt = self.k_ig.mul_transpose_vec(&t);
        let kx = self.k_gg.mul_vec(x);
        kt.iter().zip(&kx).map(|(a, b)| a - b).collect()
    }

    /// Local reduced right-hand side `b^i = K_ΓI K_II⁻¹ r_I`.
    pub fn reduced_rhs(&self) -> Vec<f64> {
        let t = self.interior.solve(&self.rhs);
        self.k_ig.mul_transpose_vec(&t)
    }

    /// Interior unknowns `K_II⁻¹ (r_I − K_IΓ λ_Γ)` in local order.
    pub fn recover_interior(&self, lambda_gamma: &[f64]) -> Vec<f64> {
        let kl = self.k_ig.mul_vec(lambda_gamma);
        let r: Vec<f64> = self.rhs.iter().zip(&kl).map(|(a, b)| a - b).collect();
        self.interior.solve(&r)
    }

    /// Restriction of a global interface vector to this substructure.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.interface.iter().map(|&g| x[g]).collect()
    }
}

/// The assembled interface problem `Ŝ λ_Γ = b̂`.
#[derive(Clone, Debug)]
pub struct InterfaceProblem {
    subs: Vec<SubstructureOperator>,
    n_interface: usize,
    n_velocity: usize,
    n_pressure: usize,
    n_lambda: usize,
    interface_lambda: Vec<usize>,
}

impl InterfaceProblem {
    pub fn new(
        system: &BlockSystem,
        partition: &Partition,
        layout: &InterfaceLayout,
    ) -> Result<Self> {
        let subs = build_substructures(system, partition, layout)?;
        Ok(Self {
            subs,
            n_interface: layout.n_interface(),
            n_velocity: system.dofs.n_velocity(),
            n_pressure: system.dofs.n_pressure(),
            n_lambda: system.dofs.n_lambda(),
            interface_lambda: (0..layout.n_interface())
                .map(|g| layout.lambda(g))
                .collect(),
        })
    }

    pub fn substructures(&self) -> &[SubstructureOperator] {
        &self.subs
    }

    pub fn n_interface(&self) -> usize {
        self.n_interface
    }

    /// `Σ_i R^iᵀ v^i`, summed in substructure order.
    pub fn assemble(&self, locals: &[Vec<f64>]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_interface];
        for (sub, v) in self.subs.iter().zip(locals) {
            for (&g, &x) in sub.interface.iter().zip(v) {
                y[g] += x;
            }
        }
        y
    }

    /// `Ŝ x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let locals = par::map_indexed(self.subs.len(), |s| {
            let sub = &self.subs[s];
            sub.schur_apply(&sub.restrict(x))
        });
        self.assemble(&locals)
    }

    /// `b̂ = Σ_i R^iᵀ b^i`.
    pub fn reduced_rhs(&self) -> Vec<f64> {
        let locals = par::map_indexed(self.subs.len(), |s| self.subs[s].reduced_rhs());
        self.assemble(&locals)
    }

    /// Solution of the full system given the interface multipliers.
    pub fn recover(&self, lambda_gamma: &[f64]) -> SolutionTriple {
        let n = self.n_velocity + self.n_pressure + self.n_lambda;
        let mut x = vec![0.0; n];
        let interiors = par::map_indexed(self.subs.len(), |s| {
            let sub = &self.subs[s];
            sub.recover_interior(&sub.restrict(lambda_gamma))
        });
        for (sub, xi) in self.subs.iter().zip(&interiors) {
            for (&g, &v) in sub.globals[..sub.n_interior].iter().zip(xi) {
                x[g] = v;
            }
        }
        let lo = self.n_velocity + self.n_pressure;
        for (&l, &v) in self.interface_lambda.iter().zip(lambda_gamma) {
            x[lo + l] = v;
        }
        SolutionTriple {
            lambda: x.split_off(lo),
            p: x.split_off(self.n_velocity),
            u: x,
        }
    }
}
