use super::{InterfaceLayout, Partition};
use crate::assembly::BlockSystem;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Choice of the interface weights `W^i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scaling {
    /// Inverse counting function.
    Arithmetic,
    /// Element-wise representative conductivity `d / tr(k⁻¹)`.
    Rho,
    /// Approximate Schur diagonal `C̃_jj + 1/A_kk`.
    #[default]
    Diagonal,
}

/// Diagonal weights per substructure, aligned with
/// [`InterfaceLayout::local_interface`].
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    pub scaling: Scaling,
    per_sub: Vec<Vec<f64>>,
}

impl Weights {
    pub fn local(&self, sub: usize) -> &[f64] {
        &self.per_sub[sub]
    }

    /// `Σ_i R^iᵀ W^i R^i` as a vector over the interface.
    pub fn partition_of_unity(&self, layout: &InterfaceLayout) -> Vec<f64> {
        let mut s = vec![0.0; layout.n_interface()];
        for (sub, w) in self.per_sub.iter().enumerate() {
            for (&g, &v) in layout.local_interface(sub).iter().zip(w) {
                s[g] += v;
            }
        }
        s
    }
}

pub fn compute_weights(
    mesh: &Mesh,
    system: &BlockSystem,
    partition: &Partition,
    layout: &InterfaceLayout,
    scaling: Scaling,
) -> Result<Weights> {
    let n_sub = layout.n_sub();
    let dofs = &system.dofs;
    // raw score of each (substructure, interface dof), summed over the
    // contributions the substructure owns
    let mut raw: Vec<Vec<(usize, f64)>> = vec![Vec::new(); layout.n_interface()];
    let mut add = |g: usize, sub: usize, v: f64| match raw[g].iter_mut().find(|e| e.0 == sub) {
        Some(e) => e.1 += v,
        None => raw[g].push((sub, v)),
    };
    for g in 0..layout.n_interface() {
        let l = layout.lambda(g);
        for &(e, k) in dofs.lambda_faces(l) {
            let sub = partition.owner(e);
            let v = match scaling {
                Scaling::Arithmetic => 0.0,
                Scaling::Rho => mesh.elements()[e].conductivity.representative(),
                Scaling::Diagonal => {
                    let u = dofs
                        .velocity(e, k)
                        .expect("multiplier faces keep their velocity");
                    let akk = system.a.get(u, u);
                    if !(akk > 0.0) {
                        return Err(Error::Config(format!(
                            "non-positive velocity diagonal at element {e}"
                        )));
                    }
                    1.0 / akk
                }
            };
            add(g, sub, v);
        }
        if let Some(lower) = dofs.lambda_lower(l) {
            let sub = partition.owner(lower);
            let v = match scaling {
                Scaling::Arithmetic => 0.0,
                Scaling::Rho => mesh.elements()[lower].conductivity.representative(),
                Scaling::Diagonal => system.ct.get(l, l),
            };
            add(g, sub, v);
        }
    }

    let mut per_sub: Vec<Vec<f64>> = (0..n_sub)
        .map(|s| vec![0.0; layout.local_interface(s).len()])
        .collect();
    let mut cursor = vec![0usize; n_sub];
    for (g, entries) in raw.iter_mut().enumerate() {
        entries.sort_by_key(|e| e.0);
        let total: f64 = entries.iter().map(|e| e.1).sum();
        let card = entries.len() as f64;
        for &(sub, v) in entries.iter() {
            let w = match scaling {
                Scaling::Arithmetic => 1.0 / card,
                _ => v / total,
            };
            let pos = cursor[sub];
            debug_assert_eq!(layout.local_interface(sub)[pos], g);
            per_sub[sub][pos] = w;
            cursor[sub] += 1;
        }
    }
    Ok(Weights { scaling, per_sub })
}
