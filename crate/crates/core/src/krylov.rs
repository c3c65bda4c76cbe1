//! Preconditioned conjugate gradients with a Lanczos condition estimate.

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PcgConfig {
    /// Stop when `‖b − Ŝx‖₂ ≤ rel_tol ‖b‖₂`.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Keep the step lengths needed for the condition estimate.
    pub record_lanczos: bool,
}

impl Default for PcgConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-7,
            max_iter: 5000,
            record_lanczos: true,
        }
    }
}

impl PcgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::Config(format!(
                "PCG tolerance must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("PCG needs at least one iteration".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PcgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Relative residual after each iteration, starting with 1 at iteration 0.
    pub residuals: Vec<f64>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Ratio of the extreme Ritz values, 1 when nothing was recorded.
    pub condition: f64,
}

impl PcgOutcome {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }

    /// `iter,relres` lines with a header.
    pub fn history_csv(&self) -> String {
        let mut s = String::from("iter,relres\n");
        for (k, r) in self.residuals.iter().enumerate() {
            s.push_str(&format!("{k},{r:e}\n"));
        }
        s
    }
}

/// Solves `S x = b` for symmetric positive definite `S` and `M`.
///
/// A curvature `pᵀSp ≤ 0` or `rᵀMr ≤ 0` aborts with [`Error::Indefinite`].
/// Running out of iterations is reported through `converged`.
pub fn pcg(
    apply_s: impl Fn(&[f64]) -> Vec<f64>,
    apply_m: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    config: &PcgConfig,
) -> Result<PcgOutcome> {
    config.validate()?;
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(PcgOutcome {
            x: vec![0.0; n],
            converged: true,
            residuals: vec![0.0],
            condition: 1.0,
            ..Default::default()
        });
    }
    let mut out = PcgOutcome {
        x: vec![0.0; n],
        residuals: vec![1.0],
        ..Default::default()
    };
    let mut r = b.to_vec();
    let mut z = apply_m(&r);
    let mut rz = dot(&r, &z);
    let check_m = |rz: f64, iteration: usize| {
        if rz > 0.0 {
            Ok(())
        } else {
            Err(Error::Indefinite {
                operator: "the BDDC preconditioner",
                value: rz,
                iteration,
            })
        }
    };
    check_m(rz, 0)?;
    let mut p = z.clone();
    for k in 1..=config.max_iter {
        let q = apply_s(&p);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::Indefinite {
                operator: "the interface operator",
                value: pq,
                iteration: k,
            });
        }
        let alpha = rz / pq;
        for i in 0..n {
            out.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        if config.record_lanczos {
            out.alphas.push(alpha);
        }
        out.iterations = k;
        let mut rel = norm2(&r) / bnorm;
        if rel <= config.rel_tol {
            // confirm with the true residual before stopping
            let sx = apply_s(&out.x);
            let true_r: Vec<f64> = b.iter().zip(&sx).map(|(bi, si)| bi - si).collect();
            rel = norm2(&true_r) / bnorm;
            r = true_r;
            if rel <= config.rel_tol {
                out.residuals.push(rel);
                out.converged = true;
                break;
            }
        }
        out.residuals.push(rel);
        z = apply_m(&r);
        let rz_new = dot(&r, &z);
        check_m(rz_new, k)?;
        let beta = rz_new / rz;
        if config.record_lanczos {
            out.betas.push(beta);
        }
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rz = rz_new;
    }
    out.condition = lanczos_condition(&out.alphas, &out.betas);
    Ok(out)
}

/// Builds the Lanczos tridiagonal from the PCG coefficients. `betas[j]` is
/// the coefficient computed after step `j`; extra entries are ignored.
pub fn lanczos_tridiagonal(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let k = alphas.len();
    let mut diag = Vec::with_capacity(k);
    let mut off = Vec::with_capacity(k.saturating_sub(1));
    for j in 0..k {
        let mut d = 1.0 / alphas[j];
        if j > 0 {
            d += betas[j - 1] / alphas[j - 1];
            off.push(betas[j - 1].sqrt() / alphas[j - 1]);
        }
        diag.push(d);
    }
    (diag, off)
}

/// Number of eigenvalues of the tridiagonal below `x` (Sturm count).
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for j in 0..diag.len() {
        let o2 = if j > 0 { off[j - 1] * off[j - 1] } else { 0.0 };
        q = diag[j] - x - if j > 0 { o2 / q } else { 0.0 };
        if q == 0.0 {
            q = f64::EPSILON * (diag[j].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalue `index` (ascending) of a symmetric tridiagonal by bisection.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], index: usize) -> f64 {
    let n = diag.len();
    assert!(index < n);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for j in 0..n {
        let r = if j > 0 { off[j - 1].abs() } else { 0.0 } + off.get(j).map_or(0.0, |v| v.abs());
        lo = lo.min(diag[j] - r);
        hi = hi.max(diag[j] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(diag, off, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `λ_max / λ_min` of the Lanczos tridiagonal, 1 for an empty history.
pub fn lanczos_condition(alphas: &[f64], betas: &[f64]) -> f64 {
    if alphas.is_empty() {
        return 1.0;
    }
    let (diag, off) = lanczos_tridiagonal(alphas, betas);
    let k = diag.len();
    let lmin = tridiagonal_eigenvalue(&diag, &off, 0);
    let lmax = tridiagonal_eigenvalue(&diag, &off, k - 1);
    (lmax / lmin).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_tridiagonal() {
        let (d, o) = (vec![2.0, 2.0], vec![1.0]);
        assert!((tridiagonal_eigenvalue(&d, &o, 0) - 1.0).abs() < 1e-12);
        assert!((tridiagonal_eigenvalue(&d, &o, 1) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_step_estimate_is_one() {
        assert_eq!(lanczos_condition(&[0.7], &[]), 1.0);
        assert_eq!(lanczos_condition(&[], &[]), 1.0);
    }

    #[test]
    fn zero_rhs_takes_no_iterations() {
        let out = pcg(
            |x| x.to_vec(),
            |x| x.to_vec(),
            &[0.0; 4],
            &PcgConfig::default(),
        )
        .unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.converged);
        assert_eq!(out.x, vec![0.0; 4]);
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = PcgConfig {
            rel_tol: 1.5,
            ..Default::default()
        };
        assert!(pcg(|x| x.to_vec(), |x| x.to_vec(), &[1.0], &cfg).is_err());
    }
}
