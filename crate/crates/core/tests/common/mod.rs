//! Dense reference routines shared by the integration tests. They are
//! deliberately naive so they do not share code paths with the library.
#![allow(dead_code)]

use mhbddc::sparse::CsrMatrix;

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        m.swap(k, p);
        x.swap(k, p);
        let piv = m[k][k];
        assert!(piv.abs() > 1e-300, "singular dense matrix");
        for i in k + 1..n {
            let f = m[i][k] / piv;
            if f != 0.0 {
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
                x[i] -= f * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m[k][j] * x[j];
        }
        x[k] = s / m[k][k];
    }
    x
}

/// Numerical rank by Gaussian elimination with complete pivoting.
pub fn dense_rank(a: &[Vec<f64>], rel_tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |s, v| s.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut rank = 0;
    for k in 0..rows.min(cols) {
        let mut best = (k, k, 0.0f64);
        for i in k..rows {
            for j in k..cols {
                if m[i][j].abs() > best.2 {
                    best = (i, j, m[i][j].abs());
                }
            }
        }
        if best.2 <= rel_tol * scale {
            break;
        }
        m.swap(k, best.0);
        for row in m.iter_mut() {
            row.swap(k, best.1);
        }
        for i in k + 1..rows {
            let f = m[i][k] / m[k][k];
            for j in k..cols {
                m[i][j] -= f * m[k][j];
            }
        }
        rank += 1;
    }
    rank
}

pub fn dense(m: &CsrMatrix) -> Vec<Vec<f64>> {
    m.to_dense()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Dense symmetric eigenvalues by cyclic Jacobi rotations.
pub fn sym_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Dense LU with partial pivoting, factored once and reused.
pub struct DenseLu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn new(a: &[Vec<f64>]) -> Self {
        let n = a.len();
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[i][k].abs().total_cmp(&lu[j][k].abs()))
                .unwrap();
            lu.swap(k, p);
            perm.swap(k, p);
            let piv = lu[k][k];
            assert!(piv.abs() > 1e-300, "singular dense matrix");
            let (top, rest) = lu.split_at_mut(k + 1);
            let row_k = &top[k];
            for row in rest.iter_mut() {
                let f = row[k] / piv;
                row[k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        row[j] -= f * row_k[j];
                    }
                }
            }
        }
        Self { lu, perm }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i][j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i][j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i][i];
        }
        x
    }
}

/// `−(K_ΓΓ − K_ΓI K_II⁻¹ K_IΓ)` by dense elimination, one column at a time.
pub fn dense_schur(k: &[Vec<f64>], interior: &[usize], gamma: &[usize]) -> Vec<Vec<f64>> {
    let kii: Vec<Vec<f64>> = interior
        .iter()
        .map(|&i| interior.iter().map(|&j| k[i][j]).collect())
        .collect();
    let lu = DenseLu::new(&kii);
    let mut s = vec![vec![0.0; gamma.len()]; gamma.len()];
    for (c, &gc) in gamma.iter().enumerate() {
        let col: Vec<f64> = interior.iter().map(|&i| k[i][gc]).collect();
        let t = lu.solve(&col);
        for (r, &gr) in gamma.iter().enumerate() {
            let kt: f64 = interior.iter().zip(&t).map(|(&i, ti)| k[gr][i] * ti).sum();
            s[r][c] = -(k[gr][gc] - kt);
        }
    }
    s
}

/// Dense matrix of a linear operator, column by column.
pub fn operator_matrix(n: usize, apply: impl Fn(&[f64]) -> Vec<f64>) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for c in 0..n {
        let mut e = vec![0.0; n];
        e[c] = 1.0;
        for (r, v) in apply(&e).into_iter().enumerate() {
            m[r][c] = v;
        }
    }
    m
}
