//! Sparse symmetric-indefinite LDLᵀ factorization.
//!
//! Right-looking elimination on an equilibrated copy of the matrix. Pivots are
//! chosen dynamically: the candidate of lowest (class, degree) is tried first
//! as a 1×1 pivot, then paired with a neighbour as a 2×2 pivot, both subject
//! to a threshold test. Candidates failing both tests are delayed. The
//! optional per-row `class` lets callers impose a coarse elimination order
//! (e.g. velocities before pressures before constraints); within a class the
//! ordering is minimum degree.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::sparse::{norm2, norm_inf, CsrMatrix};

#[derive(Clone, Copy, Debug)]
pub struct LdltOptions {
    /// Threshold `u` of the pivot tests; larger is more stable, smaller keeps
    /// more sparsity.
    pub pivot_threshold: f64,
    /// A row whose entries (after equilibration) all fall below this value is
    /// treated as numerically zero.
    pub singular_tol: f64,
    /// One step of iterative refinement is applied when the relative residual
    /// of a solve exceeds this value.
    pub refine_tol: f64,
}

impl Default for LdltOptions {
    fn default() -> Self {
        Self {
            pivot_threshold: 0.01,
            singular_tol: 1e-12,
            refine_tol: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Clone, Debug)]
enum Pivot {
    One { idx: usize, d: f64 },
    Two { idx: [usize; 2], inv: [[f64; 2]; 2] },
}

#[derive(Clone, Debug)]
struct Step {
    pivot: Pivot,
    /// Rows of L below the pivot: (row, [l_k, l_m]); `l_m` unused for 1×1.
    lower: Vec<(usize, [f64; 2])>,
}

/// Factorization handle. Keeps the original matrix for iterative refinement.
#[derive(Clone, Debug)]
pub struct LdltFactorization {
    n: usize,
    scale: Vec<f64>,
    steps: Vec<Step>,
    matrix: CsrMatrix,
    inertia: Inertia,
    two_by_two: usize,
    fill: usize,
    opts: LdltOptions,
}

const MAX_DELAYS: u32 = 16;

/// Symmetric Ruiz equilibration: returns `s` with `diag(s) A diag(s)` having
/// unit row maxima (rows that are entirely zero keep scale 1).
fn equilibrate(a: &CsrMatrix) -> Vec<f64> {
    let n = a.nrows();
    let mut s = vec![1.0; n];
    for _ in 0..10 {
        let mut rmax = vec![0.0f64; n];
        for (i, j, v) in a.iter() {
            let w = (s[i] * v * s[j]).abs();
            if w > rmax[i] {
                rmax[i] = w;
            }
        }
        let mut dev = 0.0f64;
        for i in 0..n {
            if rmax[i] > 0.0 {
                s[i] /= rmax[i].sqrt();
                dev = dev.max((1.0 - rmax[i]).abs());
            }
        }
        if dev < 1e-3 {
            break;
        }
    }
    s
}

struct Active {
    rows: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
    eliminated: Vec<bool>,
}

impl Active {
    fn colmax_excluding(&self, i: usize, skip: usize) -> f64 {
        self.rows[i]
            .iter()
            .filter(|e| e.0 != skip)
            .fold(0.0, |m, e| m.max(e.1.abs()))
    }
}

/// Solves the 2×2 symmetric block, returning its inverse when well defined.
fn invert2(a: f64, b: f64, c: f64) -> Option<[[f64; 2]; 2]> {
    let det = a * c - b * b;
    let scale = (a * c).abs().max(b * b);
    if det == 0.0 || !det.is_finite() || det.abs() <= 1e-14 * scale {
        return None;
    }
    Some([[c / det, -b / det], [-b / det, a / det]])
}

impl LdltFactorization {
    pub fn factor(matrix: &CsrMatrix) -> Result<Self> {
        Self::factor_with(matrix, None, LdltOptions::default())
    }

    pub fn factor_with(
        matrix: &CsrMatrix,
        classes: Option<&[u8]>,
        opts: LdltOptions,
    ) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::Config(format!(
                "LDLT needs a square matrix, got {}x{}",
                n,
                matrix.ncols()
            )));
        }
        if let Some(c) = classes {
            assert_eq!(c.len(), n, "class vector length");
        }
        let scale = equilibrate(matrix);
        let mut act = Active {
            rows: vec![Vec::new(); n],
            diag: vec![0.0; n],
            eliminated: vec![false; n],
        };
        for i in 0..n {
            for (j, v) in matrix.row(i) {
                let w = scale[i] * v * scale[j];
                if i == j {
                    act.diag[i] += w;
                } else {
                    act.rows[i].push((j, w));
                }
            }
        }

        let base: Vec<u32> = (0..n).map(|i| classes.map_or(0, |c| c[i] as u32)).collect();
        let mut delays = vec![0u32; n];
        let prio = |i: usize, delays: &[u32]| base[i] * (MAX_DELAYS + 2) + delays[i];
        let mut heap: BinaryHeap<Reverse<(u32, u32, u32)>> = (0..n)
            .map(|i| Reverse((prio(i, &delays), act.rows[i].len() as u32, i as u32)))
            .collect();

        let u = opts.pivot_threshold;
        let tol = opts.singular_tol;
        let mut steps: Vec<Step> = Vec::with_capacity(n);
        let mut inertia = Inertia::default();
        let mut two_by_two = 0usize;
        let mut fill = 0usize;
        let mut done = 0usize;
        let mut buf: Vec<(usize, f64)> = Vec::new();

        while let Some(Reverse((p, deg, k))) = heap.pop() {
            let k = k as usize;
            if act.eliminated[k] || p != prio(k, &delays) || deg as usize != act.rows[k].len() {
                continue;
            }
            let dk = act.diag[k];
            let colmax = act.colmax_excluding(k, usize::MAX);
            if colmax <= tol && dk.abs() <= tol {
                return Err(Error::Singular {
                    reason: format!("row {k} of the reduced matrix vanished"),
                    positive: inertia.positive,
                    negative: inertia.negative,
                    remaining: n - done,
                });
            }

            let relaxed = delays[k] >= MAX_DELAYS;
            let eff_u = if relaxed { 0.0 } else { u };
            let mut chosen: Option<Pivot> = None;
            if dk.abs() > tol && dk.abs() >= eff_u * colmax {
                chosen = Some(Pivot::One { idx: k, d: dk });
            } else {
                // partners by (class, degree, index), restricted to large entries
                let mut partners: Vec<(u32, usize, usize, f64)> = act.rows[k]
                    .iter()
                    .filter(|e| e.1.abs() >= eff_u * colmax && e.1 != 0.0)
                    .map(|&(m, v)| (prio(m, &delays), act.rows[m].len(), m, v))
                    .collect();
                partners.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
                let mut best: Option<(f64, usize, [[f64; 2]; 2])> = None;
                for &(_, _, m, akm) in partners.iter().take(if relaxed { usize::MAX } else { 8 }) {
                    let dm = act.diag[m];
                    let Some(inv) = invert2(dk, akm, dm) else {
                        continue;
                    };
                    if relaxed {
                        let det = (dk * dm - akm * akm).abs();
                        if best.as_ref().is_none_or(|b| det > b.0) {
                            best = Some((det, m, inv));
                        }
                        continue;
                    }
                    let ck = act.colmax_excluding(k, m);
                    let cm = act.colmax_excluding(m, k);
                    let g0 = inv[0][0].abs() * ck + inv[0][1].abs() * cm;
                    let g1 = inv[1][0].abs() * ck + inv[1][1].abs() * cm;
                    if g0 * u <= 1.0 && g1 * u <= 1.0 {
                        chosen = Some(Pivot::Two { idx: [k, m], inv });
                        break;
                    }
                }
                if chosen.is_none() {
                    if let Some((_, m, inv)) = best {
                        chosen = Some(Pivot::Two { idx: [k, m], inv });
                    } else if relaxed && dk != 0.0 && dk.abs() > tol * 1e-3 {
                        chosen = Some(Pivot::One { idx: k, d: dk });
                    }
                }
            }

            let Some(pivot) = chosen else {
                if relaxed {
                    return Err(Error::Singular {
                        reason: format!("no acceptable pivot for row {k}"),
                        positive: inertia.positive,
                        negative: inertia.negative,
                        remaining: n - done,
                    });
                }
                delays[k] += 1;
                heap.push(Reverse((
                    prio(k, &delays),
                    act.rows[k].len() as u32,
                    k as u32,
                )));
                continue;
            };

            let lower = match pivot {
                Pivot::One { idx, d } => {
                    if d > 0.0 {
                        inertia.positive += 1;
                    } else {
                        inertia.negative += 1;
                    }
                    done += 1;
                    act.eliminated[idx] = true;
                    let nb = std::mem::take(&mut act.rows[idx]);
                    // w_j = a_jk / d
                    let w: Vec<(usize, [f64; 2])> =
                        nb.iter().map(|&(j, a)| (j, [a / d, 0.0])).collect();
                    for (pos, &(i, ai)) in nb.iter().enumerate() {
                        act.diag[i] -= ai * w[pos].1[0];
                        buf.clear();
                        let row = &act.rows[i];
                        let (mut r, mut q) = (0usize, 0usize);
                        while r < row.len() || q < nb.len() {
                            let rc = row.get(r).map_or(usize::MAX, |e| e.0);
                            let qc = nb.get(q).map_or(usize::MAX, |e| e.0);
                            if rc < qc {
                                if rc != idx {
                                    buf.push(row[r]);
                                }
                                r += 1;
                            } else {
                                let (j, aj) = nb[q];
                                let mut val = if rc == qc {
                                    r += 1;
                                    row[r - 1].1
                                } else {
                                    fill += 1;
                                    0.0
                                };
                                q += 1;
                                if j == i {
                                    continue;
                                }
                                val -= ai * aj / d;
                                buf.push((j, val));
                            }
                        }
                        std::mem::swap(&mut act.rows[i], &mut buf);
                    }
                    w
                }
                Pivot::Two { idx: [k0, m0], inv } => {
                    let det_sign = 1.0 / (inv[0][0] * inv[1][1] - inv[0][1] * inv[1][0]);
                    if det_sign < 0.0 {
                        inertia.positive += 1;
                        inertia.negative += 1;
                    } else if inv[0][0] + inv[1][1] > 0.0 {
                        inertia.positive += 2;
                    } else {
                        inertia.negative += 2;
                    }
                    two_by_two += 1;
                    done += 2;
                    act.eliminated[k0] = true;
                    act.eliminated[m0] = true;
                    let rk = std::mem::take(&mut act.rows[k0]);
                    let rm = std::mem::take(&mut act.rows[m0]);
                    // union of neighbours with columns c_j = (a_jk, a_jm)
                    let mut nb: Vec<(usize, [f64; 2])> = Vec::with_capacity(rk.len() + rm.len());
                    let (mut a, mut b) = (0usize, 0usize);
                    while a < rk.len() || b < rm.len() {
                        let ca = rk.get(a).map_or(usize::MAX, |e| e.0);
                        let cb = rm.get(b).map_or(usize::MAX, |e| e.0);
                        let (j, c) = if ca < cb {
                            a += 1;
                            (ca, [rk[a - 1].1, 0.0])
                        } else if cb < ca {
                            b += 1;
                            (cb, [0.0, rm[b - 1].1])
                        } else {
                            a += 1;
                            b += 1;
                            (ca, [rk[a - 1].1, rm[b - 1].1])
                        };
                        if j != k0 && j != m0 {
                            nb.push((j, c));
                        }
                    }
                    let w: Vec<(usize, [f64; 2])> = nb
                        .iter()
                        .map(|&(j, c)| {
                            (
                                j,
                                [
                                    inv[0][0] * c[0] + inv[0][1] * c[1],
                                    inv[1][0] * c[0] + inv[1][1] * c[1],
                                ],
                            )
                        })
                        .collect();
                    for (pos, &(i, ci)) in nb.iter().enumerate() {
                        let wi = w[pos].1;
                        act.diag[i] -= ci[0] * wi[0] + ci[1] * wi[1];
                        buf.clear();
                        let row = &act.rows[i];
                        let (mut r, mut q) = (0usize, 0usize);
                        while r < row.len() || q < nb.len() {
                            let rc = row.get(r).map_or(usize::MAX, |e| e.0);
                            let qc = nb.get(q).map_or(usize::MAX, |e| e.0);
                            if rc < qc {
                                if rc != k0 && rc != m0 {
                                    buf.push(row[r]);
                                }
                                r += 1;
                            } else {
                                let (j, cj) = nb[q];
                                let mut val = if rc == qc {
                                    r += 1;
                                    row[r - 1].1
                                } else {
                                    fill += 1;
                                    0.0
                                };
                                q += 1;
                                if j == i {
                                    continue;
                                }
                                let upd = if i < j {
                                    ci[0] * w[q - 1].1[0] + ci[1] * w[q - 1].1[1]
                                } else {
                                    cj[0] * wi[0] + cj[1] * wi[1]
                                };
                                val -= upd;
                                buf.push((j, val));
                            }
                        }
                        std::mem::swap(&mut act.rows[i], &mut buf);
                    }
                    w
                }
            };
            for &(i, _) in &lower {
                heap.push(Reverse((
                    prio(i, &delays),
                    act.rows[i].len() as u32,
                    i as u32,
                )));
            }
            steps.push(Step { pivot, lower });
        }

        debug_assert_eq!(done, n);
        Ok(Self {
            n,
            scale,
            steps,
            matrix: matrix.clone(),
            inertia,
            two_by_two,
            fill,
            opts,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn inertia(&self) -> Inertia {
        self.inertia
    }

    pub fn two_by_two_pivots(&self) -> usize {
        self.two_by_two
    }

    /// Number of entries of L.
    pub fn factor_nnz(&self) -> usize {
        self.steps
            .iter()
            .map(|s| match s.pivot {
                Pivot::One { .. } => s.lower.len(),
                Pivot::Two { .. } => 2 * s.lower.len(),
            })
            .sum()
    }

    pub fn fill_in(&self) -> usize {
        self.fill
    }

    fn solve_raw(&self, b: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = b.iter().zip(&self.scale).map(|(v, s)| v * s).collect();
        for step in &self.steps {
            match step.pivot {
                Pivot::One { idx, .. } => {
                    let yk = y[idx];
                    if yk != 0.0 {
                        for &(i, l) in &step.lower {
                            y[i] -= l[0] * yk;
                        }
                    }
                }
                Pivot::Two { idx: [k, m], .. } => {
                    let (yk, ym) = (y[k], y[m]);
                    for &(i, l) in &step.lower {
                        y[i] -= l[0] * yk + l[1] * ym;
                    }
                }
            }
        }
        for step in &self.steps {
            match step.pivot {
                Pivot::One { idx, d } => y[idx] /= d,
                Pivot::Two { idx: [k, m], inv } => {
                    let (yk, ym) = (y[k], y[m]);
                    y[k] = inv[0][0] * yk + inv[0][1] * ym;
                    y[m] = inv[1][0] * yk + inv[1][1] * ym;
                }
            }
        }
        for step in self.steps.iter().rev() {
            match step.pivot {
                Pivot::One { idx, .. } => {
                    let s: f64 = step.lower.iter().map(|&(i, l)| l[0] * y[i]).sum();
                    y[idx] -= s;
                }
                Pivot::Two { idx: [k, m], .. } => {
                    let (mut sk, mut sm) = (0.0, 0.0);
                    for &(i, l) in &step.lower {
                        sk += l[0] * y[i];
                        sm += l[1] * y[i];
                    }
                    y[k] -= sk;
                    y[m] -= sm;
                }
            }
        }
        for (v, s) in y.iter_mut().zip(&self.scale) {
            *v *= s;
        }
        y
    }

    /// Solves `M x = b`, refining while the relative residual exceeds the
    /// configured tolerance and keeps decreasing (at most three steps).
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return vec![0.0; self.n];
        }
        let mut x = self.solve_raw(b);
        let mut r = self.residual(&x, b);
        let mut rnorm = norm2(&r);
        for _ in 0..3 {
            if rnorm <= self.opts.refine_tol * bnorm {
                break;
            }
            let dx = self.solve_raw(&r);
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            let tr = self.residual(&trial, b);
            let tn = norm2(&tr);
            if !(tn < rnorm) {
                break;
            }
            x = trial;
            r = tr;
            rnorm = tn;
        }
        x
    }

    pub fn solve_many(&self, rhs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rhs.iter().map(|b| self.solve(b)).collect()
    }

    /// ‖M x − b‖₂ / ‖b‖₂ for a computed solution.
    pub fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let r = self.residual(x, b);
        let bn = norm2(b);
        if bn == 0.0 {
            norm2(&r)
        } else {
            norm2(&r) / bn
        }
    }

    /// Normwise backward error ‖M x − b‖∞ / (‖M‖∞ ‖x‖∞ + ‖b‖∞).
    pub fn backward_error(&self, x: &[f64], b: &[f64]) -> f64 {
        let r = self.residual(x, b);
        let denom = self.matrix.norm_inf() * norm_inf(x) + norm_inf(b);
        if denom == 0.0 {
            0.0
        } else {
            norm_inf(&r) / denom
        }
    }

    fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let mx = self.matrix.mul_vec(x);
        b.iter().zip(&mx).map(|(bi, mi)| bi - mi).collect()
    }
}
