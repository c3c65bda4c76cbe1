//! Lowest-order Raviart-Thomas element on a d-simplex embedded in 3D.
//!
//! Basis `w_j(x) = (x − x_j) / (d |T|)`, where `x_j` is the vertex opposite
//! face `j`. Its total outward flux is 1 through face `j` and 0 through the
//! others, and its divergence is `1/|T|`.

use crate::error::{Error, Result};
use crate::mesh::{local_frame, Mesh, Point};

/// Element matrix and gravity load of one element.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalRt0 {
    pub dim: usize,
    /// Row-major `(d+1) × (d+1)`, exactly symmetric.
    pub a: Vec<f64>,
    /// `−∫_T (w_j)_z dx`.
    pub gravity: Vec<f64>,
    pub measure: f64,
}

impl LocalRt0 {
    pub fn n(&self) -> usize {
        self.dim + 1
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n() + j]
    }
}

/// Global-coordinate representation `F k⁻¹ Fᵀ` of the inverse conductivity.
pub(crate) fn inverse_conductivity_3d(mesh: &Mesh, e: usize) -> [[f64; 3]; 3] {
    let el = &mesh.elements()[e];
    let frame = local_frame(&mesh.element_points(e));
    let kinv = el.conductivity.inverse();
    let d = el.dim;
    let mut m = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let mut s = 0.0;
            for a in 0..d {
                for b in 0..d {
                    s += frame[a][r] * kinv[a][b] * frame[b][c];
                }
            }
            m[r][c] = s;
        }
    }
    m
}

fn quad(m: &[[f64; 3]; 3], u: Point, v: Point) -> f64 {
    let mut s = 0.0;
    for r in 0..3 {
        for c in 0..3 {
            s += u[r] * m[r][c] * v[c];
        }
    }
    s
}

pub fn rt0_local(mesh: &Mesh, e: usize) -> Result<LocalRt0> {
    let el = &mesh.elements()[e];
    let pts = mesh.element_points(e);
    let d = el.dim;
    let n = d + 1;
    let measure = mesh.element_measure(e);
    if !(measure > 0.0) {
        return Err(Error::DegenerateElement {
            element: e,
            measure,
        });
    }
    let m = inverse_conductivity_3d(mesh, e);
    let b = mesh.element_centroid(e);
    let centered: Vec<Point> = pts
        .iter()
        .map(|p| [p[0] - b[0], p[1] - b[1], p[2] - b[2]])
        .collect();
    // ∫ (x−b)ᵀ M (x−b) dx = |T| / ((d+1)(d+2)) Σ_k v_kᵀ M v_k
    let second: f64 =
        centered.iter().map(|&v| quad(&m, v, v)).sum::<f64>() * measure / ((n * (n + 1)) as f64);
    let scale = 1.0 / (el.cross_section * (d as f64 * measure).powi(2));
    let offsets: Vec<Point> = centered.iter().map(|v| v.map(|c| -c)).collect();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = (second + measure * quad(&m, offsets[i], offsets[j])) * scale;
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    let gravity = offsets.iter().map(|o| -o[2] / d as f64).collect();
    Ok(LocalRt0 {
        dim: d,
        a,
        gravity,
        measure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryKind, Conductivity, Element};
    use std::collections::BTreeMap;

    fn single(nodes: Vec<Point>, k: Conductivity, delta: f64) -> Mesh {
        let dim = nodes.len() - 1;
        let mut e = Element::new(dim, (0..=dim).collect(), k);
        e.cross_section = delta;
        let bc: BTreeMap<Vec<usize>, BoundaryKind> = BTreeMap::new();
        Mesh::new(nodes, vec![e], bc, false).unwrap()
    }

    /// Strang-Fix / Dunavant 7-point rule, exact to degree 5 on the
    /// reference triangle (weights sum to 1, scaled by the area).
    fn seven_point() -> Vec<([f64; 2], f64)> {
        let a1 = 0.059_715_871_789_770;
        let b1 = 0.470_142_064_105_115;
        let a2 = 0.797_426_985_353_087;
        let b2 = 0.101_286_507_323_456;
        let w1 = 0.132_394_152_788_506;
        let w2 = 0.125_939_180_544_827;
        let mut q = vec![([1.0 / 3.0, 1.0 / 3.0], 0.225)];
        for (a, b, w) in [(a1, b1, w1), (a2, b2, w2)] {
            q.push(([a, b], w));
            q.push(([b, a], w));
            q.push(([b, b], w));
        }
        q
    }

    fn basis(pts: &[Point], measure: f64, j: usize, x: Point) -> Point {
        let d = (pts.len() - 1) as f64;
        [0, 1, 2].map(|c| (x[c] - pts[j][c]) / (d * measure))
    }

    #[test]
    fn triangle_matches_quadrature() {
        let pts = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let k = Conductivity::new(2, vec![2.0, 0.3, 0.3, 0.7]).unwrap();
        let m = single(pts.clone(), k.clone(), 0.25);
        let loc = rt0_local(&m, 0).unwrap();
        let kinv = k.inverse();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for (xi, w) in seven_point() {
                    let lam = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
                    let mut x = [0.0; 3];
                    for (l, p) in lam.iter().zip(&pts) {
                        for c in 0..3 {
                            x[c] += l * p[c];
                        }
                    }
                    let wi = basis(&pts, 0.5, i, x);
                    let wj = basis(&pts, 0.5, j, x);
                    let mut q = 0.0;
                    for r in 0..2 {
                        for c in 0..2 {
                            q += wi[r] * kinv[r][c] * wj[c];
                        }
                    }
                    s += w * 0.5 * q / 0.25;
                }
                assert!(
                    (loc.at(i, j) - s).abs() < 1e-12,
                    "{i} {j}: {} vs {s}",
                    loc.at(i, j)
                );
            }
        }
    }

    #[test]
    fn tetrahedron_matches_quadrature() {
        let pts = vec![
            [0.1, 0.0, 0.2],
            [1.0, 0.2, 0.0],
            [0.0, 1.1, 0.3],
            [0.2, 0.3, 0.9],
        ];
        let m = single(pts.clone(), Conductivity::isotropic(3, 3.0), 1.0);
        let loc = rt0_local(&m, 0).unwrap();
        let vol = m.element_measure(0);
        // 4-point rule, exact for quadratics
        let (a, b) = (0.585_410_196_624_968_5, 0.138_196_601_125_010_5);
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for q in 0..4 {
                    let mut x = [0.0; 3];
                    for (k, p) in pts.iter().enumerate() {
                        let l = if k == q { a } else { b };
                        for c in 0..3 {
                            x[c] += l * p[c];
                        }
                    }
                    let wi = basis(&pts, vol, i, x);
                    let wj = basis(&pts, vol, j, x);
                    s += 0.25 * vol * (wi[0] * wj[0] + wi[1] * wj[1] + wi[2] * wj[2]) / 3.0;
                }
                assert!((loc.at(i, j) - s).abs() < 1e-12 * s.abs().max(1.0));
            }
        }
    }

    #[test]
    fn embedded_triangle_equals_planar_one() {
        // the same triangle rotated into the plane x = 0.5
        let flat = single(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            Conductivity::isotropic(2, 2.0),
            1.0,
        );
        let tilted = single(
            vec![[0.5, 0.0, 0.0], [0.5, 1.0, 0.0], [0.5, 0.0, 1.0]],
            Conductivity::isotropic(2, 2.0),
            1.0,
        );
        let a = rt0_local(&flat, 0).unwrap();
        let b = rt0_local(&tilted, 0).unwrap();
        for (x, y) in a.a.iter().zip(&b.a) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn scaling_with_conductivity_and_cross_section() {
        let pts = vec![[0.0, 0.0, 0.0], [2.0, 0.5, 0.0], [0.3, 1.0, 0.0]];
        let base = rt0_local(
            &single(pts.clone(), Conductivity::isotropic(2, 1.0), 1.0),
            0,
        )
        .unwrap();
        let scaled = rt0_local(
            &single(pts.clone(), Conductivity::isotropic(2, 4.0), 1.0),
            0,
        )
        .unwrap();
        let thick = rt0_local(&single(pts, Conductivity::isotropic(2, 1.0), 0.5), 0).unwrap();
        for i in 0..9 {
            assert!((scaled.a[i] - base.a[i] / 4.0).abs() < 1e-14);
            assert!((thick.a[i] - base.a[i] * 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn segment_closed_form() {
        // on [0, L]: w_0 = z/L, w_1 = (z − L)/L, so ∫ w_0 w_0 = L/3 and ∫ w_0 w_1 = −L/6
        let l = 2.0;
        let m = single(
            vec![[0.0, 0.0, 0.0], [0.0, 0.0, l]],
            Conductivity::isotropic(1, 1.0),
            1.0,
        );
        let loc = rt0_local(&m, 0).unwrap();
        assert!((loc.at(0, 0) - l / 3.0).abs() < 1e-14);
        assert!((loc.at(0, 1) + l / 6.0).abs() < 1e-14);
        // −∫ (w_0)_z = −∫ z/L dz
        assert!((loc.gravity[0] + l / 2.0).abs() < 1e-14);
        assert!((loc.gravity[1] - l / 2.0).abs() < 1e-14);
    }
}
