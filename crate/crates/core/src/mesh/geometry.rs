use super::Point;

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot3(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn det(g: &[[f64; 3]; 3], d: usize) -> f64 {
    match d {
        1 => g[0][0],
        2 => g[0][0] * g[1][1] - g[0][1] * g[1][0],
        3 => {
            g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
                - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
        }
        _ => 1.0,
    }
}

/// d-dimensional measure of the simplex spanned by `d+1` points embedded in
/// 3D. A single point has measure 1 (the "area" of a 0D face).
pub fn simplex_measure(pts: &[Point]) -> f64 {
    let d = pts.len() - 1;
    if d == 0 {
        return 1.0;
    }
    let edges: Vec<Point> = pts[1..].iter().map(|&p| sub(p, pts[0])).collect();
    let mut g = [[0.0; 3]; 3];
    for i in 0..d {
        for j in 0..d {
            g[i][j] = dot3(edges[i], edges[j]);
        }
    }
    let fact = [1.0, 1.0, 2.0, 6.0][d];
    det(&g, d).max(0.0).sqrt() / fact
}

pub(crate) fn diameter(pts: &[Point]) -> f64 {
    let mut m = 0.0f64;
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            let e = sub(a, b);
            m = m.max(dot3(e, e).sqrt());
        }
    }
    m
}

fn orthonormalize(vs: impl IntoIterator<Item = Point>, tol: f64, max: usize) -> Vec<Point> {
    let mut basis: Vec<Point> = Vec::new();
    for mut v in vs {
        if basis.len() == max {
            break;
        }
        let scale = dot3(v, v).sqrt();
        for q in &basis {
            let c = dot3(*q, v);
            for k in 0..3 {
                v[k] -= c * q[k];
            }
        }
        let n = dot3(v, v).sqrt();
        if n > tol * scale.max(f64::MIN_POSITIVE) {
            basis.push(v.map(|x| x / n));
        }
    }
    basis
}

/// Orthonormal frame of the tangent space of a simplex in which its
/// conductivity tensor is expressed: the global axes x, y, z projected onto
/// the tangent space and orthonormalized in that order.
pub fn local_frame(pts: &[Point]) -> Vec<Point> {
    let d = pts.len() - 1;
    let tangent = orthonormalize(pts[1..].iter().map(|&p| sub(p, pts[0])), 1e-10, d);
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let projected = axes.iter().map(|&a| {
        let mut p = [0.0; 3];
        for q in &tangent {
            let c = dot3(*q, a);
            for k in 0..3 {
                p[k] += c * q[k];
            }
        }
        p
    });
    // a projected axis shorter than this is treated as normal to the element
    orthonormalize(projected, 1e-6, d)
}
