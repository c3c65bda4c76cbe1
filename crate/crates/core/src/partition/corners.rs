use super::{GlobKind, InterfaceLayout};
use crate::mesh::Point;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CornerMode {
    /// Single-dof globs plus up to three well-spread dofs per face.
    #[default]
    On,
    /// No corners at all.
    Off,
    /// Every interface dof is a corner.
    All,
}

fn dist2(a: Point, b: Point) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

/// Squared distance from `p` to the line through `a` and `b`.
fn line_dist2(p: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [p[0] - a[0], p[1] - a[1], p[2] - a[2]];
    let dd: f64 = d.iter().map(|x| x * x).sum();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    if dd == 0.0 {
        return vv;
    }
    let vd: f64 = (0..3).map(|k| v[k] * d[k]).sum();
    (vv - vd * vd / dd).max(0.0)
}

/// Dof maximizing `score`, lowest index on ties, skipping `taken`.
fn argmax(dofs: &[usize], taken: &[usize], score: impl Fn(usize) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &d in dofs {
        if taken.contains(&d) {
            continue;
        }
        let s = score(d);
        if best.map_or(true, |(_, b)| s > b) {
            best = Some((d, s));
        }
    }
    best.map(|b| b.0)
}

/// Up to three corners of one face: farthest from the centroid, farthest
/// from the first, farthest from the line through the first two.
pub(crate) fn face_corners(dofs: &[usize], coord: impl Fn(usize) -> Point) -> Vec<usize> {
    let n = dofs.len() as f64;
    let mut c = [0.0; 3];
    for &d in dofs {
        let p = coord(d);
        for k in 0..3 {
            c[k] += p[k] / n;
        }
    }
    let mut out = Vec::with_capacity(3);
    if let Some(c1) = argmax(dofs, &out, |d| dist2(coord(d), c)) {
        out.push(c1);
    }
    if let Some(c2) = argmax(dofs, &out, |d| dist2(coord(d), coord(out[0]))) {
        out.push(c2);
    }
    if out.len() == 2 {
        let (a, b) = (coord(out[0]), coord(out[1]));
        if let Some(c3) = argmax(dofs, &out, |d| line_dist2(coord(d), a, b)) {
            out.push(c3);
        }
    }
    out
}

/// Selected corner dofs as ascending interface indices.
pub fn select_corners(layout: &InterfaceLayout, mode: CornerMode) -> Vec<usize> {
    let mut corners = match mode {
        CornerMode::Off => Vec::new(),
        CornerMode::All => (0..layout.n_interface()).collect(),
        CornerMode::On => {
            let mut v = Vec::new();
            for glob in layout.globs() {
                match glob.kind {
                    GlobKind::Vertex => v.extend_from_slice(&glob.dofs),
                    GlobKind::Face => v.extend(face_corners(&glob.dofs, |d| layout.coord(d))),
                    GlobKind::Edge => {}
                }
            }
            v
        }
    };
    corners.sort_unstable();
    corners
}
