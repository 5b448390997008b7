//! Incremental convex hull in `R^3`, used for point sets on `S^2` that do not
//! fit in any closed hemisphere.

use crate::linalg::{self, Point};
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[derive(Clone, Copy)]
struct Face {
    v: [usize; 3],
    normal: [f64; 3],
    offset: f64,
    alive: bool,
}

fn make_face(pts: &[Point], a: usize, b: usize, c: usize) -> Face {
    let n = cross(&linalg::sub(&pts[b], &pts[a]), &linalg::sub(&pts[c], &pts[a]));
    let len = linalg::norm(&n);
    let normal = [n[0] / len, n[1] / len, n[2] / len];
    Face { v: [a, b, c], normal, offset: linalg::dot(&normal, &pts[a]), alive: true }
}

/// Outward unit normals and plane offsets `(n, h)` with `n . x <= h` on the hull.
/// `None` if all points are (numerically) coplanar.
pub(crate) fn hull_planes(pts: &[Point], eps: f64) -> Option<Vec<([f64; 3], f64)>> {
    let n = pts.len();
    if n < 4 {
        return None;
    }
    // initial tetrahedron
    let i0 = 0;
    let i1 = (1..n).max_by(|&a, &b| {
        linalg::dist(&pts[a], &pts[i0]).partial_cmp(&linalg::dist(&pts[b], &pts[i0])).unwrap()
    })?;
    let line = linalg::sub(&pts[i1], &pts[i0]);
    let i2 = (0..n).max_by(|&a, &b| {
        let da = linalg::norm(&cross(&line, &linalg::sub(&pts[a], &pts[i0])));
        let db = linalg::norm(&cross(&line, &linalg::sub(&pts[b], &pts[i0])));
        da.partial_cmp(&db).unwrap()
    })?;
    if linalg::norm(&cross(&line, &linalg::sub(&pts[i2], &pts[i0]))) <= eps {
        return None;
    }
    let base = make_face(pts, i0, i1, i2);
    let i3 = (0..n).max_by(|&a, &b| {
        let da = (linalg::dot(&base.normal, &pts[a]) - base.offset).abs();
        let db = (linalg::dot(&base.normal, &pts[b]) - base.offset).abs();
        da.partial_cmp(&db).unwrap()
    })?;
    if (linalg::dot(&base.normal, &pts[i3]) - base.offset).abs() <= eps {
        return None;
    }
    let centroid: Point = (0..3).map(|k| (pts[i0][k] + pts[i1][k] + pts[i2][k] + pts[i3][k]) / 4.0).collect();
    let mut faces: Vec<Face> = Vec::new();
    let mut edge_owner: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let push = |faces: &mut Vec<Face>, edge_owner: &mut BTreeMap<(usize, usize), usize>, a, b, c| {
        let mut f = make_face(pts, a, b, c);
        if linalg::dot(&f.normal, &centroid) > f.offset {
            f = make_face(pts, a, c, b);
        }
        let id = faces.len();
        let [x, y, z] = f.v;
        edge_owner.insert((x, y), id);
        edge_owner.insert((y, z), id);
        edge_owner.insert((z, x), id);
        faces.push(f);
    };
    for (a, b, c) in [(i0, i1, i2), (i0, i1, i3), (i0, i2, i3), (i1, i2, i3)] {
        push(&mut faces, &mut edge_owner, a, b, c);
    }
    for p in 0..n {
        if [i0, i1, i2, i3].contains(&p) {
            continue;
        }
        let visible: Vec<usize> = (0..faces.len())
            .filter(|&f| faces[f].alive && linalg::dot(&faces[f].normal, &pts[p]) - faces[f].offset > eps)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut horizon = Vec::new();
        for &f in &visible {
            let [x, y, z] = faces[f].v;
            for (a, b) in [(x, y), (y, z), (z, x)] {
                let twin = edge_owner.get(&(b, a)).copied();
                if let Some(t) = twin {
                    if !visible.contains(&t) {
                        horizon.push((a, b));
                    }
                }
            }
        }
        for &f in &visible {
            faces[f].alive = false;
            let [x, y, z] = faces[f].v;
            for e in [(x, y), (y, z), (z, x)] {
                if edge_owner.get(&e) == Some(&f) {
                    edge_owner.remove(&e);
                }
            }
        }
        for (a, b) in horizon {
            let f = make_face(pts, a, b, p);
            let id = faces.len();
            edge_owner.insert((a, b), id);
            edge_owner.insert((b, p), id);
            edge_owner.insert((p, a), id);
            faces.push(f);
        }
    }
    Some(faces.iter().filter(|f| f.alive).map(|f| (f.normal, f.offset)).collect())
}
