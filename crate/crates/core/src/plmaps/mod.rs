//! Piecewise-linear maps out of triangulated model spaces.
//!
//! A map is given by one image per source vertex and is affine on every source
//! simplex. Targets are either `R^m` or a triangulated polyhedron realized in
//! some `R^d`. Sphere complexes used as targets are read radially: a source
//! point goes to the normalization of its ambient image, which is how the round
//! sphere is meant when such a complex is the target.

mod fiber;
mod index;

pub use fiber::{
    fiber, fiber_length, fiber_perturbed, fiber_vertices, mod2_degree, multiplicity, random_target, Fiber,
    FiberComponent, FiberLength, FiberPoint,
};
pub(crate) use fiber::fiber_with_tol;
pub use fiber::{GENERIC_TOL, PERTURBATION};
pub(crate) use index::{bbox, BoxIndex};

use crate::complexes::SimplicialComplex;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Point};
use crate::metrics::{torus_delta, wrap01, ModelSpace};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// `R^m`.
    Euclidean(usize),
    /// A polyhedron, evaluated in the ambient coordinates of its vertices.
    Complex(SimplicialComplex),
}

impl Target {
    pub fn dim(&self) -> usize {
        match self {
            Target::Euclidean(m) => *m,
            Target::Complex(k) => k.dim(),
        }
    }

    /// Coordinate count of target points.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Target::Euclidean(m) => *m,
            Target::Complex(k) => k.space().ambient_dim(),
        }
    }

    /// Whether images are read radially (round sphere targets).
    pub fn is_radial(&self) -> bool {
        matches!(self, Target::Complex(k) if matches!(k.space(), ModelSpace::RoundSphere(_)))
    }

    pub fn is_closed_manifold(&self) -> bool {
        matches!(self, Target::Complex(k) if k.is_closed_manifold())
    }

    pub fn tag(&self) -> String {
        match self {
            Target::Euclidean(m) => format!("R^{m}"),
            Target::Complex(k) => format!("complex:{}:{}", k.space().tag(), k.dim()),
        }
    }
}

/// Distance from `y` to the convex hull of `pts`.
pub(crate) fn hull_distance(pts: &[&[f64]], y: &[f64]) -> f64 {
    let base = pts[0];
    if pts.len() == 1 {
        return linalg::dist(base, y);
    }
    let d = y.len();
    let k = pts.len() - 1;
    let mut a = Matrix::zeros(d, k);
    for j in 0..k {
        for i in 0..d {
            a.set(i, j, pts[j + 1][i] - base[i]);
        }
    }
    let rhs = linalg::sub(y, base);
    let ls = linalg::least_squares(&a, &rhs, 1e-12);
    if ls.full_rank {
        let l0 = 1.0 - ls.x.iter().sum::<f64>();
        if l0 >= 0.0 && ls.x.iter().all(|v| *v >= 0.0) {
            return ls.residual;
        }
    }
    let mut best = f64::INFINITY;
    for skip in 0..pts.len() {
        let sub: Vec<&[f64]> = pts.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, p)| *p).collect();
        best = best.min(hull_distance(&sub, y));
    }
    best
}

#[derive(Debug, Clone)]
pub struct PLMap {
    source: SimplicialComplex,
    target: Target,
    images: Vec<Point>,
    /// Per top simplex: `image = images[s[0]] + jac * alpha`, where `alpha`
    /// are the barycentric weights of `s[1..]`.
    jacobians: Vec<Matrix>,
    non_simplicial: bool,
    locator: BoxIndex,
    /// Per dimension `k`: index over image boxes of `k`-faces.
    image_index: Vec<BoxIndex>,
    /// Per dimension `k`: the largest top-simplex diameter among cofaces of each `k`-face.
    pub(crate) star_diameter: Vec<Vec<f64>>,
    /// For each codimension-one face, the top simplices containing it.
    pub(crate) facet_cofaces: Vec<Vec<usize>>,
}

fn image_ok(target: &Target, p: &[f64]) -> core::result::Result<(), String> {
    if p.len() != target.ambient_dim() {
        return Err(format!("expected {} coordinates, got {}", target.ambient_dim(), p.len()));
    }
    if p.iter().any(|x| !x.is_finite()) {
        return Err("non-finite coordinate".into());
    }
    if let Target::Complex(k) = target {
        if target.is_radial() && (linalg::norm(p) - 1.0).abs() <= 1e-9 {
            return Ok(());
        }
        let on = k.top().iter().any(|s| {
            let pts: Vec<&[f64]> = s.iter().map(|&v| k.vertices()[v].as_slice()).collect();
            hull_distance(&pts, p) <= 1e-9
        });
        if !on {
            return Err("point is not on the target polyhedron".into());
        }
    }
    Ok(())
}

/// Validated PL map.
pub fn make_pl_map(source: SimplicialComplex, target: Target, images: Vec<Point>) -> Result<PLMap> {
    if images.len() != source.vertices().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} images for {} source vertices",
            images.len(),
            source.vertices().len()
        )));
    }
    if let Target::Complex(k) = &target {
        if k.space() == ModelSpace::FlatTorus {
            return Err(Error::PreconditionViolated("flat torus targets are not supported".into()));
        }
    }
    for (i, p) in images.iter().enumerate() {
        image_ok(&target, p).map_err(|reason| Error::InvalidImage { vertex: i, reason })?;
    }
    let n = source.dim();
    let d = target.ambient_dim();
    let mut jacobians = Vec::with_capacity(source.top().len());
    for s in source.top() {
        let mut j = Matrix::zeros(d, n);
        for c in 0..n {
            for r in 0..d {
                j.set(r, c, images[s[c + 1]][r] - images[s[0]][r]);
            }
        }
        jacobians.push(j);
    }
    let non_simplicial = match &target {
        Target::Euclidean(_) => false,
        Target::Complex(k) => source.simplices(n).iter().any(|s| {
            !k.top().iter().any(|t| {
                let tp: Vec<&[f64]> = t.iter().map(|&v| k.vertices()[v].as_slice()).collect();
                s.iter().all(|&v| hull_distance(&tp, &images[v]) <= 1e-9)
            })
        }),
    };
    let sphere_source = matches!(source.space(), ModelSpace::RoundSphere(_));
    let boxes: Vec<_> = source
        .top()
        .iter()
        .map(|s| {
            let pts = source.simplex_points(s);
            // spherical simplices bulge outside the box of their corners
            let (a, b) = bbox(&pts, 0.0);
            let diag = linalg::dist(&a, &b);
            let pad = if sphere_source { diag * diag / 2.0 + 1e-9 } else { 1e-9 };
            bbox(&pts, pad)
        })
        .collect();
    let locator = BoxIndex::new(boxes);
    let radial = target.is_radial();
    let image_index = (0..=n)
        .map(|k| {
            let boxes = source
                .simplices(k)
                .iter()
                .map(|s| {
                    let pts: Vec<Point> = s.iter().map(|&v| images[v].clone()).collect();
                    if radial {
                        radial_box(&pts)
                    } else {
                        bbox(&pts, 1e-8)
                    }
                })
                .collect();
            BoxIndex::new(boxes)
        })
        .collect();
    let space = source.space();
    let top_diam: Vec<f64> = source
        .top()
        .iter()
        .map(|s| {
            let pts: Vec<Point> = s.iter().map(|&v| space.project(&source.vertices()[v])).collect();
            space.diameter_unchecked(&pts)
        })
        .collect();
    let mut star_diameter = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let idx = source.index_of(k);
        let mut out = alloc::vec![0.0f64; source.count(k)];
        for (t, s) in source.top().iter().enumerate() {
            for mask in 1u32..(1 << s.len()) {
                if mask.count_ones() as usize != k + 1 {
                    continue;
                }
                let face: Vec<usize> = (0..s.len()).filter(|i| mask & (1 << i) != 0).map(|i| s[i]).collect();
                let f = idx[&face];
                out[f] = out[f].max(top_diam[t]);
            }
        }
        star_diameter.push(out);
    }
    let facet_cofaces = if n > 0 { source.cofaces(n) } else { Vec::new() };
    Ok(PLMap { source, target, images, jacobians, non_simplicial, locator, image_index, star_diameter, facet_cofaces })
}

/// Box around the radial images of a simplex: the normalized corners padded
/// by the bulge of the spherical simplex they span. Degenerate (through the
/// origin) simplices get the whole cube.
fn radial_box(pts: &[Point]) -> (Vec<f64>, Vec<f64>) {
    let units: Option<Vec<Point>> = pts.iter().map(|p| linalg::normalize(p)).collect();
    let d = pts[0].len();
    match units {
        Some(u) => {
            let (a, b) = bbox(&u, 0.0);
            let diag = linalg::dist(&a, &b);
            if diag > 1.0 {
                return (alloc::vec![-1.0 - 1e-8; d], alloc::vec![1.0 + 1e-8; d]);
            }
            bbox(&u, diag * diag / 2.0 + 1e-8)
        }
        None => (alloc::vec![-1.0 - 1e-8; d], alloc::vec![1.0 + 1e-8; d]),
    }
}

impl PLMap {
    pub fn source(&self) -> &SimplicialComplex {
        &self.source
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn images(&self) -> &[Point] {
        &self.images
    }

    pub fn codim(&self) -> i64 {
        self.source.dim() as i64 - self.target.dim() as i64
    }

    /// Set when a source simplex's image is not inside a single target simplex.
    pub fn is_non_simplicial(&self) -> bool {
        self.non_simplicial
    }

    /// Affine part of the map on top simplex `i`.
    pub fn jacobian(&self, i: usize) -> &Matrix {
        &self.jacobians[i]
    }

    pub(crate) fn image_index(&self, k: usize) -> &BoxIndex {
        &self.image_index[k]
    }

    /// Top simplex containing `x` and the barycentric weights of `x` in it.
    /// On spheres the weights are those of the point of the flat simplex on
    /// the ray through `x`.
    pub fn locate(&self, x: &[f64]) -> Result<(usize, Vec<f64>)> {
        let space = self.source.space();
        space.validate(x, 1e-9)?;
        let x = space.project(x);
        let queries: Vec<Point> = match space {
            ModelSpace::FlatTorus => {
                let mut q = Vec::new();
                for a in [0.0, -1.0, 1.0] {
                    for b in [0.0, -1.0, 1.0] {
                        q.push(alloc::vec![x[0] + a, x[1] + b]);
                    }
                }
                q
            }
            _ => alloc::vec![x.clone()],
        };
        let mut best: Option<(usize, Vec<f64>, f64)> = None;
        for q in &queries {
            for t in self.locator.query(q) {
                let lam = self.barycentric(t, &x);
                let m = lam.iter().cloned().fold(f64::INFINITY, f64::min);
                if best.as_ref().is_none_or(|b| m > b.2) {
                    best = Some((t, lam, m));
                }
                if m >= 0.0 {
                    break;
                }
            }
            if best.as_ref().is_some_and(|b| b.2 >= 0.0) {
                break;
            }
        }
        match best {
            Some((t, lam, m)) if m >= -1e-9 => Ok((t, lam)),
            _ => {
                // mesh approximates a curved domain; fall back to the
                // nearest simplex at a vertex
                let v = (0..self.source.vertices().len())
                    .min_by(|&a, &b| {
                        let da = space.distance_unchecked(&self.source.vertices()[a], &x);
                        let db = space.distance_unchecked(&self.source.vertices()[b], &x);
                        da.partial_cmp(&db).unwrap()
                    })
                    .ok_or(Error::EmptySet)?;
                let dist = space.distance_unchecked(&self.source.vertices()[v], &x);
                if dist > self.source.mesh_scale() + 1e-9 {
                    return Err(Error::InvalidPoint { offset: dist });
                }
                let (t, pos) = self
                    .source
                    .top()
                    .iter()
                    .enumerate()
                    .find_map(|(t, s)| s.iter().position(|&u| u == v).map(|p| (t, p)))
                    .ok_or(Error::EmptySet)?;
                let mut lam = alloc::vec![0.0; self.source.dim() + 1];
                lam[pos] = 1.0;
                Ok((t, lam))
            }
        }
    }

    fn barycentric(&self, t: usize, x: &[f64]) -> Vec<f64> {
        let s = &self.source.top()[t];
        let pts = self.source.simplex_points(s);
        let n = self.source.dim();
        match self.source.space() {
            ModelSpace::RoundSphere(_) => {
                let mut a = Matrix::zeros(n + 1, n + 1);
                for (c, p) in pts.iter().enumerate() {
                    for r in 0..=n {
                        a.set(r, c, p[r]);
                    }
                }
                match linalg::solve_square(&a, x) {
                    Some(mu) => {
                        let sum: f64 = mu.iter().sum();
                        if sum <= 0.0 {
                            return alloc::vec![-1.0; n + 1];
                        }
                        mu.iter().map(|m| m / sum).collect()
                    }
                    None => alloc::vec![-1.0; n + 1],
                }
            }
            space => {
                let target = match space {
                    ModelSpace::FlatTorus => linalg::add(&pts[0], &torus_delta(x, &pts[0])),
                    _ => x.to_vec(),
                };
                let mut a = Matrix::zeros(target.len(), n);
                for c in 0..n {
                    for r in 0..target.len() {
                        a.set(r, c, pts[c + 1][r] - pts[0][r]);
                    }
                }
                let ls = linalg::least_squares(&a, &linalg::sub(&target, &pts[0]), 1e-14);
                let mut lam = alloc::vec![1.0 - ls.x.iter().sum::<f64>()];
                lam.extend(ls.x);
                lam
            }
        }
    }

    /// Ambient image of `x` (before radial normalization).
    pub fn evaluate_ambient(&self, x: &[f64]) -> Result<Point> {
        let (t, lam) = self.locate(x)?;
        Ok(self.image_at(t, &lam))
    }

    pub(crate) fn image_at(&self, t: usize, lam: &[f64]) -> Point {
        let s = &self.source.top()[t];
        let pts: Vec<Point> = s.iter().map(|&v| self.images[v].clone()).collect();
        linalg::combine(&pts, lam)
    }

    /// Image of a source point; radial targets return the normalized image.
    pub fn evaluate(&self, x: &[f64]) -> Result<Point> {
        let p = self.evaluate_ambient(x)?;
        if self.target.is_radial() {
            linalg::normalize(&p).ok_or(Error::PreconditionViolated("radial image through the origin".into()))
        } else {
            Ok(p)
        }
    }

    /// Source point with barycentric weights `lam` on the face `face`.
    pub(crate) fn source_point(&self, face: &[usize], lam: &[f64]) -> Point {
        let pts = self.source.simplex_points(face);
        let p = linalg::combine(&pts, lam);
        match self.source.space() {
            ModelSpace::RoundSphere(_) => linalg::normalize(&p).unwrap_or(p),
            ModelSpace::FlatTorus => p.iter().map(|&c| wrap01(c)).collect(),
            _ => p,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::cross_polytope_sphere;

    #[test]
    fn identity_and_constant() {
        let o = cross_polytope_sphere(2, 0).unwrap();
        let id = make_pl_map(o.clone(), Target::Complex(o.clone()), o.vertices().to_vec()).unwrap();
        assert!(!id.is_non_simplicial());
        let x = linalg::normalize(&[0.3, -0.2, 0.9]).unwrap();
        let y = id.evaluate(&x).unwrap();
        assert!(linalg::max_abs_diff(&x, &y) < 1e-12);
        let c = make_pl_map(o.clone(), Target::Euclidean(2), alloc::vec![alloc::vec![0.5, 0.5]; 6]).unwrap();
        assert_eq!(c.evaluate(&x).unwrap(), alloc::vec![0.5, 0.5]);
    }

    #[test]
    fn rejects_off_target_images() {
        let o = cross_polytope_sphere(2, 0).unwrap();
        let mut imgs = o.vertices().to_vec();
        imgs[3] = alloc::vec![0.1, 0.1, 0.1];
        let err = make_pl_map(o.clone(), Target::Complex(o), imgs).unwrap_err();
        assert!(matches!(err, Error::InvalidImage { vertex: 3, .. }));
    }

    #[test]
    fn wrap_map_is_flagged_non_simplicial() {
        let c = cross_polytope_sphere(1, 1).unwrap();
        let m = c.vertices().len();
        let imgs: Vec<Point> = (0..m)
            .map(|k| {
                let a = 2.0 * f64::atan2(c.vertices()[k][1], c.vertices()[k][0]);
                alloc::vec![a.cos(), a.sin()]
            })
            .collect();
        let f = make_pl_map(c.clone(), Target::Complex(c), imgs).unwrap();
        assert!(f.is_non_simplicial());
        let y = f.evaluate(&[0.0, 1.0]).unwrap();
        assert!(linalg::max_abs_diff(&y, &[-1.0, 0.0]) < 1e-12);
    }

    #[test]
    fn torus_locate_wraps() {
        let t = crate::complexes::flat_torus(2).unwrap();
        let imgs: Vec<Point> = t.vertices().iter().map(|v| alloc::vec![v[0]]).collect();
        let f = make_pl_map(t, Target::Euclidean(1), imgs).unwrap();
        // the image jumps across the seam only inside the wrapping simplices
        let y = f.evaluate(&[0.3, 0.95]).unwrap();
        assert!((y[0] - 0.3).abs() < 1e-12);
    }
}
