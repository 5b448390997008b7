//! Width of explicit maps: `sup_y diam f^{-1}(y)`.
//!
//! Two estimators run side by side. Stratified target sampling with local
//! refinement finds large fibers directly. A face-pair enumeration solves
//! `f(p) = f(q)` on every pair of source faces whose dimensions add up to at
//! most the number of target equations; these solutions are the vertices of
//! the polytopes `{(p, q) in s1 x s2 : f(p) = f(q)}`, where a convex distance
//! attains its maximum. For Euclidean sources the enumeration gives the exact
//! width. Elsewhere it gives a lower bound and, after adding the diameters of
//! the simplices around each solution, a certified upper bound.

use crate::complexes::simplex_ball;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Point};
use crate::metrics::{smallest_enclosing_cap, ModelSpace};
use crate::plmaps::{bbox, fiber_vertices, make_pl_map, PLMap, Target};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use rand::Rng as _;

/// Every width report carries this caveat.
pub const INF_CAVEAT: &str =
    "sup over targets for this map only; the infimum over all maps is not computed";

#[derive(Debug, Clone, PartialEq)]
pub struct WidthReport {
    pub map_id: String,
    /// Diameter of the fiber over `witness_target`.
    pub lower: f64,
    /// Upper bound for the sup over all targets.
    pub upper: f64,
    pub witness_target: Point,
    pub samples: usize,
    pub mesh_scale: f64,
    /// `upper` equals the sup exactly (Euclidean source, affine target).
    pub exact: bool,
}

/// Diameter of the fiber over an arbitrary target point.
pub fn fiber_diameter(f: &PLMap, y: &[f64]) -> Result<f64> {
    let pts = fiber_vertices(f, y)?;
    if pts.is_empty() {
        return Ok(0.0);
    }
    Ok(f.source().space().diameter_unchecked(&pts))
}

struct PairScan {
    best: f64,
    best_target: Option<Point>,
    upper: f64,
}

/// Solve `f(p) = f(q)` for `p` on `t1`, `q` on `t2`; `None` unless unique.
fn solve_pair(f: &PLMap, t1: &[usize], t2: &[usize]) -> Option<(Vec<f64>, Vec<f64>)> {
    let imgs = f.images();
    let d = f.target().ambient_dim();
    let (k1, k2) = (t1.len() - 1, t2.len() - 1);
    let rhs = linalg::sub(&imgs[t2[0]], &imgs[t1[0]]);
    let scale = 1.0
        + t1.iter().chain(t2).map(|&v| linalg::norm(&imgs[v])).fold(0.0, f64::max);
    if k1 + k2 == 0 {
        return if linalg::norm(&rhs) <= 1e-10 * scale { Some((vec![1.0], vec![1.0])) } else { None };
    }
    if k1 + k2 > d {
        return None;
    }
    let mut a = Matrix::zeros(d, k1 + k2);
    for j in 0..k1 {
        for i in 0..d {
            a.set(i, j, imgs[t1[j + 1]][i] - imgs[t1[0]][i]);
        }
    }
    for j in 0..k2 {
        for i in 0..d {
            a.set(i, k1 + j, imgs[t2[0]][i] - imgs[t2[j + 1]][i]);
        }
    }
    let ls = linalg::least_squares(&a, &rhs, 1e-11);
    if !ls.full_rank || ls.residual > 1e-10 * scale {
        return None;
    }
    let mut lam = vec![1.0 - ls.x[..k1].iter().sum::<f64>()];
    lam.extend_from_slice(&ls.x[..k1]);
    let mut mu = vec![1.0 - ls.x[k1..].iter().sum::<f64>()];
    mu.extend_from_slice(&ls.x[k1..]);
    if lam.iter().chain(&mu).any(|v| *v < -1e-12) {
        return None;
    }
    Some((lam, mu))
}

fn scan_pairs(f: &PLMap) -> PairScan {
    let k = f.source();
    let space = k.space();
    let euclidean = matches!(space, ModelSpace::Euclidean(_) | ModelSpace::EuclideanBall(_));
    let cap = space.diameter();
    let d = f.target().ambient_dim();
    let mut scan = PairScan { best: -1.0, best_target: None, upper: 0.0 };
    for k1 in 0..=k.dim() {
        for k2 in k1..=k.dim() {
            if k1 + k2 > d {
                continue;
            }
            for (i1, t1) in k.simplices(k1).iter().enumerate() {
                let pts: Vec<Point> = t1.iter().map(|&v| f.images()[v].clone()).collect();
                let (lo, hi) = bbox(&pts, 1e-8);
                for i2 in f.image_index(k2).overlapping(&lo, &hi) {
                    if k1 == k2 && i2 <= i1 {
                        continue;
                    }
                    let t2 = &k.simplices(k2)[i2];
                    let Some((lam, mu)) = solve_pair(f, t1, t2) else { continue };
                    let p = f.source_point(t1, &lam);
                    let q = f.source_point(t2, &mu);
                    let dist = space.distance_unchecked(&p, &q);
                    if dist > scan.best {
                        scan.best = dist;
                        let src: Vec<Point> = t1.iter().map(|&v| f.images()[v].clone()).collect();
                        scan.best_target = Some(linalg::combine(&src, &lam));
                    }
                    let slack = if euclidean { 0.0 } else { f.star_diameter[k1][i1] + f.star_diameter[k2][i2] };
                    scan.upper = scan.upper.max((dist + slack).min(cap));
                }
            }
        }
    }
    scan
}

/// Stratified target points: a jittered grid over the image box for `R^m`,
/// an equal share of random points per top simplex for polyhedra.
pub(crate) fn stratified_targets(f: &PLMap, count: usize, rng: &mut crate::Rng) -> (Vec<Point>, f64) {
    match f.target() {
        Target::Euclidean(m) => {
            let (a, b) = bbox(f.images(), 1e-9);
            let per = ((count.max(1) as f64).powf(1.0 / *m as f64).ceil() as usize).max(1);
            let cell: Vec<f64> = (0..*m).map(|k| (b[k] - a[k]) / per as f64).collect();
            let mut out = Vec::with_capacity(per.pow(*m as u32));
            let mut idx = vec![0usize; *m];
            loop {
                out.push((0..*m).map(|k| a[k] + (idx[k] as f64 + rng.random::<f64>()) * cell[k]).collect());
                let mut k = 0;
                while k < *m {
                    idx[k] += 1;
                    if idx[k] < per {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == *m {
                    break;
                }
            }
            (out, cell.iter().cloned().fold(0.0, f64::max))
        }
        Target::Complex(t) => {
            let share = count.div_ceil(t.top().len()).max(1);
            let mut out = Vec::new();
            let mut size: f64 = 0.0;
            for s in t.top() {
                let pts: Vec<Point> = s.iter().map(|&v| t.vertices()[v].clone()).collect();
                size = size.max(t.space().diameter_unchecked(&pts));
                for _ in 0..share {
                    let p = random_in_simplex(&pts, rng);
                    out.push(if f.target().is_radial() { linalg::normalize(&p).unwrap_or(p) } else { p });
                }
            }
            let cell = size / (share as f64).powf(1.0 / t.dim().max(1) as f64);
            (out, cell)
        }
    }
}

pub(crate) fn random_in_simplex(pts: &[Point], rng: &mut crate::Rng) -> Point {
    let mut w: Vec<f64> = (0..pts.len()).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    linalg::combine(pts, &w)
}

/// Random target point within `radius` of `y`, staying on the target.
pub(crate) fn local_sample(f: &PLMap, y: &[f64], radius: f64, rng: &mut crate::Rng) -> Point {
    let d = y.len();
    let u: Point = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    match f.target() {
        Target::Euclidean(_) => linalg::axpy(y, radius, &u),
        Target::Complex(_) if f.target().is_radial() => {
            linalg::normalize(&linalg::axpy(y, radius, &u)).unwrap_or(y.to_vec())
        }
        Target::Complex(t) => {
            let holders: Vec<&Vec<usize>> = t
                .top()
                .iter()
                .filter(|s| {
                    let pts: Vec<&[f64]> = s.iter().map(|&v| t.vertices()[v].as_slice()).collect();
                    crate::plmaps::hull_distance(&pts, y) <= 1e-9
                })
                .collect();
            if holders.is_empty() {
                return y.to_vec();
            }
            let s = holders[rng.random_range(0..holders.len())];
            let pts: Vec<Point> = s.iter().map(|&v| t.vertices()[v].clone()).collect();
            let z = random_in_simplex(&pts, rng);
            let gap = linalg::dist(&z, y);
            if gap <= radius {
                z
            } else {
                let s = radius / gap * rng.random::<f64>();
                linalg::axpy(y, s, &linalg::sub(&z, y))
            }
        }
    }
}

/// Width estimate for one map with lower and upper bounds.
pub fn map_width(f: &PLMap, map_id: &str, samples: usize, refine_rounds: usize, seed: u64) -> Result<WidthReport> {
    let codim = f.codim();
    if !(0..=1).contains(&codim) {
        return Err(Error::WrongCodimension(codim));
    }
    let mut rng = crate::rng_from_seed(seed);
    let space = f.source().space();
    let (targets, cell) = stratified_targets(f, samples, &mut rng);
    let mut used = 0;
    let mut best = (-1.0, targets.first().cloned().unwrap_or_default());
    for y in &targets {
        used += 1;
        let dm = fiber_diameter(f, y)?;
        if dm > best.0 {
            best = (dm, y.clone());
        }
    }
    let mut radius = cell;
    for _ in 0..refine_rounds {
        radius *= 0.5;
        let center = best.1.clone();
        for _ in 0..(samples / 10).max(1) {
            let y = local_sample(f, &center, radius, &mut rng);
            used += 1;
            let dm = fiber_diameter(f, &y)?;
            if dm > best.0 {
                best = (dm, y);
            }
        }
    }
    let radial = f.target().is_radial();
    let (upper, exact) = if radial {
        (space.diameter(), false)
    } else {
        let scan = scan_pairs(f);
        if let Some(y) = scan.best_target {
            let dm = fiber_diameter(f, &y)?;
            if dm > best.0 {
                best = (dm, y);
            }
        }
        let exact = matches!(space, ModelSpace::Euclidean(_) | ModelSpace::EuclideanBall(_));
        (scan.upper.max(best.0), exact)
    };
    let lower = best.0.max(0.0);
    Ok(WidthReport {
        map_id: map_id.into(),
        lower,
        upper: upper.max(lower),
        witness_target: best.1,
        samples: used,
        mesh_scale: f.source().mesh_scale(),
        exact,
    })
}

/// The cone over the barycentric subdivision of the `(n-2)`-skeleton of the
/// inscribed simplex, with cone point at the origin.
fn skeleton_cone(corners: &[Point]) -> Result<(crate::complexes::SimplicialComplex, BTreeMap<Vec<usize>, usize>)> {
    let n = corners[0].len();
    let mut vertices = vec![vec![0.0; n]];
    let mut ids = BTreeMap::new();
    for (i, c) in corners.iter().enumerate() {
        vertices.push(c.clone());
        ids.insert(vec![i], vertices.len() - 1);
    }
    let mut top = Vec::new();
    match n {
        2 => {
            for i in 0..corners.len() {
                top.push(vec![0, ids[&vec![i]]]);
            }
        }
        _ => {
            for a in 0..corners.len() {
                for b in a + 1..corners.len() {
                    vertices.push(linalg::scale(&linalg::add(&corners[a], &corners[b]), 0.5));
                    let m = vertices.len() - 1;
                    ids.insert(vec![a, b], m);
                    top.push(vec![0, ids[&vec![a]], m]);
                    top.push(vec![0, ids[&vec![b]], m]);
                }
            }
        }
    }
    let k = crate::complexes::SimplicialComplex::from_top(ModelSpace::Euclidean(n), vertices, top)?;
    Ok((k, ids))
}

/// Nearest-point projection of the ball onto its inscribed regular simplex,
/// followed by the PL map of the barycentric subdivision onto the cone over
/// the `(n-2)`-skeleton that fixes that skeleton and sends the barycenters of
/// facets and of the simplex itself to the cone point.
pub fn shchepin_map(n: usize) -> Result<PLMap> {
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension { dim: n, supported: "2..=3" });
    }
    let ball = simplex_ball(n, 0)?;
    let (cone, cone_ids) = skeleton_cone(&ball.simplex)?;
    let face_of: BTreeMap<usize, Vec<usize>> = ball.barycenters.iter().map(|(f, &id)| (id, f.clone())).collect();
    let images = (0..ball.complex.vertices().len())
        .map(|v| {
            let base = ball.foot.get(&v).copied().unwrap_or(v);
            let face = &face_of[&base];
            if face.len() < n {
                cone.vertices()[cone_ids[face]].clone()
            } else {
                vec![0.0; n]
            }
        })
        .collect();
    make_pl_map(ball.complex, Target::Complex(cone), images)
}

/// Width of the map from `shchepin_map` attained exactly.
pub fn shchepin_bound(n: usize) -> f64 {
    ((2 * n + 2) as f64 / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Injectivity radius, for equal-dimensional open targets.
    Rho,
    /// Convexity radius, for polyhedral targets.
    Kappa,
    /// `arccos(-1/n)` for `S^n` to `(n-1)`-dimensional polyhedra.
    SphereSimplex,
}

impl BoundKind {
    pub fn value(&self, space: ModelSpace) -> f64 {
        match self {
            BoundKind::Rho => space.injectivity_radius(),
            BoundKind::Kappa => space.convexity_radius(),
            BoundKind::SphereSimplex => (-1.0 / space.dim() as f64).acos(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessRow {
    pub report: WidthReport,
    pub bound: f64,
    pub pass: bool,
}

/// Compare each map's width lower bound with the floor of `bound_kind`.
pub fn width_bound_harness(
    space: ModelSpace,
    maps: &[(String, PLMap)],
    bound_kind: BoundKind,
    mesh_tolerance: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<HarnessRow>> {
    let bound = bound_kind.value(space);
    let mut rows = Vec::with_capacity(maps.len());
    for (i, (id, f)) in maps.iter().enumerate() {
        if f.source().space() != space {
            return Err(Error::DimensionMismatch("map source is not the harness space".into()));
        }
        let report = map_width(f, id, samples, 3, seed.wrapping_add(i as u64))?;
        let pass = report.lower >= bound - mesh_tolerance;
        rows.push(HarnessRow { report, bound, pass });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub enum HalfSphere {
    InsideOpenHalfSphere { direction: Point, cap_radius: f64 },
    /// `boundary` is set when the cap radius is `pi/2` within `1e-9`.
    EvadesAllHalfSpheres { boundary: bool, cap_radius: f64 },
}

/// Whether a point set (or the vertex set of a geodesic polyline) fits in an
/// open half-sphere.
pub fn half_sphere_test(points: &[Point]) -> Result<HalfSphere> {
    let cap = smallest_enclosing_cap(points)?;
    if cap.radius < FRAC_PI_2 - 1e-9 {
        Ok(HalfSphere::InsideOpenHalfSphere { direction: cap.center, cap_radius: cap.radius })
    } else {
        Ok(HalfSphere::EvadesAllHalfSpheres { boundary: (cap.radius - FRAC_PI_2).abs() <= 1e-9, cap_radius: cap.radius })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::cross_polytope_sphere;
    use core::f64::consts::PI;

    fn projection(level: usize) -> PLMap {
        let k = cross_polytope_sphere(2, level).unwrap();
        let imgs = k.vertices().iter().map(|v| vec![v[0], v[1]]).collect();
        make_pl_map(k, Target::Euclidean(2), imgs).unwrap()
    }

    #[test]
    fn shchepin_targets() {
        let f = shchepin_map(2).unwrap();
        assert_eq!(f.target().dim(), 1);
        assert!(!f.is_non_simplicial());
        assert!(matches!(shchepin_map(4), Err(Error::UnsupportedDimension { .. })));
    }

    #[test]
    fn shchepin_width_two() {
        let f = shchepin_map(2).unwrap();
        let r = map_width(&f, "shchepin-2", 2000, 3, 1).unwrap();
        assert!(r.exact);
        assert!((r.lower - 3.0f64.sqrt()).abs() < 1e-6, "{r:?}");
        assert!((r.upper - 3.0f64.sqrt()).abs() < 1e-6, "{r:?}");
        let again = fiber_diameter(&f, &r.witness_target).unwrap();
        assert!((again - r.lower).abs() < 1e-9);
    }

    #[test]
    fn projection_width_near_pi() {
        let f = projection(3);
        let r = map_width(&f, "proj", 400, 2, 2).unwrap();
        assert!(r.lower >= PI - 0.1, "{r:?}");
        assert!(r.lower <= r.upper);
        assert!(linalg::norm(&r.witness_target) < 0.2);
    }

    #[test]
    fn constant_and_identity_widths() {
        let k = cross_polytope_sphere(2, 1).unwrap();
        let n = k.vertices().len();
        let c = make_pl_map(k, Target::Euclidean(2), vec![vec![0.0, 0.0]; n]).unwrap();
        let r = map_width(&c, "const", 100, 1, 3).unwrap();
        assert!((r.lower - PI).abs() < 1e-12);
        let b = simplex_ball(2, 1).unwrap();
        let imgs = b.complex.vertices().to_vec();
        let id = make_pl_map(b.complex, Target::Euclidean(2), imgs).unwrap();
        let r = map_width(&id, "id", 200, 1, 3).unwrap();
        assert!(r.upper < 1e-9, "{r:?}");
    }

    #[test]
    fn height_width_is_pi() {
        let k = cross_polytope_sphere(2, 3).unwrap();
        let imgs = k.vertices().iter().map(|v| vec![v[2]]).collect();
        let f = make_pl_map(k, Target::Euclidean(1), imgs).unwrap();
        let r = map_width(&f, "height", 200, 2, 4).unwrap();
        assert!((r.lower - PI).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn half_spheres() {
        let eq: Vec<Point> = (0..32)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 32.0;
                vec![a.cos(), a.sin(), 0.0]
            })
            .collect();
        assert!(matches!(half_sphere_test(&eq).unwrap(), HalfSphere::EvadesAllHalfSpheres { boundary: true, .. }));
        let north = [vec![0.1, 0.0, 1.0], vec![0.0, 0.1, 1.0], vec![-0.1, -0.1, 1.0]];
        let north: Vec<Point> = north.iter().map(|p| linalg::normalize(p).unwrap()).collect();
        match half_sphere_test(&north).unwrap() {
            HalfSphere::InsideOpenHalfSphere { direction, .. } => assert!(direction[2] > 0.99),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cap_boundary_of_radius_one_matches_direction_grid() {
        let mut rng = crate::rng_from_seed(17);
        let c = linalg::normalize(&[rng.random_range(-1.0..1.0), 0.3, 0.5]).unwrap();
        let basis = linalg::complement_basis(core::slice::from_ref(&c), 3);
        let ring: Vec<Point> = (0..40)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 40.0;
                let dir = linalg::axpy(&linalg::scale(&basis[0], a.cos()), a.sin(), &basis[1]);
                linalg::axpy(&linalg::scale(&c, 1.0f64.cos()), 1.0f64.sin(), &dir)
            })
            .collect();
        let verdict = matches!(half_sphere_test(&ring).unwrap(), HalfSphere::InsideOpenHalfSphere { .. });
        // a direction u with u . p > 0 for all p certifies an open half-sphere
        let mut feasible = false;
        for i in 0..=90 {
            for j in 0..180 {
                let (th, ph) = (PI * i as f64 / 90.0, PI * j as f64 / 90.0);
                let u = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                if ring.iter().all(|p| linalg::dot(&u, p) > 1e-9) {
                    feasible = true;
                }
            }
        }
        assert!(verdict && feasible);
    }
}
