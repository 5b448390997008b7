//! Fibers of PL maps, mod-2 degree and multiplicity.

use super::{hull_distance, PLMap, Target};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Point};
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng as _;

/// Distance below which a target point counts as lying on a critical image.
pub const GENERIC_TOL: f64 = 1e-9;
/// Size of the offset used when a caller retries a non-generic target point.
pub const PERTURBATION: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct FiberPoint {
    pub point: Point,
    /// Top simplex containing the point.
    pub simplex: usize,
    pub bary: Vec<f64>,
    /// Local mod-2 multiplicity.
    pub weight: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberComponent {
    /// Crossing points in traversal order; loops do not repeat the first point.
    pub points: Vec<Point>,
    pub closed: bool,
    /// Length in the source metric.
    pub length: f64,
    /// Top simplices crossed, one per segment.
    pub simplices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fiber {
    pub target_point: Point,
    pub codim: i64,
    /// Codimension 0.
    pub points: Vec<FiberPoint>,
    /// Codimension 1.
    pub components: Vec<FiberComponent>,
}

impl Fiber {
    pub fn total_weight(&self) -> u32 {
        self.points.iter().map(|p| p.weight).sum()
    }

    pub fn total_length(&self) -> f64 {
        self.components.iter().map(|c| c.length).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.components.is_empty()
    }

    /// Every computed point of the fiber (crossing points for curves).
    pub fn all_points(&self) -> Vec<Point> {
        let mut out: Vec<Point> = self.points.iter().map(|p| p.point.clone()).collect();
        for c in &self.components {
            out.extend(c.points.iter().cloned());
        }
        out
    }
}

/// A target point rewritten as linear constraints on barycentric weights:
/// `rows * image = rhs`, plus `dir . image > 0` for radial targets.
struct Query {
    key: Point,
    rows: Option<Vec<Point>>,
    rhs: Point,
    dir: Option<Point>,
}

impl Query {
    fn new(f: &PLMap, y: &[f64]) -> Result<Self> {
        let d = f.target().ambient_dim();
        if y.len() != d {
            return Err(Error::DimensionMismatch(alloc::format!("target point has {} coordinates, expected {d}", y.len())));
        }
        if f.target().is_radial() {
            let u = linalg::normalize(y).ok_or(Error::InvalidPoint { offset: 1.0 })?;
            let rows = linalg::complement_basis(core::slice::from_ref(&u), d);
            Ok(Query { key: u.clone(), rhs: vec![0.0; rows.len()], rows: Some(rows), dir: Some(u) })
        } else {
            Ok(Query { key: y.to_vec(), rows: None, rhs: y.to_vec(), dir: None })
        }
    }

    fn apply(&self, w: &[f64]) -> Point {
        match &self.rows {
            Some(rows) => rows.iter().map(|r| linalg::dot(r, w)).collect(),
            None => w.to_vec(),
        }
    }

    /// Unique barycentric solution on `face`, if the affine piece is injective
    /// there and consistent with the constraints.
    fn solve(&self, f: &PLMap, face: &[usize]) -> Option<Vec<f64>> {
        let imgs = f.images();
        let tw: Vec<Point> = face.iter().map(|&v| self.apply(&imgs[v])).collect();
        let scale = 1.0 + tw.iter().map(|w| linalg::norm(w)).fold(0.0, f64::max) + linalg::norm(&self.rhs);
        let r = self.rhs.len();
        let k = face.len() - 1;
        let lam = if k == 0 {
            if linalg::dist(&tw[0], &self.rhs) > 1e-10 * scale {
                return None;
            }
            vec![1.0]
        } else {
            if r < k {
                return None;
            }
            let mut a = Matrix::zeros(r, k);
            for j in 0..k {
                for i in 0..r {
                    a.set(i, j, tw[j + 1][i] - tw[0][i]);
                }
            }
            let ls = linalg::least_squares(&a, &linalg::sub(&self.rhs, &tw[0]), 1e-11);
            if !ls.full_rank || ls.residual > 1e-10 * scale {
                return None;
            }
            let mut lam = vec![1.0 - ls.x.iter().sum::<f64>()];
            lam.extend(ls.x);
            lam
        };
        if let Some(dir) = &self.dir {
            let pts: Vec<Point> = face.iter().map(|&v| imgs[v].clone()).collect();
            if linalg::dot(dir, &linalg::combine(&pts, &lam)) <= 0.0 {
                return None;
            }
        }
        Some(lam)
    }

    /// Distance from the target point to the image of `face`; gnomonic
    /// distance for radial targets.
    fn distance_to_image(&self, f: &PLMap, face: &[usize]) -> f64 {
        let imgs = f.images();
        let pts: Vec<Point> = match &self.dir {
            Some(dir) => {
                let mut out = Vec::with_capacity(face.len());
                for &v in face {
                    let h = linalg::dot(dir, &imgs[v]);
                    if h <= 0.0 {
                        return f64::INFINITY;
                    }
                    out.push(linalg::scale(&self.apply(&imgs[v]), 1.0 / h));
                }
                out
            }
            None => face.iter().map(|&v| imgs[v].clone()).collect(),
        };
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        hull_distance(&refs, &self.rhs)
    }
}

fn check_generic(f: &PLMap, q: &Query, tol: f64) -> Result<()> {
    if tol <= 0.0 {
        return Ok(());
    }
    let m = f.target().dim();
    for k in 0..m.min(f.source().dim() + 1) {
        for id in f.image_index(k).query(&q.key) {
            let face = &f.source().simplices(k)[id];
            if q.distance_to_image(f, face) <= tol {
                return Err(Error::NonGenericTarget);
            }
        }
    }
    Ok(())
}

/// Fiber over a regular value `y`.
///
/// Codimension 0 gives weighted points, codimension 1 gives polylines and
/// loops obtained by chaining crossings of codimension-one faces through the
/// top simplices they bound.
pub fn fiber(f: &PLMap, y: &[f64]) -> Result<Fiber> {
    fiber_with_tol(f, y, GENERIC_TOL)
}

/// [`fiber`] with a custom distance to critical images; `tol <= 0` skips
/// the check (callers then own the consequences).
pub(crate) fn fiber_with_tol(f: &PLMap, y: &[f64], tol: f64) -> Result<Fiber> {
    let codim = f.codim();
    if !(0..=1).contains(&codim) {
        return Err(Error::WrongCodimension(codim));
    }
    let q = Query::new(f, y)?;
    check_generic(f, &q, tol)?;
    let k = f.source();
    let n = k.dim();
    let mut out = Fiber { target_point: q.key.clone(), codim, points: Vec::new(), components: Vec::new() };
    if codim == 0 {
        let mut ids: Vec<usize> = f.image_index(n).query(&q.key).collect();
        ids.sort_unstable();
        for t in ids {
            let s = &k.top()[t];
            if let Some(lam) = q.solve(f, s) {
                if lam.iter().all(|l| *l > 0.0) {
                    out.points.push(FiberPoint { point: f.source_point(s, &lam), simplex: t, bary: lam, weight: 1 });
                }
            }
        }
        return Ok(out);
    }
    // codimension one
    let mut hits: BTreeMap<usize, Point> = BTreeMap::new();
    for id in f.image_index(n - 1).query(&q.key) {
        let face = &k.simplices(n - 1)[id];
        if let Some(lam) = q.solve(f, face) {
            if lam.iter().all(|l| *l > 0.0) {
                hits.insert(id, f.source_point(face, &lam));
            }
        }
    }
    let mut per_top: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &h in hits.keys() {
        for &t in &f.facet_cofaces[h] {
            per_top.entry(t).or_default().push(h);
        }
    }
    let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = hits.keys().map(|&h| (h, Vec::new())).collect();
    let mut uf = UnionFind::new(hits.keys().copied());
    for (&t, hs) in &per_top {
        match hs.len() {
            2 => {
                adj.get_mut(&hs[0]).unwrap().push((hs[1], t));
                adj.get_mut(&hs[1]).unwrap().push((hs[0], t));
                uf.union(hs[0], hs[1]);
            }
            _ => return Err(Error::NonGenericTarget),
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &h in hits.keys() {
        groups.entry(uf.find(h)).or_default().push(h);
    }
    let mut comps: Vec<(usize, FiberComponent)> = Vec::new();
    for nodes in groups.values() {
        let start = nodes.iter().copied().find(|h| adj[h].len() == 1).unwrap_or(nodes[0]);
        let closed = adj[&start].len() != 1;
        let mut order = vec![start];
        let mut simplices = Vec::new();
        let mut prev_t: Option<usize> = None;
        let mut cur = start;
        loop {
            let mut options = adj[&cur].clone();
            options.sort_unstable();
            match options.into_iter().find(|(_, t)| Some(*t) != prev_t) {
                Some((nb, t)) => {
                    simplices.push(t);
                    if nb == start {
                        break;
                    }
                    prev_t = Some(t);
                    cur = nb;
                    order.push(cur);
                }
                None => break,
            }
        }
        let points: Vec<Point> = order.iter().map(|h| hits[h].clone()).collect();
        let space = k.space();
        let mut length: f64 = points.windows(2).map(|w| space.distance_unchecked(&w[0], &w[1])).sum();
        if closed && points.len() > 1 {
            length += space.distance_unchecked(&points[points.len() - 1], &points[0]);
        }
        comps.push((nodes[0], FiberComponent { points, closed, length, simplices }));
    }
    comps.sort_by_key(|c| c.0);
    out.components = comps.into_iter().map(|c| c.1).collect();
    Ok(out)
}

struct UnionFind {
    parent: BTreeMap<usize, usize>,
}

impl UnionFind {
    fn new(ids: impl Iterator<Item = usize>) -> Self {
        Self { parent: ids.map(|i| (i, i)).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[&r] != r {
            r = self.parent[&r];
        }
        let mut c = x;
        while self.parent[&c] != r {
            let next = self.parent[&c];
            self.parent.insert(c, r);
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent.insert(ra.max(rb), ra.min(rb));
        }
    }
}

/// Per-component and total fiber length (codimension 1).
#[derive(Debug, Clone, PartialEq)]
pub struct FiberLength {
    pub components: Vec<f64>,
    pub total: f64,
}

pub fn fiber_length(f: &PLMap, y: &[f64]) -> Result<FiberLength> {
    if f.codim() != 1 {
        return Err(Error::WrongCodimension(f.codim()));
    }
    let fib = fiber(f, y)?;
    let components: Vec<f64> = fib.components.iter().map(|c| c.length).collect();
    Ok(FiberLength { total: components.iter().sum(), components })
}

/// Vertices of the fiber over an arbitrary (possibly critical) target point:
/// on every source face where the affine piece is injective, the unique
/// preimage if it lies in the face. The fiber inside each simplex is the
/// convex hull of these points, so their diameter is the fiber diameter for
/// Euclidean sources.
pub fn fiber_vertices(f: &PLMap, y: &[f64]) -> Result<Vec<Point>> {
    let q = Query::new(f, y)?;
    let k = f.source();
    let mut out = Vec::new();
    for dim in 0..=k.dim() {
        let mut ids: Vec<usize> = f.image_index(dim).query(&q.key).collect();
        ids.sort_unstable();
        for id in ids {
            let face = &k.simplices(dim)[id];
            if let Some(lam) = q.solve(f, face) {
                if lam.iter().all(|l| *l >= -1e-12) {
                    let lam: Vec<f64> = lam.iter().map(|l| l.max(0.0)).collect();
                    let s: f64 = lam.iter().sum();
                    let lam: Vec<f64> = lam.iter().map(|l| l / s).collect();
                    out.push(f.source_point(face, &lam));
                }
            }
        }
    }
    Ok(out)
}

/// Random point of the target: uniform in the bounding box of the vertex
/// images for `R^m`, uniform on a random top simplex for polyhedra.
pub fn random_target(f: &PLMap, rng: &mut crate::Rng) -> Point {
    match f.target() {
        Target::Euclidean(m) => {
            let (a, b) = super::bbox(f.images(), 0.0);
            (0..*m).map(|k| if b[k] > a[k] { rng.random_range(a[k]..b[k]) } else { a[k] }).collect()
        }
        Target::Complex(t) => {
            let s = &t.top()[rng.random_range(0..t.top().len())];
            let mut w: Vec<f64> = (0..s.len()).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let sum: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= sum);
            let pts: Vec<Point> = s.iter().map(|&v| t.vertices()[v].clone()).collect();
            let p = linalg::combine(&pts, &w);
            if f.target().is_radial() {
                linalg::normalize(&p).unwrap_or(p)
            } else {
                p
            }
        }
    }
}

/// Move `y` by [`PERTURBATION`] in a random direction that stays on the target.
fn perturb(f: &PLMap, y: &[f64], rng: &mut crate::Rng) -> Point {
    let d = y.len();
    let gauss = |rng: &mut crate::Rng| -> Point {
        loop {
            let v: Point = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            if let Some(u) = linalg::normalize(&v) {
                if linalg::norm(&v) <= 1.0 {
                    return u;
                }
            }
        }
    };
    match f.target() {
        Target::Euclidean(_) => linalg::axpy(y, PERTURBATION, &gauss(rng)),
        Target::Complex(_) if f.target().is_radial() => {
            let u = gauss(rng);
            linalg::normalize(&linalg::axpy(y, PERTURBATION, &u)).unwrap()
        }
        Target::Complex(t) => {
            // slide towards a random point of a target simplex containing y
            let holders: Vec<&Vec<usize>> = t
                .top()
                .iter()
                .filter(|s| {
                    let pts: Vec<&[f64]> = s.iter().map(|&v| t.vertices()[v].as_slice()).collect();
                    hull_distance(&pts, y) <= 1e-9
                })
                .collect();
            if holders.is_empty() {
                return linalg::axpy(y, PERTURBATION, &gauss(rng));
            }
            let s = holders[rng.random_range(0..holders.len())];
            let mut w: Vec<f64> = (0..s.len()).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let sum: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= sum);
            let pts: Vec<Point> = s.iter().map(|&v| t.vertices()[v].clone()).collect();
            let z = linalg::combine(&pts, &w);
            match linalg::normalize(&linalg::sub(&z, y)) {
                Some(dir) => linalg::axpy(y, PERTURBATION, &dir),
                None => y.to_vec(),
            }
        }
    }
}

/// [`fiber`], retrying non-generic points with random offsets. Returns the
/// fiber and the accumulated offset.
pub fn fiber_perturbed(f: &PLMap, y: &[f64], rng: &mut crate::Rng, tries: usize) -> Result<(Fiber, Point)> {
    let mut cur = y.to_vec();
    for _ in 0..tries.max(1) {
        match fiber(f, &cur) {
            Ok(fib) => {
                // radial targets normalize the point; report against the input
                let base = if f.target().is_radial() { linalg::normalize(y).unwrap_or(y.to_vec()) } else { y.to_vec() };
                return Ok((fib, linalg::sub(&cur, &base)));
            }
            Err(Error::NonGenericTarget) => cur = perturb(f, &cur, rng),
            Err(e) => return Err(e),
        }
    }
    Err(Error::NonGenericTarget)
}

fn check_closed_equal_dim(f: &PLMap) -> Result<()> {
    if f.source().dim() != f.target().dim() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "source dimension {} and target dimension {}",
            f.source().dim(),
            f.target().dim()
        )));
    }
    if !f.source().is_closed_manifold() || !f.target().is_closed_manifold() {
        return Err(Error::PreconditionViolated("mod-2 degree needs closed source and target".into()));
    }
    Ok(())
}

/// Parity of the fiber over a sampled regular value.
pub fn mod2_degree(f: &PLMap) -> Result<u8> {
    check_closed_equal_dim(f)?;
    let mut rng = crate::rng_from_seed(0xde9);
    for _ in 0..100 {
        let y = random_target(f, &mut rng);
        match fiber(f, &y) {
            Ok(fib) => return Ok((fib.total_weight() % 2) as u8),
            Err(Error::NonGenericTarget) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NonGenericTarget)
}

/// Largest total fiber weight over `samples` regular values: a lower bound
/// for the multiplicity of the map.
pub fn multiplicity(f: &PLMap, samples: usize, seed: u64) -> Result<u32> {
    if f.codim() != 0 {
        return Err(Error::WrongCodimension(f.codim()));
    }
    let mut rng = crate::rng_from_seed(seed);
    let mut best = 0;
    for _ in 0..samples {
        let y = random_target(f, &mut rng);
        if let Ok(fib) = fiber(f, &y) {
            best = best.max(fib.total_weight());
        }
    }
    Ok(best)
}
