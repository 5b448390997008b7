//! Triangulations of the model spaces.
//!
//! Combinatorics are integer vertex tuples, sorted ascending, listed per
//! dimension; every face of a listed simplex is listed. Coordinates are ambient
//! Euclidean coordinates (see [`ModelSpace`]). Torus vertices live in
//! `[0, 1)^2` and simplices are unwrapped relative to their first vertex when
//! geometry is needed.

use crate::error::{Error, Result};
use crate::linalg::{self, Point};
use crate::metrics::{torus_delta, ModelSpace};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    space: ModelSpace,
    dim: usize,
    vertices: Vec<Point>,
    simplices: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    /// Build from top-dimensional simplices, generating all faces.
    pub fn from_top(space: ModelSpace, vertices: Vec<Point>, top: Vec<Vec<usize>>) -> Result<Self> {
        let dim = top.first().map(|s| s.len().saturating_sub(1)).unwrap_or(0);
        let mut levels: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); dim + 1];
        for s in &top {
            let mut s = s.clone();
            s.sort_unstable();
            for mask in 1u32..(1 << s.len()) {
                let face: Vec<usize> = (0..s.len()).filter(|i| mask & (1 << i) != 0).map(|i| s[i]).collect();
                levels[face.len() - 1].insert(face);
            }
        }
        let simplices = levels.into_iter().map(|l| l.into_iter().collect()).collect();
        Self::from_parts(space, dim, vertices, simplices)
    }

    /// Build from explicit per-dimension simplex lists, validating every invariant.
    pub fn from_parts(space: ModelSpace, dim: usize, vertices: Vec<Point>, simplices: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let bad = |path: String, reason: &str| Error::InvalidComplex { path, reason: reason.into() };
        if simplices.len() != dim + 1 {
            return Err(bad("simplices".into(), "expected one list per dimension 0..=dim"));
        }
        let amb = space.ambient_dim();
        for (i, v) in vertices.iter().enumerate() {
            if v.len() != amb {
                return Err(bad(format!("vertices[{i}]"), "wrong coordinate count"));
            }
            if space.validate(v, 1e-9).is_err() {
                return Err(bad(format!("vertices[{i}]"), "vertex is not on the space"));
            }
        }
        let mut sets: Vec<BTreeSet<Vec<usize>>> = Vec::new();
        for (k, level) in simplices.iter().enumerate() {
            let mut set = BTreeSet::new();
            for (j, s) in level.iter().enumerate() {
                let path = format!("simplices.{k}[{j}]");
                if s.len() != k + 1 {
                    return Err(bad(path, "wrong vertex count for this dimension"));
                }
                if s.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(bad(path, "vertex indices must be strictly increasing"));
                }
                if s.iter().any(|&v| v >= vertices.len()) {
                    return Err(bad(path, "vertex index out of range"));
                }
                if !set.insert(s.clone()) {
                    return Err(bad(path, "duplicate simplex"));
                }
            }
            sets.push(set);
        }
        if sets[0].len() != vertices.len() {
            return Err(bad("simplices.0".into(), "every vertex must be listed as a 0-simplex"));
        }
        for k in 1..=dim {
            for (j, s) in simplices[k].iter().enumerate() {
                for skip in 0..s.len() {
                    let face: Vec<usize> = s.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
                    if !sets[k - 1].contains(&face) {
                        return Err(bad(format!("simplices.{k}[{j}]"), "a face is missing"));
                    }
                }
            }
        }
        let out = Self { space, dim, vertices, simplices };
        for (j, s) in out.simplices[dim].iter().enumerate() {
            let pts = out.simplex_points(s);
            if linalg::affine_rank(&pts, 1e-12) != dim {
                return Err(bad(format!("simplices.{dim}[{j}]"), "degenerate top simplex"));
            }
        }
        Ok(out)
    }

    pub fn space(&self) -> ModelSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Sorted `k`-simplices.
    pub fn simplices(&self, k: usize) -> &[Vec<usize>] {
        &self.simplices[k]
    }

    pub fn top(&self) -> &[Vec<usize>] {
        &self.simplices[self.dim]
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, |l| l.len())
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices.iter().enumerate().map(|(k, l)| if k % 2 == 0 { l.len() as i64 } else { -(l.len() as i64) }).sum()
    }

    /// Coordinates of a simplex's vertices; torus simplices are unwrapped so
    /// that they form an honest Euclidean simplex near the first vertex.
    pub fn simplex_points(&self, s: &[usize]) -> Vec<Point> {
        let base = &self.vertices[s[0]];
        s.iter()
            .map(|&v| {
                let p = &self.vertices[v];
                match self.space {
                    ModelSpace::FlatTorus => linalg::add(base, &torus_delta(p, base)),
                    _ => p.clone(),
                }
            })
            .collect()
    }

    /// Index of each `k`-simplex within its dimension list.
    pub fn index_of(&self, k: usize) -> BTreeMap<Vec<usize>, usize> {
        self.simplices[k].iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()
    }

    /// For each `(k-1)`-simplex, the indices of the `k`-simplices containing it.
    pub fn cofaces(&self, k: usize) -> Vec<Vec<usize>> {
        let idx = self.index_of(k - 1);
        let mut out = vec![Vec::new(); self.count(k - 1)];
        for (j, s) in self.simplices[k].iter().enumerate() {
            for f in facets(s) {
                out[idx[&f]].push(j);
            }
        }
        out
    }

    /// Every codimension-one face bounds exactly two top simplices.
    pub fn is_closed_manifold(&self) -> bool {
        self.dim > 0 && self.cofaces(self.dim).iter().all(|c| c.len() == 2)
    }

    /// Longest edge in the metric of the space.
    pub fn mesh_scale(&self) -> f64 {
        self.simplices(1)
            .iter()
            .map(|e| {
                let p = self.space.project(&self.vertices[e[0]]);
                let q = self.space.project(&self.vertices[e[1]]);
                self.space.distance_unchecked(&p, &q)
            })
            .fold(0.0, f64::max)
    }
}

/// Faces of codimension one, in lexicographic order of the omitted vertex.
pub fn facets(s: &[usize]) -> Vec<Vec<usize>> {
    (0..s.len())
        .map(|skip| s.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect())
        .collect()
}

/// One bit per simplex of dimension `dim`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mod2Chain {
    pub dim: usize,
    pub bits: Vec<bool>,
}

impl Mod2Chain {
    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|b| !b)
    }

    /// Mod-2 boundary in `complex`.
    pub fn boundary(&self, complex: &SimplicialComplex) -> Mod2Chain {
        if self.dim == 0 {
            return Mod2Chain { dim: 0, bits: Vec::new() };
        }
        let idx = complex.index_of(self.dim - 1);
        let mut bits = vec![false; complex.count(self.dim - 1)];
        for (s, _) in complex.simplices(self.dim).iter().zip(&self.bits).filter(|(_, b)| **b) {
            for f in facets(s) {
                let i = idx[&f];
                bits[i] = !bits[i];
            }
        }
        Mod2Chain { dim: self.dim - 1, bits }
    }
}

/// Mod-2 fundamental cycle of a closed triangulated manifold.
pub fn fundamental_cycle_mod2(k: &SimplicialComplex) -> Result<Mod2Chain> {
    if !k.is_closed_manifold() {
        return Err(Error::NotClosedManifold("some codimension-one face does not bound exactly two top simplices".into()));
    }
    Ok(Mod2Chain { dim: k.dim(), bits: vec![true; k.count(k.dim())] })
}

/// Sign-normalized copy of `p`: first coordinate bigger than `1e-12` in
/// absolute value made positive. Invariant under `p -> -p`.
fn sign_canonical(p: &[f64]) -> Point {
    match p.iter().find(|x| x.abs() > 1e-12) {
        Some(x) if *x < 0.0 => linalg::neg(p),
        _ => p.to_vec(),
    }
}

struct Refiner {
    vertices: Vec<Point>,
    midpoints: BTreeMap<(usize, usize), usize>,
}

impl Refiner {
    fn midpoint(&mut self, a: usize, b: usize) -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = self.midpoints.get(&key) {
            return m;
        }
        let mid = linalg::scale(&linalg::add(&self.vertices[a], &self.vertices[b]), 0.5);
        self.vertices.push(linalg::normalize(&mid).expect("antipodal edge"));
        let id = self.vertices.len() - 1;
        self.midpoints.insert(key, id);
        id
    }
}

/// Boundary of the `(n+1)`-dimensional cross-polytope, refined `subdivisions`
/// times by edge-midpoint splitting with radial projection. A triangulation of
/// `S^n` invariant under `x -> -x`.
pub fn cross_polytope_sphere(n: usize, subdivisions: usize) -> Result<SimplicialComplex> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension { dim: n, supported: "1..=3" });
    }
    let mut vertices = Vec::new();
    for i in 0..=n {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; n + 1];
            v[i] = s;
            vertices.push(v);
        }
    }
    let mut top: Vec<Vec<usize>> = (0..1usize << (n + 1))
        .map(|signs| (0..=n).map(|i| 2 * i + ((signs >> i) & 1)).collect())
        .collect();
    let mut r = Refiner { vertices, midpoints: BTreeMap::new() };
    for _ in 0..subdivisions {
        r.midpoints.clear();
        let mut next = Vec::with_capacity(top.len() << n);
        for s in &top {
            match n {
                1 => {
                    let m = r.midpoint(s[0], s[1]);
                    next.push(vec![s[0], m]);
                    next.push(vec![m, s[1]]);
                }
                2 => {
                    let (a, b, c) = (s[0], s[1], s[2]);
                    let (ab, bc, ca) = (r.midpoint(a, b), r.midpoint(b, c), r.midpoint(c, a));
                    next.extend([vec![a, ab, ca], vec![b, bc, ab], vec![c, ca, bc], vec![ab, bc, ca]]);
                }
                _ => next.extend(split_tetrahedron(&mut r, s)),
            }
        }
        top = next;
    }
    SimplicialComplex::from_top(ModelSpace::RoundSphere(n), r.vertices, top)
}

/// Eight-way split of a tetrahedron; the inner octahedron is cut along its
/// shortest diagonal, ties broken by a key that is invariant under negation.
fn split_tetrahedron(r: &mut Refiner, s: &[usize]) -> Vec<Vec<usize>> {
    let (a, b, c, d) = (s[0], s[1], s[2], s[3]);
    let mut m = BTreeMap::new();
    for (x, y) in [(a, b), (a, c), (a, d), (b, c), (b, d), (c, d)] {
        m.insert((x.min(y), x.max(y)), r.midpoint(x, y));
    }
    let mid = |x: usize, y: usize| m[&(x.min(y), x.max(y))];
    let mut out = vec![
        vec![a, mid(a, b), mid(a, c), mid(a, d)],
        vec![b, mid(a, b), mid(b, c), mid(b, d)],
        vec![c, mid(a, c), mid(b, c), mid(c, d)],
        vec![d, mid(a, d), mid(b, d), mid(c, d)],
    ];
    // diagonal (m_xy, m_zw) with equator cycle m_xz, m_xw, m_yw, m_yz
    let options = [(a, b, c, d), (a, c, b, d), (a, d, b, c)];
    let key = |x, y, z, w| {
        let p = &r.vertices[mid(x, y)];
        let q = &r.vertices[mid(z, w)];
        let len = linalg::dist(p, q);
        let (mut u, mut v) = (sign_canonical(p), sign_canonical(q));
        if linalg::lex_cmp(&v, &u) == core::cmp::Ordering::Less {
            core::mem::swap(&mut u, &mut v);
        }
        (len, u, v)
    };
    let mut best = options[0];
    let mut best_key = key(best.0, best.1, best.2, best.3);
    for &o in &options[1..] {
        let k = key(o.0, o.1, o.2, o.3);
        let shorter = k.0 < best_key.0 - 1e-12;
        let tie = (k.0 - best_key.0).abs() <= 1e-12;
        let lex = linalg::lex_cmp(&k.1, &best_key.1).then_with(|| linalg::lex_cmp(&k.2, &best_key.2));
        if shorter || (tie && lex == core::cmp::Ordering::Less) {
            best = o;
            best_key = k;
        }
    }
    let (x, y, z, w) = best;
    let (p, q) = (mid(x, y), mid(z, w));
    let ring = [mid(x, z), mid(x, w), mid(y, w), mid(y, z)];
    for i in 0..4 {
        out.push(vec![p, q, ring[i], ring[(i + 1) % 4]]);
    }
    out
}

/// Vertices of the regular `n`-simplex inscribed in the unit sphere of `R^n`.
pub fn regular_simplex(n: usize) -> Result<Vec<Point>> {
    match n {
        2 => Ok((0..3)
            .map(|k| {
                let a = core::f64::consts::FRAC_PI_2 + 2.0 * core::f64::consts::PI * k as f64 / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect()),
        3 => {
            let s = 1.0 / 3.0f64.sqrt();
            Ok(vec![vec![s, s, s], vec![s, -s, -s], vec![-s, s, -s], vec![-s, -s, s]])
        }
        _ => Err(Error::UnsupportedDimension { dim: n, supported: "2..=3" }),
    }
}

/// A triangulated unit ball together with its inscribed regular simplex.
#[derive(Debug, Clone)]
pub struct SimplexBall {
    pub complex: SimplicialComplex,
    /// Vertices of the inscribed simplex (circumradius 1).
    pub simplex: Vec<Point>,
    /// Vertex id of the barycenter of each nonempty face of the inscribed
    /// simplex, keyed by the sorted list of simplex corners.
    pub barycenters: BTreeMap<Vec<usize>, usize>,
    /// For every vertex outside the inscribed simplex, the barycenter vertex it
    /// lies over (its nearest point on the simplex).
    pub foot: BTreeMap<usize, usize>,
}

impl SimplexBall {
    pub fn edge_length(&self) -> f64 {
        linalg::dist(&self.simplex[0], &self.simplex[1])
    }
}

/// Triangulation of `B^n` (`n` in 2..=3) containing the barycentric
/// subdivision of the inscribed regular simplex as a subcomplex.
///
/// The part outside the simplex is made of prisms over the facets (swept along
/// the facet normal up to the sphere) and, for `n = 3`, wedges over the edges;
/// both regions are cut into `subdivisions + 1` radial layers. Every vertex
/// outside the simplex sits over the barycenter it projects to orthogonally.
pub fn simplex_ball(n: usize, subdivisions: usize) -> Result<SimplexBall> {
    let corners = regular_simplex(n)?;
    let layers = subdivisions + 1;
    let mut vertices: Vec<Point> = Vec::new();
    let mut barycenters = BTreeMap::new();
    let mut foot = BTreeMap::new();
    // every nonempty face of the simplex gets its barycenter
    for mask in 1u32..(1 << (n + 1)) {
        let face: Vec<usize> = (0..=n).filter(|i| mask & (1 << i) != 0).collect();
        let pts: Vec<Point> = face.iter().map(|&i| corners[i].clone()).collect();
        let w = vec![1.0 / face.len() as f64; face.len()];
        vertices.push(linalg::combine(&pts, &w));
        barycenters.insert(face, vertices.len() - 1);
    }
    let rank_order = |chain: &mut Vec<Vec<usize>>| chain.sort_by_key(|f| f.len());
    let mut top: Vec<Vec<usize>> = Vec::new();
    // barycentric subdivision of the simplex
    for perm in permutations(&(0..=n).collect::<Vec<_>>()) {
        let s: Vec<usize> = (1..=n + 1)
            .map(|k| {
                let mut f = perm[..k].to_vec();
                f.sort_unstable();
                barycenters[&f]
            })
            .collect();
        top.push(s);
    }
    // outer copies: (face, facet, layer) -> vertex
    let mut outer: BTreeMap<(Vec<usize>, Vec<usize>, usize), usize> = BTreeMap::new();
    let mut lift = |vertices: &mut Vec<Point>, foot: &mut BTreeMap<usize, usize>, face: &[usize], dir: &[f64], key: Vec<usize>, layer: usize| -> usize {
        let base_id = barycenters[face];
        if face.len() == 1 || layer == 0 {
            return base_id;
        }
        let k = (face.to_vec(), key, layer);
        if let Some(&id) = outer.get(&k) {
            return id;
        }
        let b = &vertices[base_id];
        // b + t dir on the unit sphere
        let bd = linalg::dot(b, dir);
        let t_end = -bd + (bd * bd - linalg::dot(b, b) + 1.0).sqrt();
        let p = linalg::axpy(b, t_end * layer as f64 / layers as f64, dir);
        vertices.push(p);
        let id = vertices.len() - 1;
        foot.insert(id, base_id);
        outer.insert(k, id);
        id
    };
    for missing in 0..=n {
        let facet: Vec<usize> = (0..=n).filter(|&i| i != missing).collect();
        let normal = linalg::neg(&corners[missing]);
        for perm in permutations(&facet) {
            let mut chain: Vec<Vec<usize>> = (1..=n)
                .map(|k| {
                    let mut f = perm[..k].to_vec();
                    f.sort_unstable();
                    f
                })
                .collect();
            rank_order(&mut chain);
            for layer in 1..=layers {
                let bottom: Vec<usize> =
                    chain.iter().map(|f| lift(&mut vertices, &mut foot, f, &normal, facet.clone(), layer - 1)).collect();
                let upper: Vec<usize> =
                    chain.iter().map(|f| lift(&mut vertices, &mut foot, f, &normal, facet.clone(), layer)).collect();
                for i in 0..n {
                    let mut s: Vec<usize> = bottom[..=i].to_vec();
                    s.extend_from_slice(&upper[i..]);
                    let mut sorted = s.clone();
                    sorted.sort_unstable();
                    sorted.dedup();
                    if sorted.len() == n + 1 {
                        top.push(s);
                    }
                }
            }
        }
    }
    if n == 3 {
        for a in 0..4 {
            for b in a + 1..4 {
                let edge = vec![a, b];
                let others: Vec<usize> = (0..4).filter(|&i| i != a && i != b).collect();
                let f1: Vec<usize> = (0..4).filter(|&i| i != others[0]).collect();
                let f2: Vec<usize> = (0..4).filter(|&i| i != others[1]).collect();
                let n1 = linalg::neg(&corners[others[0]]);
                let n2 = linalg::neg(&corners[others[1]]);
                let nm = linalg::normalize(&linalg::add(&n1, &n2)).unwrap();
                let me = barycenters[&edge];
                let mut rays: Vec<Vec<usize>> = Vec::new();
                for (dir, key) in [(&n1, f1.clone()), (&nm, vec![a, b, 99]), (&n2, f2.clone())] {
                    let ray: Vec<usize> = (0..=layers).map(|l| lift(&mut vertices, &mut foot, &edge, dir, key.clone(), l)).collect();
                    rays.push(ray);
                }
                let mut fan: Vec<[usize; 3]> = Vec::new();
                for r in 0..2 {
                    let (p, q) = (&rays[r], &rays[r + 1]);
                    fan.push([me, p[1], q[1]]);
                    for l in 1..layers {
                        fan.push([p[l], p[l + 1], q[l + 1]]);
                        fan.push([p[l], q[l + 1], q[l]]);
                    }
                }
                for apex in [a, b] {
                    let v = barycenters[&vec![apex]];
                    for t in &fan {
                        top.push(vec![v, t[0], t[1], t[2]]);
                    }
                }
            }
        }
    }
    let complex = SimplicialComplex::from_top(ModelSpace::EuclideanBall(n), vertices, top)?;
    Ok(SimplexBall { complex, simplex: corners, barycenters, foot })
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Triangulated `R^2 / Z^2`: an `m x m` grid with `m = 3 * 2^(subdivisions-1)`,
/// each square cut along its main diagonal.
pub fn flat_torus(subdivisions: usize) -> Result<SimplicialComplex> {
    if subdivisions == 0 {
        return Err(Error::PreconditionViolated("flat_torus needs subdivisions >= 1".into()));
    }
    if subdivisions > 12 {
        return Err(Error::UnsupportedDimension { dim: subdivisions, supported: "subdivisions 1..=12" });
    }
    let m = 3usize << (subdivisions - 1);
    let h = 1.0 / m as f64;
    let id = |i: usize, j: usize| (i % m) * m + (j % m);
    let vertices: Vec<Point> = (0..m * m).map(|k| vec![(k / m) as f64 * h, (k % m) as f64 * h]).collect();
    let mut top = Vec::new();
    for i in 0..m {
        for j in 0..m {
            top.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            top.push(vec![id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
        }
    }
    SimplicialComplex::from_top(ModelSpace::FlatTorus, vertices, top)
}
