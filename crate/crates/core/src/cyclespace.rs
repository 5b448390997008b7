//! Mod-2 zero-cycles carried by fibers, the contraction homotopy, and the
//! fiber-graph bookkeeping along target paths.

use crate::error::{Error, Result};
use crate::linalg::{self, Point};
use crate::metrics::ModelSpace;
use crate::plmaps::{fiber, fiber_with_tol, PLMap, Target};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng as _;

/// Points closer than this (max-abs) are the same support point.
pub const MERGE_TOL: f64 = 1e-9;

/// A mod-2 zero-cycle, stored as its odd-coefficient support in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZeroCycle {
    pub support: Vec<Point>,
}

impl ZeroCycle {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Reduce a multiset mod 2.
    pub fn from_multiset(points: Vec<Point>) -> Self {
        let mut sorted = points;
        sorted.sort_by(|a, b| linalg::lex_cmp(a, b));
        let mut reps: Vec<(Point, usize)> = Vec::new();
        for p in sorted {
            match reps.iter_mut().find(|(q, _)| linalg::max_abs_diff(q, &p) <= MERGE_TOL) {
                Some(r) => r.1 += 1,
                None => reps.push((p, 1)),
            }
        }
        let support = reps.into_iter().filter(|(_, c)| c % 2 == 1).map(|(p, _)| p).collect();
        ZeroCycle { support }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Sum of two cycles.
    pub fn add(&self, other: &ZeroCycle) -> ZeroCycle {
        let mut pts = self.support.clone();
        pts.extend(other.support.iter().cloned());
        ZeroCycle::from_multiset(pts)
    }

    /// Equal supports up to `tol` on coordinates.
    pub fn same_support(&self, other: &ZeroCycle, tol: f64) -> bool {
        self.len() == other.len()
            && self.support.iter().all(|p| other.support.iter().any(|q| linalg::max_abs_diff(p, q) <= tol))
    }
}

fn require_even_setup(f: &PLMap) -> Result<()> {
    if f.codim() != 0 {
        return Err(Error::DimensionMismatch("zero-cycles need equal source and target dimension".into()));
    }
    if !f.source().is_closed_manifold() {
        return Err(Error::PreconditionViolated("source must be a closed manifold".into()));
    }
    Ok(())
}

/// `f^c(y)`: the odd-multiplicity points of the fiber over a regular value.
///
/// The parity of a regular fiber is the mod-2 degree; an odd fiber means the
/// cycle is not defined.
pub fn cycle_map(f: &PLMap, y: &[f64]) -> Result<ZeroCycle> {
    require_even_setup(f)?;
    let fib = fiber(f, y)?;
    if fib.total_weight() % 2 == 1 {
        return Err(Error::OddDegree);
    }
    let pts = fib.points.iter().filter(|p| p.weight % 2 == 1).map(|p| p.point.clone()).collect();
    Ok(ZeroCycle::from_multiset(pts))
}

/// Outcome of [`canonical_class_eval`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProbe {
    /// Common parity of the probe counts.
    pub value: u8,
    /// Incidence count per probe.
    pub counts: Vec<u32>,
    /// Probes that landed over a critical value and were redrawn.
    pub resampled: usize,
}

/// Uniform-ish random point of the source: random top simplex, random
/// barycentric weights.
pub(crate) fn random_source_point(f: &PLMap, rng: &mut crate::Rng) -> Point {
    let top = f.source().top();
    let s = &top[rng.random_range(0..top.len())];
    let mut w: Vec<f64> = (0..s.len()).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= sum);
    f.source_point(s, &w)
}

/// Evaluate the canonical class on the image of `f^c`: for each probe `x0`,
/// count how often `x0` occurs in the cycle over `f(x0)`.
pub fn canonical_class_eval(f: &PLMap, probes: usize, seed: u64) -> Result<ClassProbe> {
    require_even_setup(f)?;
    let space = f.source().space();
    let mut rng = crate::rng_from_seed(seed);
    let mut counts = Vec::with_capacity(probes);
    let mut resampled = 0;
    while counts.len() < probes {
        if resampled > 100 * probes.max(1) {
            return Err(Error::NonGenericTarget);
        }
        let x0 = random_source_point(f, &mut rng);
        let y = f.evaluate(&x0)?;
        let cyc = match cycle_map(f, &y) {
            Ok(c) => c,
            Err(Error::NonGenericTarget) => {
                resampled += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let hits = cyc.support.iter().filter(|p| space.distance_unchecked(p, &x0) <= 1e-7).count();
        counts.push(hits as u32);
    }
    let value = counts.first().map_or(1, |c| (c % 2) as u8);
    if counts.iter().any(|c| (c % 2) as u8 != value) {
        return Err(Error::PreconditionViolated("probe parities disagree".into()));
    }
    Ok(ClassProbe { value, counts, resampled })
}

/// The unreduced multiset of `h_t(y)`: `short_path(x1, x2, t/2)` over
/// ordered pairs of distinct cycle points.
pub fn contraction_multiset(f: &PLMap, y: &[f64], t: f64) -> Result<Vec<Point>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::PreconditionViolated("homotopy parameter outside [0, 1]".into()));
    }
    let cyc = cycle_map(f, y)?;
    let space = f.source().space();
    let pts = &cyc.support;
    let mut out = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        for (j, q) in pts.iter().enumerate() {
            if i != j {
                out.push(space.short_path(p, q, t / 2.0)?);
            }
        }
    }
    Ok(out)
}

/// `h_t(y)`, reduced mod 2.
pub fn contraction_homotopy(f: &PLMap, y: &[f64], t: f64) -> Result<ZeroCycle> {
    Ok(ZeroCycle::from_multiset(contraction_multiset(f, y, t)?))
}

/// Fiber points joined when closer than `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberGraph {
    pub y: Point,
    pub delta: f64,
    pub vertices: Vec<Point>,
    /// `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl FiberGraph {
    pub fn neighbors(&self, i: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| if a == i { Some(b) } else if b == i { Some(a) } else { None })
            .collect()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == i || b == i).count()
    }

    pub fn parity(&self, i: usize) -> u8 {
        (self.degree(i) % 2) as u8
    }
}

fn check_delta(space: ModelSpace, delta: f64) -> Result<()> {
    let rho = space.injectivity_radius();
    if !(delta > 0.0 && delta <= rho) {
        return Err(Error::DeltaOutOfRange { delta, rho });
    }
    Ok(())
}

/// Edges below `delta`; with `strict`, a pair within [`crate::TOL`] of
/// `delta` is returned as the error.
fn delta_edges(space: ModelSpace, pts: &[&[f64]], delta: f64, strict: bool) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = space.distance_unchecked(pts[i], pts[j]);
            if strict && (d - delta).abs() <= crate::TOL {
                return Err(Error::DeltaPairFound { x: pts[i].to_vec(), y: pts[j].to_vec(), distance: d });
            }
            if d < delta {
                edges.push((i, j));
            }
        }
    }
    Ok(edges)
}

/// The graph `G_y` on the fiber over a regular value.
pub fn fiber_graph(f: &PLMap, y: &[f64], delta: f64) -> Result<FiberGraph> {
    let space = f.source().space();
    check_delta(space, delta)?;
    if f.codim() != 0 {
        return Err(Error::DimensionMismatch("fiber graphs need a finite fiber".into()));
    }
    let fib = fiber(f, y)?;
    let vertices: Vec<Point> = fib.points.into_iter().map(|p| p.point).collect();
    let refs: Vec<&[f64]> = vertices.iter().map(|p| p.as_slice()).collect();
    let edges = delta_edges(space, &refs, delta, true)?;
    Ok(FiberGraph { y: y.to_vec(), delta, vertices, edges })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    PairCreated,
    PairAnnihilated,
    VertexExchange,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::PairCreated => "PairCreated",
            EventKind::PairAnnihilated => "PairAnnihilated",
            EventKind::VertexExchange => "VertexExchange",
        }
    }
}

/// One crossing of a critical image.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub kind: EventKind,
    /// Arclength fraction along the path.
    pub param: f64,
    /// Tracked vertex ids involved.
    pub vertices: Vec<usize>,
    /// Degree parity of every vertex present after the event.
    pub parities: BTreeMap<usize, u8>,
    /// For pair events, whether the pair is joined and has equal neighbor
    /// sets apart from each other. Always true for exchanges.
    pub shared_neighbors: bool,
}

/// A pair of tracked vertices whose distance passes through `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaCrossing {
    pub param: f64,
    pub vertices: (usize, usize),
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub initial_parities: BTreeMap<usize, u8>,
    pub events: Vec<EventRecord>,
    pub delta_crossings: Vec<DeltaCrossing>,
    /// Failed shared-neighbor checks, survivor parity flips at events, and
    /// exchanges that change the moving vertex's degree.
    pub violations: usize,
}

/// Piecewise-linear path in the target, parameterized by arclength fraction.
struct PathParam {
    pts: Vec<Point>,
    cum: Vec<f64>,
    total: f64,
}

impl PathParam {
    fn new(pts: &[Point]) -> Self {
        let mut cum = vec![0.0];
        for w in pts.windows(2) {
            let l = cum.last().unwrap() + linalg::dist(&w[0], &w[1]);
            cum.push(l);
        }
        let total = *cum.last().unwrap();
        PathParam { pts: pts.to_vec(), cum, total }
    }

    fn at(&self, s: f64) -> Point {
        let l = s.clamp(0.0, 1.0) * self.total;
        let k = match self.cum.iter().position(|&c| c >= l) {
            Some(0) | None => 1.min(self.pts.len() - 1),
            Some(k) => k,
        };
        if k == 0 {
            return self.pts[0].clone();
        }
        let seg = self.cum[k] - self.cum[k - 1];
        let u = if seg > 0.0 { (l - self.cum[k - 1]) / seg } else { 0.0 };
        linalg::axpy(&self.pts[k - 1], u, &linalg::sub(&self.pts[k], &self.pts[k - 1]))
    }
}

struct Crossing {
    param: f64,
    cofaces: [usize; 2],
    fold: bool,
}

/// Signed distance to the hyperplane of a facet image, with unit normal.
fn facet_plane(w: &[&[f64]]) -> Option<(Point, f64)> {
    let n = w[0].len();
    let normal = if n == 1 {
        vec![1.0]
    } else {
        let dirs: Vec<Point> = w[1..].iter().map(|p| linalg::sub(p, w[0])).collect();
        if n != 2 || dirs.len() != 1 {
            return None;
        }
        linalg::normalize(&[-dirs[0][1], dirs[0][0]])?
    };
    let off = linalg::dot(&normal, w[0]);
    Some((normal, off))
}

fn find_crossings(f: &PLMap, path: &PathParam) -> Result<Vec<Crossing>> {
    let n = f.source().dim();
    let imgs = f.images();
    let faces = f.source().simplices(n - 1);
    let top = f.source().top();
    let mut out = Vec::new();
    for (h, face) in faces.iter().enumerate() {
        let w: Vec<&[f64]> = face.iter().map(|&v| imgs[v].as_slice()).collect();
        let cof = &f.facet_cofaces[h];
        let Some((normal, off)) = facet_plane(&w) else {
            // a collapsed facet image is a point: only a codim-2 hit matters
            for k in 1..path.pts.len() {
                if seg_point_distance(&path.pts[k - 1], &path.pts[k], w[0]) <= crate::TOL {
                    return Err(Error::NonSimpleEvent { param: path.cum[k - 1] / path.total });
                }
            }
            continue;
        };
        let g = |p: &[f64]| linalg::dot(&normal, p) - off;
        for k in 1..path.pts.len() {
            let (a, b) = (&path.pts[k - 1], &path.pts[k]);
            let (ga, gb) = (g(a), g(b));
            if ga == 0.0 && k > 1 {
                return Err(Error::NonSimpleEvent { param: path.cum[k - 1] / path.total });
            }
            if ga * gb >= 0.0 {
                continue;
            }
            // bisection on the path parameter
            let (s0, s1) = (path.cum[k - 1] / path.total, path.cum[k] / path.total);
            let (mut lo, mut hi) = (s0, s1);
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if g(&path.at(mid)) * ga > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let s = 0.5 * (lo + hi);
            let y = path.at(s);
            if n == 2 {
                let e = linalg::sub(w[1], w[0]);
                let len = linalg::norm(&e);
                let tau = linalg::dot(&linalg::sub(&y, w[0]), &e) / len;
                if tau < -crate::TOL || tau > len + crate::TOL {
                    continue;
                }
                if tau.abs() <= crate::TOL || (tau - len).abs() <= crate::TOL {
                    return Err(Error::NonSimpleEvent { param: s });
                }
            }
            if cof.len() != 2 {
                return Err(Error::PreconditionViolated("source facet without two cofaces".into()));
            }
            let side = |t: usize| {
                let o = top[t].iter().find(|v| !face.contains(v)).unwrap();
                g(&imgs[*o])
            };
            let (a1, a2) = (side(cof[0]), side(cof[1]));
            if a1.abs() <= 1e-12 || a2.abs() <= 1e-12 {
                return Err(Error::NonSimpleEvent { param: s });
            }
            out.push(Crossing { param: s, cofaces: [cof[0], cof[1]], fold: a1 * a2 > 0.0 });
        }
    }
    out.sort_by(|a, b| a.param.total_cmp(&b.param));
    Ok(out)
}

fn seg_point_distance(a: &[f64], b: &[f64], p: &[f64]) -> f64 {
    let e = linalg::sub(b, a);
    let ee = linalg::dot(&e, &e);
    let u = if ee > 0.0 { (linalg::dot(&linalg::sub(p, a), &e) / ee).clamp(0.0, 1.0) } else { 0.0 };
    linalg::dist(&linalg::axpy(a, u, &e), p)
}

/// Fiber points keyed by top simplex (codimension 0 puts at most one point
/// in each simplex).
fn keyed_fiber(f: &PLMap, y: &[f64], tol: f64) -> Result<BTreeMap<usize, Point>> {
    let fib = fiber_with_tol(f, y, tol)?;
    Ok(fib.points.into_iter().map(|p| (p.simplex, p.point)).collect())
}

/// Adjacency by vertex id of the graph on `pts` (id -> point).
fn id_graph(space: ModelSpace, pts: &BTreeMap<usize, Point>, delta: f64) -> BTreeMap<usize, BTreeSet<usize>> {
    let ids: Vec<usize> = pts.keys().copied().collect();
    let refs: Vec<&[f64]> = ids.iter().map(|i| pts[i].as_slice()).collect();
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = ids.iter().map(|&i| (i, BTreeSet::new())).collect();
    for (a, b) in delta_edges(space, &refs, delta, false).unwrap() {
        adj.get_mut(&ids[a]).unwrap().insert(ids[b]);
        adj.get_mut(&ids[b]).unwrap().insert(ids[a]);
    }
    adj
}

fn parities(adj: &BTreeMap<usize, BTreeSet<usize>>) -> BTreeMap<usize, u8> {
    adj.iter().map(|(&i, n)| (i, (n.len() % 2) as u8)).collect()
}

fn relabel(by_simplex: &BTreeMap<usize, Point>, ids: &BTreeMap<usize, usize>) -> BTreeMap<usize, Point> {
    by_simplex.iter().map(|(s, p)| (ids[s], p.clone())).collect()
}

/// Follow the fiber graph `G_y` as `y` runs along a polyline in a Euclidean
/// target, recording fold events, carrier exchanges and distance-`delta`
/// crossings.
pub fn track_events(f: &PLMap, path: &[Point], delta: f64) -> Result<EventLog> {
    let space = f.source().space();
    let n = f.source().dim();
    if !matches!(space, ModelSpace::RoundSphere(1) | ModelSpace::RoundSphere(2)) || f.codim() != 0 {
        return Err(Error::PreconditionViolated("event tracking needs a circle or sphere mapped to R^1 or R^2".into()));
    }
    if !matches!(f.target(), Target::Euclidean(_)) {
        return Err(Error::PreconditionViolated("event tracking needs a Euclidean target".into()));
    }
    check_delta(space, delta)?;
    if path.len() < 2 || path.iter().any(|p| p.len() != n) {
        return Err(Error::PreconditionViolated("path needs at least two target points".into()));
    }
    let pp = PathParam::new(path);
    if pp.total <= 0.0 {
        return Err(Error::PreconditionViolated("path has zero length".into()));
    }
    let start = keyed_fiber(f, &path[0], crate::plmaps::GENERIC_TOL)?;
    keyed_fiber(f, path.last().unwrap(), crate::plmaps::GENERIC_TOL)?;
    let crossings = find_crossings(f, &pp)?;
    let eta = 1e-7 / pp.total;
    if let (Some(c0), Some(c1)) = (crossings.first(), crossings.last()) {
        if c0.param < 2.0 * eta || c1.param > 1.0 - 2.0 * eta {
            return Err(Error::NonSimpleEvent { param: if c0.param < 2.0 * eta { c0.param } else { c1.param } });
        }
    }
    // crossings closer than the window are handled together when they
    // touch disjoint simplices (symmetric maps), otherwise rejected
    let mut clusters: Vec<Vec<&Crossing>> = Vec::new();
    for c in &crossings {
        match clusters.last_mut() {
            Some(cl) if c.param - cl.last().unwrap().param < 4.0 * eta => cl.push(c),
            _ => clusters.push(vec![c]),
        }
    }

    // simplex -> vertex id
    let mut ids: BTreeMap<usize, usize> = start.keys().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut next_id = ids.len();
    let initial_parities = parities(&id_graph(space, &relabel(&start, &ids), delta));
    let mut events = Vec::new();
    let mut delta_crossings = Vec::new();
    let mut violations = 0;
    let mut interval_start = 0.0;

    for cl in &clusters {
        let touched: Vec<usize> = cl.iter().flat_map(|c| c.cofaces).collect();
        let distinct: BTreeSet<usize> = touched.iter().copied().collect();
        let (s_lo, s_hi) = (cl[0].param - eta, cl.last().unwrap().param + eta);
        if distinct.len() != touched.len() {
            return Err(Error::NonSimpleEvent { param: cl[0].param });
        }
        scan_delta(f, &pp, delta, &ids, interval_start, s_lo, &mut delta_crossings)?;
        let before = keyed_fiber(f, &pp.at(s_lo), 0.0)?;
        let after = keyed_fiber(f, &pp.at(s_hi), 0.0)?;
        let others = |m: &BTreeMap<usize, Point>| m.keys().filter(|s| !distinct.contains(s)).copied().collect::<Vec<_>>();
        if others(&before) != others(&after) {
            return Err(Error::NonSimpleEvent { param: cl[0].param });
        }
        let gb = id_graph(space, &relabel(&before, &ids), delta);
        let (hb, ha) = (|s| before.contains_key(&s), |s| after.contains_key(&s));
        let mut pending = Vec::new();
        let mut gone = Vec::new();
        for c in cl {
            let [t1, t2] = c.cofaces;
            let (kind, involved, moved);
            if c.fold {
                if ha(t1) && ha(t2) && !hb(t1) && !hb(t2) {
                    kind = EventKind::PairCreated;
                    ids.insert(t1, next_id);
                    ids.insert(t2, next_id + 1);
                    involved = vec![next_id, next_id + 1];
                    next_id += 2;
                } else if hb(t1) && hb(t2) && !ha(t1) && !ha(t2) {
                    kind = EventKind::PairAnnihilated;
                    involved = vec![ids[&t1], ids[&t2]];
                    gone.extend([t1, t2]);
                } else {
                    return Err(Error::NonSimpleEvent { param: c.param });
                }
                moved = None;
            } else {
                let (from, to) = if hb(t1) && ha(t2) && !hb(t2) && !ha(t1) {
                    (t1, t2)
                } else if hb(t2) && ha(t1) && !hb(t1) && !ha(t2) {
                    (t2, t1)
                } else {
                    return Err(Error::NonSimpleEvent { param: c.param });
                };
                let id = ids.remove(&from).unwrap();
                ids.insert(to, id);
                kind = EventKind::VertexExchange;
                involved = vec![id];
                moved = Some(id);
            }
            pending.push((kind, c.param, involved, moved));
        }
        let ga = id_graph(space, &relabel(&after, &ids), delta);
        let (pb, pa) = (parities(&gb), parities(&ga));
        let all_involved: BTreeSet<usize> = pending.iter().flat_map(|p| p.2.iter().copied()).collect();
        for (v, p) in &pa {
            if !all_involved.contains(v) && pb.get(v) != Some(p) {
                violations += 1;
            }
        }
        for (kind, param, involved, moved) in pending {
            let mut shared = true;
            if let [x1, x2] = involved[..] {
                let g = if kind == EventKind::PairCreated { &ga } else { &gb };
                let mut n1 = g[&x1].clone();
                let mut n2 = g[&x2].clone();
                let joined = n1.remove(&x2) && n2.remove(&x1);
                shared = joined && n1 == n2;
                if !shared {
                    violations += 1;
                }
            }
            if let Some(v) = moved {
                if gb[&v].len() != ga[&v].len() {
                    violations += 1;
                }
            }
            events.push(EventRecord { kind, param, vertices: involved, parities: pa.clone(), shared_neighbors: shared });
        }
        for t in gone {
            ids.remove(&t);
        }
        interval_start = s_hi;
    }
    scan_delta(f, &pp, delta, &ids, interval_start, 1.0, &mut delta_crossings)?;
    Ok(EventLog { initial_parities, events, delta_crossings, violations })
}

/// Record distance-`delta` crossings between tracked vertices on an interval
/// free of critical crossings.
fn scan_delta(
    f: &PLMap,
    pp: &PathParam,
    delta: f64,
    ids: &BTreeMap<usize, usize>,
    a: f64,
    b: f64,
    out: &mut Vec<DeltaCrossing>,
) -> Result<()> {
    const STEPS: usize = 16;
    let space = f.source().space();
    let at = |s: f64| -> Result<BTreeMap<usize, Point>> { Ok(relabel(&keyed_fiber(f, &pp.at(s), 0.0)?, ids)) };
    let mut prev_s = a;
    let mut prev = at(a)?;
    for k in 1..=STEPS {
        let s = a + (b - a) * k as f64 / STEPS as f64;
        let cur = at(s)?;
        let vids: Vec<usize> = cur.keys().copied().collect();
        for (i, &u) in vids.iter().enumerate() {
            for &v in &vids[i + 1..] {
                let phi = |m: &BTreeMap<usize, Point>| space.distance_unchecked(&m[&u], &m[&v]) - delta;
                let (p0, p1) = (phi(&prev), phi(&cur));
                if p0 * p1 >= 0.0 {
                    continue;
                }
                let (mut lo, mut hi) = (prev_s, s);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if phi(&at(mid)?) * p0 > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let m = at(0.5 * (lo + hi))?;
                out.push(DeltaCrossing { param: 0.5 * (lo + hi), vertices: (u, v), distance: phi(&m) + delta });
            }
        }
        prev = cur;
        prev_s = s;
    }
    Ok(())
}

/// Outcome of [`parity_certificate`].
#[derive(Debug, Clone, PartialEq)]
pub enum ParityOutcome {
    /// Every sampled vertex has odd degree: impossible for a closed source
    /// and open target unless a `delta`-pair exists; kept as a diagnostic.
    ConstantOddParity { samples: usize },
    ConstantEvenParity { samples: usize },
    DeltaPairFound { x: Point, y: Point, distance: f64 },
}

/// Degree parity of `x` in `G_{f(x)}`; `Err` carries non-generic values and
/// exact `delta`-pairs.
fn vertex_parity(f: &PLMap, x: &[f64], delta: f64) -> Result<u8> {
    let space = f.source().space();
    let y = f.evaluate(x)?;
    let g = fiber_graph(f, &y, delta)?;
    let me = (0..g.vertices.len())
        .min_by(|&a, &b| space.distance_unchecked(&g.vertices[a], x).total_cmp(&space.distance_unchecked(&g.vertices[b], x)))
        .ok_or(Error::NonGenericTarget)?;
    if space.distance_unchecked(&g.vertices[me], x) > 1e-7 {
        return Err(Error::NonGenericTarget);
    }
    Ok(g.parity(me))
}

/// Point at fraction `t` of a source curve from `a` to `b`.
fn source_curve(space: ModelSpace, a: &[f64], b: &[f64], t: f64) -> Option<Point> {
    match space {
        ModelSpace::FlatTorus => {
            let d = crate::metrics::torus_delta(b, a);
            Some(a.iter().zip(&d).map(|(x, dx)| (x + t * dx).rem_euclid(1.0)).collect())
        }
        _ => linalg::normalize(&a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect::<Vec<_>>()),
    }
}

/// Closest fiber partner of `x` at distance near `delta`.
fn delta_partner(f: &PLMap, x: &[f64], delta: f64) -> Option<(Point, f64)> {
    let space = f.source().space();
    let y = f.evaluate(x).ok()?;
    let fib = fiber_with_tol(f, &y, 0.0).ok()?;
    fib.points
        .into_iter()
        .map(|p| {
            let d = space.distance_unchecked(&p.point, x);
            (p.point, d)
        })
        .min_by(|a, b| (a.1 - delta).abs().total_cmp(&(b.1 - delta).abs()))
}

/// Sample degree parities of fiber-graph vertices; a parity change along a
/// source curve is bisected down to a pair at distance `delta` with equal
/// images.
pub fn parity_certificate(f: &PLMap, delta: f64, samples: usize, seed: u64) -> Result<ParityOutcome> {
    let space = f.source().space();
    check_delta(space, delta)?;
    if f.codim() != 0 || !f.source().is_closed_manifold() || !matches!(f.target(), Target::Euclidean(_)) {
        return Err(Error::PreconditionViolated("needs a closed source and Euclidean target of equal dimension".into()));
    }
    let imgs = f.images();
    if imgs.iter().all(|p| linalg::max_abs_diff(p, &imgs[0]) <= 1e-12) {
        let x = f.source().vertices()[0].clone();
        let v = any_unit_tangent(space, &x);
        let y = space.shoot_unchecked(&x, &v, delta);
        let distance = space.distance_unchecked(&x, &y);
        return Ok(ParityOutcome::DeltaPairFound { x, y, distance });
    }
    let mut rng = crate::rng_from_seed(seed);
    let mut seen: Vec<(Point, u8)> = Vec::new();
    let mut tries = 0;
    while seen.len() < samples && tries < 20 * samples.max(1) {
        tries += 1;
        let x = random_source_point(f, &mut rng);
        match vertex_parity(f, &x, delta) {
            Ok(p) => seen.push((x, p)),
            Err(Error::DeltaPairFound { x, y, distance }) => return Ok(ParityOutcome::DeltaPairFound { x, y, distance }),
            Err(Error::NonGenericTarget) => continue,
            Err(e) => return Err(e),
        }
    }
    let Some((x0, p0)) = seen.first().cloned() else {
        return Err(Error::NonGenericTarget);
    };
    for (x1, p1) in seen.iter().skip(1) {
        if *p1 == p0 {
            continue;
        }
        if let Some(found) = bisect_parity(f, delta, &x0, p0, x1) {
            return Ok(found);
        }
    }
    let odd = p0 == 1;
    if odd {
        // the contradiction state: look for the pair directly
        if let Ok(pair) = crate::coincidence::hopf_pair(f, delta, 1e-8, 20_000, seed) {
            return Ok(ParityOutcome::DeltaPairFound { x: pair.x, y: pair.y, distance: pair.distance });
        }
        return Ok(ParityOutcome::ConstantOddParity { samples: seen.len() });
    }
    Ok(ParityOutcome::ConstantEvenParity { samples: seen.len() })
}

fn any_unit_tangent(space: ModelSpace, x: &[f64]) -> Point {
    match space {
        ModelSpace::RoundSphere(_) => {
            let basis = linalg::complement_basis(&[x.to_vec()], x.len());
            basis[0].clone()
        }
        _ => {
            let mut v = vec![0.0; x.len()];
            v[0] = 1.0;
            v
        }
    }
}

fn bisect_parity(f: &PLMap, delta: f64, a: &[f64], pa: u8, b: &[f64]) -> Option<ParityOutcome> {
    let space = f.source().space();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut nudges = 0;
    while hi - lo > 1e-13 {
        let mut mid = 0.5 * (lo + hi);
        let par = loop {
            let x = source_curve(space, a, b, mid)?;
            match vertex_parity(f, &x, delta) {
                Ok(p) => break p,
                Err(Error::DeltaPairFound { x, y, distance }) => {
                    return Some(ParityOutcome::DeltaPairFound { x, y, distance })
                }
                Err(_) if nudges < 200 => {
                    nudges += 1;
                    mid = lo + (hi - lo) * (0.5 + 0.1 * ((nudges as f64) * 0.618).fract() - 0.05);
                }
                Err(_) => return None,
            }
        };
        if par == pa {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = source_curve(space, a, b, lo)?;
    let (y, distance) = delta_partner(f, &x, delta)?;
    if (distance - delta).abs() > 1e-6 {
        return None;
    }
    Some(ParityOutcome::DeltaPairFound { x, y, distance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::cross_polytope_sphere;
    use crate::families::{AnalyticMap, MapEvaluator};
    use crate::plmaps::make_pl_map;
    use core::f64::consts::PI;

    fn circle_map(level: usize, h: impl Fn(f64) -> f64) -> PLMap {
        let k = cross_polytope_sphere(1, level).unwrap();
        let imgs = k.vertices().iter().map(|v| vec![h(f64::atan2(v[1], v[0]))]).collect();
        make_pl_map(k, Target::Euclidean(1), imgs).unwrap()
    }

    fn projection(level: usize) -> PLMap {
        AnalyticMap::Projection(2).to_pl_map(&cross_polytope_sphere(2, level).unwrap()).unwrap()
    }

    #[test]
    fn zero_cycle_reduction() {
        let a = vec![1.0, 0.0];
        let b = vec![0.0, 1.0];
        let c = ZeroCycle::from_multiset(vec![a.clone(), b.clone(), a.clone(), vec![0.0, 1.0 + 1e-12]]);
        assert!(c.is_empty());
        let d = ZeroCycle::from_multiset(vec![a.clone(), b.clone(), a.clone()]);
        assert_eq!(d.support, vec![b]);
    }

    #[test]
    fn cycles_of_circle_maps() {
        let c = cross_polytope_sphere(1, 5).unwrap();
        let mut rng = crate::rng_from_seed(2);
        let f = AnalyticMap::random_circle_map(0, &mut rng).to_pl_map(&c).unwrap();
        for _ in 0..20 {
            let y = crate::plmaps::random_target(&f, &mut rng);
            match cycle_map(&f, &y) {
                Ok(z) => assert_eq!(z.len() % 2, 0),
                Err(Error::NonGenericTarget) => {}
                Err(e) => panic!("{e}"),
            }
        }
        let id = AnalyticMap::random_circle_map(1, &mut rng).to_pl_map(&c).unwrap();
        let y = crate::plmaps::random_target(&id, &mut rng);
        assert_eq!(cycle_map(&id, &y), Err(Error::OddDegree));
    }

    #[test]
    fn constant_map_off_image_gives_empty_cycle() {
        let k = cross_polytope_sphere(1, 3).unwrap();
        let f = make_pl_map(k.clone(), Target::Euclidean(1), vec![vec![0.25]; k.count(0)]).unwrap();
        assert!(cycle_map(&f, &[0.7]).unwrap().is_empty());
    }

    #[test]
    fn class_probes_are_one() {
        let c = cross_polytope_sphere(1, 6).unwrap();
        let mut rng = crate::rng_from_seed(8);
        for d in [0, 2] {
            let f = AnalyticMap::random_circle_map(d, &mut rng).to_pl_map(&c).unwrap();
            let r = canonical_class_eval(&f, 50, 1).unwrap();
            assert_eq!(r.value, 1);
            assert_eq!(r.counts.len(), 50);
        }
        let f = circle_map(4, |t| t.sin());
        assert_eq!(canonical_class_eval(&f, 20, 3).unwrap().value, 1);
    }

    #[test]
    fn homotopy_ends() {
        let f = circle_map(5, |t| t.sin());
        let y = [0.3];
        let c = cycle_map(&f, &y).unwrap();
        assert_eq!(c.len(), 2);
        assert!(contraction_homotopy(&f, &y, 0.0).unwrap().same_support(&c, 1e-9));
        assert!(contraction_homotopy(&f, &y, 1.0).unwrap().is_empty());
    }

    #[test]
    fn homotopy_matches_pairwise_recomputation() {
        // two humps: four-point fibers at small positive values
        let f = circle_map(6, |t| (2.0 * t).cos() * 0.5 + 0.1 * t.cos());
        let y = [0.05];
        let c = cycle_map(&f, &y).unwrap();
        assert_eq!(c.len(), 4);
        let raw = contraction_multiset(&f, &y, 0.5).unwrap();
        assert!(raw.len() <= 12);
        // independent recomputation: rotate by half the signed angle
        let mut want = Vec::new();
        for p in &c.support {
            for q in &c.support {
                if p != q {
                    let (a, b) = (f64::atan2(p[1], p[0]), f64::atan2(q[1], q[0]));
                    let d = (b - a + PI).rem_euclid(2.0 * PI) - PI;
                    let t = a + 0.25 * d;
                    want.push(vec![t.cos(), t.sin()]);
                }
            }
        }
        for w in &want {
            assert!(raw.iter().any(|r| linalg::max_abs_diff(r, w) < 1e-12));
        }
        let h = contraction_homotopy(&f, &y, 0.5).unwrap();
        assert!(h.same_support(&ZeroCycle::from_multiset(want), 1e-9));
    }

    #[test]
    fn graph_edges_follow_distances() {
        let f = circle_map(6, |t| t.sin());
        // near the max the two fiber points are close together
        let y = [0.99];
        let fib = fiber(&f, &y).unwrap();
        let d = ModelSpace::RoundSphere(1).distance_unchecked(&fib.points[0].point, &fib.points[1].point);
        let g = fiber_graph(&f, &y, d + 0.1).unwrap();
        assert_eq!(g.edges, vec![(0, 1)]);
        let g = fiber_graph(&f, &y, d - 0.01).unwrap();
        assert!(g.edges.is_empty());
        assert!(matches!(fiber_graph(&f, &y, 4.0), Err(Error::DeltaOutOfRange { .. })));
    }

    #[test]
    fn one_fold_one_creation() {
        let f = circle_map(6, |t| t.sin());
        let log = track_events(&f, &[vec![1.2], vec![0.5]], 0.5).unwrap();
        let pairs: Vec<&EventRecord> = log.events.iter().filter(|e| e.kind != EventKind::VertexExchange).collect();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].kind, EventKind::PairCreated);
        assert!(pairs[0].shared_neighbors);
        assert_eq!(log.violations, 0);
        // carriers change at every other vertex image below the top
        assert!(log.events.len() > 1);
    }

    #[test]
    fn closed_path_off_critical_values() {
        let f = projection(3);
        let log = track_events(&f, &[vec![0.1, 0.1], vec![0.2, 0.1], vec![0.15, 0.2], vec![0.1, 0.1]], 1.0).unwrap();
        // the path stays inside one image simplex or crosses only non-folds
        assert!(log.events.iter().all(|e| e.kind == EventKind::VertexExchange));
        let f = circle_map(5, |t| t.sin());
        let log = track_events(&f, &[vec![0.1], vec![0.12], vec![0.1]], 1.0).unwrap();
        assert!(log.events.is_empty());
    }

    #[test]
    fn two_folds_keep_survivor_parities() {
        let f = circle_map(7, |t| (2.0 * t).cos() + 0.3 * t.cos());
        // maxima near 1.3 and 0.7: go down across 0.7 and back up
        let log = track_events(&f, &[vec![1.0], vec![0.4], vec![1.0]], 1.2).unwrap();
        let kinds: Vec<EventKind> = log.events.iter().filter(|e| e.kind != EventKind::VertexExchange).map(|e| e.kind).collect();
        assert_eq!(kinds, vec![EventKind::PairCreated, EventKind::PairAnnihilated]);
        assert_eq!(log.violations, 0);
        assert!(log.events.iter().all(|e| e.shared_neighbors));
    }

    #[test]
    fn projection_certificates() {
        let f = projection(5);
        match parity_certificate(&f, 1.0, 40, 7).unwrap() {
            ParityOutcome::DeltaPairFound { x, y, distance } => {
                assert!((distance - 1.0).abs() < 1e-6);
                assert!(linalg::max_abs_diff(&f.eval(&x), &f.eval(&y)) < 1e-6);
            }
            o => panic!("{o:?}"),
        }
        let k = cross_polytope_sphere(2, 2).unwrap();
        let c = make_pl_map(k.clone(), Target::Euclidean(2), vec![vec![0.0, 1.0]; k.count(0)]).unwrap();
        assert!(matches!(parity_certificate(&c, 0.5, 10, 1).unwrap(), ParityOutcome::DeltaPairFound { .. }));
    }

    #[test]
    fn antipodal_certificate_at_full_radius() {
        let f = projection(4);
        match parity_certificate(&f, PI, 20, 2).unwrap() {
            ParityOutcome::DeltaPairFound { x, y, distance } => {
                assert!((distance - PI).abs() < 1e-6);
                assert!(x[2].abs() > 1.0 - 1e-6 && y[2].abs() > 1.0 - 1e-6);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn random_sphere_maps_track_cleanly() {
        let k = cross_polytope_sphere(2, 3).unwrap();
        let mut rng = crate::rng_from_seed(17);
        let mut pair_events = 0;
        for _ in 0..6 {
            let f = crate::generators::random_polynomial_map(&k, 2, &mut rng).unwrap();
            let path: Vec<Point> = (0..6).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
            match track_events(&f, &path, 0.8) {
                Ok(log) => {
                    assert_eq!(log.violations, 0);
                    pair_events += log.events.iter().filter(|e| e.kind != EventKind::VertexExchange).count();
                }
                Err(Error::NonSimpleEvent { .. }) | Err(Error::NonGenericTarget) => {}
                Err(e) => panic!("{e}"),
            }
        }
        assert!(pair_events > 0);
    }
}
