//! Searches for pairs of points with equal images: antipodal pairs for maps
//! of spheres, pairs at a prescribed distance, and far-apart pairs for
//! even-degree maps.

use crate::error::{Error, Result};
use crate::families::MapEvaluator;
use crate::linalg::{self, Matrix, Point};
use crate::metrics::{wrap01, ModelSpace};
use crate::plmaps::{mod2_degree, PLMap, Target};
use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;
use core::f64::consts::PI;
use rand::Rng as _;

/// Local searches started per call.
pub const MULTISTART: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct CoincidencePair {
    pub x: Point,
    pub y: Point,
    pub distance: f64,
    /// Max-norm of `f(x) - f(y)`.
    pub residual: f64,
    pub method: &'static str,
    /// Map evaluations used.
    pub evaluations: usize,
}

fn inf_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v.abs()) })
}

fn sq_norm(r: &[f64]) -> f64 {
    if r.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    linalg::dot(r, r)
}

type ShiftFn = dyn Fn(&[f64], &[f64]) -> Vec<f64>;

/// A least-squares problem on a manifold of states: `shift` moves a state by
/// local coordinates, `resid` is the mismatch to drive to zero.
struct Search<'a> {
    params: usize,
    shift: &'a ShiftFn,
    resid: &'a dyn Fn(&[f64]) -> Point,
    evals: &'a Cell<usize>,
    budget: usize,
}

impl Search<'_> {
    fn remaining(&self) -> bool {
        self.evals.get() < self.budget
    }

    /// Damped Gauss-Newton with the minimum-norm step
    /// `d = J^T (J J^T + mu I)^-1 (-r)` and forward-difference Jacobians.
    fn refine(&self, start: Vec<f64>, tol: f64) -> (Vec<f64>, f64) {
        let mut s = start;
        let mut r = (self.resid)(&s);
        let mut mu = 1e-6;
        for _ in 0..200 {
            if inf_norm(&r) <= tol || !self.remaining() {
                break;
            }
            let m = r.len();
            let h = 1e-7;
            let mut jac = Matrix::zeros(m, self.params);
            for j in 0..self.params {
                let mut e = vec![0.0; self.params];
                e[j] = h;
                let rj = (self.resid)(&(self.shift)(&s, &e));
                for i in 0..m {
                    jac.set(i, j, (rj[i] - r[i]) / h);
                }
            }
            let jjt = jac.matmul(&jac.transpose());
            let scale = (0..m).map(|i| jjt.get(i, i)).sum::<f64>() / m as f64 + 1e-300;
            let base = sq_norm(&r);
            let mut accepted = false;
            while mu < 1e10 && self.remaining() {
                let mut a = jjt.clone();
                for i in 0..m {
                    a.set(i, i, a.get(i, i) + mu * scale);
                }
                let Some(z) = linalg::solve_square(&a, &linalg::neg(&r)) else {
                    mu *= 4.0;
                    continue;
                };
                let d = jac.transpose().mul_vec(&z);
                let s2 = (self.shift)(&s, &d);
                let r2 = (self.resid)(&s2);
                if sq_norm(&r2) < base {
                    s = s2;
                    r = r2;
                    mu = (mu / 3.0).max(1e-15);
                    accepted = true;
                    break;
                }
                mu *= 4.0;
            }
            if !accepted {
                break;
            }
        }
        let res = inf_norm(&r);
        (s, res)
    }

    /// Score `candidates`, refine the best [`MULTISTART`] of them, keep the
    /// lowest residual (ties broken lexicographically).
    fn multistart(&self, candidates: Vec<Vec<f64>>, tol: f64) -> (Vec<f64>, f64) {
        let mut scored: Vec<(f64, Vec<f64>)> = Vec::new();
        for c in candidates {
            if !self.remaining() {
                break;
            }
            let r = inf_norm(&(self.resid)(&c));
            if r <= tol {
                return (c, r);
            }
            scored.push((r, c));
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| linalg::lex_cmp(&a.1, &b.1)));
        let mut best: Option<(Vec<f64>, f64)> = None;
        for (_, c) in scored.into_iter().take(MULTISTART) {
            if !self.remaining() {
                break;
            }
            let (s, r) = self.refine(c, tol);
            let better = match &best {
                None => true,
                Some((bs, br)) => r < *br || (r == *br && linalg::lex_cmp(&s, bs).is_lt()),
            };
            if better {
                best = Some((s, r));
            }
            if best.as_ref().unwrap().1 <= tol {
                break;
            }
        }
        best.unwrap_or((Vec::new(), f64::INFINITY))
    }
}

fn sphere_shift(x: &[f64], d: &[f64]) -> Vec<f64> {
    let basis = linalg::complement_basis(&[x.to_vec()], x.len());
    let mut p = x.to_vec();
    for (b, di) in basis.iter().zip(d) {
        p = linalg::axpy(&p, *di, b);
    }
    linalg::normalize(&p).unwrap_or_else(|| x.to_vec())
}

fn random_unit(dim: usize, rng: &mut crate::Rng) -> Point {
    loop {
        let v: Point = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = linalg::norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return linalg::scale(&v, 1.0 / n);
        }
    }
}

/// Evaluate with a counter; every evaluation of `f` costs one unit.
fn counted<'a, F: MapEvaluator + ?Sized>(f: &'a F, evals: &'a Cell<usize>) -> impl Fn(&[f64]) -> Point + 'a {
    move |x| {
        evals.set(evals.get() + 1);
        f.eval(x)
    }
}

fn exhausted(best_residual: f64, evals: &Cell<usize>) -> Error {
    Error::BudgetExhausted { best_residual, evaluations: evals.get() }
}

/// A pair `(x, -x)` with `f(x) = f(-x)` for `f : S^n -> R^n`.
pub fn borsuk_ulam_pair<F: MapEvaluator + ?Sized>(f: &F, tol: f64, budget: usize) -> Result<CoincidencePair> {
    let space = f.space();
    let ModelSpace::RoundSphere(n) = space else {
        return Err(Error::PreconditionViolated("antipodal search needs a round sphere".into()));
    };
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension { dim: n, supported: "1, 2, 3" });
    }
    if f.out_dim() != n {
        return Err(Error::DimensionMismatch("antipodal search needs S^n -> R^n".into()));
    }
    let evals = Cell::new(0);
    let ev = counted(f, &evals);
    let g = |x: &[f64]| linalg::sub(&ev(x), &ev(&linalg::neg(x)));
    let finish = |x: Point, residual: f64, method| {
        let y = linalg::neg(&x);
        let distance = space.distance_unchecked(&x, &y);
        CoincidencePair { x, y, distance, residual, method, evaluations: evals.get() }
    };
    if n == 1 {
        // g(theta + pi) = -g(theta): a sign change on [0, pi]
        let at = |t: f64| vec![t.cos(), t.sin()];
        let (mut lo, mut hi) = (0.0, PI);
        let g0 = g(&at(lo))[0];
        if g0.abs() <= tol {
            return Ok(finish(at(lo), g0.abs(), "bisection"));
        }
        let mut best = (lo, g0.abs());
        while hi - lo > 1e-16 && evals.get() < budget {
            let mid = 0.5 * (lo + hi);
            let gm = g(&at(mid))[0];
            if gm.abs() < best.1 {
                best = (mid, gm.abs());
            }
            if gm.abs() <= tol {
                break;
            }
            if gm * g0 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if best.1 > tol {
            return Err(exhausted(best.1, &evals));
        }
        return Ok(finish(at(best.0), best.1, "bisection"));
    }
    let mut rng = crate::rng_from_seed(0xb0);
    let mut candidates = Vec::new();
    for i in 0..=n {
        let mut e = vec![0.0; n + 1];
        e[i] = 1.0;
        candidates.push(e);
    }
    for _ in 0..512 {
        let mut x = random_unit(n + 1, &mut rng);
        // one representative per antipodal pair
        if linalg::lex_cmp(&x, &linalg::neg(&x)).is_lt() {
            x = linalg::neg(&x);
        }
        candidates.push(x);
    }
    let search = Search { params: n, shift: &sphere_shift, resid: &g, evals: &evals, budget };
    let (x, r) = search.multistart(candidates, tol);
    if r > tol {
        return Err(exhausted(r, &evals));
    }
    Ok(finish(x, r, "multistart-lm"))
}

/// Endpoints of a geodesic segment of length `delta` centered at the state.
fn hopf_endpoints(space: ModelSpace, s: &[f64], delta: f64) -> (Point, Point) {
    match space {
        ModelSpace::FlatTorus => {
            let v = [s[2].cos() * delta / 2.0, s[2].sin() * delta / 2.0];
            let p = vec![wrap01(s[0] + v[0]), wrap01(s[1] + v[1])];
            let q = vec![wrap01(s[0] - v[0]), wrap01(s[1] - v[1])];
            (p, q)
        }
        _ => {
            let k = s.len() / 2;
            let (x, v) = (&s[..k], &s[k..]);
            (space.shoot_unchecked(x, v, delta / 2.0), space.shoot_unchecked(x, &linalg::neg(v), delta / 2.0))
        }
    }
}

/// Move a unit tangent vector `(x, v)` on the sphere: the first coordinate
/// slides `x` along `v`, the rest tilt `x` and `v` off their plane.
fn bundle_shift(s: &[f64], d: &[f64]) -> Vec<f64> {
    let k = s.len() / 2;
    let (x, v) = (&s[..k], &s[k..]);
    let e = linalg::complement_basis(&[x.to_vec(), v.to_vec()], k);
    let n = k - 1;
    let mut x2 = linalg::axpy(x, d[0], v);
    for (i, b) in e.iter().enumerate() {
        x2 = linalg::axpy(&x2, d[1 + i], b);
    }
    let Some(x2) = linalg::normalize(&x2) else { return s.to_vec() };
    let mut v2 = v.to_vec();
    for (i, b) in e.iter().enumerate() {
        v2 = linalg::axpy(&v2, d[n + i], b);
    }
    let v2 = linalg::axpy(&v2, -linalg::dot(&v2, &x2), &x2);
    let Some(v2) = linalg::normalize(&v2) else { return s.to_vec() };
    let mut out = x2;
    out.extend(v2);
    out
}

fn torus_shift(s: &[f64], d: &[f64]) -> Vec<f64> {
    vec![wrap01(s[0] + d[0]), wrap01(s[1] + d[1]), (s[2] + d[2]).rem_euclid(2.0 * PI)]
}

/// A pair at distance `delta` with equal images, for `f : X -> R^n` with
/// `X` a round sphere or the flat torus of dimension `n`.
pub fn hopf_pair<F: MapEvaluator + ?Sized>(f: &F, delta: f64, tol: f64, budget: usize, seed: u64) -> Result<CoincidencePair> {
    let space = f.space();
    if !matches!(space, ModelSpace::RoundSphere(_) | ModelSpace::FlatTorus) {
        return Err(Error::PreconditionViolated("distance-delta search needs a sphere or the torus".into()));
    }
    let rho = space.injectivity_radius();
    if !(delta > 0.0 && delta <= rho) {
        return Err(Error::DeltaOutOfRange { delta, rho });
    }
    let n = space.dim();
    if f.out_dim() != n {
        return Err(Error::DimensionMismatch("distance-delta search needs an n-dimensional Euclidean target".into()));
    }
    let evals = Cell::new(0);
    let ev = counted(f, &evals);
    let resid = |s: &[f64]| {
        let (p, q) = hopf_endpoints(space, s, delta);
        linalg::sub(&ev(&p), &ev(&q))
    };
    let mut rng = crate::rng_from_seed(seed);
    let candidates: Vec<Vec<f64>> = (0..512)
        .map(|_| match space {
            ModelSpace::FlatTorus => vec![rng.random::<f64>(), rng.random::<f64>(), rng.random_range(0.0..PI)],
            _ => {
                let x = random_unit(n + 1, &mut rng);
                let w = random_unit(n + 1, &mut rng);
                let v = linalg::normalize(&linalg::axpy(&w, -linalg::dot(&w, &x), &x)).unwrap_or_else(|| {
                    linalg::complement_basis(core::slice::from_ref(&x), n + 1)[0].clone()
                });
                let mut s = x;
                s.extend(v);
                s
            }
        })
        .collect();
    let shift: &ShiftFn =
        if space == ModelSpace::FlatTorus { &torus_shift } else { &bundle_shift };
    let search = Search { params: 2 * n - 1, shift, resid: &resid, evals: &evals, budget };
    let (s, r) = search.multistart(candidates, tol);
    if r > tol {
        return Err(exhausted(r, &evals));
    }
    let (x, y) = hopf_endpoints(space, &s, delta);
    let distance = space.distance_unchecked(&x, &y);
    let method = if space == ModelSpace::FlatTorus { "tangent-bundle-lm/torus-angle" } else { "tangent-bundle-lm/sphere-frame" };
    Ok(CoincidencePair { x, y, distance, residual: r, method, evaluations: evals.get() })
}

/// A pair at distance at least `rho - 1e-6` with equal images, for an
/// even-degree map between closed manifolds: antipodes on spheres, points
/// half a unit apart on the torus.
pub fn even_degree_pair(f: &PLMap, tol: f64, budget: usize, seed: u64) -> Result<CoincidencePair> {
    let closed_target = matches!(f.target(), Target::Complex(_)) && f.target().is_closed_manifold();
    if f.codim() != 0 || !f.source().is_closed_manifold() || !closed_target {
        return Err(Error::PreconditionViolated("needs closed source and target of equal dimension".into()));
    }
    if mod2_degree(f)? == 1 {
        return Err(Error::OddDegree);
    }
    let space = f.source().space();
    let n = space.dim();
    let evals = Cell::new(0);
    let ev = counted(f, &evals);
    let partner = |s: &[f64]| -> (Point, Point) {
        match space {
            ModelSpace::FlatTorus => {
                let p = vec![s[0], s[1]];
                let q = vec![wrap01(s[0] + 0.5 * s[2].cos()), wrap01(s[1] + 0.5 * s[2].sin())];
                (p, q)
            }
            _ => (s.to_vec(), linalg::neg(s)),
        }
    };
    let resid = |s: &[f64]| {
        let (p, q) = partner(s);
        linalg::sub(&ev(&p), &ev(&q))
    };
    let mut rng = crate::rng_from_seed(seed);
    let candidates: Vec<Vec<f64>> = (0..512)
        .map(|_| match space {
            ModelSpace::FlatTorus => vec![rng.random::<f64>(), rng.random::<f64>(), rng.random_range(0.0..2.0 * PI)],
            _ => random_unit(n + 1, &mut rng),
        })
        .collect();
    let (shift, params): (&ShiftFn, usize) =
        if space == ModelSpace::FlatTorus { (&torus_shift, 3) } else { (&sphere_shift, n) };
    let search = Search { params, shift, resid: &resid, evals: &evals, budget };
    let (s, r) = search.multistart(candidates, tol);
    if r > tol {
        return Err(exhausted(r, &evals));
    }
    let (x, y) = partner(&s);
    let distance = space.distance_unchecked(&x, &y);
    Ok(CoincidencePair { x, y, distance, residual: r, method: "far-pair-lm", evaluations: evals.get() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::cross_polytope_sphere;
    use crate::families::{AnalyticMap, Monomial};
    use crate::plmaps::make_pl_map;

    fn poly2() -> AnalyticMap {
        // (x^2 - y, z + 0.3 x)
        AnalyticMap::Polynomial {
            n: 2,
            outputs: vec![
                vec![Monomial { coef: 1.0, exps: vec![2, 0, 0] }, Monomial { coef: -1.0, exps: vec![0, 1, 0] }],
                vec![Monomial { coef: 1.0, exps: vec![0, 0, 1] }, Monomial { coef: 0.3, exps: vec![1, 0, 0] }],
            ],
        }
    }

    #[test]
    fn projection_poles() {
        let p = borsuk_ulam_pair(&AnalyticMap::Projection(2), 1e-10, 100_000).unwrap();
        assert!(p.x[2].abs() > 1.0 - 1e-9);
        assert_eq!(p.distance, PI);
    }

    #[test]
    fn constant_map_first_sample() {
        let c = AnalyticMap::Constant { space: ModelSpace::RoundSphere(2), value: vec![0.2, 0.1] };
        let p = borsuk_ulam_pair(&c, 1e-12, 1000).unwrap();
        assert_eq!(p.residual, 0.0);
        assert_eq!(p.evaluations, 2);
    }

    #[test]
    fn polynomial_pair_matches_grid_oracle() {
        let f = poly2();
        let p = borsuk_ulam_pair(&f, 1e-8, 200_000).unwrap();
        assert!(p.residual <= 1e-8);
        // oracle: dense latitude-longitude grid, then local pattern refinement
        let g = |x: &[f64]| {
            let a = f.eval(x);
            let b = f.eval(&linalg::neg(x));
            (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
        };
        let sph = |t: f64, u: f64| vec![t.sin() * u.cos(), t.sin() * u.sin(), t.cos()];
        let mut roots: Vec<Point> = Vec::new();
        for i in 0..=200 {
            for j in 0..400 {
                let (t, u) = (PI * i as f64 / 200.0, 2.0 * PI * j as f64 / 400.0);
                if g(&sph(t, u)) < 0.05 {
                    let (mut t, mut u, mut step) = (t, u, 0.01);
                    while step > 1e-12 {
                        let mut moved = false;
                        for (dt, du) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                            if g(&sph(t + dt, u + du)) < g(&sph(t, u)) {
                                t += dt;
                                u += du;
                                moved = true;
                            }
                        }
                        if !moved {
                            step /= 2.0;
                        }
                    }
                    if g(&sph(t, u)) < 1e-7 {
                        roots.push(sph(t, u));
                    }
                }
            }
        }
        assert!(!roots.is_empty());
        let near = roots.iter().map(|r| linalg::dist(r, &p.x).min(linalg::dist(r, &p.y))).fold(f64::INFINITY, f64::min);
        assert!(near < 1e-4, "closest oracle root {near}");
    }

    #[test]
    fn circle_bisection() {
        let f = AnalyticMap::Polynomial { n: 1, outputs: vec![vec![Monomial { coef: 1.0, exps: vec![1, 0] }, Monomial { coef: 0.4, exps: vec![0, 2] }]] };
        let p = borsuk_ulam_pair(&f, 1e-12, 1000).unwrap();
        assert!(p.residual <= 1e-12);
        assert_eq!(p.method, "bisection");
        assert_eq!(p.distance, PI);
    }

    #[test]
    fn hopf_on_projection() {
        let f = AnalyticMap::Projection(2);
        let p = hopf_pair(&f, PI / 2.0, 1e-10, 100_000, 1).unwrap();
        assert!((p.distance - PI / 2.0).abs() < 1e-9);
        assert!((p.x[2].abs() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        assert!(p.x[2] * p.y[2] < 0.0);
        let q = hopf_pair(&f, PI, 1e-10, 100_000, 1).unwrap();
        assert!(q.x[2].abs() > 1.0 - 1e-6);
        assert!(matches!(hopf_pair(&f, 4.0, 1e-10, 10, 1), Err(Error::DeltaOutOfRange { .. })));
    }

    #[test]
    fn hopf_on_torus_against_grid() {
        let mut rng = crate::rng_from_seed(21);
        let f = AnalyticMap::random_torus_trig(2, 2, &mut rng);
        let p = hopf_pair(&f, 0.25, 1e-6, 200_000, 3).unwrap();
        assert!(p.residual <= 1e-6);
        assert!((p.distance - 0.25).abs() < 1e-6);
        // grid over the tangent bundle: some cell must come close too
        let mut best = f64::INFINITY;
        for i in 0..40 {
            for j in 0..40 {
                for k in 0..40 {
                    let s = [i as f64 / 40.0, j as f64 / 40.0, PI * k as f64 / 40.0];
                    let (a, b) = hopf_endpoints(ModelSpace::FlatTorus, &s, 0.25);
                    best = best.min(inf_norm(&linalg::sub(&f.eval(&a), &f.eval(&b))));
                }
            }
        }
        assert!(best < 0.5, "grid minimum {best}");
        assert!(p.residual <= best);
    }

    #[test]
    fn far_pairs_of_even_maps() {
        let c = cross_polytope_sphere(1, 5).unwrap();
        let wrap = AnalyticMap::CircleWrap { degree: 2, harmonics: vec![] }.to_pl_map(&c).unwrap();
        let p = even_degree_pair(&wrap, 1e-9, 50_000, 1).unwrap();
        assert_eq!(p.distance, PI);
        let mut rng = crate::rng_from_seed(5);
        let osc = AnalyticMap::random_circle_map(0, &mut rng).to_pl_map(&c).unwrap();
        let p = even_degree_pair(&osc, 1e-9, 50_000, 1).unwrap();
        assert!(p.distance >= PI - 1e-6 && p.residual <= 1e-9);
        let k = cross_polytope_sphere(2, 1).unwrap();
        let tgt = cross_polytope_sphere(2, 0).unwrap();
        let v = tgt.vertices()[0].clone();
        let konst = make_pl_map(k.clone(), Target::Complex(tgt), vec![v; k.count(0)]).unwrap();
        assert_eq!(even_degree_pair(&konst, 1e-12, 1000, 1).unwrap().residual, 0.0);
        let id = AnalyticMap::random_circle_map(1, &mut rng).to_pl_map(&c).unwrap();
        assert_eq!(even_degree_pair(&id, 1e-9, 1000, 1), Err(Error::OddDegree));
    }
}
