//! Randomized checks of four facts about curves and balls on the round
//! sphere (and convex balls in the other model spaces).

use crate::error::{Error, Result};
use crate::linalg::{self, Point};
use crate::metrics::{smallest_enclosing_cap, sphere_angle, ModelSpace};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaVerdict {
    pub lemma: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Smallest margin seen; negative below `-tol` is a failure.
    pub worst_margin: f64,
    /// Input that produced the worst margin.
    pub worst_case: Vec<Point>,
    pub tol: f64,
    pub seed: u64,
}

impl LemmaVerdict {
    fn new(lemma: &'static str, tol: f64, seed: u64) -> Self {
        LemmaVerdict { lemma, trials: 0, failures: 0, worst_margin: f64::INFINITY, worst_case: Vec::new(), tol, seed }
    }

    fn record(&mut self, margin: f64, input: &[Point]) {
        self.trials += 1;
        if margin < -self.tol {
            self.failures += 1;
        }
        let worse = margin < self.worst_margin
            || (margin == self.worst_margin && input_cmp(input, &self.worst_case).is_lt());
        if worse {
            self.worst_margin = margin;
            self.worst_case = input.to_vec();
        }
    }
}

fn input_cmp(a: &[Point], b: &[Point]) -> core::cmp::Ordering {
    for (p, q) in a.iter().zip(b) {
        let o = linalg::lex_cmp(p, q);
        if o.is_ne() {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

fn check_closed(curve: &[Point]) -> Result<()> {
    if curve.len() < 2 || linalg::max_abs_diff(&curve[0], curve.last().unwrap()) > 1e-12 {
        return Err(Error::NotClosed);
    }
    Ok(())
}

pub fn polyline_length(curve: &[Point]) -> f64 {
    curve.windows(2).map(|w| sphere_angle(&w[0], &w[1])).sum()
}

/// `pi/2` minus the enclosing-cap radius of a closed curve, or `None`
/// when the curve is longer than `2 pi`.
pub fn hemisphere_check(curve: &[Point]) -> Result<Option<f64>> {
    check_closed(curve)?;
    if polyline_length(curve) > 2.0 * PI {
        return Ok(None);
    }
    let cap = smallest_enclosing_cap(&curve[..curve.len() - 1])?;
    Ok(Some(FRAC_PI_2 - cap.radius))
}

/// `(d(a,b) + d(a,c))/2 - d(a,m)` with `m` the midpoint of `[bc]`.
pub fn median_check(a: &[f64], b: &[f64], c: &[f64]) -> Result<f64> {
    let s2 = ModelSpace::RoundSphere(2);
    let (ab, ac) = (s2.distance(a, b)?, s2.distance(a, c)?);
    if ab + ac >= PI {
        return Err(Error::PreconditionViolated("d(a,b) + d(a,c) must be below pi".into()));
    }
    let m = s2.short_path(b, c, 0.5)?;
    Ok(0.5 * (ab + ac) - sphere_angle(a, &m))
}

/// Point at arclength `s` along a polyline of short arcs.
fn point_at_length(curve: &[Point], s: f64) -> Result<Point> {
    let s2 = ModelSpace::RoundSphere(2);
    let mut acc = 0.0;
    for w in curve.windows(2) {
        let l = sphere_angle(&w[0], &w[1]);
        if acc + l >= s && l > 0.0 {
            return s2.short_path(&w[0], &w[1], ((s - acc) / l).clamp(0.0, 1.0));
        }
        acc += l;
    }
    Ok(curve.last().unwrap().clone())
}

/// `l/4` minus the largest distance from the curve to the midpoint of the
/// chord between parameters `0` and `l/2`.
pub fn quarter_ball_check(curve: &[Point]) -> Result<f64> {
    check_closed(curve)?;
    let l = polyline_length(curve);
    if l >= 2.0 * PI {
        return Err(Error::PreconditionViolated("curve length must be below 2 pi".into()));
    }
    let a = &curve[0];
    let b = point_at_length(curve, 0.5 * l)?;
    let m = ModelSpace::RoundSphere(2).short_path(a, &b, 0.5)?;
    // balls of radius below pi/2 are convex, so vertices suffice
    let far = curve.iter().chain(core::iter::once(&b)).map(|p| sphere_angle(&m, p)).fold(0.0, f64::max);
    Ok(0.25 * l - far)
}

fn gaussian(dim: usize, rng: &mut crate::Rng) -> Point {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

fn random_sphere_point(rng: &mut crate::Rng) -> Point {
    loop {
        if let Some(p) = linalg::normalize(&gaussian(3, rng)) {
            return p;
        }
    }
}

fn tangent_frame(c: &[f64]) -> [Point; 2] {
    let b = linalg::complement_basis(&[c.to_vec()], 3);
    [b[0].clone(), b[1].clone()]
}

/// Closed geodesic polygon on `S^2` with length `target` (below `2 pi`): a
/// closed random walk in the tangent plane at a random point, pushed through
/// the exponential map with the scale found by bisection, then with its
/// longest edges subdivided until every edge is below `0.1`.
pub fn random_closed_curve(target: f64, rng: &mut crate::Rng) -> Vec<Point> {
    let s2 = ModelSpace::RoundSphere(2);
    let c = random_sphere_point(rng);
    let [e1, e2] = tangent_frame(&c);
    let k = rng.random_range(3..12);
    let mut steps: Vec<[f64; 2]> = (0..k).map(|_| [StandardNormal.sample(rng), StandardNormal.sample(rng)]).collect();
    let mean = steps.iter().fold([0.0, 0.0], |m, s| [m[0] + s[0] / k as f64, m[1] + s[1] / k as f64]);
    steps.iter_mut().for_each(|s| *s = [s[0] - mean[0], s[1] - mean[1]]);
    let mut walk = vec![[0.0, 0.0]];
    for s in &steps[..k - 1] {
        let p = *walk.last().unwrap();
        walk.push([p[0] + s[0], p[1] + s[1]]);
    }
    let center = walk.iter().fold([0.0, 0.0], |m, p| [m[0] + p[0] / k as f64, m[1] + p[1] / k as f64]);
    let walk: Vec<[f64; 2]> = walk.iter().map(|p| [p[0] - center[0], p[1] - center[1]]).collect();
    let reach = walk.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max).max(1e-12);
    let build = |scale: f64| -> Vec<Point> {
        let mut pts: Vec<Point> = walk
            .iter()
            .map(|p| {
                let v = linalg::add(&linalg::scale(&e1, p[0] * scale), &linalg::scale(&e2, p[1] * scale));
                let len = linalg::norm(&v);
                match linalg::normalize(&v) {
                    Some(u) => s2.shoot_unchecked(&c, &u, len),
                    None => c.clone(),
                }
            })
            .collect();
        pts.push(pts[0].clone());
        pts
    };
    // the exponential map stays injective on the walk
    let (mut lo, mut hi) = (0.0, 0.99 * PI / reach);
    let target = target.min(polyline_length(&build(hi)));
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if polyline_length(&build(mid)) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut pts = build(lo);
    loop {
        let (i, l) = pts
            .windows(2)
            .enumerate()
            .map(|(i, w)| (i, sphere_angle(&w[0], &w[1])))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        if l <= 0.1 {
            break;
        }
        let mid = s2.short_path(&pts[i], &pts[i + 1], 0.5).unwrap_or_else(|_| pts[i].clone());
        pts.insert(i + 1, mid);
    }
    pts
}

/// Random closed curves of length uniform in `(0, 2 pi)`.
pub fn hemisphere_campaign(trials: usize, tol: f64, seed: u64) -> Result<LemmaVerdict> {
    let mut v = LemmaVerdict::new("hemisphere", tol, seed);
    let mut rng = crate::rng_from_seed(seed);
    while v.trials < trials {
        let target = rng.random_range(1e-3..2.0 * PI);
        let curve = random_closed_curve(target, &mut rng);
        if let Some(m) = hemisphere_check(&curve)? {
            v.record(m, &curve);
        }
    }
    Ok(v)
}

/// Random triples with `d(a,b) + d(a,c)` uniform in `(0, pi)`.
pub fn median_campaign(trials: usize, tol: f64, seed: u64) -> Result<LemmaVerdict> {
    let s2 = ModelSpace::RoundSphere(2);
    let mut v = LemmaVerdict::new("median", tol, seed);
    let mut rng = crate::rng_from_seed(seed);
    while v.trials < trials {
        let a = random_sphere_point(&mut rng);
        let sum = rng.random_range(0.0..PI);
        let r1 = rng.random_range(0.0..1.0) * sum;
        let [e1, e2] = tangent_frame(&a);
        let dir = |t: f64| linalg::add(&linalg::scale(&e1, t.cos()), &linalg::scale(&e2, t.sin()));
        let b = s2.shoot_unchecked(&a, &dir(rng.random_range(0.0..2.0 * PI)), r1);
        let c = s2.shoot_unchecked(&a, &dir(rng.random_range(0.0..2.0 * PI)), sum - r1);
        match median_check(&a, &b, &c) {
            Ok(m) => v.record(m, &[a, b, c]),
            Err(Error::PreconditionViolated(_)) | Err(Error::OutsideShortPathDomain { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(v)
}

/// Random closed curves of length uniform in `(0, 2 pi)`.
pub fn quarter_ball_campaign(trials: usize, tol: f64, seed: u64) -> Result<LemmaVerdict> {
    let mut v = LemmaVerdict::new("quarter_ball", tol, seed);
    let mut rng = crate::rng_from_seed(seed);
    while v.trials < trials {
        let target = rng.random_range(1e-3..2.0 * PI - 1e-3);
        let curve = random_closed_curve(target, &mut rng);
        match quarter_ball_check(&curve) {
            Ok(m) => v.record(m, &curve),
            Err(Error::PreconditionViolated(_)) | Err(Error::OutsideShortPathDomain { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(v)
}

/// Random point at distance below `r` from `center`; half of the draws hug
/// the boundary.
fn point_in_ball(space: ModelSpace, center: &[f64], r: f64, rng: &mut crate::Rng) -> Point {
    let n = space.dim();
    let u = loop {
        let g = gaussian(center.len(), rng);
        let g = match space {
            ModelSpace::RoundSphere(_) => linalg::axpy(&g, -linalg::dot(&g, center), center),
            _ => g,
        };
        if let Some(u) = linalg::normalize(&g) {
            break u;
        }
    };
    let t: f64 = if rng.random::<bool>() {
        rng.random::<f64>().powf(1.0 / n as f64)
    } else {
        1.0 - 1e-3 * rng.random::<f64>()
    };
    space.shoot_unchecked(center, &u, r * t * (1.0 - 1e-12))
}

/// Pairs inside the ball of radius `r` at `center`: the shortest geodesic
/// between them, sampled at 33 points, must stay strictly inside.
pub fn ball_convexity_check(space: ModelSpace, center: &[f64], r: f64, pairs: usize, seed: u64) -> Result<LemmaVerdict> {
    space.validate(center, crate::TOL)?;
    let mut v = LemmaVerdict::new("convexity", 0.0, seed);
    let mut rng = crate::rng_from_seed(seed);
    while v.trials < pairs {
        let p = point_in_ball(space, center, r, &mut rng);
        let q = point_in_ball(space, center, r, &mut rng);
        let mut far = 0.0f64;
        for k in 1..32 {
            match space.short_path(&p, &q, k as f64 / 32.0) {
                Ok(x) => far = far.max(space.distance_unchecked(center, &x)),
                Err(Error::OutsideShortPathDomain { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        // strictly inside: a zero margin counts as a failure
        let margin = r - far;
        v.trials += 1;
        if margin <= 0.0 {
            v.failures += 1;
        }
        if margin < v.worst_margin {
            v.worst_margin = margin;
            v.worst_case = vec![center.to_vec(), p, q];
        }
    }
    Ok(v)
}

/// [`ball_convexity_check`] over `balls` random centers.
pub fn convexity_campaign(space: ModelSpace, r: f64, balls: usize, pairs: usize, seed: u64) -> Result<LemmaVerdict> {
    let mut rng = crate::rng_from_seed(seed);
    let mut total = LemmaVerdict::new("convexity", 0.0, seed);
    for _ in 0..balls {
        let center = match space {
            ModelSpace::RoundSphere(n) => linalg::normalize(&gaussian(n + 1, &mut rng)).unwrap(),
            ModelSpace::FlatTorus => vec![rng.random::<f64>(), rng.random::<f64>()],
            _ => gaussian(space.ambient_dim(), &mut rng),
        };
        let one = ball_convexity_check(space, &center, r, pairs, rng.random())?;
        total.trials += one.trials;
        total.failures += one.failures;
        if one.worst_margin < total.worst_margin {
            total.worst_margin = one.worst_margin;
            total.worst_case = one.worst_case;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_circle(colat: f64, n: usize) -> Vec<Point> {
        (0..=n)
            .map(|k| {
                let t = 2.0 * PI * (k % n) as f64 / n as f64;
                vec![colat.sin() * t.cos(), colat.sin() * t.sin(), colat.cos()]
            })
            .collect()
    }

    #[test]
    fn hemisphere_tight_cases() {
        let m = hemisphere_check(&small_circle(FRAC_PI_2, 64)).unwrap().unwrap();
        assert!(m.abs() <= 1e-9);
        let m = hemisphere_check(&small_circle(0.4, 64)).unwrap().unwrap();
        assert!((FRAC_PI_2 - m - 0.4).abs() < 1e-9);
        assert_eq!(hemisphere_check(&small_circle(0.4, 64)[..10]), Err(Error::NotClosed));
    }

    #[test]
    fn median_against_law_of_cosines() {
        let a = vec![0.0, 0.0, 1.0];
        let b = vec![0.5f64.sin(), 0.0, 0.5f64.cos()];
        assert_eq!(median_check(&a, &b, &b).unwrap(), 0.0);
        // equilateral triangle of side s
        let s = 0.5f64;
        let half = (s.cos() - s.cos() * s.cos()) / (s.sin() * s.sin());
        let ang = half.clamp(-1.0, 1.0).acos();
        let c = vec![s.sin() * ang.cos(), s.sin() * ang.sin(), s.cos()];
        assert!((sphere_angle(&b, &c) - s).abs() < 1e-12);
        let am = (s.cos() / (s / 2.0).cos()).acos();
        let m = median_check(&a, &b, &c).unwrap();
        assert!(m > 0.0);
        assert!((m - (s - am)).abs() < 1e-12);
        let far = vec![0.0, 0.0, -1.0];
        assert!(matches!(median_check(&a, &far, &b), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn quarter_ball_examples() {
        for colat in [0.2, 0.7, 1.2, 1.5] {
            assert!(quarter_ball_check(&small_circle(colat, 90)).unwrap() >= -1e-9);
        }
        let a = vec![1.0, 0.0, 0.0];
        let b = vec![0.8f64.cos(), 0.8f64.sin(), 0.0];
        let m = quarter_ball_check(&[a.clone(), b, a]).unwrap();
        assert!(m.abs() < 1e-12);
    }

    #[test]
    fn generated_curves_hit_their_length() {
        let mut rng = crate::rng_from_seed(4);
        for target in [0.3, 2.0, 5.5] {
            let c = random_closed_curve(target, &mut rng);
            assert!(linalg::max_abs_diff(&c[0], c.last().unwrap()) == 0.0);
            assert!(polyline_length(&c) <= target + 1e-9);
            assert!(c.windows(2).all(|w| sphere_angle(&w[0], &w[1]) <= 0.1));
        }
    }

    #[test]
    fn small_campaigns() {
        assert_eq!(hemisphere_campaign(200, 1e-9, 1).unwrap().failures, 0);
        assert_eq!(median_campaign(2000, 1e-12, 2).unwrap().failures, 0);
        assert_eq!(quarter_ball_campaign(200, 1e-9, 3).unwrap().failures, 0);
    }

    #[test]
    fn convexity_radius_is_sharp() {
        let n = vec![0.0, 0.0, 1.0];
        let s2 = ModelSpace::RoundSphere(2);
        assert_eq!(ball_convexity_check(s2, &n, FRAC_PI_2 - 0.01, 2000, 1).unwrap().failures, 0);
        assert!(ball_convexity_check(s2, &n, FRAC_PI_2 + 0.05, 2000, 1).unwrap().failures > 0);
        assert_eq!(convexity_campaign(ModelSpace::FlatTorus, 0.2, 10, 200, 5).unwrap().failures, 0);
    }
}
