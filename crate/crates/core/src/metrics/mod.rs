//! Metric backends for the model spaces.
//!
//! Points are stored in ambient Euclidean coordinates: unit vectors in
//! `R^{n+1}` for the round sphere `S^n`, coordinates in `[0, 1)^2` for the flat
//! torus `R^2 / Z^2`, plain coordinates for Euclidean space and the unit ball.

mod cap;
mod hull;

pub use cap::{smallest_enclosing_cap, Cap};

use crate::error::{Error, Result};
use crate::linalg::{self, Point};
use core::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelSpace {
    /// Unit sphere `S^n` in `R^{n+1}`.
    RoundSphere(usize),
    /// `R^n`.
    Euclidean(usize),
    /// Closed unit ball `B^n` in `R^n`.
    EuclideanBall(usize),
    /// `R^2 / Z^2` with the flat metric.
    FlatTorus,
}

impl ModelSpace {
    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match *self {
            ModelSpace::RoundSphere(n) | ModelSpace::Euclidean(n) | ModelSpace::EuclideanBall(n) => n,
            ModelSpace::FlatTorus => 2,
        }
    }

    /// Number of stored coordinates per point.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            ModelSpace::RoundSphere(n) => n + 1,
            ModelSpace::Euclidean(n) | ModelSpace::EuclideanBall(n) => n,
            ModelSpace::FlatTorus => 2,
        }
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self, ModelSpace::Euclidean(_))
    }

    pub fn is_closed_manifold(&self) -> bool {
        matches!(self, ModelSpace::RoundSphere(_) | ModelSpace::FlatTorus)
    }

    /// Injectivity radius `rho`.
    pub fn injectivity_radius(&self) -> f64 {
        self.constants().0
    }

    /// Convexity radius `kappa`.
    pub fn convexity_radius(&self) -> f64 {
        self.constants().1
    }

    /// `(rho, kappa)` in closed form.
    pub fn constants(&self) -> (f64, f64) {
        match self {
            ModelSpace::RoundSphere(_) => (PI, PI / 2.0),
            ModelSpace::FlatTorus => (0.5, 0.25),
            ModelSpace::Euclidean(_) | ModelSpace::EuclideanBall(_) => (f64::INFINITY, f64::INFINITY),
        }
    }

    /// Diameter of the whole space.
    pub fn diameter(&self) -> f64 {
        match self {
            ModelSpace::RoundSphere(_) => PI,
            ModelSpace::FlatTorus => core::f64::consts::FRAC_1_SQRT_2,
            ModelSpace::EuclideanBall(_) => 2.0,
            ModelSpace::Euclidean(_) => f64::INFINITY,
        }
    }

    /// Stable identifier used in file formats.
    pub fn tag(&self) -> alloc::string::String {
        use alloc::format;
        match self {
            ModelSpace::RoundSphere(n) => format!("S{n}"),
            ModelSpace::Euclidean(n) => format!("R{n}"),
            ModelSpace::EuclideanBall(n) => format!("B{n}"),
            ModelSpace::FlatTorus => "T2".into(),
        }
    }

    pub fn from_tag(tag: &str) -> Option<ModelSpace> {
        if tag == "T2" {
            return Some(ModelSpace::FlatTorus);
        }
        let (kind, n) = tag.split_at(1.min(tag.len()));
        let n: usize = n.parse().ok()?;
        match kind {
            "S" => Some(ModelSpace::RoundSphere(n)),
            "R" => Some(ModelSpace::Euclidean(n)),
            "B" => Some(ModelSpace::EuclideanBall(n)),
            _ => None,
        }
    }

    /// Check that `p` is a point of the space within `tol`.
    pub fn validate(&self, p: &[f64], tol: f64) -> Result<()> {
        if p.len() != self.ambient_dim() || p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPoint { offset: f64::INFINITY });
        }
        let offset = match self {
            ModelSpace::RoundSphere(_) => (linalg::norm(p) - 1.0).abs(),
            ModelSpace::EuclideanBall(_) => (linalg::norm(p) - 1.0).max(0.0),
            ModelSpace::Euclidean(_) | ModelSpace::FlatTorus => 0.0,
        };
        if offset > tol {
            Err(Error::InvalidPoint { offset })
        } else {
            Ok(())
        }
    }

    /// Move an ambient point onto the space: radial projection for spheres,
    /// reduction modulo 1 for the torus.
    pub fn project(&self, p: &[f64]) -> Point {
        match self {
            ModelSpace::RoundSphere(_) => linalg::normalize(p).unwrap_or_else(|| p.to_vec()),
            ModelSpace::FlatTorus => p.iter().map(|x| wrap01(*x)).collect(),
            ModelSpace::Euclidean(_) | ModelSpace::EuclideanBall(_) => p.to_vec(),
        }
    }

    /// Geodesic distance; points are validated at tolerance `1e-9`.
    pub fn distance(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        self.validate(p, crate::TOL)?;
        self.validate(q, crate::TOL)?;
        Ok(self.distance_unchecked(p, q))
    }

    /// Geodesic distance without validation.
    pub fn distance_unchecked(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            ModelSpace::RoundSphere(_) => sphere_angle(p, q),
            ModelSpace::FlatTorus => torus_delta(p, q).iter().map(|d| d * d).sum::<f64>().sqrt(),
            ModelSpace::Euclidean(_) | ModelSpace::EuclideanBall(_) => linalg::dist(p, q),
        }
    }

    /// Point at parameter `t` of the unique shortest geodesic from `p` to `q`.
    ///
    /// The arguments are put in lexicographic order before evaluating, so
    /// `short_path(p, q, t)` and `short_path(q, p, 1 - t)` share one code path.
    pub fn short_path(&self, p: &[f64], q: &[f64], t: f64) -> Result<Point> {
        self.validate(p, crate::TOL)?;
        self.validate(q, crate::TOL)?;
        if p == q {
            return Ok(p.to_vec());
        }
        let d = self.distance_unchecked(p, q);
        if d >= self.injectivity_radius() {
            return Err(Error::OutsideShortPathDomain { p: p.to_vec(), q: q.to_vec(), distance: d });
        }
        if linalg::lex_cmp(p, q) == core::cmp::Ordering::Greater {
            return Ok(self.path_ordered(q, p, 1.0 - t, d));
        }
        Ok(self.path_ordered(p, q, t, d))
    }

    fn path_ordered(&self, p: &[f64], q: &[f64], t: f64, d: f64) -> Point {
        if t == 0.0 {
            return p.to_vec();
        }
        if t == 1.0 {
            return q.to_vec();
        }
        match self {
            ModelSpace::RoundSphere(_) => {
                let s = d.sin();
                let wp = ((1.0 - t) * d).sin() / s;
                let wq = (t * d).sin() / s;
                p.iter().zip(q).map(|(a, b)| wp * a + wq * b).collect()
            }
            ModelSpace::FlatTorus => {
                let delta = torus_delta(q, p);
                p.iter().zip(&delta).map(|(a, dd)| wrap01(a + t * dd)).collect()
            }
            ModelSpace::Euclidean(_) | ModelSpace::EuclideanBall(_) => {
                p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect()
            }
        }
    }

    /// Endpoint of the geodesic of length `len` leaving `x` in unit direction `v`.
    pub fn geodesic_shoot(&self, x: &[f64], v: &[f64], len: f64) -> Result<Point> {
        self.validate(x, crate::TOL)?;
        let unit = (linalg::norm(v) - 1.0).abs();
        let normal = match self {
            ModelSpace::RoundSphere(_) => linalg::dot(x, v).abs(),
            _ => 0.0,
        };
        let offset = unit.max(normal);
        if v.len() != x.len() || offset > crate::TOL {
            return Err(Error::InvalidTangent { offset });
        }
        if len < 0.0 {
            return Err(Error::PreconditionViolated("negative geodesic length".into()));
        }
        Ok(self.shoot_unchecked(x, v, len))
    }

    pub(crate) fn shoot_unchecked(&self, x: &[f64], v: &[f64], len: f64) -> Point {
        match self {
            ModelSpace::RoundSphere(_) => {
                let (s, c) = (len.sin(), len.cos());
                x.iter().zip(v).map(|(a, b)| c * a + s * b).collect()
            }
            ModelSpace::FlatTorus => x.iter().zip(v).map(|(a, b)| wrap01(a + len * b)).collect(),
            ModelSpace::Euclidean(_) | ModelSpace::EuclideanBall(_) => linalg::axpy(x, len, v),
        }
    }

    /// Maximum pairwise distance of a finite set.
    pub fn set_diameter(&self, points: &[Point]) -> Result<f64> {
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        for p in points {
            self.validate(p, crate::TOL)?;
        }
        Ok(self.diameter_unchecked(points))
    }

    pub(crate) fn diameter_unchecked(&self, points: &[Point]) -> f64 {
        let mut best = 0.0f64;
        for (i, p) in points.iter().enumerate() {
            for q in &points[i + 1..] {
                best = best.max(self.distance_unchecked(p, q));
            }
        }
        best
    }
}

/// Angle between two unit vectors, accurate near `0` and near `pi`.
pub fn sphere_angle(p: &[f64], q: &[f64]) -> f64 {
    let mut dn = 0.0;
    let mut sn = 0.0;
    for (a, b) in p.iter().zip(q) {
        dn += (a - b) * (a - b);
        sn += (a + b) * (a + b);
    }
    2.0 * dn.sqrt().atan2(sn.sqrt())
}

/// Componentwise shortest displacement from `q` to `p` on the unit torus.
pub fn torus_delta(p: &[f64], q: &[f64]) -> Point {
    p.iter()
        .zip(q)
        .map(|(a, b)| {
            let d = a - b;
            d - d.round()
        })
        .collect()
}

#[inline]
pub(crate) fn wrap01(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::Rng;

    fn random_point(space: ModelSpace, rng: &mut crate::Rng) -> Point {
        match space {
            ModelSpace::RoundSphere(n) => {
                let v: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
                linalg::normalize(&v).unwrap()
            }
            ModelSpace::FlatTorus => vec![rng.random::<f64>(), rng.random::<f64>()],
            ModelSpace::Euclidean(n) => (0..n).map(|_| rng.random_range(-3.0..3.0)).collect(),
            ModelSpace::EuclideanBall(n) => loop {
                let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                if linalg::norm(&v) <= 1.0 {
                    break v;
                }
            },
        }
    }

    #[test]
    fn distance_examples() {
        let s2 = ModelSpace::RoundSphere(2);
        assert_eq!(s2.distance(&[0.0, 0.0, 1.0], &[0.0, 0.0, -1.0]).unwrap(), PI);
        let t = ModelSpace::FlatTorus;
        assert!((t.distance(&[0.1, 0.1], &[0.9, 0.1]).unwrap() - 0.2).abs() < 1e-12);
        let r2 = ModelSpace::Euclidean(2);
        assert_eq!(r2.distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert!(matches!(s2.distance(&[0.0, 0.0, 1.1], &[0.0, 0.0, 1.0]), Err(Error::InvalidPoint { .. })));
    }

    #[test]
    fn short_path_examples() {
        let s2 = ModelSpace::RoundSphere(2);
        let p = [0.6, 0.0, 0.8];
        assert_eq!(s2.short_path(&p, &p, 0.7).unwrap(), p.to_vec());
        let m = s2.short_path(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 0.5).unwrap();
        let h = 1.0 / 2.0f64.sqrt();
        assert!(linalg::max_abs_diff(&m, &[h, h, 0.0]) < 1e-15);
        for t in [0.0, 0.3, 1.0] {
            assert!(matches!(
                s2.short_path(&[0.0, 0.0, 1.0], &[0.0, 0.0, -1.0], t),
                Err(Error::OutsideShortPathDomain { .. })
            ));
        }
    }

    #[test]
    fn short_path_equivariance() {
        let mut rng = rng_from_seed(11);
        for space in [ModelSpace::RoundSphere(2), ModelSpace::FlatTorus, ModelSpace::Euclidean(3)] {
            for _ in 0..500 {
                let p = random_point(space, &mut rng);
                let q = random_point(space, &mut rng);
                if space.distance_unchecked(&p, &q) >= space.injectivity_radius() - 1e-6 {
                    continue;
                }
                for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
                    assert_eq!(space.short_path(&p, &q, t).unwrap(), space.short_path(&q, &p, 1.0 - t).unwrap());
                }
                let t: f64 = rng.random();
                let a = space.short_path(&p, &q, t).unwrap();
                let b = space.short_path(&q, &p, 1.0 - t).unwrap();
                assert!(space.distance_unchecked(&a, &b) < 1e-14);
                assert_eq!(space.short_path(&p, &q, 0.0).unwrap(), p);
                assert_eq!(space.short_path(&p, &q, 1.0).unwrap(), q);
            }
        }
    }

    #[test]
    fn shoot_examples() {
        let s2 = ModelSpace::RoundSphere(2);
        let e = s2.geodesic_shoot(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], PI / 2.0).unwrap();
        assert!(linalg::max_abs_diff(&e, &[0.0, 1.0, 0.0]) < 1e-15);
        let x = [0.0, 0.6, 0.8];
        assert_eq!(s2.geodesic_shoot(&x, &[1.0, 0.0, 0.0], 0.0).unwrap(), x.to_vec());
        assert!(matches!(s2.geodesic_shoot(&x, &[0.0, 1.0, 0.0], 1.0), Err(Error::InvalidTangent { .. })));
    }

    #[test]
    fn opposite_shots_are_two_d_apart() {
        let s2 = ModelSpace::RoundSphere(2);
        let mut rng = rng_from_seed(5);
        for _ in 0..2000 {
            let x = random_point(s2, &mut rng);
            let raw = random_point(s2, &mut rng);
            let v = linalg::normalize(&linalg::axpy(&raw, -linalg::dot(&raw, &x), &x)).unwrap();
            let d: f64 = rng.random_range(0.0..PI / 2.0);
            let a = s2.geodesic_shoot(&x, &v, d).unwrap();
            let b = s2.geodesic_shoot(&x, &linalg::neg(&v), d).unwrap();
            assert!((s2.distance_unchecked(&a, &b) - 2.0 * d).abs() < 1e-12);
        }
    }

    #[test]
    fn diameter_examples() {
        let s2 = ModelSpace::RoundSphere(2);
        assert_eq!(s2.set_diameter(&[vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]]).unwrap(), PI);
        let b2 = ModelSpace::EuclideanBall(2);
        let tri: Vec<Point> = (0..3)
            .map(|k| {
                let a = PI / 2.0 + 2.0 * PI * k as f64 / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        assert!((b2.set_diameter(&tri).unwrap() - 3.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(s2.set_diameter(&[vec![1.0, 0.0, 0.0]]).unwrap(), 0.0);
        assert_eq!(s2.set_diameter(&[]), Err(Error::EmptySet));
    }

    #[test]
    fn triangle_inequality() {
        let mut rng = rng_from_seed(99);
        for space in [
            ModelSpace::RoundSphere(2),
            ModelSpace::RoundSphere(1),
            ModelSpace::FlatTorus,
            ModelSpace::Euclidean(2),
            ModelSpace::EuclideanBall(3),
        ] {
            for _ in 0..100_000 {
                let a = random_point(space, &mut rng);
                let b = random_point(space, &mut rng);
                let c = random_point(space, &mut rng);
                let slack = space.distance_unchecked(&a, &b) + space.distance_unchecked(&b, &c)
                    - space.distance_unchecked(&a, &c);
                assert!(slack >= -1e-12, "{space:?} {slack}");
            }
        }
    }

    #[test]
    fn constants_examples() {
        assert_eq!(ModelSpace::RoundSphere(2).constants(), (PI, PI / 2.0));
        assert_eq!(ModelSpace::Euclidean(3).constants(), (f64::INFINITY, f64::INFINITY));
        assert_eq!(ModelSpace::FlatTorus.constants(), (0.5, 0.25));
        for s in [ModelSpace::RoundSphere(1), ModelSpace::FlatTorus, ModelSpace::EuclideanBall(2)] {
            let (rho, kappa) = s.constants();
            assert!(rho >= 2.0 * kappa);
        }
    }

    /// Brute-force scan on the unit torus: below distance 1/2 the minimizing
    /// lattice translate is unique, and at 1/2 a second one appears.
    #[test]
    fn torus_rho_by_translate_scan() {
        let mut rng = rng_from_seed(3);
        let count_minimizers = |p: &[f64], q: &[f64]| {
            let mut ds = Vec::new();
            for i in -2i32..=2 {
                for j in -2i32..=2 {
                    let dx = q[0] + i as f64 - p[0];
                    let dy = q[1] + j as f64 - p[1];
                    ds.push((dx * dx + dy * dy).sqrt());
                }
            }
            let m = ds.iter().cloned().fold(f64::INFINITY, f64::min);
            (m, ds.iter().filter(|d| (**d - m).abs() < 1e-12).count())
        };
        for _ in 0..20_000 {
            let p = [rng.random::<f64>(), rng.random::<f64>()];
            let q = [rng.random::<f64>(), rng.random::<f64>()];
            let (m, k) = count_minimizers(&p, &q);
            if m < 0.5 - 1e-9 {
                assert_eq!(k, 1);
            }
        }
        let (m, k) = count_minimizers(&[0.0, 0.0], &[0.5, 0.0]);
        assert!((m - 0.5).abs() < 1e-12 && k == 2);
    }

    #[test]
    fn tags_round_trip() {
        for s in [ModelSpace::RoundSphere(3), ModelSpace::Euclidean(2), ModelSpace::EuclideanBall(2), ModelSpace::FlatTorus] {
            assert_eq!(ModelSpace::from_tag(&s.tag()), Some(s));
        }
    }
}
