//! Smallest enclosing cap of a finite set on `S^n`.
//!
//! Sets inside a closed hemisphere are handled by the move-to-front Welzl
//! recursion, where the circumcap of a support set is computed in the span of
//! its points. Sets that meet every closed hemisphere have a minimal cap of
//! radius above `pi/2`; on `S^2` its radius is read off the convex hull as
//! `acos(-h_min)`, where `h_min` is the smallest facet offset, and on higher
//! spheres a pattern search is used.

use super::{hull, sphere_angle};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Point};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use rand::seq::SliceRandom;

#[derive(Debug, Clone, PartialEq)]
pub struct Cap {
    pub center: Point,
    /// Geodesic radius in radians.
    pub radius: f64,
}

impl Cap {
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        sphere_angle(&self.center, p) <= self.radius + tol
    }
}

const CONTAIN_TOL: f64 = 1e-12;

/// Cap whose boundary passes through every point of `support`, with the
/// smallest radius among such caps. `None` when no such cap exists.
fn circumcap(support: &[&Point], dim: usize) -> Option<Cap> {
    match support.len() {
        0 => None,
        1 => Some(Cap { center: support[0].clone(), radius: 0.0 }),
        2 | 3 if dim == 3 => circumcap_s2(support),
        k => {
            let mut g = Matrix::zeros(k, k);
            for i in 0..k {
                for j in 0..k {
                    g.set(i, j, linalg::dot(support[i], support[j]));
                }
            }
            let ls = linalg::least_squares(&g, &vec![1.0; k], 1e-13);
            let pts: Vec<Point> = support.iter().map(|p| (*p).clone()).collect();
            let c0 = linalg::combine(&pts, &ls.x);
            if ls.residual < 1e-10 && linalg::norm(&c0) > 1e-12 {
                let center = linalg::normalize(&c0)?;
                let radius = support.iter().map(|p| sphere_angle(&center, p)).fold(0.0, f64::max);
                return Some(Cap { center, radius });
            }
            // linearly dependent support: only centers orthogonal to the span
            // see all points at the same angle, which is pi/2
            let mut comp = linalg::complement_basis(&pts, dim);
            if comp.is_empty() {
                return None;
            }
            let mut e = comp.swap_remove(0);
            if linalg::lex_cmp(&linalg::neg(&e), &e) == core::cmp::Ordering::Less {
                e = linalg::neg(&e);
            }
            Some(Cap { center: e, radius: FRAC_PI_2 })
        }
    }
}

/// Circumcaps on `S^2` from the circle's plane normal, which stays well
/// conditioned when the plane nearly passes through the origin.
fn circumcap_s2(support: &[&Point]) -> Option<Cap> {
    let c = if support.len() == 2 {
        linalg::normalize(&linalg::add(support[0], support[1]))?
    } else {
        let (a, b, c) = (support[0], support[1], support[2]);
        let u = linalg::sub(b, a);
        let v = linalg::sub(c, a);
        let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
        let n = linalg::normalize(&n)?;
        if linalg::dot(&n, a) < 0.0 {
            linalg::neg(&n)
        } else {
            n
        }
    };
    let radius = support.iter().map(|p| sphere_angle(&c, p)).fold(0.0, f64::max);
    Some(Cap { center: c, radius })
}

fn welzl<'a>(points: &[&'a Point], boundary: &mut Vec<&'a Point>, dim: usize) -> Option<Cap> {
    let mut cap = if boundary.len() == dim {
        return circumcap(boundary, dim);
    } else {
        circumcap(boundary, dim)
    };
    for i in 0..points.len() {
        let inside = cap.as_ref().map(|c| c.contains(points[i], CONTAIN_TOL)).unwrap_or(false);
        if !inside {
            boundary.push(points[i]);
            cap = welzl(&points[..i], boundary, dim);
            boundary.pop();
            cap.as_ref()?;
        }
    }
    cap
}

fn max_angle(center: &[f64], points: &[Point]) -> f64 {
    points.iter().map(|p| sphere_angle(center, p)).fold(0.0, f64::max)
}

/// Minimal closed cap containing `points` (unit vectors of equal length).
///
/// Ties between optimal centers are broken towards the lexicographically
/// smallest center.
pub fn smallest_enclosing_cap(points: &[Point]) -> Result<Cap> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    let dim = points[0].len();
    let pts: Vec<Point> = points
        .iter()
        .map(|p| linalg::normalize(p).ok_or(Error::InvalidPoint { offset: 1.0 }))
        .collect::<Result<_>>()?;
    let mut order: Vec<&Point> = pts.iter().collect();
    let mut rng = crate::rng_from_seed(0x5eed_cafe);
    order.shuffle(&mut rng);
    let mut boundary = Vec::new();
    if let Some(cap) = welzl(&order, &mut boundary, dim) {
        let r = max_angle(&cap.center, &pts);
        if r <= FRAC_PI_2 + 1e-9 && r <= cap.radius + 1e-10 {
            return Ok(Cap { center: cap.center, radius: r });
        }
    }
    Ok(beyond_hemisphere(&pts, dim))
}

/// Minimal cap for sets that are not inside any closed hemisphere.
fn beyond_hemisphere(pts: &[Point], dim: usize) -> Cap {
    if dim == 3 {
        match hull::hull_planes(pts, 1e-13) {
            Some(planes) => {
                let mut best: Option<Cap> = None;
                for (n, h) in planes {
                    let center = linalg::neg(&n);
                    let radius = (-h).clamp(-1.0, 1.0).acos();
                    let better = match &best {
                        None => true,
                        Some(b) => {
                            radius < b.radius - 1e-15
                                || ((radius - b.radius).abs() <= 1e-15
                                    && linalg::lex_cmp(&center, &b.center) == core::cmp::Ordering::Less)
                        }
                    };
                    if better {
                        best = Some(Cap { center, radius });
                    }
                }
                let cap = best.expect("hull has facets");
                let r = max_angle(&cap.center, pts);
                return Cap { center: cap.center, radius: r };
            }
            None => {
                // coplanar through the origin
                let mut comp = linalg::complement_basis(pts, 3);
                if let Some(mut e) = comp.pop() {
                    if linalg::lex_cmp(&linalg::neg(&e), &e) == core::cmp::Ordering::Less {
                        e = linalg::neg(&e);
                    }
                    let r = max_angle(&e, pts);
                    return Cap { center: e, radius: r };
                }
            }
        }
    }
    pattern_search(pts, dim)
}

/// Derivative-free minimization of the largest angle, multistart from the
/// input points and their antipodes.
fn pattern_search(pts: &[Point], dim: usize) -> Cap {
    let mut best = Cap { center: pts[0].clone(), radius: max_angle(&pts[0], pts) };
    let starts: Vec<Point> = pts.iter().take(64).flat_map(|p| [p.clone(), linalg::neg(p)]).collect();
    for s in starts {
        let mut c = s;
        let mut r = max_angle(&c, pts);
        let mut step = 0.5;
        while step > 1e-12 {
            let basis = linalg::complement_basis(core::slice::from_ref(&c), dim);
            let mut improved = false;
            for b in &basis {
                for sign in [1.0, -1.0] {
                    let cand = linalg::normalize(&linalg::axpy(&c, sign * step, b)).unwrap();
                    let rc = max_angle(&cand, pts);
                    if rc < r {
                        c = cand;
                        r = rc;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if r < best.radius {
            best = Cap { center: c, radius: r };
        }
    }
    best.radius = best.radius.min(PI);
    best
}
