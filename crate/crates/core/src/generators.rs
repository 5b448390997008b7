//! Random map generators for the harnesses.

use crate::complexes::SimplicialComplex;
use crate::error::Result;
use crate::families::{AnalyticMap, MapEvaluator};
use crate::linalg::{self, Point};
use crate::metrics::ModelSpace;
use crate::plmaps::{make_pl_map, PLMap, Target};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// The cone over three points: legs of unit length from the origin of `R^2`
/// at angles `pi/2 + 2 pi k / 3`.
pub fn tripod() -> SimplicialComplex {
    let mut vertices = vec![vec![0.0, 0.0]];
    for k in 0..3 {
        let a = PI / 2.0 + 2.0 * PI * k as f64 / 3.0;
        vertices.push(vec![a.cos(), a.sin()]);
    }
    SimplicialComplex::from_top(ModelSpace::Euclidean(2), vertices, vec![vec![0, 1], vec![0, 2], vec![0, 3]])
        .expect("tripod is valid")
}

/// Point at parameter `t` in `[0, 1]` on leg `leg` of [`tripod`].
pub fn tripod_point(leg: usize, t: f64) -> Point {
    let a = PI / 2.0 + 2.0 * PI * leg as f64 / 3.0;
    vec![t * a.cos(), t * a.sin()]
}

/// Simplicial map onto the tripod from per-vertex `(leg, t)` data: any two
/// adjacent vertices on different legs are moved to the apex, so every
/// simplex lands on a single leg.
fn tripod_from_legs(source: &SimplicialComplex, mut legs: Vec<(usize, f64)>) -> Result<PLMap> {
    let mut to_apex = vec![false; legs.len()];
    for e in source.simplices(1) {
        let (a, b) = (legs[e[0]], legs[e[1]]);
        if a.1 > 0.0 && b.1 > 0.0 && a.0 != b.0 {
            to_apex[e[0]] = true;
            to_apex[e[1]] = true;
        }
    }
    for (l, apex) in legs.iter_mut().zip(&to_apex) {
        if *apex {
            l.1 = 0.0;
        }
    }
    let images = legs.iter().map(|&(leg, t)| tripod_point(leg, t)).collect();
    make_pl_map(source.clone(), Target::Complex(tripod()), images)
}

/// Height to the tripod: the upper half of the sphere goes out along leg 0,
/// the lower half along leg 1, the equator to the apex.
pub fn height_to_tripod(source: &SimplicialComplex) -> Result<PLMap> {
    let n = source.dim();
    let legs = source
        .vertices()
        .iter()
        .map(|v| {
            let z = v[n];
            if z > 0.0 {
                (0, z)
            } else if z < 0.0 {
                (1, -z)
            } else {
                (0, 0.0)
            }
        })
        .collect();
    tripod_from_legs(source, legs)
}

/// Random simplicial map to the tripod: a random planar polynomial picks the
/// leg by its angular sector and the position by its length.
pub fn random_tripod_map(source: &SimplicialComplex, rng: &mut crate::Rng) -> Result<PLMap> {
    let n = source.dim();
    let psi = AnalyticMap::random_polynomial(n, 2, 3, rng);
    let vals: Vec<Point> = source.vertices().iter().map(|v| psi.eval(v)).collect();
    let rmax = vals.iter().map(|p| linalg::norm(p)).fold(0.0, f64::max).max(1e-300);
    let legs = vals
        .iter()
        .map(|p| {
            let a = (f64::atan2(p[1], p[0]) - PI / 2.0 + PI / 3.0).rem_euclid(2.0 * PI);
            let leg = ((a / (2.0 * PI / 3.0)) as usize).min(2);
            (leg, linalg::norm(p) / rmax)
        })
        .collect();
    tripod_from_legs(source, legs)
}

/// Random polynomial map of degree at most 3 sampled on `source`.
pub fn random_polynomial_map(source: &SimplicialComplex, m: usize, rng: &mut crate::Rng) -> Result<PLMap> {
    AnalyticMap::random_polynomial(source.dim(), m, 3, rng).to_pl_map(source)
}

/// Random trigonometric map on the torus sampled on `source`.
pub fn random_torus_map(source: &SimplicialComplex, m: usize, rng: &mut crate::Rng) -> Result<PLMap> {
    AnalyticMap::random_torus_trig(m, 2, rng).to_pl_map(source)
}
