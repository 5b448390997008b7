//! Closed-form maps used as test subjects, and the evaluator interface the
//! coincidence searches work against.

use crate::complexes::SimplicialComplex;
use crate::error::{Error, Result};
use crate::linalg::{self, Point};
use crate::metrics::ModelSpace;
use crate::plmaps::{make_pl_map, PLMap, Target};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use rand::Rng as _;

/// Anything that can be evaluated at points of a model space.
pub trait MapEvaluator {
    fn space(&self) -> ModelSpace;
    fn out_dim(&self) -> usize;
    /// Image of a point of the space. Points are assumed valid.
    fn eval(&self, x: &[f64]) -> Point;
}

impl MapEvaluator for PLMap {
    fn space(&self) -> ModelSpace {
        self.source().space()
    }

    fn out_dim(&self) -> usize {
        self.target().ambient_dim()
    }

    fn eval(&self, x: &[f64]) -> Point {
        self.evaluate(x).unwrap_or_else(|_| vec![f64::NAN; self.out_dim()])
    }
}

/// One monomial `coef * prod x_i^exp_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    pub exps: Vec<u8>,
}

/// One trigonometric term on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub coef: f64,
    pub freq: [i32; 2],
    /// Sine instead of cosine.
    pub sine: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticMap {
    /// `S^n -> R^n`, dropping the last coordinate.
    Projection(usize),
    /// `S^n -> R`, the last coordinate.
    Height(usize),
    /// Polynomial in the ambient coordinates of `S^n`, one list per output.
    Polynomial { n: usize, outputs: Vec<Vec<Monomial>> },
    /// Trigonometric polynomial on the flat torus, one list per output.
    TorusTrig { outputs: Vec<Vec<TrigTerm>> },
    Constant { space: ModelSpace, value: Point },
    /// `S^1 -> S^1`, angle `t -> degree * t + sum a_k sin(k t + b_k)`.
    CircleWrap { degree: i32, harmonics: Vec<(f64, f64)> },
    /// `S^2 -> S^2`, doubling the longitude (degree 2).
    LongitudeDoubling,
    /// `S^2 -> S^2`, `x -> normalize(base + lin * x)` with `|lin| < 1`
    /// (misses `-base`, so degree 0).
    ShiftedLinear { base: Point, lin: [[f64; 3]; 3] },
}

fn monomial_exponents(vars: usize, degree: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..vars {
        let mut next = Vec::new();
        for e in &out {
            let used: usize = e.iter().map(|&x| x as usize).sum();
            for k in 0..=(degree - used) {
                let mut e2 = e.clone();
                e2.push(k as u8);
                next.push(e2);
            }
        }
        out = next;
    }
    out
}

impl AnalyticMap {
    /// Random polynomial map `S^n -> R^m` of total degree at most `degree`,
    /// coefficients uniform in `[-1, 1]`.
    pub fn random_polynomial(n: usize, m: usize, degree: usize, rng: &mut crate::Rng) -> Self {
        let exps = monomial_exponents(n + 1, degree);
        let outputs = (0..m)
            .map(|_| exps.iter().map(|e| Monomial { coef: rng.random_range(-1.0..1.0), exps: e.clone() }).collect())
            .collect();
        AnalyticMap::Polynomial { n, outputs }
    }

    /// Random trigonometric polynomial `T^2 -> R^m` with frequencies up to `max_freq`.
    pub fn random_torus_trig(m: usize, max_freq: i32, rng: &mut crate::Rng) -> Self {
        let mut outputs = Vec::new();
        for _ in 0..m {
            let mut terms = Vec::new();
            for a in -max_freq..=max_freq {
                for b in 0..=max_freq {
                    if (a, b) == (0, 0) || (b == 0 && a < 0) {
                        continue;
                    }
                    for sine in [false, true] {
                        terms.push(TrigTerm { coef: rng.random_range(-1.0..1.0), freq: [a, b], sine });
                    }
                }
            }
            outputs.push(terms);
        }
        AnalyticMap::TorusTrig { outputs }
    }

    /// Random circle map of the given degree with two random harmonics.
    pub fn random_circle_map(degree: i32, rng: &mut crate::Rng) -> Self {
        let harmonics = (0..3).map(|_| (rng.random_range(-1.5..1.5), rng.random_range(0.0..2.0 * PI))).collect();
        AnalyticMap::CircleWrap { degree, harmonics }
    }

    /// Random degree-0 self-map of `S^2` of shifted-linear type.
    pub fn random_shifted_linear(rng: &mut crate::Rng) -> Self {
        let base = loop {
            let v: Point = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            if let Some(u) = linalg::normalize(&v) {
                break u;
            }
        };
        let mut lin = [[0.0; 3]; 3];
        for row in lin.iter_mut() {
            for c in row.iter_mut() {
                *c = rng.random_range(-0.5..0.5);
            }
        }
        // Frobenius norm below 1 bounds |lin x| < 1
        let fro: f64 = lin.iter().flatten().map(|c| c * c).sum::<f64>().sqrt();
        let s = 0.9 / fro.max(0.9);
        for row in lin.iter_mut() {
            for c in row.iter_mut() {
                *c *= s;
            }
        }
        AnalyticMap::ShiftedLinear { base, lin }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, AnalyticMap::CircleWrap { .. } | AnalyticMap::LongitudeDoubling | AnalyticMap::ShiftedLinear { .. })
    }

    /// Vertex-interpolated PL map on `source`. Sphere-valued families map into
    /// the coarse cross-polytope of the same dimension, read radially.
    pub fn to_pl_map(&self, source: &SimplicialComplex) -> Result<PLMap> {
        if source.space() != self.space() {
            return Err(Error::DimensionMismatch("family and complex live on different spaces".into()));
        }
        let images: Vec<Point> = source.vertices().iter().map(|v| self.eval(v)).collect();
        let target = if self.is_radial() {
            let n = self.out_dim() - 1;
            Target::Complex(crate::complexes::cross_polytope_sphere(n, 0)?)
        } else {
            Target::Euclidean(self.out_dim())
        };
        make_pl_map(source.clone(), target, images)
    }
}

impl MapEvaluator for AnalyticMap {
    fn space(&self) -> ModelSpace {
        match self {
            AnalyticMap::Projection(n) | AnalyticMap::Height(n) | AnalyticMap::Polynomial { n, .. } => {
                ModelSpace::RoundSphere(*n)
            }
            AnalyticMap::TorusTrig { .. } => ModelSpace::FlatTorus,
            AnalyticMap::Constant { space, .. } => *space,
            AnalyticMap::CircleWrap { .. } => ModelSpace::RoundSphere(1),
            AnalyticMap::LongitudeDoubling | AnalyticMap::ShiftedLinear { .. } => ModelSpace::RoundSphere(2),
        }
    }

    fn out_dim(&self) -> usize {
        match self {
            AnalyticMap::Projection(n) => *n,
            AnalyticMap::Height(_) => 1,
            AnalyticMap::Polynomial { outputs, .. } => outputs.len(),
            AnalyticMap::TorusTrig { outputs } => outputs.len(),
            AnalyticMap::Constant { value, .. } => value.len(),
            AnalyticMap::CircleWrap { .. } => 2,
            AnalyticMap::LongitudeDoubling | AnalyticMap::ShiftedLinear { .. } => 3,
        }
    }

    fn eval(&self, x: &[f64]) -> Point {
        match self {
            AnalyticMap::Projection(n) => x[..*n].to_vec(),
            AnalyticMap::Height(n) => vec![x[*n]],
            AnalyticMap::Polynomial { outputs, .. } => outputs
                .iter()
                .map(|terms| {
                    terms
                        .iter()
                        .map(|t| t.coef * t.exps.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product::<f64>())
                        .sum()
                })
                .collect(),
            AnalyticMap::TorusTrig { outputs } => outputs
                .iter()
                .map(|terms| {
                    terms
                        .iter()
                        .map(|t| {
                            let a = 2.0 * PI * (t.freq[0] as f64 * x[0] + t.freq[1] as f64 * x[1]);
                            t.coef * if t.sine { a.sin() } else { a.cos() }
                        })
                        .sum()
                })
                .collect(),
            AnalyticMap::Constant { value, .. } => value.clone(),
            AnalyticMap::CircleWrap { degree, harmonics } => {
                let t = f64::atan2(x[1], x[0]);
                let a = *degree as f64 * t
                    + harmonics.iter().enumerate().map(|(k, (amp, ph))| amp * ((k + 1) as f64 * t + ph).sin()).sum::<f64>();
                vec![a.cos(), a.sin()]
            }
            AnalyticMap::LongitudeDoubling => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                if r < 1e-300 {
                    vec![0.0, 0.0, x[2].signum()]
                } else {
                    vec![(x[0] * x[0] - x[1] * x[1]) / r, 2.0 * x[0] * x[1] / r, x[2]]
                }
            }
            AnalyticMap::ShiftedLinear { base, lin } => {
                let w: Point = (0..3).map(|i| base[i] + (0..3).map(|j| lin[i][j] * x[j]).sum::<f64>()).collect();
                linalg::normalize(&w).unwrap_or(w)
            }
        }
    }
}
