//! Fiber-length floors for codimension-one maps, the great-circle crossing
//! estimate, and the cap-radius probe over fiber components.

use crate::error::{Error, Result};
use crate::linalg::{self, Point};
use crate::metrics::{smallest_enclosing_cap, sphere_angle, Cap, ModelSpace};
use crate::plmaps::{fiber, fiber_perturbed, FiberComponent, PLMap, Target};
use crate::widths::{local_sample, stratified_targets};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloorKind {
    /// `pi`, sphere to a polyhedron.
    PiPolyhedral,
    /// Twice the convexity radius of the source.
    TwoKappa,
    /// `2 pi`, per loop, manifold target.
    TwoPiManifold,
}

impl FloorKind {
    pub fn value(self, space: ModelSpace) -> f64 {
        match self {
            FloorKind::PiPolyhedral => PI,
            FloorKind::TwoKappa => 2.0 * space.convexity_radius(),
            FloorKind::TwoPiManifold => 2.0 * PI,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            FloorKind::PiPolyhedral => "pi_polyhedral",
            FloorKind::TwoKappa => "two_kappa",
            FloorKind::TwoPiManifold => "two_pi_manifold",
        }
    }

    pub fn from_tag(tag: &str) -> Option<FloorKind> {
        match tag {
            "pi_polyhedral" => Some(FloorKind::PiPolyhedral),
            "two_kappa" => Some(FloorKind::TwoKappa),
            "two_pi_manifold" => Some(FloorKind::TwoPiManifold),
            _ => None,
        }
    }
}

/// One connected component of a fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentInfo {
    pub points: Vec<Point>,
    pub closed: bool,
    pub length: f64,
    /// Smallest enclosing cap, for sphere sources.
    pub cap: Option<Cap>,
}

impl ComponentInfo {
    pub fn cap_radius(&self) -> f64 {
        self.cap.as_ref().map_or(f64::NAN, |c| c.radius)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaistReport {
    pub map_id: String,
    pub floor_kind: FloorKind,
    pub floor: f64,
    /// Sup of the checked statistic: total length, or loop length for
    /// [`FloorKind::TwoPiManifold`].
    pub sup_length: f64,
    pub max_total_length: f64,
    pub max_component_length: f64,
    pub witness_target: Point,
    pub witness_component: Option<ComponentInfo>,
    pub samples: usize,
    /// Fibers dropped for open components under the loop check.
    pub rejected: usize,
    pub mesh_tol: f64,
    pub seed: u64,
    pub pass: bool,
}

impl WaistReport {
    pub fn witness_cap_radius(&self) -> f64 {
        self.witness_component.as_ref().map_or(f64::NAN, |c| c.cap_radius())
    }
}

fn describe(space: ModelSpace, c: FiberComponent) -> Result<ComponentInfo> {
    let cap = match space {
        ModelSpace::RoundSphere(_) if !c.points.is_empty() => Some(smallest_enclosing_cap(&c.points)?),
        _ => None,
    };
    Ok(ComponentInfo { points: c.points, closed: c.closed, length: c.length, cap })
}

fn require_codim1(f: &PLMap) -> Result<()> {
    if f.codim() != 1 {
        return Err(Error::WrongCodimension(f.codim()));
    }
    Ok(())
}

/// Components of the fiber over a regular value, each with its length and
/// enclosing cap: the fiber of the factored map at `y`.
pub fn connected_fiber_map(f: &PLMap, y: &[f64]) -> Result<Vec<ComponentInfo>> {
    require_codim1(f)?;
    let space = f.source().space();
    fiber(f, y)?.components.into_iter().map(|c| describe(space, c)).collect()
}

const REFINE_ROUNDS: usize = 8;

/// Visit a stratified pass over the image, then rounds of local samples
/// around the best score so far. Non-generic values are perturbed first.
fn sweep<F>(f: &PLMap, samples: usize, seed: u64, mut visit: F) -> Result<usize>
where
    F: FnMut(&Point, Vec<FiberComponent>) -> Result<f64>,
{
    let mut rng = crate::rng_from_seed(seed);
    let coarse = samples.div_ceil(2).max(1);
    let (targets, cell) = stratified_targets(f, coarse, &mut rng);
    let mut visited = 0;
    let mut best: Option<(f64, Point)> = None;
    let mut run = |y: &Point, rng: &mut crate::Rng, best: &mut Option<(f64, Point)>| -> Result<()> {
        let (fib, _) = match fiber_perturbed(f, y, rng, 20) {
            Ok(r) => r,
            Err(Error::NonGenericTarget) => return Ok(()),
            Err(e) => return Err(e),
        };
        let used = fib.target_point.clone();
        let score = visit(&used, fib.components)?;
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            *best = Some((score, used));
        }
        Ok(())
    };
    for y in &targets {
        run(y, &mut rng, &mut best)?;
        visited += 1;
    }
    let per_round = (samples.saturating_sub(visited)).div_ceil(REFINE_ROUNDS).max(1);
    let mut radius = cell;
    for _ in 0..REFINE_ROUNDS {
        let Some((_, center)) = best.clone() else { break };
        for _ in 0..per_round {
            let y = local_sample(f, &center, radius, &mut rng);
            run(&y, &mut rng, &mut best)?;
            visited += 1;
        }
        radius *= 0.5;
    }
    Ok(visited)
}

/// Sup of fiber length over sampled regular values against a waist floor.
pub fn waist_check(
    f: &PLMap,
    map_id: &str,
    kind: FloorKind,
    samples: usize,
    mesh_tol: f64,
    seed: u64,
) -> Result<WaistReport> {
    require_codim1(f)?;
    let space = f.source().space();
    if !f.source().is_closed_manifold() {
        return Err(Error::PreconditionViolated("waist floors need a closed source".into()));
    }
    if kind == FloorKind::TwoPiManifold && !matches!(f.target(), Target::Euclidean(_)) {
        return Err(Error::PreconditionViolated("the loop floor needs a manifold target".into()));
    }
    let floor = kind.value(space);
    let mut sup = f64::NEG_INFINITY;
    let mut max_total = 0.0f64;
    let mut max_comp = 0.0f64;
    let mut witness: Option<(Point, Vec<FiberComponent>, usize)> = None;
    let mut rejected = 0;
    let visited = sweep(f, samples, seed, |y, comps| {
        let total: f64 = comps.iter().map(|c| c.length).sum();
        max_total = max_total.max(total);
        max_comp = comps.iter().map(|c| c.length).fold(max_comp, f64::max);
        let stat = match kind {
            FloorKind::TwoPiManifold => {
                if comps.iter().any(|c| !c.closed) {
                    rejected += 1;
                    return Ok(f64::NEG_INFINITY);
                }
                let (i, l) = comps
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (i, c.length))
                    .fold((usize::MAX, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
                if l > sup {
                    witness = Some((y.clone(), comps, i));
                }
                l
            }
            _ => {
                if total > sup {
                    let i = (0..comps.len()).max_by(|a, b| comps[*a].length.total_cmp(&comps[*b].length)).unwrap_or(0);
                    witness = Some((y.clone(), comps, i));
                }
                total
            }
        };
        sup = sup.max(stat);
        Ok(stat)
    })?;
    let (witness_target, witness_component) = match witness {
        Some((y, comps, i)) if i < comps.len() => {
            let c = comps.into_iter().nth(i).unwrap();
            (y, Some(describe(space, c)?))
        }
        Some((y, _, _)) => (y, None),
        None => (Vec::new(), None),
    };
    let sup_length = if sup.is_finite() { sup } else { 0.0 };
    Ok(WaistReport {
        map_id: map_id.into(),
        floor_kind: kind,
        floor,
        sup_length,
        max_total_length: max_total,
        max_component_length: max_comp,
        witness_target,
        witness_component,
        samples: visited,
        rejected,
        mesh_tol,
        seed,
        pass: sup_length >= floor - mesh_tol,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CroftonEstimate {
    pub length: f64,
    /// Fraction of great circles meeting the curve.
    pub p_hat: f64,
    /// Mean number of crossings.
    pub e_hat: f64,
    pub sigma_p: f64,
    pub sigma_e: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Monte-Carlo over uniformly random great circles of `S^2` (Gaussian
/// normals) against a polyline of short arcs. Repeat the first point to
/// close the curve.
pub fn crofton_probability(curve: &[Point], trials: usize, seed: u64) -> Result<CroftonEstimate> {
    if curve.len() < 2 {
        return Err(Error::PreconditionViolated("curve needs two points".into()));
    }
    let space = ModelSpace::RoundSphere(2);
    for p in curve {
        space.validate(p, crate::TOL)?;
    }
    let length: f64 = curve.windows(2).map(|w| sphere_angle(&w[0], &w[1])).sum();
    let mut rng = crate::rng_from_seed(seed);
    let (mut hits, mut sum, mut sum_sq) = (0usize, 0.0f64, 0.0f64);
    for _ in 0..trials {
        let nu: [f64; 3] = core::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let signs: Vec<f64> = curve.iter().map(|p| linalg::dot(&nu, p)).collect();
        let k = signs.windows(2).filter(|w| w[0] * w[1] < 0.0).count() as f64;
        if k > 0.0 {
            hits += 1;
        }
        sum += k;
        sum_sq += k * k;
    }
    let n = trials.max(1) as f64;
    let p_hat = hits as f64 / n;
    let e_hat = sum / n;
    let var_e = (sum_sq / n - e_hat * e_hat).max(0.0);
    Ok(CroftonEstimate {
        length,
        p_hat,
        e_hat,
        sigma_p: (p_hat * (1.0 - p_hat) / n).sqrt(),
        sigma_e: (var_e / n).sqrt(),
        trials,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub map_id: String,
    pub witness_target: Point,
    pub witness: Option<ComponentInfo>,
    pub cap_radius: f64,
    /// The best component evades every open half-sphere, up to `tol`.
    pub held: bool,
    pub samples: usize,
    pub seed: u64,
}

/// Search sampled fibers of `f : S^n -> Y` (`n` in {2, 3}, `Y` of dimension
/// `n - 1`) for a component with the largest enclosing-cap radius.
pub fn conjecture_probe(f: &PLMap, map_id: &str, samples: usize, tol: f64, seed: u64) -> Result<ProbeReport> {
    require_codim1(f)?;
    let space = f.source().space();
    let ModelSpace::RoundSphere(n) = space else {
        return Err(Error::PreconditionViolated(format!("probe needs a sphere source, got {}", space.tag())));
    };
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension { dim: n, supported: "2, 3" });
    }
    let mut best: Option<(f64, Point, ComponentInfo)> = None;
    let visited = sweep(f, samples, seed, |y, comps| {
        let mut top = f64::NEG_INFINITY;
        for c in comps {
            let info = describe(space, c)?;
            let r = info.cap_radius();
            top = top.max(r);
            if best.as_ref().is_none_or(|(b, _, _)| r > *b) {
                best = Some((r, y.clone(), info));
            }
        }
        Ok(top)
    })?;
    let (cap_radius, witness_target, witness) = match best {
        Some((r, y, c)) => (r, y, Some(c)),
        None => (f64::NAN, Vec::new(), None),
    };
    Ok(ProbeReport {
        map_id: map_id.into(),
        witness_target,
        witness,
        cap_radius,
        held: cap_radius >= FRAC_PI_2 - tol,
        samples: visited,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{cross_polytope_sphere, flat_torus};
    use crate::families::AnalyticMap;
    use crate::generators::{height_to_tripod, random_polynomial_map, random_torus_map};
    use crate::plmaps::make_pl_map;

    fn height(level: usize) -> PLMap {
        AnalyticMap::Height(2).to_pl_map(&cross_polytope_sphere(2, level).unwrap()).unwrap()
    }

    #[test]
    fn height_equator_is_the_witness() {
        let f = height(4);
        let r = waist_check(&f, "height", FloorKind::TwoPiManifold, 200, 0.1, 1).unwrap();
        assert!(r.pass, "{}", r.sup_length);
        assert!(r.witness_target[0].abs() < 0.05);
        let comps = connected_fiber_map(&f, &[1e-4]).unwrap();
        assert_eq!(comps.len(), 1);
        assert!(comps[0].closed);
        assert!((comps[0].cap_radius() - FRAC_PI_2).abs() < 1e-3);
        assert!(connected_fiber_map(&f, &[3.0]).unwrap().is_empty());
    }

    #[test]
    fn tripod_and_torus_floors() {
        let k = cross_polytope_sphere(2, 3).unwrap();
        let r = waist_check(&height_to_tripod(&k).unwrap(), "tripod", FloorKind::PiPolyhedral, 100, 0.05, 2).unwrap();
        assert!(r.pass, "{}", r.sup_length);
        let t = flat_torus(3).unwrap();
        let mut rng = crate::rng_from_seed(3);
        for i in 0..3 {
            let f = random_torus_map(&t, 1, &mut rng).unwrap();
            let r = waist_check(&f, "torus", FloorKind::TwoKappa, 100, 0.02, i).unwrap();
            assert!(r.pass, "{}", r.sup_length);
        }
    }

    #[test]
    fn wrong_codimension() {
        let k = cross_polytope_sphere(2, 1).unwrap();
        let f = make_pl_map(k.clone(), Target::Euclidean(2), k.vertices().iter().map(|v| v[..2].to_vec()).collect()).unwrap();
        assert_eq!(waist_check(&f, "p", FloorKind::PiPolyhedral, 10, 0.0, 0), Err(Error::WrongCodimension(0)));
    }

    #[test]
    fn dumbbell_components_match_rechaining() {
        // z^2 - 0.3 on the sphere: two polar caps at level 0
        let k = cross_polytope_sphere(2, 4).unwrap();
        let imgs: Vec<Point> = k.vertices().iter().map(|v| alloc::vec![v[2] * v[2] + 0.2 * v[0]]).collect();
        let f = make_pl_map(k, Target::Euclidean(1), imgs).unwrap();
        let comps = connected_fiber_map(&f, &[0.4321]).unwrap();
        assert_eq!(comps.len(), 2);
        for c in &comps {
            assert!(c.closed);
            let mut pts = c.points.clone();
            pts.push(pts[0].clone());
            let l: f64 = pts.windows(2).map(|w| sphere_angle(&w[0], &w[1])).sum();
            assert!((l - c.length).abs() < 1e-9);
        }
    }

    #[test]
    fn crofton_examples() {
        let eq: Vec<Point> = (0..=256).map(|i| {
            let t = 2.0 * PI * i as f64 / 256.0;
            alloc::vec![t.cos(), t.sin(), 0.0]
        }).collect();
        let e = crofton_probability(&eq, 20_000, 1).unwrap();
        assert_eq!(e.p_hat, 1.0);
        assert!((e.e_hat - 2.0).abs() <= 3.0 * e.sigma_e + 1e-12);
        let arc: Vec<Point> = (0..=10).map(|i| {
            let t = 0.001 * i as f64;
            alloc::vec![t.cos(), t.sin(), 0.0]
        }).collect();
        let a = crofton_probability(&arc, 20_000, 2).unwrap();
        assert!(a.p_hat <= 0.01 / PI + 3.0 * (0.01 / PI * (1.0 - 0.01 / PI) / 20_000.0).sqrt());
        let half: Vec<Point> = (0..=128).map(|i| {
            let t = PI * i as f64 / 128.0;
            alloc::vec![t.cos(), 0.0, t.sin()]
        }).collect();
        let h = crofton_probability(&half, 20_000, 3).unwrap();
        assert!((h.e_hat - 1.0).abs() <= 3.0 * h.sigma_e.max(1e-3));
    }

    #[test]
    fn probe_finds_equator_and_random_witnesses() {
        let r = conjecture_probe(&height(4), "height", 60, 0.05, 1).unwrap();
        assert!(r.held && (r.cap_radius - FRAC_PI_2).abs() < 1e-2);
        let k = cross_polytope_sphere(2, 3).unwrap();
        let mut rng = crate::rng_from_seed(9);
        for i in 0..3 {
            let f = random_polynomial_map(&k, 1, &mut rng).unwrap();
            let r = conjecture_probe(&f, "rand", 100, 0.05, i).unwrap();
            assert!(r.held, "radius {}", r.cap_radius);
        }
        let tri = height_to_tripod(&k).unwrap();
        assert!(conjecture_probe(&tri, "tripod", 60, 0.05, 1).unwrap().held);
    }
}
