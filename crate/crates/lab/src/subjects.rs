//! Builtin maps and map files.

use crate::io::{family_from_json, map_from_json};
use crate::LabError;
use bulab_core::complexes::{cross_polytope_sphere, flat_torus, SimplicialComplex};
use bulab_core::families::{AnalyticMap, MapEvaluator};
use bulab_core::generators::{height_to_tripod, random_tripod_map};
use bulab_core::metrics::ModelSpace;
use bulab_core::plmaps::PLMap;
use bulab_core::widths::shchepin_map;
use std::path::Path;

pub const BUILTINS: [(&str, &str); 11] = [
    ("projection", "S^n -> R^n, drop the last coordinate"),
    ("height", "S^n -> R, the last coordinate"),
    ("polynomial", "random polynomial S^n -> R^m, degree <= 3 (--count)"),
    ("torus", "random trigonometric map T^2 -> R^m (--count)"),
    ("shchepin", "ball B^n onto the cone over the simplex skeleton, n in 2..=3"),
    ("tripod-height", "S^2 -> tripod, upper half to one leg, lower half to another"),
    ("tripod", "random simplicial map S^2 -> tripod (--count)"),
    ("circle-deg0", "random degree-0 map S^1 -> S^1 (--count)"),
    ("circle-deg2", "random degree-2 map S^1 -> S^1 (--count)"),
    ("sphere-deg0", "random shifted-linear map S^2 -> S^2, degree 0 (--count)"),
    ("sphere-deg2", "longitude doubling S^2 -> S^2, degree 2"),
];

#[derive(Debug, Clone)]
pub enum Subject {
    Analytic(AnalyticMap),
    Pl(Box<PLMap>),
}

#[derive(Debug, Clone)]
pub struct NamedSubject {
    pub id: String,
    pub subject: Subject,
}

/// Draw parameters for `resolve_maps`.
#[derive(Debug, Clone, Copy)]
pub struct Draw {
    pub n: usize,
    /// Output dimension for random Euclidean-valued families.
    pub out_dim: usize,
    pub count: usize,
    pub mesh_level: usize,
    pub seed: u64,
}

pub fn source_complex(space: ModelSpace, mesh_level: usize) -> Result<SimplicialComplex, LabError> {
    match space {
        ModelSpace::RoundSphere(n) => Ok(cross_polytope_sphere(n, mesh_level)?),
        ModelSpace::FlatTorus => Ok(flat_torus(mesh_level.max(1))?),
        other => Err(LabError::usage(format!("no standard mesh for {}", other.tag()))),
    }
}

impl NamedSubject {
    /// PL version on the standard mesh of the given level.
    pub fn to_pl(&self, mesh_level: usize) -> Result<PLMap, LabError> {
        match &self.subject {
            Subject::Pl(f) => Ok((**f).clone()),
            Subject::Analytic(g) => Ok(g.to_pl_map(&source_complex(g.space(), mesh_level)?)?),
        }
    }

    pub fn space(&self) -> ModelSpace {
        match &self.subject {
            Subject::Pl(f) => f.source().space(),
            Subject::Analytic(g) => g.space(),
        }
    }

    pub fn evaluator(&self) -> &dyn MapEvaluator {
        match &self.subject {
            Subject::Pl(f) => f.as_ref(),
            Subject::Analytic(g) => g,
        }
    }
}

fn need_n(name: &str, n: usize, range: std::ops::RangeInclusive<usize>) -> Result<(), LabError> {
    if range.contains(&n) {
        Ok(())
    } else {
        Err(LabError::usage(format!("map \"{name}\" needs --n in {}..={}", range.start(), range.end())))
    }
}

pub fn load_map_file(path: &Path) -> Result<Subject, LabError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| LabError::Io { context: format!("reading {}", path.display()), source })?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| LabError::Parse {
        path: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })?;
    let prefix = |e: LabError| match e {
        LabError::Parse { path: p, message } => LabError::Parse { path: format!("{}:{p}", path.display()), message },
        other => other,
    };
    if v.get("family").is_some() {
        Ok(Subject::Analytic(family_from_json(&v).map_err(prefix)?))
    } else {
        Ok(Subject::Pl(Box::new(map_from_json(&v).map_err(prefix)?)))
    }
}

/// Builtin name or `.json` file to the list of maps it denotes.
pub fn resolve_maps(name: &str, d: Draw) -> Result<Vec<NamedSubject>, LabError> {
    if name.ends_with(".json") {
        let subject = load_map_file(Path::new(name))?;
        let id = Path::new(name).file_stem().map_or("file".into(), |s| s.to_string_lossy().into_owned());
        return Ok(vec![NamedSubject { id, subject }]);
    }
    let mut rng = bulab_core::rng_from_seed(d.seed);
    let one = |id: String, subject: Subject| Ok(vec![NamedSubject { id, subject }]);
    let many = |f: &mut dyn FnMut(&mut bulab_core::Rng) -> Result<Subject, LabError>, rng: &mut bulab_core::Rng| {
        (0..d.count)
            .map(|i| Ok(NamedSubject { id: format!("{name}-{i}"), subject: f(rng)? }))
            .collect::<Result<Vec<_>, LabError>>()
    };
    match name {
        "projection" => {
            need_n(name, d.n, 1..=3)?;
            one(format!("projection-{}", d.n), Subject::Analytic(AnalyticMap::Projection(d.n)))
        }
        "height" => {
            need_n(name, d.n, 1..=3)?;
            one(format!("height-{}", d.n), Subject::Analytic(AnalyticMap::Height(d.n)))
        }
        "polynomial" => {
            need_n(name, d.n, 1..=3)?;
            many(&mut |r| Ok(Subject::Analytic(AnalyticMap::random_polynomial(d.n, d.out_dim, 3, r))), &mut rng)
        }
        "torus" => many(&mut |r| Ok(Subject::Analytic(AnalyticMap::random_torus_trig(d.out_dim, 2, r))), &mut rng),
        "shchepin" => {
            need_n(name, d.n, 2..=3)?;
            one(format!("shchepin-{}", d.n), Subject::Pl(Box::new(shchepin_map(d.n)?)))
        }
        "tripod-height" => {
            let s = cross_polytope_sphere(2, d.mesh_level)?;
            one("tripod-height".into(), Subject::Pl(Box::new(height_to_tripod(&s)?)))
        }
        "tripod" => {
            let s = cross_polytope_sphere(2, d.mesh_level)?;
            many(&mut |r| Ok(Subject::Pl(Box::new(random_tripod_map(&s, r)?))), &mut rng)
        }
        "circle-deg0" => many(&mut |r| Ok(Subject::Analytic(AnalyticMap::random_circle_map(0, r))), &mut rng),
        "circle-deg2" => many(&mut |r| Ok(Subject::Analytic(AnalyticMap::random_circle_map(2, r))), &mut rng),
        "sphere-deg0" => many(&mut |r| Ok(Subject::Analytic(AnalyticMap::random_shifted_linear(r))), &mut rng),
        "sphere-deg2" => one("sphere-deg2".into(), Subject::Analytic(AnalyticMap::LongitudeDoubling)),
        other => {
            let known: Vec<&str> = BUILTINS.iter().map(|b| b.0).collect();
            Err(LabError::usage(format!("unknown map \"{other}\" (builtins: {}; or a .json file)", known.join(", "))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draw(n: usize, count: usize) -> Draw {
        Draw { n, out_dim: n, count, mesh_level: 1, seed: 5 }
    }

    #[test]
    fn random_families_are_seeded() {
        let a = resolve_maps("polynomial", draw(2, 3)).unwrap();
        let b = resolve_maps("polynomial", draw(2, 3)).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a[2].id, "polynomial-2");
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_pl(1).unwrap().images(), y.to_pl(1).unwrap().images());
        }
    }

    #[test]
    fn builtins_build() {
        for (name, _) in BUILTINS {
            let maps = resolve_maps(name, draw(2, 2)).unwrap();
            assert!(!maps.is_empty(), "{name}");
            maps[0].to_pl(1).unwrap();
        }
    }

    #[test]
    fn bad_requests() {
        assert!(matches!(resolve_maps("shchepin", draw(4, 1)), Err(LabError::Usage(_))));
        assert!(matches!(resolve_maps("nope", draw(2, 1)), Err(LabError::Usage(_))));
        assert!(matches!(resolve_maps("/nonexistent/m.json", draw(2, 1)), Err(LabError::Io { .. })));
    }
}
