//! JSON forms of complexes, PL maps and analytic families.
//!
//! Readers walk a `serde_json::Value` by hand so that every rejection names
//! the offending location, e.g. `$.source.simplices.2[7]`.

use crate::LabError;
use bulab_core::complexes::SimplicialComplex;
use bulab_core::error::Error as CoreError;
use bulab_core::families::{AnalyticMap, Monomial, TrigTerm};
use bulab_core::linalg::Point;
use bulab_core::metrics::ModelSpace;
use bulab_core::plmaps::{make_pl_map, PLMap, Target};
use serde_json::{json, Map, Value};

fn bad(path: &str, msg: impl Into<String>) -> LabError {
    LabError::Parse { path: path.to_string(), message: msg.into() }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, LabError> {
    obj.get(key).ok_or_else(|| bad(path, format!("missing field \"{key}\"")))
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, LabError> {
    v.as_object().ok_or_else(|| bad(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, LabError> {
    v.as_array().ok_or_else(|| bad(path, "expected an array"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64, LabError> {
    let x = v.as_f64().ok_or_else(|| bad(path, "expected a number"))?;
    if !x.is_finite() {
        return Err(bad(path, "number is not finite"));
    }
    Ok(x)
}

fn as_usize(v: &Value, path: &str) -> Result<usize, LabError> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| bad(path, "expected a non-negative integer"))
}

fn as_i64(v: &Value, path: &str) -> Result<i64, LabError> {
    v.as_i64().ok_or_else(|| bad(path, "expected an integer"))
}

fn points(v: &Value, path: &str) -> Result<Vec<Point>, LabError> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let pp = format!("{path}[{i}]");
            as_array(p, &pp)?.iter().enumerate().map(|(j, x)| as_f64(x, &format!("{pp}[{j}]"))).collect()
        })
        .collect()
}

/// Re-root a core validation error under `prefix`.
fn core_at(e: CoreError, prefix: &str) -> LabError {
    match e {
        CoreError::InvalidComplex { path, reason } => bad(&format!("{prefix}.{path}"), reason),
        CoreError::InvalidImage { vertex, reason } => bad(&format!("{prefix}.images[{vertex}]"), reason),
        other => bad(prefix, other.to_string()),
    }
}

pub fn complex_to_json(k: &SimplicialComplex) -> Value {
    let mut simplices = Map::new();
    for d in 0..=k.dim() {
        simplices.insert(d.to_string(), json!(k.simplices(d)));
    }
    json!({
        "space": k.space().tag(),
        "dim": k.dim(),
        "vertices": k.vertices(),
        "simplices": simplices,
    })
}

pub fn complex_from_json(v: &Value) -> Result<SimplicialComplex, LabError> {
    complex_at(v, "$")
}

fn complex_at(v: &Value, path: &str) -> Result<SimplicialComplex, LabError> {
    let obj = as_object(v, path)?;
    let sp = format!("{path}.space");
    let tag = field(obj, "space", path)?.as_str().ok_or_else(|| bad(&sp, "expected a string"))?;
    let space = ModelSpace::from_tag(tag).ok_or_else(|| bad(&sp, format!("unknown space \"{tag}\"")))?;
    let dim = as_usize(field(obj, "dim", path)?, &format!("{path}.dim"))?;
    let vertices = points(field(obj, "vertices", path)?, &format!("{path}.vertices"))?;
    let sp = format!("{path}.simplices");
    let smap = as_object(field(obj, "simplices", path)?, &sp)?;
    if let Some(k) = smap.keys().find(|k| k.parse::<usize>().map_or(true, |d| d > dim)) {
        return Err(bad(&sp, format!("unexpected key \"{k}\"")));
    }
    let mut simplices = Vec::with_capacity(dim + 1);
    for d in 0..=dim {
        let lp = format!("{sp}.{d}");
        let level = as_array(field(smap, &d.to_string(), &sp)?, &lp)?;
        let mut out = Vec::with_capacity(level.len());
        for (j, s) in level.iter().enumerate() {
            let p = format!("{lp}[{j}]");
            let idx = as_array(s, &p)?
                .iter()
                .enumerate()
                .map(|(i, x)| as_usize(x, &format!("{p}[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            out.push(idx);
        }
        simplices.push(out);
    }
    SimplicialComplex::from_parts(space, dim, vertices, simplices).map_err(|e| core_at(e, path))
}

pub fn map_to_json(f: &PLMap) -> Value {
    let target = match f.target() {
        Target::Euclidean(m) => json!(format!("R^{m}")),
        Target::Complex(k) => complex_to_json(k),
    };
    json!({ "source": complex_to_json(f.source()), "target": target, "images": f.images() })
}

pub fn map_from_json(v: &Value) -> Result<PLMap, LabError> {
    let obj = as_object(v, "$")?;
    let source = complex_at(field(obj, "source", "$")?, "$.source")?;
    let tv = field(obj, "target", "$")?;
    let target = match tv {
        Value::String(s) => {
            let m = s
                .strip_prefix("R^")
                .and_then(|m| m.parse::<usize>().ok())
                .filter(|&m| m > 0)
                .ok_or_else(|| bad("$.target", format!("expected \"R^m\" or a complex, got \"{s}\"")))?;
            Target::Euclidean(m)
        }
        _ => Target::Complex(complex_at(tv, "$.target")?),
    };
    let images = points(field(obj, "images", "$")?, "$.images")?;
    make_pl_map(source, target, images).map_err(|e| core_at(e, "$"))
}

/// Analytic families in JSON: `{"family": "polynomial", "n": 2, "outputs": [[{"coef": .., "exps": [..]}]]}`,
/// `{"family": "projection", "n": 2}`, `{"family": "height", "n": 2}`,
/// `{"family": "torus-trig", "outputs": [[{"coef": .., "freq": [a, b], "sine": false}]]}` and
/// `{"family": "circle", "degree": 2, "harmonics": [[a, b]]}`.
pub fn family_from_json(v: &Value) -> Result<AnalyticMap, LabError> {
    let obj = as_object(v, "$")?;
    let name = field(obj, "family", "$")?.as_str().ok_or_else(|| bad("$.family", "expected a string"))?;
    let n = || -> Result<usize, LabError> {
        let n = as_usize(field(obj, "n", "$")?, "$.n")?;
        if n == 0 {
            return Err(bad("$.n", "sphere dimension must be positive"));
        }
        Ok(n)
    };
    let outputs = || -> Result<&Vec<Value>, LabError> {
        let o = as_array(field(obj, "outputs", "$")?, "$.outputs")?;
        if o.is_empty() {
            return Err(bad("$.outputs", "at least one output is needed"));
        }
        Ok(o)
    };
    match name {
        "projection" => Ok(AnalyticMap::Projection(n()?)),
        "height" => Ok(AnalyticMap::Height(n()?)),
        "polynomial" => {
            let n = n()?;
            let mut outs = Vec::new();
            for (i, o) in outputs()?.iter().enumerate() {
                let op = format!("$.outputs[{i}]");
                let mut terms = Vec::new();
                for (j, t) in as_array(o, &op)?.iter().enumerate() {
                    let tp = format!("{op}[{j}]");
                    let to = as_object(t, &tp)?;
                    let coef = as_f64(field(to, "coef", &tp)?, &format!("{tp}.coef"))?;
                    let ep = format!("{tp}.exps");
                    let exps = as_array(field(to, "exps", &tp)?, &ep)?
                        .iter()
                        .enumerate()
                        .map(|(k, e)| {
                            let e = as_usize(e, &format!("{ep}[{k}]"))?;
                            u8::try_from(e).map_err(|_| bad(&format!("{ep}[{k}]"), "exponent too large"))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    if exps.len() != n + 1 {
                        return Err(bad(&ep, format!("expected {} exponents", n + 1)));
                    }
                    terms.push(Monomial { coef, exps });
                }
                outs.push(terms);
            }
            Ok(AnalyticMap::Polynomial { n, outputs: outs })
        }
        "torus-trig" => {
            let mut outs = Vec::new();
            for (i, o) in outputs()?.iter().enumerate() {
                let op = format!("$.outputs[{i}]");
                let mut terms = Vec::new();
                for (j, t) in as_array(o, &op)?.iter().enumerate() {
                    let tp = format!("{op}[{j}]");
                    let to = as_object(t, &tp)?;
                    let coef = as_f64(field(to, "coef", &tp)?, &format!("{tp}.coef"))?;
                    let fp = format!("{tp}.freq");
                    let fr = as_array(field(to, "freq", &tp)?, &fp)?;
                    if fr.len() != 2 {
                        return Err(bad(&fp, "expected two frequencies"));
                    }
                    let freq = [as_i64(&fr[0], &format!("{fp}[0]"))? as i32, as_i64(&fr[1], &format!("{fp}[1]"))? as i32];
                    let sine = match to.get("sine") {
                        None => false,
                        Some(s) => s.as_bool().ok_or_else(|| bad(&format!("{tp}.sine"), "expected a boolean"))?,
                    };
                    terms.push(TrigTerm { coef, freq, sine });
                }
                outs.push(terms);
            }
            Ok(AnalyticMap::TorusTrig { outputs: outs })
        }
        "circle" => {
            let degree = as_i64(field(obj, "degree", "$")?, "$.degree")? as i32;
            let harmonics = match obj.get("harmonics") {
                None => Vec::new(),
                Some(h) => points(h, "$.harmonics")?
                    .into_iter()
                    .enumerate()
                    .map(|(i, p)| match p[..] {
                        [a, b] => Ok((a, b)),
                        _ => Err(bad(&format!("$.harmonics[{i}]"), "expected [amplitude, phase]")),
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            };
            Ok(AnalyticMap::CircleWrap { degree, harmonics })
        }
        other => Err(bad("$.family", format!("unknown family \"{other}\""))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bulab_core::complexes::{cross_polytope_sphere, flat_torus};
    use bulab_core::generators::height_to_tripod;

    fn err_path(r: Result<impl std::fmt::Debug, LabError>) -> String {
        match r {
            Err(LabError::Parse { path, .. }) => path,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn complex_round_trip() {
        for k in [cross_polytope_sphere(2, 2).unwrap(), flat_torus(3).unwrap()] {
            let v = complex_to_json(&k);
            let back = complex_from_json(&v).unwrap();
            assert_eq!(back, k);
            assert_eq!(complex_to_json(&back), v);
        }
    }

    #[test]
    fn map_round_trip() {
        let f = height_to_tripod(&cross_polytope_sphere(2, 1).unwrap()).unwrap();
        let v = map_to_json(&f);
        let text = serde_json::to_string(&v).unwrap();
        let back = map_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.images(), f.images());
        assert_eq!(map_to_json(&back), v);
    }

    #[test]
    fn complex_diagnostics() {
        let mut v = complex_to_json(&cross_polytope_sphere(1, 0).unwrap());
        v["simplices"]["1"][2] = json!([0, 0]);
        assert_eq!(err_path(complex_from_json(&v)), "$.simplices.1[2]");

        let mut v = complex_to_json(&cross_polytope_sphere(1, 0).unwrap());
        v["vertices"][1][0] = json!("x");
        assert_eq!(err_path(complex_from_json(&v)), "$.vertices[1][0]");

        let mut v = complex_to_json(&cross_polytope_sphere(1, 0).unwrap());
        v["vertices"][3] = json!([0.5, 0.5]);
        assert_eq!(err_path(complex_from_json(&v)), "$.vertices[3]");

        let mut v = complex_to_json(&cross_polytope_sphere(1, 0).unwrap());
        v["space"] = json!("Q3");
        assert_eq!(err_path(complex_from_json(&v)), "$.space");

        let mut v = complex_to_json(&cross_polytope_sphere(2, 0).unwrap());
        v["simplices"].as_object_mut().unwrap().remove("1");
        assert_eq!(err_path(complex_from_json(&v)), "$.simplices");
    }

    #[test]
    fn map_diagnostics() {
        let f = height_to_tripod(&cross_polytope_sphere(2, 0).unwrap()).unwrap();
        let mut v = map_to_json(&f);
        v["images"][2] = json!([3.0, 3.0]);
        assert_eq!(err_path(map_from_json(&v)), "$.images[2]");

        let mut v = map_to_json(&f);
        v["target"] = json!("R^x");
        assert_eq!(err_path(map_from_json(&v)), "$.target");

        let mut v = map_to_json(&f);
        v["source"]["simplices"]["2"][0] = json!([0, 1]);
        assert_eq!(err_path(map_from_json(&v)), "$.source.simplices.2[0]");
    }

    #[test]
    fn families_parse() {
        let p = json!({"family": "polynomial", "n": 2, "outputs": [[{"coef": 1.0, "exps": [1, 0, 0]}], [{"coef": -2.0, "exps": [0, 2, 1]}]]});
        match family_from_json(&p).unwrap() {
            AnalyticMap::Polynomial { n, outputs } => {
                assert_eq!(n, 2);
                assert_eq!(outputs[1][0], Monomial { coef: -2.0, exps: vec![0, 2, 1] });
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(family_from_json(&json!({"family": "projection", "n": 2})).unwrap(), AnalyticMap::Projection(2));
        let bad_exps = json!({"family": "polynomial", "n": 2, "outputs": [[{"coef": 1.0, "exps": [1, 0]}]]});
        assert_eq!(err_path(family_from_json(&bad_exps)), "$.outputs[0][0].exps");
        assert_eq!(err_path(family_from_json(&json!({"family": "spiral"}))), "$.family");
        let c = json!({"family": "circle", "degree": 2, "harmonics": [[0.3, 1.0]]});
        assert_eq!(family_from_json(&c).unwrap(), AnalyticMap::CircleWrap { degree: 2, harmonics: vec![(0.3, 1.0)] });
    }
}
