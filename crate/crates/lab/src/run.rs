//! Subcommand runners. `execute` is pure: it returns the report, table, plot
//! and side artifact without touching the filesystem; `run` writes them.

use crate::config::{Command, RunConfig};
use crate::io::{complex_to_json, map_to_json};
use crate::plot::{LinePlot, Series};
use crate::report::{num_cell, point_cell, write_file, Report, Table};
use crate::subjects::{resolve_maps, Draw, NamedSubject, Subject};
use crate::{LabError, EXIT_FLOOR_VIOLATION, EXIT_PASS, EXIT_USAGE};
use bulab_core::coincidence::{borsuk_ulam_pair, even_degree_pair, hopf_pair, CoincidencePair};
use bulab_core::complexes::{cross_polytope_sphere, flat_torus, simplex_ball, SimplicialComplex};
use bulab_core::cyclespace::{canonical_class_eval, contraction_homotopy, cycle_map, track_events, EventKind, EventLog};
use bulab_core::error::Error as CoreError;
use bulab_core::geomlemmas::{
    convexity_campaign, hemisphere_campaign, hemisphere_check, median_campaign, median_check, quarter_ball_campaign,
    quarter_ball_check, LemmaVerdict,
};
use bulab_core::linalg::Point;
use bulab_core::metrics::ModelSpace;
use bulab_core::plmaps::{fiber_length, random_target, PLMap, Target};
use bulab_core::waists::{conjecture_probe, waist_check, FloorKind};
use bulab_core::widths::{fiber_diameter, map_width, shchepin_bound, BoundKind, INF_CAVEAT};
use serde_json::{json, Value};
use std::f64::consts::{FRAC_PI_2, PI};

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub table: Option<Table>,
    pub plot: Option<LinePlot>,
    /// Complex or map JSON from `gen-complex`, event JSON lines from `cycles`.
    pub artifact: Option<String>,
    /// False when a theorem floor was missed.
    pub pass: bool,
}

struct Partial {
    results: Vec<Value>,
    warnings: Vec<String>,
    table: Option<Table>,
    plot: Option<LinePlot>,
    artifact: Option<String>,
    pass: bool,
}

impl Partial {
    fn new(table: Table) -> Self {
        Partial { results: Vec::new(), warnings: Vec::new(), table: Some(table), plot: None, artifact: None, pass: true }
    }

    fn row(&mut self, cells: Vec<String>) {
        self.table.as_mut().expect("table").push(cells);
    }
}

/// Search failures are reported as failed rows; anything else aborts.
fn is_search_failure(e: &CoreError) -> bool {
    matches!(e, CoreError::BudgetExhausted { .. } | CoreError::NonGenericTarget | CoreError::NonSimpleEvent { .. })
}

fn num(x: f64) -> String {
    num_cell(x)
}

fn maps_for(c: &RunConfig, out_dim: usize) -> Result<Vec<NamedSubject>, LabError> {
    let d = Draw {
        n: c.n.unwrap_or(2),
        out_dim,
        count: c.count.unwrap_or(1),
        mesh_level: c.mesh_level.unwrap_or(3),
        seed: c.seed.unwrap_or(0),
    };
    resolve_maps(c.map.as_deref().unwrap_or("projection"), d)
}

pub fn execute(config: &RunConfig) -> Result<Outcome, LabError> {
    let c = config.resolve()?;
    let p = match c.command()? {
        Command::GenComplex => gen_complex(&c)?,
        Command::Width => width(&c)?,
        Command::Waist => waist(&c)?,
        Command::BuPair => bu_pair(&c)?,
        Command::HopfPair => hopf(&c)?,
        Command::Cycles => cycles(&c)?,
        Command::Lemmas => lemmas(&c)?,
        Command::ProbeConjecture => probe(&c)?,
    };
    let mut warnings = p.warnings;
    let plot = if c.plot.is_some() {
        if p.plot.is_none() {
            warnings.push(format!("{} has no plot for this input; --plot ignored", c.command()?.name()));
        }
        p.plot
    } else {
        None
    };
    Ok(Outcome { report: Report::new(c, p.results, warnings), table: p.table, plot, artifact: p.artifact, pass: p.pass })
}

/// Execute and write every requested output. Returns the process exit code.
pub fn run(config: &RunConfig) -> i32 {
    let out = match execute(config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = write_outputs(&out) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    for w in &out.report.warnings {
        eprintln!("warning: {w}");
    }
    if out.pass {
        EXIT_PASS
    } else {
        eprintln!("floor violated: see report");
        EXIT_FLOOR_VIOLATION
    }
}

pub fn write_outputs(out: &Outcome) -> Result<(), LabError> {
    let c = &out.report.config;
    match &c.json {
        Some(p) => write_file(p, &out.report.to_json_string())?,
        None => print!("{}", out.report.to_json_string()),
    }
    if let (Some(p), Some(t)) = (&c.csv, &out.table) {
        write_file(p, &t.to_csv_string())?;
    }
    if let (Some(p), Some(pl)) = (&c.plot, &out.plot) {
        write_file(p, &pl.to_svg())?;
    }
    if let (Some(p), Some(a)) = (&c.out, &out.artifact) {
        write_file(p, a)?;
    }
    Ok(())
}

fn standard_complex(tag: &str, level: usize) -> Result<SimplicialComplex, LabError> {
    let space = ModelSpace::from_tag(tag).ok_or_else(|| LabError::usage(format!("unknown space \"{tag}\"")))?;
    Ok(match space {
        ModelSpace::RoundSphere(n) => cross_polytope_sphere(n, level)?,
        ModelSpace::FlatTorus => flat_torus(level)?,
        ModelSpace::EuclideanBall(n) => simplex_ball(n, level)?.complex,
        ModelSpace::Euclidean(_) => return Err(LabError::usage("gen-complex builds S<n>, B<n> or T2")),
    })
}

fn gen_complex(c: &RunConfig) -> Result<Partial, LabError> {
    let level = c.mesh_level.unwrap_or(2);
    let mut p = Partial::new(Table::new(&["object", "space", "dim", "vertices", "top_simplices", "euler_characteristic", "mesh_scale"]));
    let (k, object, artifact) = if c.map.is_some() {
        let m = maps_for(c, c.n.unwrap_or(2))?;
        let f = m[0].to_pl(level)?;
        if m.len() > 1 {
            p.warnings.push(format!("{} maps drawn, only the first is written", m.len()));
        }
        (f.source().clone(), m[0].id.clone(), map_to_json(&f))
    } else {
        let tag = c.space.clone().unwrap_or_else(|| "S2".into());
        let k = standard_complex(&tag, level)?;
        let v = complex_to_json(&k);
        (k, tag, v)
    };
    let counts: Vec<usize> = (0..=k.dim()).map(|d| k.count(d)).collect();
    p.results.push(json!({
        "object": object,
        "space": k.space().tag(),
        "dim": k.dim(),
        "counts": counts,
        "euler_characteristic": k.euler_characteristic(),
        "closed_manifold": k.is_closed_manifold(),
        "mesh_scale": k.mesh_scale(),
        "provenance": "construction",
    }));
    p.row(vec![
        object,
        k.space().tag(),
        k.dim().to_string(),
        counts[0].to_string(),
        counts[k.dim()].to_string(),
        k.euler_characteristic().to_string(),
        num(k.mesh_scale()),
    ]);
    let mut s = serde_json::to_string(&artifact).expect("json");
    s.push('\n');
    p.artifact = Some(s);
    if c.out.is_none() {
        p.warnings.push("no --out given; the generated object is not written".into());
    }
    Ok(p)
}

/// Bound for width sampling: the exact construction value for the
/// Shchepin map, the injectivity radius for Euclidean targets of dimension at
/// most the source's, the convexity radius for polyhedral targets.
fn width_bound(name: &str, n: usize, f: &PLMap) -> (f64, &'static str, bool) {
    if name == "shchepin" {
        return (shchepin_bound(n), "construction", true);
    }
    let space = f.source().space();
    match f.target() {
        Target::Euclidean(m) if *m <= space.dim() => (BoundKind::Rho.value(space), "rho", false),
        _ => (BoundKind::Kappa.value(space), "kappa", false),
    }
}

fn width(c: &RunConfig) -> Result<Partial, LabError> {
    let (samples, level, tol, seed) = (c.samples.unwrap(), c.mesh_level.unwrap(), c.tol.unwrap(), c.seed.unwrap());
    let name = c.map.as_deref().unwrap();
    let mut p = Partial::new(Table::new(&["map_id", "lower", "upper", "witness_target", "samples", "mesh_scale", "bound", "pass"]));
    p.warnings.push(INF_CAVEAT.into());
    for (i, m) in maps_for(c, c.n.unwrap())?.iter().enumerate() {
        let f = m.to_pl(level)?;
        let r = map_width(&f, &m.id, samples, 3, seed.wrapping_add(i as u64))?;
        let (bound, kind, exact_bound) = width_bound(name, c.n.unwrap(), &f);
        let pass = if exact_bound {
            (r.lower - bound).abs() <= tol && (r.upper - bound).abs() <= tol
        } else {
            r.lower >= bound - tol
        };
        p.pass &= pass;
        p.results.push(json!({
            "map_id": r.map_id,
            "lower": r.lower,
            "upper": r.upper,
            "upper_is_exact": r.exact,
            "witness_target": r.witness_target,
            "samples": r.samples,
            "mesh_scale": r.mesh_scale,
            "bound": bound,
            "bound_kind": kind,
            "tolerance": tol,
            "provenance": if r.exact { "construction" } else { "sampling" },
            "pass": pass,
        }));
        p.row(vec![
            r.map_id.clone(),
            num(r.lower),
            num(r.upper),
            point_cell(&r.witness_target),
            r.samples.to_string(),
            num(r.mesh_scale),
            num(bound),
            pass.to_string(),
        ]);
        if p.plot.is_none() {
            p.plot = width_landscape(&f, &r.map_id, &r.witness_target, bound);
        }
    }
    Ok(p)
}

/// Fiber diameter along the line through the witness in the first target
/// coordinate.
fn width_landscape(f: &PLMap, id: &str, witness: &[f64], bound: f64) -> Option<LinePlot> {
    if witness.is_empty() || f.target().is_radial() {
        return None;
    }
    let lo = f.images().iter().map(|y| y[0]).fold(f64::INFINITY, f64::min);
    let hi = f.images().iter().map(|y| y[0]).fold(f64::NEG_INFINITY, f64::max);
    let pts = (0..=200)
        .map(|k| {
            let x = lo + (hi - lo) * k as f64 / 200.0;
            let mut y = witness.to_vec();
            y[0] = x;
            (x, fiber_diameter(f, &y).unwrap_or(f64::NAN))
        })
        .collect();
    Some(LinePlot {
        title: format!("fiber diameter, {id}"),
        x_label: "target coordinate 0 (others at witness)".into(),
        y_label: "diameter".into(),
        series: vec![Series { label: id.into(), points: pts }],
        levels: vec![("bound".into(), bound)],
    })
}

fn auto_floor(f: &PLMap) -> FloorKind {
    match (f.source().space(), f.target()) {
        (_, Target::Complex(_)) => FloorKind::PiPolyhedral,
        (ModelSpace::RoundSphere(_), Target::Euclidean(_)) => FloorKind::TwoPiManifold,
        _ => FloorKind::TwoKappa,
    }
}

fn waist(c: &RunConfig) -> Result<Partial, LabError> {
    let (samples, level, tol, seed) = (c.samples.unwrap(), c.mesh_level.unwrap(), c.tol.unwrap(), c.seed.unwrap());
    let forced = match c.floor.as_deref() {
        None => None,
        Some(t) => Some(FloorKind::from_tag(t).ok_or_else(|| LabError::usage(format!("unknown floor \"{t}\" (pi_polyhedral, two_kappa, two_pi_manifold)")))?),
    };
    let mut p = Partial::new(Table::new(&["map_id", "floor", "sup_length", "witness_target", "witness_cap_radius", "pass", "seed"]));
    for (i, m) in maps_for(c, 1)?.iter().enumerate() {
        let f = m.to_pl(level)?;
        let kind = forced.unwrap_or_else(|| auto_floor(&f));
        let s = seed.wrapping_add(i as u64);
        let r = waist_check(&f, &m.id, kind, samples, tol, s)?;
        p.pass &= r.pass;
        p.results.push(json!({
            "map_id": r.map_id,
            "floor_kind": kind.tag(),
            "floor": r.floor,
            "sup_length": r.sup_length,
            "max_total_length": r.max_total_length,
            "max_component_length": r.max_component_length,
            "witness_target": r.witness_target,
            "witness_cap_radius": r.witness_cap_radius(),
            "samples": r.samples,
            "rejected_open_fibers": r.rejected,
            "tolerance": tol,
            "provenance": "sampling",
            "seed": s,
            "pass": r.pass,
        }));
        p.row(vec![
            r.map_id.clone(),
            num(r.floor),
            num(r.sup_length),
            point_cell(&r.witness_target),
            num(r.witness_cap_radius()),
            r.pass.to_string(),
            s.to_string(),
        ]);
        if p.plot.is_none() {
            p.plot = length_profile(&f, &r.map_id, r.floor);
        }
    }
    Ok(p)
}

/// Total fiber length over a grid of targets, for maps to `R`.
fn length_profile(f: &PLMap, id: &str, floor: f64) -> Option<LinePlot> {
    if !matches!(f.target(), Target::Euclidean(1)) {
        return None;
    }
    let lo = f.images().iter().map(|y| y[0]).fold(f64::INFINITY, f64::min);
    let hi = f.images().iter().map(|y| y[0]).fold(f64::NEG_INFINITY, f64::max);
    let pts = (1..400)
        .map(|k| {
            let y = lo + (hi - lo) * k as f64 / 400.0;
            (y, fiber_length(f, &[y]).map_or(f64::NAN, |l| l.total))
        })
        .collect();
    Some(LinePlot {
        title: format!("fiber length, {id}"),
        x_label: "target".into(),
        y_label: "total fiber length".into(),
        series: vec![Series { label: id.into(), points: pts }],
        levels: vec![("floor".into(), floor)],
    })
}

fn pair_json(id: &str, delta: Option<f64>, r: &CoincidencePair, tol: f64, pass: bool) -> Value {
    json!({
        "map_id": id,
        "delta": delta,
        "x": r.x,
        "y": r.y,
        "distance": r.distance,
        "residual": r.residual,
        "method": r.method,
        "evaluations": r.evaluations,
        "tolerance": tol,
        "provenance": "search",
        "pass": pass,
    })
}

const PAIR_HEADER: [&str; 7] = ["map_id", "delta", "distance", "residual", "method", "evaluations", "pass"];

fn failed_pair(p: &mut Partial, id: &str, delta: Option<f64>, e: &CoreError) {
    p.pass = false;
    p.results.push(json!({ "map_id": id, "delta": delta, "error": e.to_string(), "pass": false }));
    p.row(vec![id.into(), delta.map_or(String::new(), num), String::new(), String::new(), String::new(), String::new(), "false".into()]);
}

fn pair_row(p: &mut Partial, id: &str, delta: Option<f64>, r: &CoincidencePair, pass: bool) {
    p.row(vec![
        id.into(),
        delta.map_or(String::new(), num),
        num(r.distance),
        num(r.residual),
        r.method.into(),
        r.evaluations.to_string(),
        pass.to_string(),
    ]);
}

fn closed_target(m: &NamedSubject) -> bool {
    match &m.subject {
        Subject::Pl(f) => f.target().is_closed_manifold(),
        Subject::Analytic(g) => g.is_radial(),
    }
}

fn bu_pair(c: &RunConfig) -> Result<Partial, LabError> {
    let (tol, budget, level, seed) = (c.tol.unwrap(), c.budget.unwrap(), c.mesh_level.unwrap(), c.seed.unwrap());
    let mut p = Partial::new(Table::new(&PAIR_HEADER));
    for (i, m) in maps_for(c, c.n.unwrap())?.iter().enumerate() {
        let (res, floor) = if closed_target(m) {
            let f = m.to_pl(level)?;
            let rho = f.source().space().injectivity_radius();
            (even_degree_pair(&f, tol, budget, seed.wrapping_add(i as u64)), rho - 1e-3)
        } else {
            (borsuk_ulam_pair(m.evaluator(), tol, budget), PI - 1e-12)
        };
        match res {
            Ok(r) => {
                let pass = r.residual <= tol && r.distance >= floor;
                p.pass &= pass;
                p.results.push(pair_json(&m.id, None, &r, tol, pass));
                pair_row(&mut p, &m.id, None, &r, pass);
            }
            Err(e) if is_search_failure(&e) => failed_pair(&mut p, &m.id, None, &e),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(p)
}

fn hopf(c: &RunConfig) -> Result<Partial, LabError> {
    let (tol, budget, seed) = (c.tol.unwrap(), c.budget.unwrap(), c.seed.unwrap());
    let mut p = Partial::new(Table::new(&PAIR_HEADER));
    for (i, m) in maps_for(c, c.n.unwrap())?.iter().enumerate() {
        for &delta in c.delta.as_ref().unwrap() {
            match hopf_pair(m.evaluator(), delta, tol, budget, seed.wrapping_add(i as u64)) {
                Ok(r) => {
                    let pass = r.residual <= tol && (r.distance - delta).abs() <= 1e-6;
                    p.pass &= pass;
                    p.results.push(pair_json(&m.id, Some(delta), &r, tol, pass));
                    pair_row(&mut p, &m.id, Some(delta), &r, pass);
                }
                Err(e) if is_search_failure(&e) => failed_pair(&mut p, &m.id, Some(delta), &e),
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(p)
}

/// Closed loop through random targets, retried on non-simple crossings.
fn tracked_loop(f: &PLMap, delta: f64, rng: &mut bulab_core::Rng) -> Result<Option<EventLog>, LabError> {
    for _ in 0..8 {
        let mut path: Vec<Point> = (0..4).map(|_| random_target(f, rng)).collect();
        path.push(path[0].clone());
        match track_events(f, &path, delta) {
            Ok(log) => return Ok(Some(log)),
            Err(e) if is_search_failure(&e) || matches!(e, CoreError::DeltaPairFound { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(None)
}

fn cycles(c: &RunConfig) -> Result<Partial, LabError> {
    let (probes, level, seed) = (c.samples.unwrap(), c.mesh_level.unwrap(), c.seed.unwrap());
    let mut p = Partial::new(Table::new(&[
        "map_id",
        "class_value",
        "probes",
        "homotopy_start",
        "homotopy_end",
        "pair_events",
        "violations",
        "pass",
    ]));
    let mut lines = String::new();
    let mut rng = bulab_core::rng_from_seed(seed ^ 0xc7c1e);
    for (i, m) in maps_for(c, c.n.unwrap())?.iter().enumerate() {
        let f = m.to_pl(level)?;
        let class = canonical_class_eval(&f, probes, seed.wrapping_add(i as u64))?;
        // homotopy endpoints at a regular value
        let (mut start_ok, mut end_ok) = (false, false);
        for _ in 0..100 {
            let y = random_target(&f, &mut rng);
            let z = match cycle_map(&f, &y) {
                Ok(z) => z,
                Err(CoreError::NonGenericTarget) => continue,
                Err(e) => return Err(e.into()),
            };
            match (contraction_homotopy(&f, &y, 0.0), contraction_homotopy(&f, &y, 1.0)) {
                (Ok(h0), Ok(h1)) => {
                    start_ok = h0.same_support(&z, 0.0);
                    end_ok = h1.is_empty();
                    break;
                }
                (Err(CoreError::OutsideShortPathDomain { .. }), _) | (_, Err(CoreError::OutsideShortPathDomain { .. })) => continue,
                (Err(e), _) | (_, Err(e)) => return Err(e.into()),
            }
        }
        let mut entry = json!({
            "map_id": m.id,
            "class_value": class.value,
            "probes": class.counts.len(),
            "probe_counts": class.counts,
            "resampled": class.resampled,
            "homotopy_start_is_cycle": start_ok,
            "homotopy_end_is_empty": end_ok,
            "provenance": "sampling",
        });
        let mut pair_events = 0;
        let mut violations = 0;
        if matches!(f.target(), Target::Euclidean(_)) {
            for &delta in c.delta.as_ref().unwrap() {
                match tracked_loop(&f, delta, &mut rng)? {
                    Some(log) => {
                        pair_events += log.events.iter().filter(|e| e.kind != EventKind::VertexExchange).count();
                        violations += log.violations;
                        for e in &log.events {
                            let v = json!({
                                "map_id": m.id,
                                "delta": delta,
                                "kind": e.kind.name(),
                                "param": e.param,
                                "vertices": e.vertices,
                                "parities": e.parities.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
                            });
                            lines.push_str(&serde_json::to_string(&v).expect("json"));
                            lines.push('\n');
                        }
                    }
                    None => p.warnings.push(format!("{}: no loop with simple crossings at delta {delta}", m.id)),
                }
            }
            entry["pair_events"] = json!(pair_events);
            entry["violations"] = json!(violations);
        } else {
            p.warnings.push(format!("{}: event tracking needs a Euclidean target; skipped", m.id));
        }
        let pass = class.value == 1 && start_ok && end_ok && violations == 0;
        entry["pass"] = json!(pass);
        p.pass &= pass;
        p.results.push(entry);
        p.row(vec![
            m.id.clone(),
            class.value.to_string(),
            class.counts.len().to_string(),
            start_ok.to_string(),
            end_ok.to_string(),
            pair_events.to_string(),
            violations.to_string(),
            pass.to_string(),
        ]);
    }
    p.artifact = Some(lines);
    Ok(p)
}

fn verdict_json(v: &LemmaVerdict) -> Value {
    json!({
        "lemma": v.lemma,
        "trials": v.trials,
        "failures": v.failures,
        "worst_margin": v.worst_margin,
        "worst_case": v.worst_case,
        "tolerance": v.tol,
        "seed": v.seed,
        "provenance": "sampling",
        "pass": v.failures == 0,
    })
}

/// Equality cases: the great circle sits on a hemisphere boundary, the
/// degenerate triangle and the out-and-back digon have zero margin.
fn tightness_witnesses() -> Result<Value, LabError> {
    let circle: Vec<Point> = (0..=64).map(|k| {
        let t = 2.0 * PI * (k % 64) as f64 / 64.0;
        vec![t.cos(), t.sin(), 0.0]
    }).collect();
    let great = hemisphere_check(&circle)?.map(|m| FRAC_PI_2 - m);
    let (a, b) = (vec![1.0, 0.0, 0.0], vec![0.6f64.cos(), 0.6f64.sin(), 0.0]);
    let median = median_check(&a, &b, &b)?;
    let q = vec![0.0, 0.8f64.cos(), 0.8f64.sin()];
    let digon = quarter_ball_check(&[a.clone(), q, a])?;
    Ok(json!({
        "lemma": "tightness",
        "great_circle_cap_radius": great,
        "degenerate_median_margin": median,
        "digon_quarter_ball_margin": digon,
        "provenance": "construction",
    }))
}

fn lemmas(c: &RunConfig) -> Result<Partial, LabError> {
    let (trials, seed) = (c.trials.unwrap(), c.seed.unwrap());
    let mut p = Partial::new(Table::new(&["lemma", "trials", "failures", "worst_margin", "tolerance", "seed"]));
    for name in c.lemmas.as_ref().unwrap() {
        let v = match name.as_str() {
            "hemisphere" => hemisphere_campaign(trials, c.tol.unwrap_or(1e-9), seed)?,
            "median" => median_campaign(trials, c.tol.unwrap_or(1e-12), seed)?,
            "quarter-ball" => quarter_ball_campaign(trials, c.tol.unwrap_or(1e-9), seed)?,
            "convexity" => convexity_campaign(ModelSpace::RoundSphere(2), FRAC_PI_2 - 0.01, (trials / 10).max(1), 100, seed)?,
            other => return Err(LabError::usage(format!("unknown lemma \"{other}\""))),
        };
        p.pass &= v.failures == 0;
        p.results.push(verdict_json(&v));
        p.row(vec![v.lemma.into(), v.trials.to_string(), v.failures.to_string(), num(v.worst_margin), num(v.tol), seed.to_string()]);
    }
    p.results.push(tightness_witnesses()?);
    Ok(p)
}

fn probe(c: &RunConfig) -> Result<Partial, LabError> {
    let (samples, level, tol, seed) = (c.samples.unwrap(), c.mesh_level.unwrap(), c.tol.unwrap(), c.seed.unwrap());
    let mut p = Partial::new(Table::new(&["map_id", "witness_target", "cap_radius", "held", "seed"]));
    let mut missed = 0;
    for (i, m) in maps_for(c, 1)?.iter().enumerate() {
        let f = m.to_pl(level)?;
        let s = seed.wrapping_add(i as u64);
        let r = conjecture_probe(&f, &m.id, samples, tol, s)?;
        missed += usize::from(!r.held);
        p.results.push(json!({
            "map_id": r.map_id,
            "witness_target": r.witness_target,
            "cap_radius": r.cap_radius,
            "held": r.held,
            "samples": r.samples,
            "tolerance": tol,
            "seed": s,
            "provenance": "sampling; evidence only",
        }));
        p.row(vec![r.map_id.clone(), point_cell(&r.witness_target), num(r.cap_radius), r.held.to_string(), s.to_string()]);
    }
    p.warnings.push("conjecture probe: sampled evidence, not a proof".into());
    if missed > 0 {
        p.warnings.push(format!("{missed} map(s) without a component of cap radius >= pi/2 - tol"));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(cmd: Command) -> RunConfig {
        RunConfig { command: Some(cmd), ..Default::default() }
    }

    #[test]
    fn bu_projection_is_exact() {
        let out = execute(&cfg(Command::BuPair)).unwrap();
        assert!(out.pass);
        let r = &out.report.results[0];
        assert_eq!(r["distance"].as_f64().unwrap(), PI);
        assert_eq!(r["residual"].as_f64().unwrap(), 0.0);
    }

    #[test]
    fn lemmas_small_run() {
        let c = RunConfig { trials: Some(200), ..cfg(Command::Lemmas) };
        let out = execute(&c).unwrap();
        assert!(out.pass);
        assert_eq!(out.report.results.len(), 5);
        let t = &out.report.results[4];
        assert!((t["great_circle_cap_radius"].as_f64().unwrap() - FRAC_PI_2).abs() < 1e-9);
        assert!(t["degenerate_median_margin"].as_f64().unwrap().abs() < 1e-12);
    }

    #[test]
    fn gen_complex_counts() {
        let c = RunConfig { space: Some("S2".into()), mesh_level: Some(1), ..cfg(Command::GenComplex) };
        let out = execute(&c).unwrap();
        assert_eq!(out.report.results[0]["euler_characteristic"], json!(2));
        let k = crate::io::complex_from_json(&serde_json::from_str(out.artifact.as_ref().unwrap()).unwrap()).unwrap();
        assert_eq!(k.count(2), 32);
    }

    #[test]
    fn plot_warning_when_unavailable() {
        let c = RunConfig { plot: Some("x.svg".into()), trials: Some(10), lemmas: Some(vec!["median".into()]), ..cfg(Command::Lemmas) };
        let out = execute(&c).unwrap();
        assert!(out.plot.is_none());
        assert!(out.report.warnings.iter().any(|w| w.contains("--plot")));
    }

    #[test]
    fn wrong_codimension_is_usage() {
        let c = RunConfig { map: Some("projection".into()), ..cfg(Command::Waist) };
        assert!(matches!(execute(&c), Err(LabError::Core(CoreError::WrongCodimension(0)))));
    }
}
