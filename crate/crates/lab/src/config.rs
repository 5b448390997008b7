//! Run configuration. A config file and the command-line flags carry the
//! same fields; flags win. `resolve` fills every unset field with the
//! subcommand default so reports embed the configuration that actually ran.

use crate::LabError;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    GenComplex,
    Width,
    Waist,
    BuPair,
    HopfPair,
    Cycles,
    Lemmas,
    ProbeConjecture,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GenComplex => "gen-complex",
            Command::Width => "width",
            Command::Waist => "waist",
            Command::BuPair => "bu-pair",
            Command::HopfPair => "hopf-pair",
            Command::Cycles => "cycles",
            Command::Lemmas => "lemmas",
            Command::ProbeConjecture => "probe-conjecture",
        }
    }
}

pub const LEMMAS: [&str; 4] = ["hemisphere", "median", "quarter-ball", "convexity"];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    /// Tolerance override; its meaning depends on the subcommand.
    pub tol: Option<f64>,
    pub mesh_level: Option<usize>,
    pub samples: Option<usize>,
    /// Builtin map name or a JSON file.
    pub map: Option<String>,
    /// Sphere or ball dimension for builtin maps.
    pub n: Option<usize>,
    /// Number of random maps drawn from a random family.
    pub count: Option<usize>,
    /// Space tag for `gen-complex` (`S2`, `T2`, `B2`, ...).
    pub space: Option<String>,
    pub delta: Option<Vec<f64>>,
    pub lemmas: Option<Vec<String>>,
    pub trials: Option<usize>,
    /// Map-evaluation budget for pair searches.
    pub budget: Option<usize>,
    /// Waist floor tag: `pi_polyhedral`, `two_kappa` or `two_pi_manifold`.
    pub floor: Option<String>,
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    /// Complex or map file written by `gen-complex`; event log for `cycles`.
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => { $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )* };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| LabError::Io { context: format!("reading {}", path.display()), source })?;
        serde_json::from_str(&text).map_err(|e| LabError::Parse {
            path: format!("{}:{}:{}", path.display(), e.line(), e.column()),
            message: e.to_string(),
        })
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: &RunConfig) -> Self {
        overlay!(self, other; command, seed, tol, mesh_level, samples, map, n, count, space, delta, lemmas,
            trials, budget, floor, json, csv, plot, out);
        self
    }

    pub fn command(&self) -> Result<Command, LabError> {
        self.command.ok_or_else(|| LabError::usage("no subcommand given"))
    }

    /// Copy with every field the subcommand reads filled in.
    pub fn resolve(&self) -> Result<RunConfig, LabError> {
        let cmd = self.command()?;
        let mut c = self.clone();
        c.seed.get_or_insert(0);
        match cmd {
            Command::GenComplex => {
                c.mesh_level.get_or_insert(2);
                if c.map.is_none() {
                    c.space.get_or_insert_with(|| "S2".into());
                }
            }
            Command::Width => {
                c.map.get_or_insert_with(|| "shchepin".into());
                c.n.get_or_insert(2);
                c.mesh_level.get_or_insert(4);
                c.samples.get_or_insert(10_000);
                c.count.get_or_insert(1);
                let exact = c.map.as_deref() == Some("shchepin");
                c.tol.get_or_insert(if exact { 1e-6 } else { 0.1 });
            }
            Command::Waist => {
                c.map.get_or_insert_with(|| "height".into());
                c.n.get_or_insert(2);
                c.mesh_level.get_or_insert(4);
                c.samples.get_or_insert(200);
                c.count.get_or_insert(1);
                c.tol.get_or_insert(0.05);
            }
            Command::BuPair => {
                c.map.get_or_insert_with(|| "projection".into());
                c.n.get_or_insert(2);
                c.mesh_level.get_or_insert(3);
                c.count.get_or_insert(1);
                c.tol.get_or_insert(1e-9);
                c.budget.get_or_insert(200_000);
            }
            Command::HopfPair => {
                c.map.get_or_insert_with(|| "projection".into());
                c.n.get_or_insert(2);
                c.mesh_level.get_or_insert(3);
                c.count.get_or_insert(1);
                c.tol.get_or_insert(1e-8);
                c.budget.get_or_insert(200_000);
                c.delta.get_or_insert_with(|| vec![0.5, 1.0, 2.0, PI]);
            }
            Command::Cycles => {
                c.map.get_or_insert_with(|| "polynomial".into());
                c.n.get_or_insert(2);
                c.mesh_level.get_or_insert(3);
                c.count.get_or_insert(1);
                c.samples.get_or_insert(50);
                c.delta.get_or_insert_with(|| vec![1.0]);
            }
            Command::Lemmas => {
                c.lemmas.get_or_insert_with(|| LEMMAS.iter().map(|s| s.to_string()).collect());
                c.trials.get_or_insert(10_000);
                if let Some(bad) = c.lemmas.as_ref().unwrap().iter().find(|l| !LEMMAS.contains(&l.as_str())) {
                    return Err(LabError::usage(format!("unknown lemma \"{bad}\" (known: {})", LEMMAS.join(", "))));
                }
            }
            Command::ProbeConjecture => {
                c.map.get_or_insert_with(|| "polynomial".into());
                c.n.get_or_insert(2);
                c.mesh_level.get_or_insert(3);
                c.count.get_or_insert(50);
                c.samples.get_or_insert(200);
                c.tol.get_or_insert(0.05);
            }
        }
        if let Some(t) = c.tol {
            if !(t.is_finite() && t >= 0.0) {
                return Err(LabError::usage("--tol must be a non-negative number"));
            }
        }
        if c.count == Some(0) {
            return Err(LabError::usage("--count must be positive"));
        }
        Ok(c)
    }
}
