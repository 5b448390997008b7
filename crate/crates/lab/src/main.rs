use bulab::config::{Command, RunConfig, LEMMAS};
use bulab::subjects::BUILTINS;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "bulab", version, about = "Fiber widths, waists and coincidence pairs of PL maps")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Build a standard complex (--space) or a sampled map (--map) and write it with --out.
    GenComplex(Flags),
    /// Fiber-width bounds of one map or a random family.
    Width(Flags),
    /// Sup of fiber length against a waist floor.
    Waist(Flags),
    /// Antipodal (or far, for sphere targets) pair with equal images.
    BuPair(Flags),
    /// Pairs at each distance --delta with equal images.
    HopfPair(Flags),
    /// Canonical class, contraction homotopy and event tracking.
    Cycles(Flags),
    /// Property campaigns for the four spherical lemmas.
    Lemmas(Flags),
    /// Largest enclosing cap of a fiber component, as evidence.
    ProbeConjecture(Flags),
    /// List builtin maps.
    Maps,
}

#[derive(Args, Default)]
struct Flags {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override (floor slack, residual or lemma tolerance by subcommand).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    mesh_level: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    /// Builtin map name (see `bulab maps`) or a .json map file.
    #[arg(long, visible_alias = "family")]
    map: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    /// Space tag for gen-complex: S1..S3, B2, B3, T2.
    #[arg(long)]
    space: Option<String>,
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<f64>>,
    /// Lemma to run; repeatable.
    #[arg(long, value_parser = LEMMAS)]
    lemma: Vec<String>,
    /// Run every lemma (the default).
    #[arg(long, conflicts_with = "lemma")]
    all: bool,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    /// Waist floor: pi_polyhedral, two_kappa or two_pi_manifold (default by target).
    #[arg(long)]
    floor: Option<String>,
    /// Report path; stdout when absent.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Generated complex or map (gen-complex), event JSON lines (cycles).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    fn to_config(&self, command: Command) -> RunConfig {
        RunConfig {
            command: Some(command),
            seed: self.seed,
            tol: self.tol,
            mesh_level: self.mesh_level,
            samples: self.samples,
            map: self.map.clone(),
            n: self.n,
            count: self.count,
            space: self.space.clone(),
            delta: self.delta.clone(),
            lemmas: if self.all {
                Some(LEMMAS.iter().map(|s| s.to_string()).collect())
            } else if self.lemma.is_empty() {
                None
            } else {
                Some(self.lemma.clone())
            },
            trials: self.trials,
            budget: self.budget,
            floor: self.floor.clone(),
            json: self.json.clone(),
            csv: self.csv.clone(),
            plot: self.plot.clone(),
            out: self.out.clone(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let (cmd, flags) = match cli.command {
        Sub::GenComplex(f) => (Command::GenComplex, f),
        Sub::Width(f) => (Command::Width, f),
        Sub::Waist(f) => (Command::Waist, f),
        Sub::BuPair(f) => (Command::BuPair, f),
        Sub::HopfPair(f) => (Command::HopfPair, f),
        Sub::Cycles(f) => (Command::Cycles, f),
        Sub::Lemmas(f) => (Command::Lemmas, f),
        Sub::ProbeConjecture(f) => (Command::ProbeConjecture, f),
        Sub::Maps => {
            for (name, what) in BUILTINS {
                println!("{name:<14} {what}");
            }
            return;
        }
    };
    let base = match &flags.config {
        Some(p) => match RunConfig::from_file(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(bulab::EXIT_USAGE);
            }
        },
        None => RunConfig::default(),
    };
    if base.command.is_some_and(|c| c != cmd) {
        eprintln!("error: config file is for `{}`, not `{}`", base.command.unwrap().name(), cmd.name());
        std::process::exit(bulab::EXIT_USAGE);
    }
    let config = base.overlay(&flags.to_config(cmd));
    std::process::exit(bulab::run(&config));
}
