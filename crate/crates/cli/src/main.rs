//! `ubi`: validate inputs, generate capacity lookups, run scenarios and sweeps.

mod help;
mod manifest;

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use ubi_core::ingest::{self, IngestError, InputPaths};
use ubi_core::radio::{self, RadioError, SimConfig};
use ubi_core::scenario::{self, ScenarioError};
use ubi_core::{Dataset, LookupSet, Scenario, SweepConfig};

use manifest::{RunManifest, MANIFEST_FILE};

#[derive(Parser)]
#[command(name = "ubi", version, about = "Universal broadband investment engine", after_long_help = help::CONFIG_KEYS)]
struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every input file and report all violations.
    Validate(DataArgs),
    /// Simulate capacity lookup tables for the dataset's spectrum.
    Lookup(LookupArgs),
    /// Run one scenario and write results plus a manifest.
    Run(RunArgs),
    /// Run several scenarios and tabulate deltas against a baseline.
    Sweep(RunArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Directory with areas.csv, countries.csv, wages.csv and costbook.toml.
    #[arg(long)]
    data: PathBuf,
    /// Cost book to use instead of <data>/costbook.toml.
    #[arg(long)]
    costbook: Option<PathBuf>,
}

#[derive(Args)]
struct LookupArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Lookup config (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for lookup_<freq>_<rel>.csv files.
    #[arg(long)]
    out: PathBuf,
    /// RNG seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Scenario file (TOML); for `sweep`, a file of [[scenario]] tables.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// RNG seed for lookup simulation; overrides the scenario.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct LookupFile {
    #[serde(default)]
    density_grid: Option<Vec<f64>>,
    #[serde(default)]
    reliability_pct: Option<Vec<f64>>,
    #[serde(default)]
    simulation: SimConfig,
}

/// A failure and the exit status it maps to.
#[derive(Debug)]
enum Failure {
    /// Bad input or a model error: exit 1.
    Domain(String),
    /// File system trouble: exit 2.
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Io(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Domain(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io { .. } => Failure::Io(e.to_string()),
            IngestError::Invalid(_) => Failure::Domain(e.to_string()),
        }
    }
}

impl From<RadioError> for Failure {
    fn from(e: RadioError) -> Self {
        match e {
            RadioError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Lookups(r) => r.into(),
            other => Failure::Domain(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read(path)?).map_err(|_| Failure::Domain(format!("{} is not UTF-8", path.display())))
}

fn input_paths(a: &DataArgs) -> InputPaths {
    let mut p = InputPaths::in_dir(&a.data);
    if let Some(c) = &a.costbook {
        p.costbook = c.clone();
    }
    p
}

/// Digests the inputs, then loads and validates them.
fn load(a: &DataArgs, m: &mut RunManifest) -> Result<Dataset> {
    let paths = input_paths(a);
    for (role, path) in ["areas", "countries", "wages", "costbook"].into_iter().zip(paths.all()) {
        let bytes = read(path)?;
        m.add_input(role, path, &bytes);
    }
    Ok(ingest::load_inputs(&paths)?)
}

/// Writes every file through a temporary in `dir`, renaming only once all
/// contents are ready; the manifest goes last.
fn write_outputs(dir: &Path, files: &[(String, String)], mut m: RunManifest) -> Result<()> {
    let io = |what: &str, e: &dyn fmt::Display| Failure::Io(format!("{what}: {e}"));
    fs::create_dir_all(dir).map_err(|e| io(&format!("cannot create {}", dir.display()), &e))?;
    for (name, body) in files {
        m.add_output(name, body.as_bytes());
    }
    let manifest = m.to_json();
    let all = files
        .iter()
        .map(|(n, b)| (n.as_str(), b.as_str()))
        .chain(std::iter::once((MANIFEST_FILE, manifest.as_str())));
    let mut staged = Vec::new();
    for (name, body) in all {
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io("cannot stage output", &e))?;
        tmp.write_all(body.as_bytes()).map_err(|e| io(name, &e))?;
        staged.push((name, tmp));
    }
    for (name, tmp) in staged {
        let target = dir.join(name);
        tmp.persist(&target).map_err(|e| io(&target.display().to_string(), &e.error))?;
    }
    Ok(())
}

fn cmd_validate(a: &DataArgs) -> Result<()> {
    match ingest::load_inputs(&input_paths(a)) {
        Ok(d) => {
            if let Err(e) = scenario::complete_wages(&d.wages) {
                println!("1 violation");
                println!("{}: {e}", ingest::WAGES_FILE);
                return Err(Failure::Domain("validation failed".into()));
            }
            println!(
                "ok: {} areas, {} countries, {} wage rows; 0 violations",
                d.areas.len(),
                d.countries.len(),
                d.wages.rows.len()
            );
            Ok(())
        }
        Err(IngestError::Invalid(vs)) => {
            println!("{} violation(s)", vs.len());
            for v in &vs {
                println!("{v}");
            }
            Err(Failure::Domain("validation failed".into()))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_lookup(a: &LookupArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => toml::from_str::<LookupFile>(&read_text(p)?)
            .map_err(|e| Failure::Domain(format!("{}: {e}", p.display())))?,
        None => LookupFile::default(),
    };
    if let Some(s) = a.seed {
        cfg.simulation.rng_seed = s;
    }
    cfg.simulation.validate()?;
    let mut m = RunManifest::new("lookup", cfg.simulation.rng_seed);
    if let Some(p) = &a.config {
        m.add_input("config", p, &read(p)?);
    }
    let dataset = load(&a.data, &mut m)?;

    let mut freqs = BTreeSet::new();
    let mut rels = BTreeSet::new();
    for c in &dataset.countries {
        rels.insert(c.reliability_pct.to_bits());
        for b in &c.spectrum_portfolio {
            freqs.insert(b.frequency_mhz.to_bits());
        }
    }
    let freqs: Vec<f64> = freqs.into_iter().map(f64::from_bits).collect();
    let rels: Vec<f64> = cfg
        .reliability_pct
        .clone()
        .unwrap_or_else(|| rels.into_iter().map(f64::from_bits).collect());
    let grid = cfg.density_grid.clone().unwrap_or_else(radio::default_density_grid);
    let tables = radio::build_lookups(&freqs, &grid, &rels, &cfg.simulation)?;
    let set: LookupSet = tables.into_iter().collect();
    let files: Vec<(String, String)> = set.iter().map(|t| (t.file_name(), t.to_csv())).collect();
    for t in set.iter().filter(|t| t.clamped_points > 0) {
        log::warn!("{}: {} grid point(s) clamped to keep capacity monotone", t.file_name(), t.clamped_points);
    }
    write_outputs(&a.out, &files, m)?;
    println!("wrote {} lookup table(s) to {}", files.len(), a.out.display());
    Ok(())
}

fn base_dir(p: &Path) -> PathBuf {
    p.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn cmd_run(a: &RunArgs) -> Result<()> {
    let text = read_text(&a.scenario)?;
    let mut s = Scenario::from_toml_str(&text).map_err(|e| Failure::Domain(format!("{}: {e}", a.scenario.display())))?;
    if let Some(seed) = a.seed {
        s.lookups.simulation.rng_seed = seed;
    }
    let mut m = RunManifest::new("run", s.lookups.simulation.rng_seed);
    m.add_input("scenario", &a.scenario, text.as_bytes());
    m.scenario_name = Some(s.name.clone());
    m.scenario_hash = Some(s.fingerprint());
    let dataset = load(&a.data, &mut m)?;
    let lookups = s.load_lookups(&dataset, &base_dir(&a.scenario))?;
    let report = scenario::run_global(&dataset, &s, &lookups)?;
    let files: Vec<(String, String)> = scenario::run_outputs(&report)
        .into_iter()
        .map(|(n, b)| (n.to_string(), b))
        .collect();
    write_outputs(&a.out, &files, m)?;
    println!(
        "{}: {} countries, total {} USD",
        report.scenario,
        report.countries.len(),
        report.global.total
    );
    Ok(())
}

fn cmd_sweep(a: &RunArgs) -> Result<()> {
    let text = read_text(&a.scenario)?;
    let mut cfg = SweepConfig::from_toml_str(&text).map_err(|e| Failure::Domain(format!("{}: {e}", a.scenario.display())))?;
    if let Some(seed) = a.seed {
        for s in &mut cfg.scenario {
            s.lookups.simulation.rng_seed = seed;
        }
    }
    let mut m = RunManifest::new("sweep", cfg.scenario[0].lookups.simulation.rng_seed);
    m.add_input("scenario", &a.scenario, text.as_bytes());
    m.scenario_name = Some(cfg.baseline_name().to_string());
    m.scenario_hash = Some(cfg.fingerprint());
    let dataset = load(&a.data, &mut m)?;
    let base = base_dir(&a.scenario);
    let report = scenario::sweep(&dataset, &cfg, |s| s.load_lookups(&dataset, &base))?;
    let files = vec![(scenario::SWEEP_FILE.to_string(), scenario::sweep_csv(&report))];
    write_outputs(&a.out, &files, m)?;
    for r in &report.reports {
        println!("{}: total {} USD", r.scenario, r.global.total);
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Lookup(a) => cmd_lookup(a),
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        pool = pool.num_threads(n.max(1));
    }
    let result = match pool.build() {
        Ok(pool) => pool.install(|| dispatch(&cli)),
        Err(e) => Err(Failure::Io(format!("cannot start worker pool: {e}"))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
