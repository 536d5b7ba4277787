//! Command-line pipeline: generate a population, validate its fidelity
//! against the input distributions, and simulate a scripted fire/alert
//! scenario over it.
//!
//! Exit codes: 0 success, 1 runtime or result failure (including a
//! validation FAIL), 2 input error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use evacgen::generate::{generate, plan_views, to_document, GenerateOptions};
use evacgen::io::{read_population_xml, read_refuges, write_population_xml};
use evacgen::model::{load_config, validate_inputs, ScenarioInputs};
use evacgen::respond::{run_scenario, sim_agents_from_document, write_events_csv, FireScenario};
use evacgen::validate::{
    distribution_error, occupancy_matrix, plan_views_from_document, write_error_report,
};
use evacgen::Error;

#[derive(Parser)]
#[command(
    name = "evacgen",
    version,
    about = "Synthetic evacuation-aware population generator and scenario runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate population.xml (plans plus bushfire attributes) from a config
    Generate {
        /// Scenario config JSON
        #[arg(long)]
        config: PathBuf,
        /// Locations CSV (overrides the config's locations_file)
        #[arg(long)]
        locations: Option<PathBuf>,
        /// Refuges CSV (overrides the config's refuges_file)
        #[arg(long)]
        refuges: Option<PathBuf>,
        /// Master seed; auto-generated (and printed to stderr) when absent
        #[arg(long)]
        seed: Option<u64>,
        /// Override the total agent count, scaling subgroups proportionally
        #[arg(long)]
        agents: Option<u64>,
        /// Skip bushfire attribute annotation
        #[arg(long)]
        no_annotate: bool,
        /// Output population XML path
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a population's per-step activity occupancy with the config
    Validate {
        /// Population XML to check
        #[arg(long)]
        population: PathBuf,
        /// Scenario config JSON the population was generated from
        #[arg(long)]
        config: PathBuf,
        /// Locations CSV (overrides the config's locations_file)
        #[arg(long)]
        locations: Option<PathBuf>,
        /// Max tolerated |error| per cell, percentage points
        #[arg(long, default_value_t = 5.5)]
        tolerance: f64,
        /// Output directory for error CSVs and the summary
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scripted fire/alert scenario over an annotated population
    Simulate {
        /// Annotated population XML
        #[arg(long)]
        population: PathBuf,
        /// Scenario JSON (fire snapshots, message schedule, radii, tick, speed)
        #[arg(long)]
        scenario: PathBuf,
        /// Refuges CSV refining the evac-blocked fallback
        #[arg(long)]
        refuges: Option<PathBuf>,
        /// Recorded in the manifest; the engine itself is randomness-free
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for events.csv and summary.json
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: String,
    seed: Option<u64>,
    /// sha256 per input file.
    input_digests: BTreeMap<String, String>,
    outputs: Vec<String>,
    timings_ms: BTreeMap<String, u128>,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        RunManifest {
            tool: "evacgen",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_owned(),
            seed: None,
            input_digests: BTreeMap::new(),
            outputs: Vec::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    fn digest_input(&mut self, path: &Path) -> Result<(), Error> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>();
        self.input_digests
            .insert(path.display().to_string(), digest);
        Ok(())
    }

    fn write(&self, path: &Path) -> Result<(), Error> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::runtime(format!("cannot serialise manifest: {e}")))?;
        std::fs::write(path, text + "\n")
            .map_err(|e| Error::runtime(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}

fn auto_seed() -> u64 {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    nanos ^ (std::process::id() as u64).rotate_left(32)
}

/// Resolve a path named in the config relative to the config file itself.
fn config_relative(config: &Path, rel: &str) -> PathBuf {
    config.parent().unwrap_or(Path::new(".")).join(rel)
}

fn load_inputs(
    config: &Path,
    locations: Option<&Path>,
    agents: Option<u64>,
) -> Result<ScenarioInputs, Error> {
    let mut inputs = load_config(config, locations)?;
    if let Some(n) = agents {
        inputs.override_population(n);
    }
    Ok(inputs)
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    config: PathBuf,
    locations: Option<PathBuf>,
    refuges: Option<PathBuf>,
    seed: Option<u64>,
    agents: Option<u64>,
    no_annotate: bool,
    out: PathBuf,
) -> Result<(), Error> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("generate");

    let inputs = load_inputs(&config, locations.as_deref(), agents)?;
    let seed = match seed.or(inputs.seed) {
        Some(s) => s,
        None => {
            let s = auto_seed();
            eprintln!("seed: {s} (auto-generated)");
            s
        }
    };
    manifest.seed = Some(seed);
    manifest.digest_input(&config)?;
    let locations_path = match &locations {
        Some(p) => p.clone(),
        None => config_relative(
            &config,
            inputs.locations_file.as_deref().ok_or_else(|| {
                Error::input("config names no locations_file and no --locations given")
            })?,
        ),
    };
    manifest.digest_input(&locations_path)?;

    let report = validate_inputs(&inputs);
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    if !report.is_ok() {
        return Err(Error::input(report.errors.join("; ")));
    }

    let annotate = !no_annotate;
    let refuge_set = if annotate {
        let path = match &refuges {
            Some(p) => p.clone(),
            None => match &inputs.refuges_file {
                Some(rel) => config_relative(&config, rel),
                None => {
                    return Err(Error::input(
                        "annotation needs refuges: pass --refuges, name refuges_file in the \
                         config, or use --no-annotate",
                    ))
                }
            },
        };
        manifest.digest_input(&path)?;
        Some(read_refuges(&path)?)
    } else {
        None
    };
    manifest
        .timings_ms
        .insert("load".into(), started.elapsed().as_millis());

    let stage = Instant::now();
    let population = generate(&inputs, refuge_set.as_ref(), GenerateOptions { seed, annotate })?;
    manifest
        .timings_ms
        .insert("generate".into(), stage.elapsed().as_millis());

    let stage = Instant::now();
    let doc = to_document(&population, &inputs);
    write_population_xml(&doc, &out)?;
    manifest
        .timings_ms
        .insert("write".into(), stage.elapsed().as_millis());
    manifest
        .timings_ms
        .insert("total".into(), started.elapsed().as_millis());
    manifest.outputs.push(out.display().to_string());

    manifest.write(&out.with_extension("manifest.json"))?;
    println!(
        "generated {} agents -> {} ({} ms)",
        population.agents.len(),
        out.display(),
        started.elapsed().as_millis()
    );

    // quick occupancy check while everything is in memory
    let views = plan_views(&population);
    let occupancy = occupancy_matrix(
        &views,
        inputs.subgroups.len(),
        inputs.activities.len(),
        &inputs.grid,
    )?;
    let mut worst = 0.0f64;
    for (s, occ) in occupancy.iter().enumerate() {
        if occ.agents == 0 {
            continue;
        }
        let errors = distribution_error(occ, &inputs.subgroups[s].distribution)?;
        worst = worst.max(errors.max_abs().0.abs());
    }
    println!("max |occupancy error| {worst:.2} pp");
    Ok(())
}

fn cmd_validate(
    population: PathBuf,
    config: PathBuf,
    locations: Option<PathBuf>,
    tolerance: f64,
    out: PathBuf,
) -> Result<(), Error> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("validate");
    manifest.digest_input(&config)?;
    manifest.digest_input(&population)?;

    let inputs = load_inputs(&config, locations.as_deref(), None)?;
    let doc = read_population_xml(&population)?;
    let views = plan_views_from_document(&doc, &inputs)?;
    let occupancy = occupancy_matrix(
        &views,
        inputs.subgroups.len(),
        inputs.activities.len(),
        &inputs.grid,
    )?;
    let mut reports = Vec::new();
    for (s, occ) in occupancy.iter().enumerate() {
        if occ.agents == 0 {
            continue;
        }
        let errors = distribution_error(occ, &inputs.subgroups[s].distribution)?;
        reports.push((inputs.subgroups[s].name.clone(), errors));
    }
    let summary = write_error_report(&reports, &inputs, &out, tolerance)?;
    manifest
        .timings_ms
        .insert("total".into(), started.elapsed().as_millis());
    manifest.outputs.push(out.display().to_string());
    manifest.write(&out.join("manifest.json"))?;

    println!("{}", summary.line());
    if summary.pass {
        Ok(())
    } else {
        Err(Error::runtime(format!(
            "distribution error {:.2} pp exceeds tolerance {} pp",
            summary.max_abs.abs(),
            tolerance
        )))
    }
}

fn cmd_simulate(
    population: PathBuf,
    scenario: PathBuf,
    refuges: Option<PathBuf>,
    seed: Option<u64>,
    out: PathBuf,
) -> Result<(), Error> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("simulate");
    manifest.seed = seed;
    manifest.digest_input(&population)?;
    manifest.digest_input(&scenario)?;

    let doc = read_population_xml(&population)?;
    let agents = sim_agents_from_document(&doc)?;
    let fire_scenario = FireScenario::load(&scenario)?;
    let refuge_set = match &refuges {
        Some(path) => {
            manifest.digest_input(path)?;
            Some(read_refuges(path)?)
        }
        None => None,
    };

    let stage = Instant::now();
    let outcome = run_scenario(&agents, &fire_scenario, refuge_set.as_ref());
    manifest
        .timings_ms
        .insert("simulate".into(), stage.elapsed().as_millis());

    std::fs::create_dir_all(&out)
        .map_err(|e| Error::runtime(format!("cannot create {}: {e}", out.display())))?;
    let events_path = out.join("events.csv");
    write_events_csv(&outcome.events, &events_path)?;
    let summary_path = out.join("summary.json");
    let text = serde_json::to_string_pretty(&outcome.summary)
        .map_err(|e| Error::runtime(format!("cannot serialise summary: {e}")))?;
    std::fs::write(&summary_path, text + "\n")
        .map_err(|e| Error::runtime(format!("cannot write {}: {e}", summary_path.display())))?;

    manifest
        .timings_ms
        .insert("total".into(), started.elapsed().as_millis());
    manifest.outputs.push(events_path.display().to_string());
    manifest.outputs.push(summary_path.display().to_string());
    manifest.write(&out.join("manifest.json"))?;

    println!(
        "simulated {} agents: {} init, {} act, {} leave ({} events)",
        outcome.summary.agents,
        outcome.summary.init_triggered,
        outcome.summary.act_triggered,
        outcome.summary.leave_now_count,
        outcome.events.len()
    );
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate {
            config,
            locations,
            refuges,
            seed,
            agents,
            no_annotate,
            out,
        } => cmd_generate(config, locations, refuges, seed, agents, no_annotate, out),
        Command::Validate {
            population,
            config,
            locations,
            tolerance,
            out,
        } => cmd_validate(population, config, locations, tolerance, out),
        Command::Simulate {
            population,
            scenario,
            refuges,
            seed,
            out,
        } => cmd_simulate(population, scenario, refuges, seed, out),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(if e.is_input() { 2 } else { 1 });
    }
}
