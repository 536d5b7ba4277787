//! Scenario inputs: domain types, configuration loading and validation.
//!
//! A scenario is described by a JSON configuration (time grid, activities,
//! subgroups with distributions/durations/behaviour parameters) plus a
//! locations CSV. [`load_config`] parses and cross-validates everything into
//! an immutable [`ScenarioInputs`] that is safe to share read-only across
//! parallel workers. [`validate_inputs`] adds feasibility checks that go
//! beyond per-type invariants (home capacity, duration truncation).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Discretisation of the day: period `T` in hours split into `N` equal steps.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    pub period_hours: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(period_hours: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::input("time grid needs at least one step"));
        }
        if !(period_hours > 0.0) {
            return Err(Error::input("time period must be positive"));
        }
        Ok(TimeGrid {
            period_hours,
            steps,
        })
    }

    /// Length of one step in hours (`T/N`).
    pub fn step_hours(&self) -> f64 {
        self.period_hours / self.steps as f64
    }

    /// Midpoint of step `n` (0-based) in hours; used for occupancy sampling.
    pub fn step_midpoint(&self, n: usize) -> f64 {
        (n as f64 + 0.5) * self.step_hours()
    }
}

/// Ordered activity names; index 0 is the home activity.
#[derive(Clone, Debug, PartialEq)]
pub struct ActivitySet {
    names: Vec<String>,
}

/// Index of the home activity within every [`ActivitySet`].
pub const HOME_ACTIVITY: usize = 0;

impl ActivitySet {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::input("activity set must name at least one activity"));
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.clone()) {
                return Err(Error::input(format!("duplicate activity name `{name}`")));
            }
        }
        Ok(ActivitySet { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, k: usize) -> &str {
        &self.names[k]
    }

    pub fn home_name(&self) -> &str {
        &self.names[HOME_ACTIVITY]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Per-subgroup expected proportions `δ[k][n]` over K activities × N steps.
/// Stored as fractions; every column sums to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionTable {
    values: Vec<Vec<f64>>,
}

/// Column-sum tolerance after normalisation.
pub const COLUMN_SUM_TOLERANCE: f64 = 1e-9;

impl DistributionTable {
    /// Build from raw rows (one per activity). Entries may be fractions
    /// (columns sum to 1) or percentages (columns sum to 100); percentages
    /// are detected by magnitude and normalised.
    pub fn new(raw: Vec<Vec<f64>>, steps: usize, context: &str) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::input(format!("{context}: empty distribution table")));
        }
        for (k, row) in raw.iter().enumerate() {
            if row.len() != steps {
                return Err(Error::input(format!(
                    "{context}: activity row {} has {} entries, expected {steps}",
                    k + 1,
                    row.len()
                )));
            }
        }
        let max_col_sum = (0..steps)
            .map(|n| raw.iter().map(|row| row[n]).sum::<f64>())
            .fold(0.0f64, f64::max);
        let scale = if max_col_sum > 1.5 { 100.0 } else { 1.0 };
        let values: Vec<Vec<f64>> = raw
            .into_iter()
            .map(|row| row.into_iter().map(|v| v / scale).collect())
            .collect();
        for (k, row) in values.iter().enumerate() {
            for (n, &v) in row.iter().enumerate() {
                if !(0.0..=1.0 + COLUMN_SUM_TOLERANCE).contains(&v) {
                    return Err(Error::input(format!(
                        "{context}: entry for activity {} at step {} is {v}, outside [0,1]",
                        k + 1,
                        n + 1
                    )));
                }
            }
        }
        for n in 0..steps {
            let sum: f64 = values.iter().map(|row| row[n]).sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOLERANCE {
                return Err(Error::input(format!(
                    "{context}: column {} sums to {sum}",
                    n + 1
                )));
            }
        }
        Ok(DistributionTable { values })
    }

    pub fn activities(&self) -> usize {
        self.values.len()
    }

    pub fn steps(&self) -> usize {
        self.values[0].len()
    }

    /// `δ` for activity `k` at step `n` (both 0-based).
    pub fn value(&self, k: usize, n: usize) -> f64 {
        self.values[k][n]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// Bushfire-behaviour parameters shared by a subgroup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviourParams {
    pub prob_of_dependant: f64,
    /// Whether INIT < ACT is possible (the subgroup may stay and defend).
    pub stay: bool,
    pub prob_of_go_home: f64,
    pub threshold_min: f64,
    pub threshold_max: f64,
    /// Radius around home searched for dependant locations, metres.
    #[serde(default = "default_dependant_radius")]
    pub dependant_radius_m: f64,
}

fn default_dependant_radius() -> f64 {
    2000.0
}

impl BehaviourParams {
    fn check(&self, context: &str) -> Result<()> {
        for (label, v) in [
            ("prob_of_dependant", self.prob_of_dependant),
            ("prob_of_go_home", self.prob_of_go_home),
            ("threshold_min", self.threshold_min),
            ("threshold_max", self.threshold_max),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::input(format!(
                    "{context}: {label} = {v} is outside [0,1]"
                )));
            }
        }
        if self.threshold_min > self.threshold_max {
            return Err(Error::input(format!(
                "{context}: threshold_min {} exceeds threshold_max {}",
                self.threshold_min, self.threshold_max
            )));
        }
        if !(self.dependant_radius_m > 0.0) {
            return Err(Error::input(format!(
                "{context}: dependant_radius_m must be positive"
            )));
        }
        Ok(())
    }
}

/// One population subgroup: size, travel factor, durations, activity
/// distribution, allowed location tags and behaviour parameters.
#[derive(Clone, Debug)]
pub struct SubgroupSpec {
    pub name: String,
    pub count: u64,
    /// Probability (under pure locality selection) of leaving the current
    /// locality for the next activity; must be < 1.
    pub travel_factor: f64,
    /// Duration weight per activity, in steps (1..=N).
    pub durations: Vec<usize>,
    pub distribution: DistributionTable,
    /// Allowed location type tags per activity (`M_{s,αk}` via tags).
    pub location_tags: Vec<BTreeSet<String>>,
    pub behaviour: BehaviourParams,
}

/// A geocoded point with locality membership, allocation and type tags.
#[derive(Clone, Debug, PartialEq)]
pub struct Location {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub locality: String,
    pub allocation: u32,
    pub type_tags: BTreeSet<String>,
}

impl Location {
    pub fn coords(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

/// A named locality: member locations and their coordinate centroid.
#[derive(Clone, Debug)]
pub struct Locality {
    pub name: String,
    /// Indices into the scenario's location list.
    pub members: Vec<usize>,
    pub centroid: (f64, f64),
}

/// Options that tune otherwise-fixed pipeline behaviour.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioOptions {
    /// Choose locations within a locality uniformly instead of
    /// allocation-weighted.
    #[serde(default)]
    pub uniform_within_locality: bool,
    /// Travel mode written on plan legs.
    #[serde(default = "default_travel_mode")]
    pub travel_mode: String,
    /// Prefix for the BDIAgentType attribute; the subgroup name is appended.
    #[serde(default = "default_agent_type_prefix")]
    pub bdi_agent_type_prefix: String,
}

fn default_travel_mode() -> String {
    "car".to_owned()
}

fn default_agent_type_prefix() -> String {
    "io.github.agentsoz.ees.agents.bushfire.".to_owned()
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions {
            uniform_within_locality: false,
            travel_mode: default_travel_mode(),
            bdi_agent_type_prefix: default_agent_type_prefix(),
        }
    }
}

/// Fully cross-validated scenario inputs; immutable after load.
#[derive(Clone, Debug)]
pub struct ScenarioInputs {
    pub grid: TimeGrid,
    pub activities: ActivitySet,
    pub subgroups: Vec<SubgroupSpec>,
    pub locations: Vec<Location>,
    pub localities: Vec<Locality>,
    /// Locality index of each location.
    pub location_locality: Vec<usize>,
    /// Eligible location indices per (subgroup, activity): `M_{s,αk}`.
    pub eligible: Vec<Vec<Vec<usize>>>,
    pub options: ScenarioOptions,
    /// Master seed from the config; the CLI flag overrides it.
    pub seed: Option<u64>,
    /// Paths referenced by the config, relative to the config file.
    pub locations_file: Option<String>,
    pub refuges_file: Option<String>,
}

impl ScenarioInputs {
    pub fn total_population(&self) -> u64 {
        self.subgroups.iter().map(|s| s.count).sum()
    }

    pub fn locality_index(&self, name: &str) -> Option<usize> {
        self.localities.iter().position(|l| l.name == name)
    }

    /// Eligible locations for `(subgroup, activity)`.
    pub fn eligible_locations(&self, s: usize, k: usize) -> &[usize] {
        &self.eligible[s][k]
    }

    /// Scale subgroup counts so they total `agents`, preserving proportions
    /// (largest-remainder rounding). Used by the CLI `--agents` override.
    pub fn override_population(&mut self, agents: u64) {
        let total = self.total_population();
        if total == 0 {
            if let Some(first) = self.subgroups.first_mut() {
                first.count = agents;
            }
            return;
        }
        let mut assigned = 0u64;
        let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(self.subgroups.len());
        for (i, sg) in self.subgroups.iter_mut().enumerate() {
            let exact = sg.count as f64 * agents as f64 / total as f64;
            let floor = exact.floor() as u64;
            remainders.push((i, exact - floor as f64));
            sg.count = floor;
            assigned += floor;
        }
        remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let mut leftover = agents - assigned;
        for (i, _) in remainders {
            if leftover == 0 {
                break;
            }
            self.subgroups[i].count += 1;
            leftover -= 1;
        }
    }
}

// --- configuration file -----------------------------------------------------

#[derive(Debug, Deserialize)]
struct RawConfig {
    #[serde(default)]
    time: RawTime,
    activities: Vec<String>,
    subgroups: Vec<RawSubgroup>,
    #[serde(default)]
    options: ScenarioOptions,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    locations_file: Option<String>,
    #[serde(default)]
    refuges_file: Option<String>,
}

#[derive(Debug, Deserialize)]
struct RawTime {
    #[serde(default = "default_period")]
    period_hours: f64,
    steps: usize,
}

fn default_period() -> f64 {
    24.0
}

impl Default for RawTime {
    fn default() -> Self {
        RawTime {
            period_hours: 24.0,
            steps: 12,
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawSubgroup {
    name: String,
    count: u64,
    travel_factor: f64,
    durations: BTreeMap<String, usize>,
    distribution: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    location_tags: BTreeMap<String, Vec<String>>,
    behaviour: BehaviourParams,
}

/// Parse and cross-validate a scenario: JSON config plus the locations CSV
/// it references (`locations_override` takes precedence when given).
pub fn load_config(path: &Path, locations_override: Option<&Path>) -> Result<ScenarioInputs> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read config {}: {e}", path.display())))?;
    let raw: RawConfig = serde_json::from_str(&text)
        .map_err(|e| Error::input(format!("cannot parse config {}: {e}", path.display())))?;

    let locations_path = match locations_override {
        Some(p) => p.to_path_buf(),
        None => {
            let rel = raw.locations_file.as_deref().ok_or_else(|| {
                Error::input("config names no locations_file and no --locations given")
            })?;
            path.parent().unwrap_or(Path::new(".")).join(rel)
        }
    };
    let locations = crate::io::read_locations(&locations_path)?;
    build_inputs(raw, locations)
}

/// Assemble inputs from already-parsed pieces (used by tests and tools that
/// build scenarios programmatically). Runs the same cross-validation as
/// [`load_config`].
pub fn scenario_from_parts(
    grid: TimeGrid,
    activities: Vec<String>,
    subgroups: Vec<SubgroupBuilder>,
    locations: Vec<Location>,
    options: ScenarioOptions,
) -> Result<ScenarioInputs> {
    let raw = RawConfig {
        time: RawTime {
            period_hours: grid.period_hours,
            steps: grid.steps,
        },
        activities,
        subgroups: subgroups
            .into_iter()
            .map(|b| RawSubgroup {
                name: b.name,
                count: b.count,
                travel_factor: b.travel_factor,
                durations: b.durations,
                distribution: b.distribution,
                location_tags: b.location_tags,
                behaviour: b.behaviour,
            })
            .collect(),
        options,
        seed: None,
        locations_file: None,
        refuges_file: None,
    };
    build_inputs(raw, locations)
}

/// Programmatic counterpart of one config `subgroups` entry.
#[derive(Clone, Debug)]
pub struct SubgroupBuilder {
    pub name: String,
    pub count: u64,
    pub travel_factor: f64,
    pub durations: BTreeMap<String, usize>,
    pub distribution: BTreeMap<String, Vec<f64>>,
    pub location_tags: BTreeMap<String, Vec<String>>,
    pub behaviour: BehaviourParams,
}

fn build_inputs(raw: RawConfig, locations: Vec<Location>) -> Result<ScenarioInputs> {
    let grid = TimeGrid::new(raw.time.period_hours, raw.time.steps)?;
    let activities = ActivitySet::new(raw.activities)?;
    let steps = grid.steps;
    let k_count = activities.len();

    let mut names = BTreeSet::new();
    let mut subgroups = Vec::with_capacity(raw.subgroups.len());
    for sg in raw.subgroups {
        let ctx = format!("subgroup {}", sg.name);
        if !names.insert(sg.name.clone()) {
            return Err(Error::input(format!("duplicate subgroup name `{}`", sg.name)));
        }
        if !(0.0..1.0).contains(&sg.travel_factor) {
            return Err(Error::input(format!(
                "{ctx}: travel_factor {} must lie in [0,1) (1 makes the pseudo-distance undefined)",
                sg.travel_factor
            )));
        }
        sg.behaviour.check(&ctx)?;

        let mut durations = vec![0usize; k_count];
        for (k, name) in activities.names().iter().enumerate() {
            let d = *sg.durations.get(name).ok_or_else(|| {
                Error::input(format!("{ctx}: missing duration weight for activity `{name}`"))
            })?;
            if d == 0 || d > steps {
                return Err(Error::input(format!(
                    "{ctx}: duration weight {d} for `{name}` outside 1..={steps}"
                )));
            }
            durations[k] = d;
        }
        for extra in sg.durations.keys() {
            if activities.index_of(extra).is_none() {
                return Err(Error::input(format!(
                    "{ctx}: duration names unknown activity `{extra}`"
                )));
            }
        }

        let mut rows = vec![vec![0.0; steps]; k_count];
        for (k, name) in activities.names().iter().enumerate() {
            let row = sg.distribution.get(name).ok_or_else(|| {
                Error::input(format!("{ctx}: missing distribution row for activity `{name}`"))
            })?;
            rows[k] = row.clone();
        }
        for extra in sg.distribution.keys() {
            if activities.index_of(extra).is_none() {
                return Err(Error::input(format!(
                    "{ctx}: distribution names unknown activity `{extra}`"
                )));
            }
        }
        let distribution = DistributionTable::new(rows, steps, &ctx)?;

        let mut location_tags = vec![BTreeSet::new(); k_count];
        for (name, tags) in &sg.location_tags {
            let k = activities.index_of(name).ok_or_else(|| {
                Error::input(format!("{ctx}: location_tags names unknown activity `{name}`"))
            })?;
            location_tags[k] = tags.iter().cloned().collect();
        }

        subgroups.push(SubgroupSpec {
            name: sg.name,
            count: sg.count,
            travel_factor: sg.travel_factor,
            durations,
            distribution,
            location_tags,
            behaviour: sg.behaviour,
        });
    }
    if subgroups.is_empty() {
        return Err(Error::input("config defines no subgroups"));
    }

    // localities partition the location set; ids come from the CSV column
    let mut locality_of = BTreeMap::new();
    let mut localities: Vec<Locality> = Vec::new();
    let mut location_locality = Vec::with_capacity(locations.len());
    for (i, loc) in locations.iter().enumerate() {
        let idx = *locality_of.entry(loc.locality.clone()).or_insert_with(|| {
            localities.push(Locality {
                name: loc.locality.clone(),
                members: Vec::new(),
                centroid: (0.0, 0.0),
            });
            localities.len() - 1
        });
        localities[idx].members.push(i);
        location_locality.push(idx);
    }
    for locality in &mut localities {
        let n = locality.members.len() as f64;
        let (sx, sy) = locality
            .members
            .iter()
            .fold((0.0, 0.0), |(sx, sy), &i| (sx + locations[i].x, sy + locations[i].y));
        locality.centroid = (sx / n, sy / n);
    }

    // resolve M_{s,αk} from tags and enforce M = ∅ ⇔ δ ≡ 0
    let mut eligible = Vec::with_capacity(subgroups.len());
    for (s, sg) in subgroups.iter().enumerate() {
        let mut per_activity = Vec::with_capacity(k_count);
        for k in 0..k_count {
            let tags = &sg.location_tags[k];
            let locs: Vec<usize> = if tags.is_empty() {
                Vec::new()
            } else {
                locations
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| l.type_tags.iter().any(|t| tags.contains(t)))
                    .map(|(i, _)| i)
                    .collect()
            };
            let has_demand = (0..steps).any(|n| sg.distribution.value(k, n) > 0.0);
            if locs.is_empty() && has_demand {
                return Err(Error::input(format!(
                    "subgroup {} activity `{}` has a nonzero distribution but no eligible location \
                     (tags {:?} match nothing)",
                    subgroups[s].name,
                    activities.name(k),
                    tags
                )));
            }
            per_activity.push(locs);
        }
        eligible.push(per_activity);
    }

    Ok(ScenarioInputs {
        grid,
        activities,
        subgroups,
        locations,
        localities,
        location_locality,
        eligible,
        options: raw.options,
        seed: raw.seed,
        locations_file: raw.locations_file,
        refuges_file: raw.refuges_file,
    })
}

// --- feasibility report -----------------------------------------------------

/// Severity-tagged findings from [`validate_inputs`].
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Feasibility checks on loaded inputs: home capacity (hard errors) and
/// duration-truncation warnings.
pub fn validate_inputs(inputs: &ScenarioInputs) -> ValidationReport {
    let mut report = ValidationReport::default();

    let population = inputs.total_population();
    let mut union: BTreeSet<usize> = BTreeSet::new();
    for (s, sg) in inputs.subgroups.iter().enumerate() {
        let capacity: u64 = inputs.eligible[s][HOME_ACTIVITY]
            .iter()
            .map(|&i| inputs.locations[i].allocation as u64)
            .sum();
        if capacity < sg.count {
            report.errors.push(format!(
                "insufficient home capacity for subgroup {}: allocation {capacity} < {} agents",
                sg.name, sg.count
            ));
        }
        union.extend(inputs.eligible[s][HOME_ACTIVITY].iter().copied());
    }
    let total_capacity: u64 = union.iter().map(|&i| inputs.locations[i].allocation as u64).sum();
    if total_capacity < population {
        report.errors.push(format!(
            "insufficient home capacity: total allocation {total_capacity} over all home-mapped \
             locations < population {population}"
        ));
    }

    // a duration weight d leaves steps N-d+2..N unable to host a full run of
    // the activity; warn when start mass lands there
    for (s, sg) in inputs.subgroups.iter().enumerate() {
        let start = crate::schedule::build_start_matrix(&sg.distribution, &sg.durations);
        for k in 0..inputs.activities.len() {
            let d = sg.durations[k];
            if d <= 1 {
                continue;
            }
            for n in (inputs.grid.steps + 1).saturating_sub(d)..inputs.grid.steps {
                if start.xi[k][n] > COLUMN_SUM_TOLERANCE {
                    report.warnings.push(format!(
                        "subgroup {} activity `{}` starting at step {} cannot complete within the \
                         period (duration {d} steps)",
                        inputs.subgroups[s].name,
                        inputs.activities.name(k),
                        n + 1
                    ));
                    break;
                }
            }
        }
    }

    report
}
